use crate::constellation::ConstellationSnapshot;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::{validate, MigrationContext, Placement, Slot};
use crate::scenario::Scenario;

use super::objective::{objective, NormalizationBounds, ObjectiveWeights, RiskMode};

/// Default leaf cap for [`brute_force`].
pub const BRUTE_FORCE_LEAF_CAP: f64 = 1e7;

/// Exhaustive search over every `(instance, satellite)` per entry, scored by
/// the standalone validator and objective. Independent of the incremental
/// machinery the other solvers share, so it serves as their reference.
#[allow(clippy::too_many_arguments)]
pub fn brute_force<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    ctx: &MigrationContext,
    weights: &ObjectiveWeights<T>,
    norms: &NormalizationBounds<T>,
    mode: RiskMode,
    leaf_cap: f64,
) -> Result<(Placement, T)> {
    let n = sc.entries().len();
    let base = sc.instances_per_site * sc.num_satellites;
    let leaves = (base as f64).powi(n as i32);
    if leaves > leaf_cap {
        return Err(Error::SearchSpaceTooLarge {
            leaves,
            cap: leaf_cap,
        });
    }
    let decode = |d: usize| Slot::new(d / sc.num_satellites, d % sc.num_satellites);
    let mut digits = vec![0usize; n];
    let mut best: Option<(Placement, T)> = None;
    loop {
        let p = Placement::from_slots(digits.iter().map(|&d| Some(decode(d))).collect());
        if validate(&p, sc, snap).feasible() {
            let v = objective(&p, ctx, weights, norms, sc, mode);
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((p, v));
            }
        }
        // odometer, last entry fastest
        let mut k = n;
        loop {
            if k == 0 {
                return best.ok_or(Error::NoFeasiblePlacement);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < base {
                break;
            }
            digits[k] = 0;
        }
    }
}
