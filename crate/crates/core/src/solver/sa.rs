use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::ConstellationSnapshot;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::{MigrationContext, Placement, Slot};
use crate::scenario::Scenario;

use super::objective::{objective, NormalizationBounds, ObjectiveWeights, RiskMode, Scales};
use super::state::EvalState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaParams<T> {
    pub t0: T,
    pub t_end: T,
    /// K
    pub iterations: u64,
    pub seed: u64,
    /// Independent chains from the same start; the best one wins.
    pub restarts: u32,
    /// Also draw non-ingress candidates from the user's visibility set.
    pub restrict_to_visible: bool,
}

impl<T: Real> Default for SaParams<T> {
    fn default() -> Self {
        Self {
            t0: T::one(),
            t_end: T::lit(0.01),
            iterations: 50_000,
            seed: 0,
            restarts: 1,
            restrict_to_visible: false,
        }
    }
}

impl<T: Real> SaParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > self.t_end && self.t_end > T::zero()) {
            return Err(Error::Config("annealing needs t0 > t_end > 0".into()));
        }
        if self.iterations < 1 || self.restarts < 1 {
            return Err(Error::Config(
                "annealing needs iterations >= 1 and restarts >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Geometric schedule `T_k = T0·(T_end/T0)^(k/K)`.
pub fn temperature<T: Real>(p: &SaParams<T>, k: u64) -> T {
    let frac = T::from_u64(k).unwrap() / T::from_u64(p.iterations).unwrap();
    p.t0 * (p.t_end / p.t0).powf(frac)
}

/// Metropolis probability of accepting a change of `delta` at `temp`.
pub fn acceptance_probability<T: Real>(delta: T, temp: T) -> T {
    if delta <= T::zero() {
        T::one()
    } else {
        (-delta / temp).exp()
    }
}

/// Draws one uniform number only when `delta > 0`.
pub fn metropolis_accept<T: Real, R: Rng>(delta: T, temp: T, rng: &mut R) -> bool {
    delta <= T::zero() || T::lit(rng.gen::<f64>()) < acceptance_probability(delta, temp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaOutcome<T> {
    pub placement: Placement,
    pub objective: T,
    pub accepted: u64,
}

/// Random single-entry move: entry, candidate satellite, instance, in that
/// draw order. `None` if the entry has no candidate or the move is a no-op.
fn propose<T: Real>(
    st: &EvalState<'_, T>,
    rng: &mut ChaCha8Rng,
    restrict: bool,
) -> Option<(usize, Slot, Slot)> {
    let sc = st.sc;
    let e = rng.gen_range(0..sc.entries().len());
    let en = sc.entries()[e];
    let sat = if en.position == 0 || restrict {
        let vis = &st.snap.visibility[en.flat_user].visible;
        if vis.is_empty() {
            return None;
        }
        vis[rng.gen_range(0..vis.len())]
    } else {
        rng.gen_range(0..sc.num_satellites)
    };
    let inst = rng.gen_range(0..sc.instances_per_site);
    let old = st.slot(e)?;
    let new = Slot::new(inst, sat);
    (new != old).then_some((e, old, new))
}

/// Applies a proposed move if it keeps the placement feasible.
fn apply<T: Real>(st: &mut EvalState<'_, T>, e: usize, old: Slot, new: Slot) -> bool {
    let fu = st.sc.entries()[e].flat_user;
    if !st.delay_ok_with(fu, e, new) {
        return false;
    }
    st.remove(e);
    st.place(e, new);
    if st.structurally_ok() {
        true
    } else {
        st.remove(e);
        st.place(e, old);
        false
    }
}

#[allow(clippy::too_many_arguments)]
fn run_chain<T: Real>(
    initial: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    ctx: &MigrationContext,
    scales: Scales<T>,
    mode: RiskMode,
    params: &SaParams<T>,
    stream: u64,
) -> SaOutcome<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(stream);
    let mut st = EvalState::from_placement(sc, snap, ctx, scales, mode, initial);
    let mut cur = st.objective();
    let mut best = cur;
    let mut best_p = initial.clone();
    let mut accepted = 0;
    for k in 0..params.iterations {
        let temp = temperature(params, k);
        let Some((e, old, new)) = propose(&st, &mut rng, params.restrict_to_visible) else {
            continue;
        };
        if !apply(&mut st, e, old, new) {
            continue;
        }
        let next = st.objective();
        if metropolis_accept(next - cur, temp, &mut rng) {
            cur = next;
            accepted += 1;
            if cur < best {
                best = cur;
                best_p = st.placement();
            }
        } else {
            st.remove(e);
            st.place(e, old);
        }
    }
    SaOutcome {
        placement: best_p,
        objective: best,
        accepted,
    }
}

/// Simulated annealing from a feasible start; returns the best placement seen.
///
/// With `restarts > 1` the chains run on separate threads with streams
/// `0..restarts` of the seed; the lowest objective wins, ties to the lower stream.
#[allow(clippy::too_many_arguments)]
pub fn sa_optimize<T: Real>(
    initial: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    ctx: &MigrationContext,
    weights: &ObjectiveWeights<T>,
    norms: &NormalizationBounds<T>,
    params: &SaParams<T>,
    mode: RiskMode,
) -> Result<SaOutcome<T>> {
    params.validate()?;
    let scales = Scales::new(weights, norms);
    let chains: Vec<SaOutcome<T>> = if params.restarts == 1 {
        vec![run_chain(initial, sc, snap, ctx, scales, mode, params, 0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..params.restarts as u64)
                .map(|r| {
                    s.spawn(move || run_chain(initial, sc, snap, ctx, scales, mode, params, r))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("annealing chain panicked"))
                .collect()
        })
    };
    let mut best = None::<SaOutcome<T>>;
    for c in chains {
        if best.as_ref().is_none_or(|b| c.objective < b.objective) {
            best = Some(c);
        }
    }
    let mut out = best.expect("at least one chain");
    out.objective = objective(&out.placement, ctx, weights, norms, sc, mode);
    Ok(out)
}

/// Applies `moves` random feasible moves from `initial` and returns the
/// largest gap between the incremental objective change and a full
/// recomputation.
#[allow(clippy::too_many_arguments)]
pub fn audit_incremental_deltas<T: Real>(
    initial: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    ctx: &MigrationContext,
    weights: &ObjectiveWeights<T>,
    norms: &NormalizationBounds<T>,
    mode: RiskMode,
    moves: usize,
    seed: u64,
) -> (usize, f64) {
    let scales = Scales::new(weights, norms);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = EvalState::from_placement(sc, snap, ctx, scales, mode, initial);
    let mut full_before = objective(initial, ctx, weights, norms, sc, mode);
    let (mut checked, mut worst) = (0usize, 0.0f64);
    let mut attempts = 0;
    while checked < moves && attempts < moves * 100 {
        attempts += 1;
        let before = st.objective();
        let Some((e, old, new)) = propose(&st, &mut rng, false) else {
            continue;
        };
        if !apply(&mut st, e, old, new) {
            continue;
        }
        let inc = st.objective() - before;
        let full_after = objective(&st.placement(), ctx, weights, norms, sc, mode);
        worst = worst.max((inc - (full_after - full_before)).as_f64().abs());
        full_before = full_after;
        checked += 1;
    }
    (checked, worst)
}
