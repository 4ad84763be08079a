//! Cross-slice co-location risk: exact user-pair risk and the coarse
//! slice-level bounds.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::Placement;
use crate::scenario::{RiskCounting, Scenario};

/// Per-instance, per-slice occupancy counts.
///
/// Under [`RiskCounting::DistinctUser`] a user holding several positions on
/// one instance is counted once; under [`RiskCounting::Assignment`] every
/// position counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoLocationTally {
    num_slices: usize,
    counts: Vec<u32>,
}

impl CoLocationTally {
    pub fn build<T: Real>(p: &Placement, sc: &Scenario<T>) -> Self {
        let ns = sc.slices.len();
        let mut counts = vec![0u32; sc.num_instances() * ns];
        let mut seen: Vec<usize> = Vec::with_capacity(4);
        for fu in 0..sc.num_users() {
            seen.clear();
            for e in sc.user_entries(fu) {
                let Some(s) = p.get(e) else { continue };
                if s.instance >= sc.instances_per_site || s.satellite >= sc.num_satellites {
                    continue;
                }
                let en = &sc.entries()[e];
                let id = sc.instance_id(en.vnf, s.instance, s.satellite);
                if sc.risk_counting == RiskCounting::DistinctUser {
                    if seen.contains(&id) {
                        continue;
                    }
                    seen.push(id);
                }
                counts[id * ns + en.slice] += 1;
            }
        }
        Self {
            num_slices: ns,
            counts,
        }
    }

    #[inline]
    pub fn count(&self, instance: usize, slice: usize) -> u32 {
        self.counts[instance * self.num_slices + slice]
    }

    /// z: some user of `slice` uses the instance.
    #[inline]
    pub fn present(&self, instance: usize, slice: usize) -> bool {
        self.count(instance, slice) > 0
    }

    /// y: both slices use the instance.
    #[inline]
    pub fn pair_present(&self, instance: usize, a: usize, b: usize) -> bool {
        self.present(instance, a) && self.present(instance, b)
    }

    pub fn num_instances(&self) -> usize {
        self.counts.len() / self.num_slices.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskTriple<T> {
    pub lb: T,
    pub exact: T,
    pub ub: T,
}

/// Upper-bound multiplicity of slice `n` on one instance of `kind`.
pub(crate) fn ub_count<T: Real>(
    sc: &Scenario<T>,
    n: usize,
    kind: crate::scenario::VnfKind,
) -> usize {
    let users = sc.slices[n].users.len();
    match sc.risk_counting {
        RiskCounting::DistinctUser => users,
        RiskCounting::Assignment => users * sc.slices[n].occurrences(kind),
    }
}

fn accumulate<T: Real>(
    sc: &Scenario<T>,
    tally: &CoLocationTally,
    mut term: impl FnMut(T, u32, u32, usize, usize, crate::scenario::VnfKind),
) {
    let ns = sc.slices.len();
    for id in 0..tally.num_instances() {
        let (kind, _, _) = sc.instance_parts(id);
        for a in 0..ns {
            let ca = tally.count(id, a);
            if ca == 0 {
                continue;
            }
            for b in (a + 1)..ns {
                let cb = tally.count(id, b);
                if cb > 0 {
                    term(sc.weight(a, b, kind), ca, cb, a, b, kind);
                }
            }
        }
    }
}

/// Sum over slice pairs and shared instances of `w · cnt_n · cnt_n'`.
pub fn exact_risk<T: Real>(p: &Placement, sc: &Scenario<T>) -> T {
    let tally = CoLocationTally::build(p, sc);
    let mut total = T::zero();
    accumulate(sc, &tally, |w, ca, cb, _, _, _| {
        total += w * T::from_count(ca as usize * cb as usize)
    });
    total
}

/// `(lb, ub)`: `Σ w·y` and `Σ |U_n|·|U_n'|·w·y`.
pub fn coarse_risk<T: Real>(p: &Placement, sc: &Scenario<T>) -> (T, T) {
    let tally = CoLocationTally::build(p, sc);
    coarse_from_tally(sc, &tally)
}

fn coarse_from_tally<T: Real>(sc: &Scenario<T>, tally: &CoLocationTally) -> (T, T) {
    let (mut lb, mut ub) = (T::zero(), T::zero());
    accumulate(sc, tally, |w, _, _, a, b, kind| {
        lb += w;
        ub += w * T::from_count(ub_count(sc, a, kind) * ub_count(sc, b, kind));
    });
    (lb, ub)
}

/// All three risk values; fails if the sandwich `lb <= exact <= ub` breaks.
pub fn risk_triple<T: Real>(p: &Placement, sc: &Scenario<T>) -> Result<RiskTriple<T>> {
    let tally = CoLocationTally::build(p, sc);
    let mut exact = T::zero();
    accumulate(sc, &tally, |w, ca, cb, _, _, _| {
        exact += w * T::from_count(ca as usize * cb as usize)
    });
    let (lb, ub) = coarse_from_tally(sc, &tally);
    if lb <= exact && exact <= ub {
        Ok(RiskTriple { lb, exact, ub })
    } else {
        Err(Error::Sandwich {
            lb: lb.as_f64(),
            exact: exact.as_f64(),
            ub: ub.as_f64(),
        })
    }
}
