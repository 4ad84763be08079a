use std::cmp::Ordering;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::constellation::ConstellationSnapshot;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::{MigrationContext, Placement, Slot};
use crate::scenario::{RoutingModel, Scenario, VnfKind};

use super::objective::{objective, NormalizationBounds, ObjectiveWeights, RiskMode, Scales};
use super::state::EvalState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BnbConfig<T> {
    /// Relative optimality gap; a node is pruned once `bound >= best / (1 + gap)`.
    pub gap: T,
    /// Children entered before giving up; `Some(0)` returns the incumbent.
    pub node_budget: Option<u64>,
    pub time_budget_ms: Option<u64>,
}

impl<T: Real> Default for BnbConfig<T> {
    fn default() -> Self {
        Self {
            gap: T::lit(0.005),
            node_budget: Some(5_000),
            time_budget_ms: None,
        }
    }
}

impl<T: Real> BnbConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap >= T::zero()) {
            return Err(Error::Config("optimality gap must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOutcome<T> {
    pub placement: Placement,
    pub objective: T,
    pub nodes: u64,
    /// `(best - lower bound) / best`, clamped at zero.
    pub gap: T,
    /// The search space was closed rather than cut by a budget.
    pub completed: bool,
}

#[derive(Clone, Copy)]
struct Child<T> {
    bound: T,
    /// Satellite load with the child placed; breaks ties so equal-cost
    /// choices spread over the constellation.
    load: T,
    slot: Slot,
}

struct Frame<T> {
    entry: usize,
    children: Vec<Child<T>>,
    next: usize,
    current: Option<T>,
}

fn cmp_child<T: Real>(a: &Child<T>, b: &Child<T>) -> Ordering {
    a.bound
        .partial_cmp(&b.bound)
        .unwrap_or(Ordering::Equal)
        .then(a.load.partial_cmp(&b.load).unwrap_or(Ordering::Equal))
        .then(a.slot.satellite.cmp(&b.slot.satellite))
        .then(a.slot.instance.cmp(&b.slot.instance))
}

/// Feasible children of entry `e`, best bound first.
///
/// Instances at one `(f, s)` are interchangeable unless their costs differ or
/// the previous epoch used that site, so only the open ones plus the lowest
/// unopened index are tried there.
fn expand<T: Real>(st: &mut EvalState<'_, T>, e: usize, prev_site: &[bool]) -> Vec<Child<T>> {
    let sc = st.sc;
    let snap = st.snap;
    let en = sc.entries()[e];
    let fu = en.flat_user;
    let sats: Vec<usize> = if en.position == 0 {
        snap.visibility[fu].visible.clone()
    } else if sc.routing == RoutingModel::SingleHop {
        let p = st
            .slot(e - 1)
            .expect("entries are fixed in order")
            .satellite;
        let mut v = snap.neighborhoods[p].clone();
        v.push(p);
        v.sort_unstable();
        v
    } else {
        (0..sc.num_satellites).collect()
    };
    let f = en.vnf;
    let mut out = Vec::new();
    for s in sats {
        let all = sc.is_heterogeneous(f, s) || prev_site[f.index() * sc.num_satellites + s];
        let mut unopened_tried = false;
        for i in 0..sc.instances_per_site {
            if !all && !st.instance_open(f, i, s) {
                if unopened_tried {
                    continue;
                }
                unopened_tried = true;
            }
            let slot = Slot::new(i, s);
            st.place(e, slot);
            if st.structurally_ok() && st.delay_ok(fu) {
                out.push(Child {
                    bound: st.bound(),
                    load: st.load(s),
                    slot,
                });
            }
            st.remove(e);
        }
    }
    out.sort_by(cmp_child);
    out
}

/// Depth-first branch and bound over entries in index order, warm-started
/// from a feasible `incumbent`.
#[allow(clippy::too_many_arguments)]
pub fn branch_and_bound<T: Real>(
    incumbent: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    ctx: &MigrationContext,
    weights: &ObjectiveWeights<T>,
    norms: &NormalizationBounds<T>,
    mode: RiskMode,
    cfg: &BnbConfig<T>,
) -> Result<BnbOutcome<T>> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = cfg
        .time_budget_ms
        .map(|ms| start + Duration::from_millis(ms));
    let mut best_p = incumbent.clone();
    let mut best = objective(incumbent, ctx, weights, norms, sc, mode);
    let n_entries = sc.entries().len();
    if cfg.node_budget == Some(0) || n_entries == 0 {
        return Ok(BnbOutcome {
            placement: best_p,
            objective: best,
            nodes: 0,
            gap: T::zero(),
            completed: n_entries == 0,
        });
    }

    let mut prev_site = vec![false; VnfKind::COUNT * sc.num_satellites];
    if let Some(prev) = ctx.prev() {
        for (e, s) in prev.assigned() {
            prev_site[sc.entries()[e].vnf.index() * sc.num_satellites + s.satellite] = true;
        }
    }

    let scales = Scales::new(weights, norms);
    let mut st = EvalState::new(sc, snap, ctx, scales, mode);
    let one = T::one();
    let mut nodes = 0u64;
    let mut pruned_min = T::infinity();
    let children = expand(&mut st, 0, &prev_site);
    let mut stack = vec![Frame {
        entry: 0,
        children,
        next: 0,
        current: None,
    }];
    let mut completed = true;

    'search: while let Some(top) = stack.last_mut() {
        if top.current.take().is_some() {
            st.remove(top.entry);
        }
        let thr = best / (one + cfg.gap);
        let Some(&Child { bound: b, slot, .. }) = top.children.get(top.next) else {
            stack.pop();
            continue;
        };
        if b >= thr {
            pruned_min = pruned_min.min(b);
            top.next = top.children.len();
            continue;
        }
        if cfg.node_budget.is_some_and(|n| nodes >= n)
            || deadline.is_some_and(|d| Instant::now() >= d)
        {
            completed = false;
            break 'search;
        }
        top.next += 1;
        nodes += 1;
        let e = top.entry;
        st.place(e, slot);
        top.current = Some(b);
        if e + 1 == n_entries {
            let p = st.placement();
            if st.objective() < best {
                let exact = objective(&p, ctx, weights, norms, sc, mode);
                if exact < best {
                    best = exact;
                    best_p = p;
                }
            }
        } else {
            let children = expand(&mut st, e + 1, &prev_site);
            stack.push(Frame {
                entry: e + 1,
                children,
                next: 0,
                current: None,
            });
        }
    }

    // Lower bound over everything not yet closed.
    let mut lb = pruned_min.min(best);
    for fr in &stack {
        if let Some(c) = fr.current {
            lb = lb.min(c);
        }
        if let Some(c) = fr.children.get(fr.next) {
            lb = lb.min(c.bound);
        }
    }
    let gap = if best > T::zero() {
        ((best - lb) / best).max(T::zero())
    } else {
        T::zero()
    };
    Ok(BnbOutcome {
        placement: best_p,
        objective: best,
        nodes,
        gap,
        completed,
    })
}
