use crate::constellation::ConstellationSnapshot;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::{MigrationContext, Placement, Slot};
use crate::scenario::Scenario;

use super::objective::{NormalizationBounds, ObjectiveWeights, RiskMode, Scales};
use super::state::EvalState;

/// Nearest-visible-satellite construction.
///
/// Users are taken in entry order. The ingress goes to the visible satellite
/// with the smallest access delay that can host it; each later position goes
/// to the satellite with the fewest ISL hops from the ingress that keeps
/// capacity, ISL load and the delay budget. Ties go to the lower satellite
/// index, then the lower instance index. If a user's chain cannot be
/// completed from one ingress the next one is tried.
pub fn greedy_place<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
) -> Result<Placement> {
    let ctx = MigrationContext::initial(sc);
    let scales = Scales::new(
        &ObjectiveWeights::resource_min(),
        &NormalizationBounds {
            cap_bar: T::one(),
            risk_bar: T::zero(),
            mig_bar: T::zero(),
        },
    );
    let mut st = EvalState::new(sc, snap, &ctx, scales, RiskMode::Exact);
    for fu in 0..sc.num_users() {
        place_user(&mut st, fu)?;
    }
    Ok(st.placement())
}

fn try_slot<T: Real>(st: &mut EvalState<'_, T>, e: usize, fu: usize, slot: Slot) -> bool {
    st.place(e, slot);
    if st.structurally_ok() && st.delay_ok(fu) {
        true
    } else {
        st.remove(e);
        false
    }
}

fn place_user<T: Real>(st: &mut EvalState<'_, T>, fu: usize) -> Result<()> {
    let sc = st.sc;
    let snap = st.snap;
    let range = sc.user_entries(fu);
    let vis = &snap.visibility[fu];
    let mut ingress: Vec<usize> = vis.visible.clone();
    ingress.sort_by(|&a, &b| {
        vis.access_delay_ms[a]
            .partial_cmp(&vis.access_delay_ms[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut deepest = 0;
    'ingress: for &s0 in &ingress {
        let first = range.start;
        if !(0..sc.instances_per_site).any(|i| try_slot(st, first, fu, Slot::new(i, s0))) {
            continue;
        }
        let mut order: Vec<(u32, usize)> = (0..sc.num_satellites)
            .filter_map(|s| snap.paths.hops(s0, s).map(|h| (h, s)))
            .collect();
        order.sort_unstable();
        for e in (first + 1)..range.end {
            let placed = order.iter().any(|&(_, s)| {
                (0..sc.instances_per_site).any(|i| try_slot(st, e, fu, Slot::new(i, s)))
            });
            if !placed {
                deepest = deepest.max(e - first);
                for k in (first..e).rev() {
                    st.remove(k);
                }
                continue 'ingress;
            }
        }
        return Ok(());
    }
    let (slice, user) = sc.user_of(fu);
    Err(Error::InfeasibleUser {
        slice,
        user,
        position: deepest,
    })
}

/// Backtracking variant of [`greedy_place`] used when the single pass strands
/// a user. Same candidate order, but any earlier entry may be revisited.
/// Gives up after `budget` slot trials and returns `None`.
pub(crate) fn backtrack_place<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    budget: u64,
) -> Option<Placement> {
    let ctx = MigrationContext::initial(sc);
    let scales = Scales::new(
        &ObjectiveWeights::resource_min(),
        &NormalizationBounds {
            cap_bar: T::one(),
            risk_bar: T::zero(),
            mig_bar: T::zero(),
        },
    );
    let mut st = EvalState::new(sc, snap, &ctx, scales, RiskMode::Exact);
    let entries = sc.entries();
    let n = entries.len();
    let candidates = |st: &EvalState<'_, T>, e: usize| -> Vec<Slot> {
        let fu = entries[e].flat_user;
        let vis = &snap.visibility[fu];
        let sats: Vec<usize> = if entries[e].position == 0 {
            let mut v = vis.visible.clone();
            v.sort_by(|&a, &b| {
                vis.access_delay_ms[a]
                    .partial_cmp(&vis.access_delay_ms[b])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            v
        } else {
            let s0 = st
                .slot(sc.user_entries(fu).start)
                .expect("ingress placed first")
                .satellite;
            let mut order: Vec<(u32, usize)> = (0..sc.num_satellites)
                .filter_map(|s| snap.paths.hops(s0, s).map(|h| (h, s)))
                .collect();
            order.sort_unstable();
            order.into_iter().map(|(_, s)| s).collect()
        };
        sats.into_iter()
            .flat_map(|s| (0..sc.instances_per_site).map(move |i| Slot::new(i, s)))
            .collect()
    };
    let mut stack: Vec<(Vec<Slot>, usize)> = Vec::with_capacity(n);
    if n == 0 {
        return Some(st.placement());
    }
    stack.push((candidates(&st, 0), 0));
    let mut trials = 0u64;
    while !stack.is_empty() {
        let e = stack.len() - 1;
        let (cands, next) = &mut stack[e];
        if st.slot(e).is_some() {
            st.remove(e);
        }
        let Some(&slot) = cands.get(*next) else {
            stack.pop();
            continue;
        };
        *next += 1;
        trials += 1;
        if trials > budget {
            return None;
        }
        st.place(e, slot);
        if !(st.structurally_ok() && st.delay_ok(entries[e].flat_user)) {
            continue;
        }
        if e + 1 == n {
            return Some(st.placement());
        }
        let c = candidates(&st, e + 1);
        stack.push((c, 0));
    }
    None
}
