//! Incremental bookkeeping shared by the greedy, annealing and
//! branch-and-bound stages.

use crate::constellation::ConstellationSnapshot;
use crate::num::Real;
use crate::placement::{chain_delay, route, satellite_load, MigrationContext, Placement, Slot};
use crate::scenario::{RiskCounting, Scenario, VnfKind};

use super::objective::{RiskMode, Scales};

const F: usize = VnfKind::COUNT;

pub(crate) struct EvalState<'a, T> {
    pub sc: &'a Scenario<T>,
    pub snap: &'a ConstellationSnapshot<T>,
    pub ctx: &'a MigrationContext,
    mode: RiskMode,
    scales: Scales<T>,
    ns: usize,
    nsat: usize,
    slots: Vec<Option<Slot>>,
    inst_assign: Vec<u32>,
    /// `[instance][slice]` occupancy under the scenario's counting rule.
    inst_slice: Vec<u32>,
    /// `[a][b]` flow units for `a < b`.
    flows: Vec<u32>,
    over_links: usize,
    unroutable: usize,
    sat_over: Vec<bool>,
    over_sats: usize,
    cap: T,
    risk_ex: T,
    risk_lb: T,
    mig: T,
    // completion-bound bookkeeping, indexed `[slice][f]`
    remaining: Vec<u32>,
    open_f: [u32; F],
    pure: Vec<u32>,
    present: Vec<u32>,
    user_present_rem: Vec<u32>,
    a_min: [T; F],
    b_min: [T; F],
    tau_min: [T; F],
    w_min: Vec<T>,
}

impl<'a, T: Real> EvalState<'a, T> {
    pub fn new(
        sc: &'a Scenario<T>,
        snap: &'a ConstellationSnapshot<T>,
        ctx: &'a MigrationContext,
        scales: Scales<T>,
        mode: RiskMode,
    ) -> Self {
        let ns = sc.slices.len();
        let nsat = sc.num_satellites;
        let mut remaining = vec![0u32; ns * F];
        for e in sc.entries() {
            remaining[e.slice * F + e.vnf.index()] += 1;
        }
        let mut a_min = [T::zero(); F];
        let mut b_min = [T::zero(); F];
        let mut tau_min = [T::zero(); F];
        for f in VnfKind::ALL {
            a_min[f.index()] = sc.min_over_sites(f, |sc, f, i, s| sc.per_user_cpu(f, i, s));
            b_min[f.index()] = sc.min_over_sites(f, |sc, f, i, s| sc.activation_cpu(f, i, s));
            tau_min[f.index()] = sc.min_over_sites(f, |sc, f, i, s| sc.proc_delay_ms(f, i, s));
        }
        let mut w_min = vec![T::infinity(); ns * F];
        for n in 0..ns {
            for f in VnfKind::ALL {
                for m in 0..ns {
                    if m != n && sc.slices[m].occurrences(f) > 0 {
                        let g = n * F + f.index();
                        w_min[g] = w_min[g].min(sc.weight(n, m, f));
                    }
                }
            }
        }
        Self {
            sc,
            snap,
            ctx,
            mode,
            scales,
            ns,
            nsat,
            slots: vec![None; sc.entries().len()],
            inst_assign: vec![0; sc.num_instances()],
            inst_slice: vec![0; sc.num_instances() * ns],
            flows: vec![0; nsat * nsat],
            over_links: 0,
            unroutable: 0,
            sat_over: vec![false; nsat],
            over_sats: 0,
            cap: T::zero(),
            risk_ex: T::zero(),
            risk_lb: T::zero(),
            mig: T::zero(),
            remaining,
            open_f: [0; F],
            pure: vec![0; ns * F],
            present: vec![0; ns * F],
            user_present_rem: vec![0; ns * F],
            a_min,
            b_min,
            tau_min,
            w_min,
        }
    }

    pub fn from_placement(
        sc: &'a Scenario<T>,
        snap: &'a ConstellationSnapshot<T>,
        ctx: &'a MigrationContext,
        scales: Scales<T>,
        mode: RiskMode,
        p: &Placement,
    ) -> Self {
        let mut st = Self::new(sc, snap, ctx, scales, mode);
        for (e, s) in p.assigned() {
            st.place(e, s);
        }
        st
    }

    pub fn placement(&self) -> Placement {
        Placement::from_slots(self.slots.clone())
    }

    #[inline]
    pub fn slot(&self, e: usize) -> Option<Slot> {
        self.slots[e]
    }

    #[inline]
    pub fn instance_open(&self, kind: VnfKind, instance: usize, sat: usize) -> bool {
        self.inst_assign[self.sc.instance_id(kind, instance, sat)] > 0
    }

    /// No capacity, ISL or routing violation among the current assignments.
    #[inline]
    pub fn structurally_ok(&self) -> bool {
        self.over_sats == 0 && self.over_links == 0 && self.unroutable == 0
    }

    pub fn load(&self, sat: usize) -> T {
        satellite_load(self.sc, &self.inst_assign, sat)
    }

    #[inline]
    pub fn risk(&self) -> T {
        match self.mode {
            RiskMode::Exact => self.risk_ex,
            RiskMode::CoarseLb => self.risk_lb,
        }
    }

    /// Running `(CapUse, Risk, Mig)`.
    #[inline]
    pub fn objective(&self) -> T {
        self.scales.combine(self.cap, self.risk(), self.mig)
    }

    /// Objective of the fixed part plus an optimistic completion of every
    /// unassigned entry.
    pub fn bound(&self) -> T {
        let mut b = self.objective();
        for n in 0..self.ns {
            for f in 0..F {
                let g = n * F + f;
                let r = self.remaining[g];
                if r == 0 {
                    continue;
                }
                b += self.scales.cap * self.a_min[f] * T::from_count(r as usize);
                let free = match self.mode {
                    RiskMode::Exact => self.pure[g] > 0 || self.user_present_rem[g] > 0,
                    RiskMode::CoarseLb => self.present[g] > 0,
                };
                if free {
                    continue;
                }
                let mut t = self.scales.cap * self.b_min[f];
                if self.open_f[f] > 0 && self.w_min[g].is_finite() {
                    t = t.min(self.scales.risk * self.w_min[g]);
                }
                b += t;
            }
        }
        b
    }

    pub fn place(&mut self, e: usize, slot: Slot) {
        debug_assert!(self.slots[e].is_none());
        let sc = self.sc;
        let en = sc.entries()[e];
        let f = en.vnf;
        let g = en.slice * F + f.index();
        let x = sc.instance_id(f, slot.instance, slot.satellite);
        let up_before = self.user_present_contrib(en.flat_user, f);
        let owner_before = self.sole_owner(x);
        let shared_with_self = self.user_on_instance(en.flat_user, e, f, slot);

        if self.inst_assign[x] == 0 {
            self.cap += sc.activation_cpu(f, slot.instance, slot.satellite);
            self.open_f[f.index()] += 1;
        }
        self.cap += sc.per_user_cpu(f, slot.instance, slot.satellite);
        self.inst_assign[x] += 1;
        self.slots[e] = Some(slot);
        if sc.risk_counting == RiskCounting::Assignment || !shared_with_self {
            self.inc_slice(x, en.slice, f);
        }
        self.update_owner(x, f, owner_before);
        self.remaining[g] -= 1;
        let up_after = self.user_present_contrib(en.flat_user, f);
        self.user_present_rem[g] = self.user_present_rem[g] + up_after - up_before;
        if self.ctx.pi(e) && self.ctx.prev_slot(e) != Some(slot) {
            self.mig += sc.migration_disruption(f);
        }
        self.update_routes(e, true);
        self.refresh_sat(slot.satellite);
    }

    pub fn remove(&mut self, e: usize) -> Slot {
        let slot = self.slots[e].expect("remove of an unassigned entry");
        let sc = self.sc;
        let en = sc.entries()[e];
        let f = en.vnf;
        let g = en.slice * F + f.index();
        let x = sc.instance_id(f, slot.instance, slot.satellite);
        let up_before = self.user_present_contrib(en.flat_user, f);
        let owner_before = self.sole_owner(x);

        self.update_routes(e, false);
        if self.ctx.pi(e) && self.ctx.prev_slot(e) != Some(slot) {
            self.mig -= sc.migration_disruption(f);
        }
        self.slots[e] = None;
        let shared_with_self = self.user_on_instance(en.flat_user, e, f, slot);
        if sc.risk_counting == RiskCounting::Assignment || !shared_with_self {
            self.dec_slice(x, en.slice, f);
        }
        self.inst_assign[x] -= 1;
        self.cap -= sc.per_user_cpu(f, slot.instance, slot.satellite);
        if self.inst_assign[x] == 0 {
            self.cap -= sc.activation_cpu(f, slot.instance, slot.satellite);
            self.open_f[f.index()] -= 1;
        }
        self.update_owner(x, f, owner_before);
        self.remaining[g] += 1;
        let up_after = self.user_present_contrib(en.flat_user, f);
        self.user_present_rem[g] = self.user_present_rem[g] + up_after - up_before;
        self.refresh_sat(slot.satellite);
        slot
    }

    /// Another position of the same user already sits on this instance.
    fn user_on_instance(&self, fu: usize, e: usize, f: VnfKind, slot: Slot) -> bool {
        self.sc
            .user_entries(fu)
            .any(|e2| e2 != e && self.sc.entries()[e2].vnf == f && self.slots[e2] == Some(slot))
    }

    fn user_present_contrib(&self, fu: usize, f: VnfKind) -> u32 {
        if self.sc.risk_counting != RiskCounting::DistinctUser {
            return 0;
        }
        let (mut assigned, mut open) = (0u32, 0u32);
        for e in self.sc.user_entries(fu) {
            if self.sc.entries()[e].vnf == f {
                if self.slots[e].is_some() {
                    assigned += 1;
                } else {
                    open += 1;
                }
            }
        }
        if assigned > 0 {
            open
        } else {
            0
        }
    }

    fn sole_owner(&self, x: usize) -> Option<usize> {
        let row = &self.inst_slice[x * self.ns..(x + 1) * self.ns];
        let mut owner = None;
        for (n, &c) in row.iter().enumerate() {
            if c > 0 {
                if owner.is_some() {
                    return None;
                }
                owner = Some(n);
            }
        }
        owner
    }

    fn update_owner(&mut self, x: usize, f: VnfKind, before: Option<usize>) {
        let after = self.sole_owner(x);
        if before != after {
            if let Some(o) = before {
                self.pure[o * F + f.index()] -= 1;
            }
            if let Some(o) = after {
                self.pure[o * F + f.index()] += 1;
            }
        }
    }

    fn inc_slice(&mut self, x: usize, n: usize, f: VnfKind) {
        let base = x * self.ns;
        let was_absent = self.inst_slice[base + n] == 0;
        let (mut d_ex, mut d_lb) = (T::zero(), T::zero());
        for m in 0..self.ns {
            let c = self.inst_slice[base + m];
            if m != n && c > 0 {
                let w = self.sc.weight(n, m, f);
                d_ex += w * T::from_count(c as usize);
                if was_absent {
                    d_lb += w;
                }
            }
        }
        self.inst_slice[base + n] += 1;
        if was_absent {
            self.present[n * F + f.index()] += 1;
        }
        self.risk_ex += d_ex;
        self.risk_lb += d_lb;
    }

    fn dec_slice(&mut self, x: usize, n: usize, f: VnfKind) {
        let base = x * self.ns;
        self.inst_slice[base + n] -= 1;
        let now_absent = self.inst_slice[base + n] == 0;
        let (mut d_ex, mut d_lb) = (T::zero(), T::zero());
        for m in 0..self.ns {
            let c = self.inst_slice[base + m];
            if m != n && c > 0 {
                let w = self.sc.weight(n, m, f);
                d_ex += w * T::from_count(c as usize);
                if now_absent {
                    d_lb += w;
                }
            }
        }
        if now_absent {
            self.present[n * F + f.index()] -= 1;
        }
        self.risk_ex -= d_ex;
        self.risk_lb -= d_lb;
    }

    fn refresh_sat(&mut self, s: usize) {
        let over = self.load(s) > self.sc.capacity_cpu[s];
        if over != self.sat_over[s] {
            self.sat_over[s] = over;
            if over {
                self.over_sats += 1;
            } else {
                self.over_sats -= 1;
            }
        }
    }

    /// Adds or removes the routes between entry `e` and its assigned chain neighbours.
    fn update_routes(&mut self, e: usize, add: bool) {
        let en = self.sc.entries()[e];
        let len = self.sc.slices[en.slice].chain.len();
        let me = self.slots[e]
            .expect("routes of an unassigned entry")
            .satellite;
        if en.position > 0 {
            if let Some(p) = self.slots[e - 1] {
                self.route_flow(p.satellite, me, add);
            }
        }
        if en.position + 1 < len {
            if let Some(n) = self.slots[e + 1] {
                self.route_flow(me, n.satellite, add);
            }
        }
    }

    fn route_flow(&mut self, a: usize, b: usize, add: bool) {
        let (sc, snap, nsat) = (self.sc, self.snap, self.nsat);
        let cap = sc.isl_capacity;
        let flows = &mut self.flows;
        let over = &mut self.over_links;
        let ok = route(sc, snap, a, b, |u, v| {
            let c = &mut flows[u * nsat + v];
            if add {
                *c += 1;
                if *c == cap + 1 {
                    *over += 1;
                }
            } else {
                if *c == cap + 1 {
                    *over -= 1;
                }
                *c -= 1;
            }
        });
        if !ok {
            if add {
                self.unroutable += 1;
            } else {
                self.unroutable -= 1;
            }
        }
    }

    /// Delay check for one user: exact once complete, otherwise an optimistic
    /// completion of the assigned prefix.
    pub fn delay_ok(&self, fu: usize) -> bool {
        let sc = self.sc;
        let budget = sc.user(fu).delay_budget_ms;
        let range = sc.user_entries(fu);
        if range.clone().all(|e| self.slots[e].is_some()) {
            return match chain_delay(sc, self.snap, fu, |e| self.slots[e]) {
                Ok(d) => d.total() <= budget,
                Err(_) => false,
            };
        }
        let mut processing = T::zero();
        let mut propagation = T::zero();
        let mut prev: Option<usize> = None;
        let mut access = T::zero();
        for e in range {
            let f = sc.entries()[e].vnf;
            match self.slots[e] {
                Some(s) => {
                    processing += sc.proc_delay_ms(f, s.instance, s.satellite);
                    if sc.entries()[e].position == 0 {
                        access = self.snap.visibility[fu].access_delay_ms[s.satellite];
                    }
                    if let Some(p) = prev {
                        match crate::placement::hop_delay(sc, self.snap, p, s.satellite) {
                            Some(d) => propagation += d,
                            None => return false,
                        }
                    }
                    prev = Some(s.satellite);
                }
                None => {
                    processing += self.tau_min[f.index()];
                    prev = None;
                }
            }
        }
        access + processing + propagation <= budget
    }

    /// Exact delay of a complete user with entry `e` moved to `slot`.
    pub fn delay_ok_with(&self, fu: usize, e: usize, slot: Slot) -> bool {
        let budget = self.sc.user(fu).delay_budget_ms;
        match chain_delay(self.sc, self.snap, fu, |k| {
            if k == e {
                Some(slot)
            } else {
                self.slots[k]
            }
        }) {
            Ok(d) => d.total() <= budget,
            Err(_) => false,
        }
    }

    #[cfg(test)]
    pub fn flows_snapshot(&self) -> std::collections::BTreeMap<(usize, usize), u32> {
        let mut m = std::collections::BTreeMap::new();
        for a in 0..self.nsat {
            for b in 0..self.nsat {
                let c = self.flows[a * self.nsat + b];
                if c > 0 {
                    m.insert((a, b), c);
                }
            }
        }
        m
    }
}
