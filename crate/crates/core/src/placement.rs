//! Placement state, feasibility checks and migration accounting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constellation::ConstellationSnapshot;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::{RoutingModel, Scenario, VnfKind};

/// Where one chain position runs: instance index (0-based) on a satellite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub instance: usize,
    pub satellite: usize,
}

impl Slot {
    pub fn new(instance: usize, satellite: usize) -> Self {
        Self {
            instance,
            satellite,
        }
    }
}

/// Assignment of every scenario entry (see [`Scenario::entries`]) to a slot.
///
/// One slot per entry by construction, so uniqueness can only fail through
/// missing assignments. Activations are derived from the assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Placement {
    slots: Vec<Option<Slot>>,
}

impl Placement {
    pub fn empty<T: Real>(sc: &Scenario<T>) -> Self {
        Self {
            slots: vec![None; sc.entries().len()],
        }
    }

    pub fn from_slots(slots: Vec<Option<Slot>>) -> Self {
        Self { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    #[inline]
    pub fn get(&self, entry: usize) -> Option<Slot> {
        self.slots.get(entry).copied().flatten()
    }

    #[inline]
    pub fn set(&mut self, entry: usize, slot: Option<Slot>) {
        self.slots[entry] = slot;
    }

    #[inline]
    pub fn assign(&mut self, entry: usize, slot: Slot) {
        self.slots[entry] = Some(slot);
    }

    pub fn slots(&self) -> &[Option<Slot>] {
        &self.slots
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    pub fn assigned(&self) -> impl Iterator<Item = (usize, Slot)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(e, s)| s.map(|s| (e, s)))
    }

    /// Clears every position of one user.
    pub fn remove_user<T: Real>(&mut self, sc: &Scenario<T>, flat_user: usize) {
        for e in sc.user_entries(flat_user) {
            self.slots[e] = None;
        }
    }

    pub(crate) fn in_range<T: Real>(&self, sc: &Scenario<T>, entry: usize) -> Option<Slot> {
        self.get(entry)
            .filter(|s| s.instance < sc.instances_per_site && s.satellite < sc.num_satellites)
    }

    /// Assignment count per dense instance id; out-of-range slots are skipped.
    pub fn instance_counts<T: Real>(&self, sc: &Scenario<T>) -> Vec<u32> {
        let mut cnt = vec![0u32; sc.num_instances()];
        for (e, entry) in sc.entries().iter().enumerate() {
            if let Some(s) = self.in_range(sc, e) {
                cnt[sc.instance_id(entry.vnf, s.instance, s.satellite)] += 1;
            }
        }
        cnt
    }

    /// Active instances `(f, i, s)` in dense-id order.
    pub fn activations<T: Real>(&self, sc: &Scenario<T>) -> Vec<(VnfKind, usize, usize)> {
        self.instance_counts(sc)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(id, _)| sc.instance_parts(id))
            .collect()
    }

    /// One `slice,user,position,instance,satellite` record per assigned entry.
    pub fn to_csv<T: Real>(&self, sc: &Scenario<T>) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (e, slot) in self.assigned() {
            let en = &sc.entries()[e];
            w.serialize(Record {
                slice: en.slice,
                user: en.user,
                position: en.position,
                instance: slot.instance,
                satellite: slot.satellite,
            })
            .map_err(|err| Error::PlacementFormat(err.to_string()))?;
        }
        if self.assigned().next().is_none() {
            w.write_record(["slice", "user", "position", "instance", "satellite"])
                .map_err(|err| Error::PlacementFormat(err.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|err| Error::PlacementFormat(err.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv<T: Real>(text: &str, sc: &Scenario<T>) -> Result<Self> {
        let mut p = Self::empty(sc);
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        for (line, rec) in r.deserialize::<Record>().enumerate() {
            let rec = rec.map_err(|e| Error::PlacementFormat(e.to_string()))?;
            let e = sc
                .entry_index(rec.slice, rec.user, rec.position)
                .ok_or_else(|| {
                    Error::PlacementFormat(format!(
                        "record {}: no entry ({}, {}, {})",
                        line + 1,
                        rec.slice,
                        rec.user,
                        rec.position
                    ))
                })?;
            if p.slots[e].is_some() {
                return Err(Error::PlacementFormat(format!(
                    "record {}: entry ({}, {}, {}) assigned twice",
                    line + 1,
                    rec.slice,
                    rec.user,
                    rec.position
                )));
            }
            p.slots[e] = Some(Slot::new(rec.instance, rec.satellite));
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    slice: usize,
    user: usize,
    position: usize,
    instance: usize,
    satellite: usize,
}

/// Total CPU: activation cost of every active instance plus per-user cost of
/// every assignment.
pub fn cap_use<T: Real>(p: &Placement, sc: &Scenario<T>) -> T {
    let cnt = p.instance_counts(sc);
    let mut total = T::zero();
    for (id, &c) in cnt.iter().enumerate() {
        if c > 0 {
            let (f, i, s) = sc.instance_parts(id);
            total += sc.activation_cpu(f, i, s);
        }
    }
    for (e, entry) in sc.entries().iter().enumerate() {
        if let Some(s) = p.in_range(sc, e) {
            total += sc.per_user_cpu(entry.vnf, s.instance, s.satellite);
        }
    }
    total
}

/// Load of one satellite given per-instance assignment counts.
pub(crate) fn satellite_load<T: Real>(sc: &Scenario<T>, counts: &[u32], sat: usize) -> T {
    let mut load = T::zero();
    for f in VnfKind::ALL {
        for i in 0..sc.instances_per_site {
            let c = counts[sc.instance_id(f, i, sat)];
            if c > 0 {
                load += sc.activation_cpu(f, i, sat)
                    + sc.per_user_cpu(f, i, sat) * T::from_count(c as usize);
            }
        }
    }
    load
}

pub fn satellite_loads<T: Real>(p: &Placement, sc: &Scenario<T>) -> Vec<T> {
    let cnt = p.instance_counts(sc);
    (0..sc.num_satellites)
        .map(|s| satellite_load(sc, &cnt, s))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityViolation<T> {
    pub satellite: usize,
    pub load: T,
    pub capacity: T,
}

pub fn check_capacity<T: Real>(
    p: &Placement,
    sc: &Scenario<T>,
) -> (Vec<T>, Vec<CapacityViolation<T>>) {
    let loads = satellite_loads(p, sc);
    let violations = loads
        .iter()
        .enumerate()
        .filter(|(s, &l)| l > sc.capacity_cpu[*s])
        .map(|(s, &l)| CapacityViolation {
            satellite: s,
            load: l,
            capacity: sc.capacity_cpu[s],
        })
        .collect();
    (loads, violations)
}

/// Calls `f` for every undirected link `(min, max)` carrying traffic from
/// satellite `a` to `b`. Returns `false` when no route exists under the
/// scenario's routing model.
pub fn route<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    a: usize,
    b: usize,
    mut f: impl FnMut(usize, usize),
) -> bool {
    if a == b {
        return true;
    }
    match sc.routing {
        RoutingModel::ShortestPath => snap.paths.for_each_link(a, b, |u, v| f(u.min(v), u.max(v))),
        RoutingModel::SingleHop => {
            if snap.are_adjacent(a, b) {
                f(a.min(b), a.max(b));
                true
            } else {
                false
            }
        }
    }
}

/// Propagation delay between consecutive chain satellites, or `None` if unroutable.
pub fn hop_delay<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    a: usize,
    b: usize,
) -> Option<T> {
    if a == b {
        return Some(T::zero());
    }
    match sc.routing {
        RoutingModel::ShortestPath => snap.paths.delay(a, b),
        RoutingModel::SingleHop => snap
            .are_adjacent(a, b)
            .then(|| snap.paths.delay(a, b))
            .flatten(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBreakdown<T> {
    pub access_ms: T,
    pub processing_ms: T,
    pub propagation_ms: T,
}

impl<T: Real> DelayBreakdown<T> {
    pub fn total(&self) -> T {
        self.access_ms + self.processing_ms + self.propagation_ms
    }
}

/// End-to-end delay of one user's chain.
pub fn e2e_delay<T: Real>(
    p: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    slice: usize,
    user: usize,
) -> Result<DelayBreakdown<T>> {
    let first = sc
        .entry_index(slice, user, 0)
        .ok_or_else(|| Error::Config(format!("no user ({slice}, {user})")))?;
    user_delay(p, sc, snap, sc.entries()[first].flat_user)
}

pub(crate) fn user_delay<T: Real>(
    p: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    flat_user: usize,
) -> Result<DelayBreakdown<T>> {
    chain_delay(sc, snap, flat_user, |e| p.in_range(sc, e))
}

/// Delay of one user's chain with slots supplied by `slot_of(entry)`.
pub(crate) fn chain_delay<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    flat_user: usize,
    slot_of: impl Fn(usize) -> Option<Slot>,
) -> Result<DelayBreakdown<T>> {
    let (slice, user) = sc.user_of(flat_user);
    let range = sc.user_entries(flat_user);
    let mut sats = [0usize; 8];
    let mut sats_v = Vec::new();
    let len = range.len();
    let mut processing = T::zero();
    for (k, e) in range.enumerate() {
        let s = slot_of(e).ok_or(Error::Incomplete { slice, user })?;
        processing += sc.proc_delay_ms(sc.entries()[e].vnf, s.instance, s.satellite);
        if len <= sats.len() {
            sats[k] = s.satellite;
        } else {
            sats_v.push(s.satellite);
        }
    }
    let sats: &[usize] = if len <= sats.len() {
        &sats[..len]
    } else {
        &sats_v
    };
    let vis = &snap.visibility[flat_user];
    if !vis.is_visible(sats[0]) {
        return Err(Error::IngressNotVisible {
            slice,
            user,
            sat: sats[0],
        });
    }
    let mut propagation = T::zero();
    for w in sats.windows(2) {
        propagation += hop_delay(sc, snap, w[0], w[1]).ok_or(Error::Unreachable {
            from: w[0],
            to: w[1],
        })?;
    }
    Ok(DelayBreakdown {
        access_ms: vis.access_delay_ms[sats[0]],
        processing_ms: processing,
        propagation_ms: propagation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IslViolation {
    pub link: (usize, usize),
    pub flow: u32,
    pub capacity: u32,
}

/// A chain step between two satellites with no usable route.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteViolation {
    pub slice: usize,
    pub user: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IslCheck {
    /// Flow units per undirected link `(min, max)`.
    pub flows: BTreeMap<(usize, usize), u32>,
    pub violations: Vec<IslViolation>,
    pub unroutable: Vec<RouteViolation>,
}

pub fn check_isl_capacity<T: Real>(
    p: &Placement,
    snap: &ConstellationSnapshot<T>,
    sc: &Scenario<T>,
) -> IslCheck {
    let mut out = IslCheck::default();
    for fu in 0..sc.num_users() {
        let (slice, user) = sc.user_of(fu);
        let sats: Vec<Option<usize>> = sc
            .user_entries(fu)
            .map(|e| p.in_range(sc, e).map(|s| s.satellite))
            .collect();
        for w in sats.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                if !route(sc, snap, a, b, |u, v| {
                    *out.flows.entry((u, v)).or_insert(0) += 1
                }) {
                    out.unroutable.push(RouteViolation {
                        slice,
                        user,
                        from: a,
                        to: b,
                    });
                }
            }
        }
    }
    out.violations = out
        .flows
        .iter()
        .filter(|(_, &f)| f > sc.isl_capacity)
        .map(|(&link, &flow)| IslViolation {
            link,
            flow,
            capacity: sc.isl_capacity,
        })
        .collect();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityViolation {
    pub slice: usize,
    pub user: usize,
    pub satellite: usize,
}

/// Ingress positions placed on satellites outside the user's visibility set.
pub fn check_visibility<T: Real>(
    p: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
) -> Vec<VisibilityViolation> {
    let mut out = Vec::new();
    for fu in 0..sc.num_users() {
        let e = sc.user_entries(fu).start;
        if let Some(s) = p.in_range(sc, e) {
            if !snap.visibility[fu].is_visible(s.satellite) {
                let (slice, user) = sc.user_of(fu);
                out.push(VisibilityViolation {
                    slice,
                    user,
                    satellite: s.satellite,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayViolation<T> {
    pub slice: usize,
    pub user: usize,
    pub delay_ms: T,
    pub budget_ms: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<T> {
    /// Entries with no slot.
    pub unassigned: Vec<usize>,
    /// Entries whose slot names a nonexistent instance or satellite.
    pub out_of_range: Vec<usize>,
    pub capacity: Vec<CapacityViolation<T>>,
    pub delay: Vec<DelayViolation<T>>,
    pub isl: Vec<IslViolation>,
    pub routing: Vec<RouteViolation>,
    pub visibility: Vec<VisibilityViolation>,
}

impl<T> FeasibilityReport<T> {
    pub fn feasible(&self) -> bool {
        self.unassigned.is_empty()
            && self.out_of_range.is_empty()
            && self.capacity.is_empty()
            && self.delay.is_empty()
            && self.isl.is_empty()
            && self.routing.is_empty()
            && self.visibility.is_empty()
    }
}

/// Runs every constraint check and lists all violations.
pub fn validate<T: Real>(
    p: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
) -> FeasibilityReport<T> {
    let n_entries = sc.entries().len();
    let mut unassigned = Vec::new();
    let mut out_of_range = Vec::new();
    for e in 0..n_entries {
        match p.get(e) {
            None => unassigned.push(e),
            Some(_) if p.in_range(sc, e).is_none() => out_of_range.push(e),
            Some(_) => {}
        }
    }
    // a placement built for another scenario
    if p.len() > n_entries {
        out_of_range.extend(n_entries..p.len());
    }
    let (_, capacity) = check_capacity(p, sc);
    let isl = check_isl_capacity(p, snap, sc);
    let visibility = check_visibility(p, sc, snap);
    let mut delay = Vec::new();
    for fu in 0..sc.num_users() {
        if let Ok(d) = user_delay(p, sc, snap, fu) {
            let budget = sc.user(fu).delay_budget_ms;
            let total = d.total();
            if total > budget {
                let (slice, user) = sc.user_of(fu);
                delay.push(DelayViolation {
                    slice,
                    user,
                    delay_ms: total,
                    budget_ms: budget,
                });
            }
        }
    }
    FeasibilityReport {
        unassigned,
        out_of_range,
        capacity,
        delay,
        isl: isl.violations,
        routing: isl.unroutable,
        visibility,
    }
}

/// Previous-epoch placement together with the per-entry flags π that mark
/// which prior assignments could have been kept this epoch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MigrationContext {
    prev: Option<Placement>,
    pi: Vec<bool>,
}

impl MigrationContext {
    /// No previous placement: every π is 0.
    pub fn initial<T: Real>(sc: &Scenario<T>) -> Self {
        Self {
            prev: None,
            pi: vec![false; sc.entries().len()],
        }
    }

    pub fn new<T: Real>(
        prev: Option<Placement>,
        sc: &Scenario<T>,
        snap: &ConstellationSnapshot<T>,
    ) -> Self {
        match prev {
            None => Self::initial(sc),
            Some(prev) => {
                let pi = feasibility_flags(&prev, sc, snap);
                Self {
                    prev: Some(prev),
                    pi,
                }
            }
        }
    }

    pub fn prev(&self) -> Option<&Placement> {
        self.prev.as_ref()
    }

    #[inline]
    pub fn prev_slot(&self, entry: usize) -> Option<Slot> {
        self.prev.as_ref().and_then(|p| p.get(entry))
    }

    #[inline]
    pub fn pi(&self, entry: usize) -> bool {
        self.pi.get(entry).copied().unwrap_or(false)
    }

    pub fn flags(&self) -> &[bool] {
        &self.pi
    }

    /// k: the current assignment equals the previous one.
    #[inline]
    pub fn keep(&self, p: &Placement, entry: usize) -> bool {
        match (self.prev_slot(entry), p.get(entry)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// μ: the previous assignment was feasible but was not kept.
    #[inline]
    pub fn avoidable(&self, p: &Placement, entry: usize) -> bool {
        self.pi(entry) && !self.keep(p, entry)
    }

    pub fn avoidable_count(&self, p: &Placement) -> usize {
        (0..self.pi.len()).filter(|&e| self.avoidable(p, e)).count()
    }

    pub fn migration_cost<T: Real>(&self, p: &Placement, sc: &Scenario<T>) -> T {
        sc.entries()
            .iter()
            .enumerate()
            .filter(|(e, _)| self.avoidable(p, *e))
            .map(|(_, en)| sc.migration_disruption(en.vnf))
            .sum()
    }
}

/// π per entry: the previous slot exists, its ingress satellite is still
/// visible, and its satellite is within capacity when the whole previous
/// placement is retained.
pub fn feasibility_flags<T: Real>(
    prev: &Placement,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
) -> Vec<bool> {
    let n = sc.entries().len();
    if prev.len() != n {
        return vec![false; n];
    }
    let (loads, _) = check_capacity(prev, sc);
    sc.entries()
        .iter()
        .enumerate()
        .map(|(e, en)| match prev.in_range(sc, e) {
            None => false,
            Some(s) => {
                (en.position > 0 || snap.visibility[en.flat_user].is_visible(s.satellite))
                    && loads[s.satellite] <= sc.capacity_cpu[s.satellite]
            }
        })
        .collect()
}
