//! Seeded workload generation: slices, users, service chains, CPU/delay
//! parameters and the risk tables.
//!
//! Every random draw comes from a single `ChaCha8Rng` seeded with the
//! scenario seed, in this order:
//!
//! 1. for each slice (anchor order): chain length, then each chain entry
//!    (skipped when chains are fixed), then criticality;
//! 2. for each slice, for each user: cap distance, bearing, delay budget;
//! 3. isolation `Φ[n][n']` for `n < n'` in lexicographic order.
//!
//! Floats are drawn as `lo + (hi - lo) * u` with `u = rng.gen::<f64>()`, and
//! integers with `gen_range` over `u32`, so streams are platform independent.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::GroundPoint;
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VnfKind {
    #[serde(rename = "FW")]
    Fw,
    #[serde(rename = "IDS")]
    Ids,
    #[serde(rename = "ENC")]
    Enc,
    #[serde(rename = "TM")]
    Tm,
    #[serde(rename = "SIEM")]
    Siem,
}

impl VnfKind {
    pub const ALL: [VnfKind; 5] = [
        VnfKind::Fw,
        VnfKind::Ids,
        VnfKind::Enc,
        VnfKind::Tm,
        VnfKind::Siem,
    ];
    pub const COUNT: usize = 5;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            VnfKind::Fw => "FW",
            VnfKind::Ids => "IDS",
            VnfKind::Enc => "ENC",
            VnfKind::Tm => "TM",
            VnfKind::Siem => "SIEM",
        }
    }
}

impl fmt::Display for VnfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VnfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VnfKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown VNF type '{s}'")))
    }
}

/// Per-type defaults; individual `(f, i, s)` costs may be overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnfType<T> {
    pub kind: VnfKind,
    pub sensitivity: T,
    pub activation_cpu: T,
    pub per_user_cpu: T,
    pub proc_delay_ms: T,
    pub migration_disruption: T,
}

impl<T: Real> VnfType<T> {
    pub fn with_sensitivity(kind: VnfKind, sensitivity: f64) -> Self {
        Self {
            kind,
            sensitivity: T::lit(sensitivity),
            activation_cpu: T::one(),
            per_user_cpu: T::lit(0.1),
            proc_delay_ms: T::lit(0.5),
            migration_disruption: T::one(),
        }
    }

    /// FW 0.6, IDS 0.8, ENC 0.9, TM 0.4, SIEM 0.6.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self::with_sensitivity(VnfKind::Fw, 0.6),
            Self::with_sensitivity(VnfKind::Ids, 0.8),
            Self::with_sensitivity(VnfKind::Enc, 0.9),
            Self::with_sensitivity(VnfKind::Tm, 0.4),
            Self::with_sensitivity(VnfKind::Siem, 0.6),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct User<T> {
    pub id: usize,
    pub location: GroundPoint<T>,
    pub delay_budget_ms: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Slice<T> {
    pub id: usize,
    pub name: String,
    pub anchor: GroundPoint<T>,
    pub criticality: T,
    pub users: Vec<User<T>>,
    pub chain: Vec<VnfKind>,
}

impl<T> Slice<T> {
    /// Occurrences of `kind` in the chain.
    pub fn occurrences(&self, kind: VnfKind) -> usize {
        self.chain.iter().filter(|&&k| k == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskParams<T> {
    /// `R[f]`, indexed by [`VnfKind::index`].
    pub sensitivity: Vec<T>,
    /// `C[n]`.
    pub criticality: Vec<T>,
    /// `Φ[n][n']`, symmetric; the diagonal is unused.
    pub isolation: Vec<Vec<T>>,
}

impl<T: Real> RiskParams<T> {
    /// `R[f]·Φ[n,n']·C[n]·C[n']`.
    pub fn weight(&self, n: usize, n2: usize, kind: VnfKind) -> Result<T> {
        if n == n2 {
            return Err(Error::SelfPair(n));
        }
        let (lo, hi) = (n.min(n2), n.max(n2));
        Ok(self.sensitivity[kind.index()]
            * self.isolation[lo][hi]
            * (self.criticality[lo] * self.criticality[hi]))
    }
}

/// How co-location is counted when a chain repeats a VNF type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskCounting {
    /// A user pair counts once per shared instance.
    #[default]
    DistinctUser,
    /// Every (user, chain position) assignment counts.
    Assignment,
}

/// How consecutive chain positions on different satellites are connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingModel {
    /// Minimum-delay multi-hop ISL route.
    #[default]
    ShortestPath,
    /// Consecutive positions must share a satellite or a direct ISL.
    SingleHop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostOverride<T> {
    pub vnf: VnfKind,
    pub instance: usize,
    pub satellite: usize,
    #[serde(default)]
    pub activation_cpu: Option<T>,
    #[serde(default)]
    pub per_user_cpu: Option<T>,
    #[serde(default)]
    pub proc_delay_ms: Option<T>,
}

/// One `(slice, user, chain position)` decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub slice: usize,
    pub user: usize,
    pub position: usize,
    pub vnf: VnfKind,
    /// Index into the flat user list.
    pub flat_user: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Scenario<T> {
    pub seed: u64,
    pub num_satellites: usize,
    pub slices: Vec<Slice<T>>,
    /// Indexed by [`VnfKind::index`].
    pub vnf_types: Vec<VnfType<T>>,
    pub risk: RiskParams<T>,
    pub capacity_cpu: Vec<T>,
    pub instances_per_site: usize,
    pub isl_capacity: u32,
    #[serde(default)]
    pub risk_counting: RiskCounting,
    #[serde(default)]
    pub routing: RoutingModel,
    #[serde(default)]
    pub cost_overrides: Vec<CostOverride<T>>,
    #[serde(skip)]
    tables: Tables<T>,
}

#[derive(Debug, Clone, Default)]
struct Tables<T> {
    entries: Vec<Entry>,
    /// First entry of each flat user; `entries` of a user are contiguous.
    user_entry_start: Vec<usize>,
    user_slice: Vec<(usize, usize)>,
    activation: Vec<T>,
    per_user: Vec<T>,
    proc_delay: Vec<T>,
    /// `[n][n'][f]` risk weights, zero on the diagonal.
    weights: Vec<T>,
    /// `(f, s)` pairs whose instances carry overridden costs.
    heterogeneous: Vec<bool>,
}

impl<T: Real> Scenario<T> {
    /// Assembles a scenario from explicit tables with uniform capacity. The
    /// remaining knobs keep their defaults; call [`Self::finalize`] again
    /// after changing cost overrides.
    pub fn new(
        num_satellites: usize,
        slices: Vec<Slice<T>>,
        vnf_types: Vec<VnfType<T>>,
        risk: RiskParams<T>,
        capacity_cpu: T,
        instances_per_site: usize,
        isl_capacity: u32,
    ) -> Result<Self> {
        Scenario {
            seed: 0,
            num_satellites,
            slices,
            vnf_types,
            risk,
            capacity_cpu: vec![capacity_cpu; num_satellites],
            instances_per_site,
            isl_capacity,
            risk_counting: RiskCounting::default(),
            routing: RoutingModel::default(),
            cost_overrides: Vec::new(),
            tables: Tables::default(),
        }
        .finalize()
    }

    /// Validates invariants and builds the dense lookup tables.
    pub fn finalize(mut self) -> Result<Self> {
        self.validate()?;
        let (f_n, i_n, s_n) = (VnfKind::COUNT, self.instances_per_site, self.num_satellites);
        let mut t = Tables::<T> {
            activation: vec![T::zero(); f_n * i_n * s_n],
            per_user: vec![T::zero(); f_n * i_n * s_n],
            proc_delay: vec![T::zero(); f_n * i_n * s_n],
            heterogeneous: vec![false; f_n * s_n],
            ..Default::default()
        };
        for kind in VnfKind::ALL {
            let vt = &self.vnf_types[kind.index()];
            for i in 0..i_n {
                for s in 0..s_n {
                    let id = (kind.index() * i_n + i) * s_n + s;
                    t.activation[id] = vt.activation_cpu;
                    t.per_user[id] = vt.per_user_cpu;
                    t.proc_delay[id] = vt.proc_delay_ms;
                }
            }
        }
        for o in &self.cost_overrides {
            let id = (o.vnf.index() * i_n + o.instance) * s_n + o.satellite;
            if let Some(v) = o.activation_cpu {
                t.activation[id] = v;
            }
            if let Some(v) = o.per_user_cpu {
                t.per_user[id] = v;
            }
            if let Some(v) = o.proc_delay_ms {
                t.proc_delay[id] = v;
            }
            t.heterogeneous[o.vnf.index() * s_n + o.satellite] = true;
        }
        let mut flat = 0;
        for (n, sl) in self.slices.iter().enumerate() {
            for u in 0..sl.users.len() {
                t.user_entry_start.push(t.entries.len());
                t.user_slice.push((n, u));
                for (pos, &vnf) in sl.chain.iter().enumerate() {
                    t.entries.push(Entry {
                        slice: n,
                        user: u,
                        position: pos,
                        vnf,
                        flat_user: flat,
                    });
                }
                flat += 1;
            }
        }
        t.user_entry_start.push(t.entries.len());
        let n_s = self.slices.len();
        t.weights = vec![T::zero(); n_s * n_s * f_n];
        for n in 0..n_s {
            for m in 0..n_s {
                if n == m {
                    continue;
                }
                for kind in VnfKind::ALL {
                    t.weights[(n * n_s + m) * f_n + kind.index()] = self.risk.weight(n, m, kind)?;
                }
            }
        }
        self.tables = t;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("scenario: {m}")));
        if self.vnf_types.len() != VnfKind::COUNT {
            return bad(format!("expected {} VNF types", VnfKind::COUNT));
        }
        for (k, vt) in VnfKind::ALL.iter().zip(&self.vnf_types) {
            if vt.kind != *k {
                return bad(format!("VNF table out of order at {k}"));
            }
            let params = [
                vt.sensitivity,
                vt.activation_cpu,
                vt.per_user_cpu,
                vt.proc_delay_ms,
                vt.migration_disruption,
            ];
            if params.iter().any(|&p| !(p >= T::zero())) {
                return bad(format!("{k}: parameters must be >= 0"));
            }
            if vt.sensitivity > T::one() {
                return bad(format!("{k}: sensitivity must be within [0, 1]"));
            }
        }
        if self.capacity_cpu.len() != self.num_satellites {
            return bad("capacity table size != number of satellites".into());
        }
        if self.capacity_cpu.iter().any(|&c| !(c > T::zero())) {
            return bad("CPU capacity must be > 0".into());
        }
        if self.instances_per_site < 1 {
            return bad("instances_per_site must be >= 1".into());
        }
        if self.isl_capacity < 1 {
            return bad("isl_capacity must be >= 1".into());
        }
        let n = self.slices.len();
        if self.risk.criticality.len() != n || self.risk.isolation.len() != n {
            return bad("risk tables do not match slice count".into());
        }
        if self.risk.sensitivity.len() != VnfKind::COUNT {
            return bad("sensitivity table size".into());
        }
        for a in 0..n {
            if self.risk.isolation[a].len() != n {
                return bad("isolation matrix is not square".into());
            }
            for b in 0..n {
                let v = self.risk.isolation[a][b];
                if a != b && !(v >= T::zero() && v <= T::one()) {
                    return bad(format!("Φ[{a}][{b}] outside [0, 1]"));
                }
                if v != self.risk.isolation[b][a] {
                    return bad(format!("Φ not symmetric at ({a}, {b})"));
                }
            }
            if !(self.risk.criticality[a] >= T::zero()) {
                return bad(format!("criticality of slice {a} must be >= 0"));
            }
        }
        for (k, vt) in VnfKind::ALL.iter().zip(&self.vnf_types) {
            if self.risk.sensitivity[k.index()] != vt.sensitivity {
                return bad(format!("sensitivity of {k} disagrees with VNF table"));
            }
        }
        for (n, sl) in self.slices.iter().enumerate() {
            if sl.criticality != self.risk.criticality[n] {
                return bad(format!(
                    "criticality of slice {n} disagrees with risk table"
                ));
            }
            if sl.chain.is_empty() {
                return bad(format!("slice {} has an empty chain", sl.id));
            }
            if !sl.anchor.is_valid() || sl.users.iter().any(|u| !u.location.is_valid()) {
                return bad(format!("slice {} has an invalid ground point", sl.id));
            }
        }
        for o in &self.cost_overrides {
            if o.instance >= self.instances_per_site || o.satellite >= self.num_satellites {
                return bad(format!("cost override out of range: {o:?}").replace("\n", ""));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn entries(&self) -> &[Entry] {
        &self.tables.entries
    }

    pub fn num_users(&self) -> usize {
        self.tables.user_slice.len()
    }

    /// Entry index range of a flat user.
    #[inline]
    pub fn user_entries(&self, flat_user: usize) -> std::ops::Range<usize> {
        self.tables.user_entry_start[flat_user]..self.tables.user_entry_start[flat_user + 1]
    }

    /// Entry index of `(slice, user, position)`, if it exists.
    pub fn entry_index(&self, slice: usize, user: usize, position: usize) -> Option<usize> {
        let sl = self.slices.get(slice)?;
        if user >= sl.users.len() || position >= sl.chain.len() {
            return None;
        }
        let flat: usize = self.slices[..slice]
            .iter()
            .map(|s| s.users.len())
            .sum::<usize>()
            + user;
        Some(self.tables.user_entry_start[flat] + position)
    }

    /// `(slice, user)` of a flat user id.
    #[inline]
    pub fn user_of(&self, flat_user: usize) -> (usize, usize) {
        self.tables.user_slice[flat_user]
    }

    pub fn user(&self, flat_user: usize) -> &User<T> {
        let (n, u) = self.user_of(flat_user);
        &self.slices[n].users[u]
    }

    /// Ground positions indexed by flat user id.
    pub fn user_locations(&self) -> Vec<GroundPoint<T>> {
        self.slices
            .iter()
            .flat_map(|s| s.users.iter().map(|u| u.location))
            .collect()
    }

    /// Dense id of instance `(f, i, s)`.
    #[inline]
    pub fn instance_id(&self, kind: VnfKind, instance: usize, sat: usize) -> usize {
        (kind.index() * self.instances_per_site + instance) * self.num_satellites + sat
    }

    pub fn num_instances(&self) -> usize {
        VnfKind::COUNT * self.instances_per_site * self.num_satellites
    }

    /// Inverse of [`Self::instance_id`].
    pub fn instance_parts(&self, id: usize) -> (VnfKind, usize, usize) {
        let s = id % self.num_satellites;
        let rest = id / self.num_satellites;
        (
            VnfKind::ALL[rest / self.instances_per_site],
            rest % self.instances_per_site,
            s,
        )
    }

    #[inline]
    pub fn activation_cpu(&self, kind: VnfKind, instance: usize, sat: usize) -> T {
        self.tables.activation[self.instance_id(kind, instance, sat)]
    }

    #[inline]
    pub fn per_user_cpu(&self, kind: VnfKind, instance: usize, sat: usize) -> T {
        self.tables.per_user[self.instance_id(kind, instance, sat)]
    }

    #[inline]
    pub fn proc_delay_ms(&self, kind: VnfKind, instance: usize, sat: usize) -> T {
        self.tables.proc_delay[self.instance_id(kind, instance, sat)]
    }

    #[inline]
    pub fn migration_disruption(&self, kind: VnfKind) -> T {
        self.vnf_types[kind.index()].migration_disruption
    }

    /// Precomputed `w[n][n'][f]`; zero when `n == n'`.
    #[inline]
    pub fn weight(&self, n: usize, n2: usize, kind: VnfKind) -> T {
        let ns = self.slices.len();
        self.tables.weights[(n * ns + n2) * VnfKind::COUNT + kind.index()]
    }

    /// Whether instances of `kind` on `sat` differ in cost.
    #[inline]
    pub fn is_heterogeneous(&self, kind: VnfKind, sat: usize) -> bool {
        self.tables.heterogeneous[kind.index() * self.num_satellites + sat]
    }

    /// Minimum of a per-instance table over all `(i, s)` for `kind`.
    pub fn min_over_sites(
        &self,
        kind: VnfKind,
        f: impl Fn(&Self, VnfKind, usize, usize) -> T,
    ) -> T {
        let mut m = T::infinity();
        for i in 0..self.instances_per_site {
            for s in 0..self.num_satellites {
                m = m.min(f(self, kind, i, s));
            }
        }
        m
    }

    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let sc: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        sc.finalize()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor<T> {
    pub name: String,
    pub latitude_deg: T,
    pub longitude_deg: T,
}

/// Generator settings. All ranges are `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ScenarioConfig<T> {
    pub anchors: Vec<Anchor<T>>,
    pub users_per_slice: usize,
    /// Users are spread uniformly over a spherical cap of this radius.
    pub user_radius_deg: T,
    pub chain_length: [usize; 2],
    /// Fixed chains by VNF name, one per slice; replaces random chains.
    pub chains: Option<Vec<Vec<String>>>,
    pub delay_budget_ms: [T; 2],
    pub criticality: [T; 2],
    pub isolation: [T; 2],
    pub vnf_types: Vec<VnfType<T>>,
    pub capacity_cpu: T,
    pub instances_per_site: usize,
    pub isl_capacity: u32,
    pub risk_counting: RiskCounting,
    pub routing: RoutingModel,
    pub cost_overrides: Vec<CostOverride<T>>,
}

impl<T: Real> Default for ScenarioConfig<T> {
    fn default() -> Self {
        let city = |name: &str, lat: f64, lon: f64| Anchor {
            name: name.to_string(),
            latitude_deg: T::lit(lat),
            longitude_deg: T::lit(lon),
        };
        Self {
            anchors: vec![
                city("London", 51.5, -0.13),
                city("New York", 40.7, -74.0),
                city("Tokyo", 35.7, 139.7),
                city("Sydney", -33.9, 151.2),
                city("Paris", 48.9, 2.35),
            ],
            users_per_slice: 10,
            user_radius_deg: T::lit(3.0),
            chain_length: [2, 4],
            chains: None,
            delay_budget_ms: [T::lit(75.0), T::lit(150.0)],
            criticality: [T::one(), T::lit(3.0)],
            isolation: [T::zero(), T::one()],
            vnf_types: VnfType::defaults(),
            capacity_cpu: T::lit(100.0),
            instances_per_site: 2,
            isl_capacity: 50,
            risk_counting: RiskCounting::default(),
            routing: RoutingModel::default(),
            cost_overrides: Vec::new(),
        }
    }
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng, range: [T; 2]) -> T {
    let u = T::lit(rng.gen::<f64>());
    range[0] + (range[1] - range[0]) * u
}

/// Deterministic scenario for `seed` over a constellation of `num_satellites`.
pub fn generate_scenario<T: Real>(
    seed: u64,
    config: &ScenarioConfig<T>,
    num_satellites: usize,
) -> Result<Scenario<T>> {
    let bad = |m: String| Err(Error::Config(format!("scenario config: {m}")));
    let [lmin, lmax] = config.chain_length;
    if lmin < 1 || lmin > lmax {
        return bad(format!("invalid chain_length range [{lmin}, {lmax}]"));
    }
    for (name, r) in [
        ("delay_budget_ms", config.delay_budget_ms),
        ("criticality", config.criticality),
        ("isolation", config.isolation),
    ] {
        if !(r[0] <= r[1]) {
            return bad(format!("{name} range is inverted"));
        }
    }
    if config.isolation[0] < T::zero() || config.isolation[1] > T::one() {
        return bad("isolation range must lie within [0, 1]".into());
    }
    let fixed: Option<Vec<Vec<VnfKind>>> = match &config.chains {
        Some(chains) => {
            if chains.len() != config.anchors.len() {
                return bad(format!(
                    "{} fixed chains for {} slices",
                    chains.len(),
                    config.anchors.len()
                ));
            }
            Some(
                chains
                    .iter()
                    .map(|c| c.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?,
            )
        }
        None => None,
    };
    let mut vnf_types = config.vnf_types.clone();
    vnf_types.sort_by_key(|v| v.kind);
    vnf_types.dedup_by_key(|v| v.kind);
    if vnf_types.len() != VnfKind::COUNT {
        return bad("vnf_types must list each of FW, IDS, ENC, TM, SIEM once".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slices = Vec::with_capacity(config.anchors.len());
    for (n, anchor) in config.anchors.iter().enumerate() {
        let chain = match &fixed {
            Some(f) => f[n].clone(),
            None => {
                let len = rng.gen_range(lmin as u32..=lmax as u32) as usize;
                (0..len)
                    .map(|_| VnfKind::ALL[rng.gen_range(0..VnfKind::COUNT as u32) as usize])
                    .collect()
            }
        };
        let criticality = uniform(&mut rng, config.criticality);
        slices.push(Slice {
            id: n,
            name: anchor.name.clone(),
            anchor: GroundPoint::new(anchor.latitude_deg, anchor.longitude_deg),
            criticality,
            users: Vec::new(),
            chain,
        });
    }
    let cos_r = config.user_radius_deg.to_radians().cos();
    for sl in &mut slices {
        for u in 0..config.users_per_slice {
            // uniform on the cap: cos(d) ~ U[cos r, 1]
            let cos_d = uniform(&mut rng, [cos_r, T::one()]);
            let dist = cos_d.min(T::one()).acos().to_degrees();
            let bearing = uniform(&mut rng, [T::zero(), T::lit(360.0)]);
            let budget = uniform(&mut rng, config.delay_budget_ms);
            sl.users.push(User {
                id: u,
                location: sl.anchor.destination(bearing, dist),
                delay_budget_ms: budget,
            });
        }
    }
    let n_s = slices.len();
    let mut isolation = vec![vec![T::zero(); n_s]; n_s];
    #[allow(clippy::needless_range_loop)]
    for a in 0..n_s {
        for b in (a + 1)..n_s {
            let v = uniform(&mut rng, config.isolation);
            isolation[a][b] = v;
            isolation[b][a] = v;
        }
    }
    let risk = RiskParams {
        sensitivity: vnf_types.iter().map(|v| v.sensitivity).collect(),
        criticality: slices.iter().map(|s| s.criticality).collect(),
        isolation,
    };
    Scenario {
        seed,
        num_satellites,
        slices,
        vnf_types,
        risk,
        capacity_cpu: vec![config.capacity_cpu; num_satellites],
        instances_per_site: config.instances_per_site,
        isl_capacity: config.isl_capacity,
        risk_counting: config.risk_counting,
        routing: config.routing,
        cost_overrides: config.cost_overrides.clone(),
        tables: Tables::default(),
    }
    .finalize()
}
