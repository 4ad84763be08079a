//! Multi-epoch experiments: per-method epoch loops, metrics, CSV and SVG output.

mod output;
pub mod svg;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use output::{
    emit_csv, emit_plots, emit_runtime_csv, fmt_sig6, write_artifacts, write_snapshot, CSV_COLUMNS,
    PLOT_FILES,
};

use crate::constellation::{build_walker_star, ConstellationSnapshot, WalkerConfig};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::{cap_use, satellite_loads, validate, MigrationContext, Placement};
use crate::risk::{risk_triple, RiskTriple};
use crate::scenario::{generate_scenario, Scenario, ScenarioConfig};
use crate::solver::{
    brute_force, greedy_place, hybrid_solve, normalization_bounds, objective, ObjectiveWeights,
    SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Hybrid,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct MethodSpec<T> {
    pub name: String,
    pub kind: MethodKind,
    /// Solver weights for `hybrid`; for `greedy` only used to score the result.
    #[serde(default = "ObjectiveWeights::proposed")]
    pub weights: ObjectiveWeights<T>,
}

impl<T: Real> MethodSpec<T> {
    pub fn hybrid(name: &str, weights: ObjectiveWeights<T>) -> Self {
        Self {
            name: name.into(),
            kind: MethodKind::Hybrid,
            weights,
        }
    }

    pub fn greedy(name: &str) -> Self {
        Self {
            name: name.into(),
            kind: MethodKind::Greedy,
            weights: ObjectiveWeights::proposed(),
        }
    }
}

/// Proposed method plus the three baselines.
pub fn default_methods<T: Real>() -> Vec<MethodSpec<T>> {
    vec![
        MethodSpec::hybrid("proposed", ObjectiveWeights::proposed()),
        MethodSpec::hybrid("B1", ObjectiveWeights::resource_min()),
        MethodSpec::hybrid("B2", ObjectiveWeights::migration_aware()),
        MethodSpec::greedy("B3"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ExperimentConfig<T> {
    /// Master seed: drives the scenario and every annealing stream.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Write measured stage times into the main CSV. Off by default so the
    /// CSV is byte-reproducible; `runtime.csv` always carries them.
    pub report_wall_times: bool,
    pub constellation: WalkerConfig<T>,
    pub scenario: ScenarioConfig<T>,
    pub solver: SolverConfig<T>,
    pub methods: Vec<MethodSpec<T>>,
}

impl<T: Real> Default for ExperimentConfig<T> {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: PathBuf::from("results"),
            report_wall_times: false,
            constellation: WalkerConfig::default(),
            scenario: ScenarioConfig::default(),
            solver: SolverConfig::default(),
            methods: default_methods(),
        }
    }
}

impl<T: Real> ExperimentConfig<T> {
    pub fn from_toml_str(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String>
    where
        T: Serialize,
    {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        let mut names = BTreeSet::new();
        for m in &self.methods {
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("duplicate method name {:?}", m.name)));
            }
            if m.name.is_empty() || m.name.contains([',', '"', '\n']) {
                return Err(Error::Config(format!("invalid method name {:?}", m.name)));
            }
            m.weights.validate()?;
        }
        self.constellation.validate()?;
        self.solver.sa.validate()?;
        self.solver.bnb.validate()?;
        Ok(())
    }

    /// Scenario and per-epoch snapshots.
    pub fn build(&self) -> Result<(Scenario<T>, Vec<ConstellationSnapshot<T>>)> {
        let cons = build_walker_star(&self.constellation)?;
        let sc = generate_scenario(self.seed, &self.scenario, cons.len())?;
        let users = sc.user_locations();
        let snaps = (0..self.constellation.num_epochs)
            .map(|t| cons.snapshot(t, &users))
            .collect::<Result<Vec<_>>>()?;
        Ok((sc, snaps))
    }
}

/// Metrics of one method at one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport<T> {
    pub epoch: usize,
    pub method: String,
    pub risk: RiskTriple<T>,
    pub cap_use: T,
    /// Mean over all satellites of load / capacity, percent.
    pub util_mean_pct: T,
    pub util_peak_pct: T,
    pub mig_avoidable: usize,
    pub mig_cost: T,
    /// Measured wall time of stages 1-3.
    pub stage_ms: [f64; 3],
    pub nodes: u64,
    pub gap: T,
    /// Under the method's own weights.
    pub objective: T,
    pub feasible: bool,
    pub placement: Option<Placement>,
    /// Why the method produced no placement this epoch.
    pub error: Option<String>,
}

impl<T: Real> EpochReport<T> {
    fn failed(epoch: usize, method: &str, stage_ms: [f64; 3], err: &Error) -> Self {
        let nan = T::nan();
        Self {
            epoch,
            method: method.into(),
            risk: RiskTriple {
                lb: nan,
                exact: nan,
                ub: nan,
            },
            cap_use: nan,
            util_mean_pct: nan,
            util_peak_pct: nan,
            mig_avoidable: 0,
            mig_cost: nan,
            stage_ms,
            nodes: 0,
            gap: nan,
            objective: nan,
            feasible: false,
            placement: None,
            error: Some(err.to_string()),
        }
    }
}

/// Scores a placement the same way for every method.
#[allow(clippy::too_many_arguments)]
pub fn measure<T: Real>(
    epoch: usize,
    method: &str,
    p: Placement,
    ctx: &MigrationContext,
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    weights: &ObjectiveWeights<T>,
    cfg: &SolverConfig<T>,
) -> Result<EpochReport<T>> {
    let risk = risk_triple(&p, sc)?;
    let loads = satellite_loads(&p, sc);
    let hundred = T::lit(100.0);
    let utils: Vec<T> = loads
        .iter()
        .zip(&sc.capacity_cpu)
        .map(|(&l, &c)| {
            if c > T::zero() {
                l / c * hundred
            } else {
                T::zero()
            }
        })
        .collect();
    let util_mean_pct = utils.iter().copied().sum::<T>() / T::from_count(utils.len().max(1));
    let util_peak_pct = utils.iter().copied().fold(T::zero(), T::max);
    let norms = normalization_bounds(sc);
    Ok(EpochReport {
        epoch,
        method: method.into(),
        risk,
        cap_use: cap_use(&p, sc),
        util_mean_pct,
        util_peak_pct,
        mig_avoidable: ctx.avoidable_count(&p),
        mig_cost: ctx.migration_cost(&p, sc),
        stage_ms: [0.0; 3],
        nodes: 0,
        gap: T::zero(),
        objective: objective(&p, ctx, weights, &norms, sc, cfg.risk_mode),
        feasible: validate(&p, sc, snap).feasible(),
        placement: Some(p),
        error: None,
    })
}

/// Annealing seed for one (method, epoch), mixed from the master seed.
pub fn sub_seed(master: u64, method: usize, epoch: usize) -> u64 {
    // splitmix64 finaliser
    let mut z =
        master ^ ((method as u64) << 32) ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_method<T: Real>(
    cfg: &ExperimentConfig<T>,
    index: usize,
    sc: &Scenario<T>,
    snaps: &[ConstellationSnapshot<T>],
) -> Vec<EpochReport<T>> {
    let m = &cfg.methods[index];
    let mut prev: Option<Placement> = None;
    let mut out = Vec::with_capacity(snaps.len());
    for (t, snap) in snaps.iter().enumerate() {
        let ctx = MigrationContext::new(prev.clone(), sc, snap);
        let solved = match m.kind {
            MethodKind::Hybrid => {
                let mut scfg = cfg.solver;
                scfg.sa.seed = sub_seed(cfg.seed, index, t);
                hybrid_solve(sc, snap, prev.as_ref(), &m.weights, &scfg)
                    .map(|r| (r.placement, r.stage_ms, r.nodes, r.gap))
            }
            MethodKind::Greedy => {
                let t0 = Instant::now();
                greedy_place(sc, snap).map(|p| {
                    (
                        p,
                        [0.0, t0.elapsed().as_secs_f64() * 1e3, 0.0],
                        0,
                        T::zero(),
                    )
                })
            }
        };
        let report = solved.and_then(|(p, stage_ms, nodes, gap)| {
            let mut r = measure(t, &m.name, p, &ctx, sc, snap, &m.weights, &cfg.solver)?;
            r.stage_ms = stage_ms;
            r.nodes = nodes;
            r.gap = gap;
            Ok(r)
        });
        match report {
            Ok(r) => {
                prev = r.placement.clone();
                out.push(r);
            }
            Err(e) => out.push(EpochReport::failed(t, &m.name, [0.0; 3], &e)),
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Experiment<T> {
    pub scenario: Scenario<T>,
    pub snapshots: Vec<ConstellationSnapshot<T>>,
    /// Ordered by epoch, then by method as configured.
    pub reports: Vec<EpochReport<T>>,
}

/// Runs every configured method over every epoch. Methods run on their own
/// threads; each threads its own previous placement through the epochs.
pub fn run_experiment<T: Real>(cfg: &ExperimentConfig<T>) -> Result<Experiment<T>> {
    cfg.validate()?;
    let (sc, snaps) = cfg.build()?;
    let per_method: Vec<Vec<EpochReport<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.methods.len())
            .map(|i| {
                let (sc, snaps) = (&sc, &snaps);
                s.spawn(move || run_method(cfg, i, sc, snaps))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("method thread panicked"))
            .collect()
    });
    let mut reports = Vec::with_capacity(snaps.len() * cfg.methods.len());
    for t in 0..snaps.len() {
        for m in &per_method {
            reports.push(m[t].clone());
        }
    }
    Ok(Experiment {
        scenario: sc,
        snapshots: snaps,
        reports,
    })
}

/// One brute-force versus hybrid comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow<T> {
    pub epoch: usize,
    pub brute: T,
    pub hybrid: T,
    /// `(hybrid - brute) / brute`, or the absolute difference when the optimum is 0.
    pub gap: T,
}

/// Cold-start hybrid against exhaustive search at every epoch of a small
/// configuration, scored with the first hybrid method's weights.
pub fn run_oracle<T: Real>(cfg: &ExperimentConfig<T>, leaf_cap: f64) -> Result<Vec<OracleRow<T>>> {
    cfg.validate()?;
    let weights = cfg
        .methods
        .iter()
        .find(|m| m.kind == MethodKind::Hybrid)
        .map_or(ObjectiveWeights::proposed(), |m| m.weights);
    let (sc, snaps) = cfg.build()?;
    let norms = normalization_bounds(&sc);
    let mut rows = Vec::with_capacity(snaps.len());
    for (t, snap) in snaps.iter().enumerate() {
        let ctx = MigrationContext::initial(&sc);
        let (_, brute) = brute_force(
            &sc,
            snap,
            &ctx,
            &weights,
            &norms,
            cfg.solver.risk_mode,
            leaf_cap,
        )?;
        let mut scfg = cfg.solver;
        scfg.sa.seed = sub_seed(cfg.seed, 0, t);
        let r = hybrid_solve(&sc, snap, None, &weights, &scfg)?;
        let gap = if brute > T::zero() {
            (r.objective - brute) / brute
        } else {
            (r.objective - brute).abs()
        };
        rows.push(OracleRow {
            epoch: t,
            brute,
            hybrid: r.objective,
            gap,
        });
    }
    Ok(rows)
}
