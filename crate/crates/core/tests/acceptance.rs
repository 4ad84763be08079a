//! Acceptance suite. Each test prints one PASS/FAIL line to stderr (bypassing
//! the test harness capture) and then asserts.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use leo_sfc::constellation::{build_walker_star, WalkerConfig};
use leo_sfc::harness::{emit_csv, run_experiment, EpochReport, Experiment, ExperimentConfig};
use leo_sfc::placement::{e2e_delay, satellite_loads, validate, MigrationContext, Placement, Slot};
use leo_sfc::risk::risk_triple;
use leo_sfc::scenario::{generate_scenario, RiskCounting, ScenarioConfig};
use leo_sfc::solver::{
    audit_incremental_deltas, brute_force, greedy_place, hybrid_solve, metropolis_accept,
    normalization_bounds, temperature, BnbConfig, ObjectiveWeights, RiskMode, SaParams,
    SolverConfig, BRUTE_FORCE_LEAF_CAP,
};

const DEFAULT: &str = include_str!("../../../configs/default.toml");
const TINY: &str = include_str!("../../../configs/tiny.toml");

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id} ({name}): {verdict}: {detail}"
    );
}

fn default_cfg() -> ExperimentConfig<f64> {
    ExperimentConfig::from_toml_str(DEFAULT).unwrap()
}

fn default_run() -> &'static Experiment<f64> {
    static RUN: OnceLock<Experiment<f64>> = OnceLock::new();
    RUN.get_or_init(|| run_experiment(&default_cfg()).unwrap())
}

fn rows<'a>(
    exp: &'a Experiment<f64>,
    method: &'a str,
) -> impl Iterator<Item = &'a EpochReport<f64>> {
    exp.reports.iter().filter(move |r| r.method == method)
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn risk_bounds_sandwich() {
    let t = Instant::now();
    let cons = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut scenarios, mut placements, mut violations) = (0, 0, 0);
    for seed in 0..20u64 {
        let cfg = ScenarioConfig::<f64> {
            users_per_slice: 2 + (seed as usize % 7),
            // loose budgets and capacity so uniform draws are mostly feasible
            delay_budget_ms: [1000.0, 1000.0],
            capacity_cpu: 1000.0,
            isl_capacity: 10_000,
            instances_per_site: 1 + (seed as usize % 3),
            risk_counting: if seed % 2 == 0 {
                RiskCounting::DistinctUser
            } else {
                RiskCounting::Assignment
            },
            ..ScenarioConfig::default()
        };
        let sc = generate_scenario(seed, &cfg, cons.len()).unwrap();
        let snap = cons
            .snapshot(seed as usize % 15, &sc.user_locations())
            .unwrap();
        if snap.visibility.iter().any(|v| v.visible.is_empty()) {
            continue;
        }
        scenarios += 1;
        let mut got = 0;
        while got < 60 {
            let slots = sc
                .entries()
                .iter()
                .map(|e| {
                    let sat = if e.position == 0 {
                        let vis = &snap.visibility[e.flat_user].visible;
                        vis[rng.gen_range(0..vis.len())]
                    } else if rng.gen_bool(0.5) {
                        // bias towards sharing so co-location actually happens
                        snap.visibility[e.flat_user].visible[0]
                    } else {
                        rng.gen_range(0..sc.num_satellites)
                    };
                    Some(Slot::new(rng.gen_range(0..sc.instances_per_site), sat))
                })
                .collect();
            let p = Placement::from_slots(slots);
            if !validate(&p, &sc, &snap).feasible() {
                continue;
            }
            got += 1;
            match risk_triple(&p, &sc) {
                Ok(r) if r.lb <= r.exact && r.exact <= r.ub => {}
                _ => violations += 1,
            }
        }
        placements += got;
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = scenarios >= 20 && placements >= 1000 && violations == 0 && secs < 60.0;
    report(
        1,
        "risk bound sandwich",
        pass,
        format!("{placements} placements over {scenarios} scenarios, {violations} violations, {secs:.1} s"),
    );
    assert!(pass);
}

#[test]
fn oracle_equivalence() {
    let t = Instant::now();
    let base = ExperimentConfig::<f64>::from_toml_str(TINY).unwrap();
    let weights = ObjectiveWeights::proposed();
    let exact_cfg = SolverConfig {
        bnb: BnbConfig {
            gap: 0.0,
            node_budget: None,
            time_budget_ms: None,
        },
        ..base.solver
    };
    let (mut instances, mut worst_gap, mut worst_exact) = (0, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for seed in 0..40u64 {
        if instances >= 24 {
            break;
        }
        let mut cfg = base.clone();
        cfg.seed = seed;
        let (sc, snaps) = cfg.build().unwrap();
        assert!(sc.num_users() <= 3 && sc.num_satellites <= 6 && sc.instances_per_site == 1);
        assert!(sc.slices.iter().all(|s| s.chain.len() <= 2));
        let norms = normalization_bounds(&sc);
        for snap in &snaps {
            if snap.visibility.iter().any(|v| v.visible.is_empty()) {
                continue;
            }
            let ctx = MigrationContext::initial(&sc);
            let Ok((_, best)) = brute_force(
                &sc,
                snap,
                &ctx,
                &weights,
                &norms,
                RiskMode::Exact,
                BRUTE_FORCE_LEAF_CAP,
            ) else {
                continue;
            };
            instances += 1;
            let mut scfg = cfg.solver;
            scfg.sa.seed = seed;
            match hybrid_solve(&sc, snap, None, &weights, &scfg) {
                Ok(r) => {
                    let gap = (r.objective - best) / best.max(1e-300);
                    worst_gap = worst_gap.max(gap);
                    if !(-1e-12..=0.005).contains(&gap) {
                        failures.push(format!("seed {seed} epoch {}: gap {gap}", snap.epoch_index));
                    }
                }
                Err(e) => failures.push(format!("seed {seed} epoch {}: {e}", snap.epoch_index)),
            }
            let mut ecfg = exact_cfg;
            ecfg.sa.seed = seed;
            match hybrid_solve(&sc, snap, None, &weights, &ecfg) {
                Ok(r) => {
                    let d = (r.objective - best).abs();
                    worst_exact = worst_exact.max(d);
                    if d > 1e-9 {
                        failures.push(format!(
                            "seed {seed} epoch {}: exact differs by {d}",
                            snap.epoch_index
                        ));
                    }
                }
                Err(e) => failures.push(format!("seed {seed} epoch {}: {e}", snap.epoch_index)),
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = instances >= 20 && failures.is_empty() && secs < 120.0;
    report(
        2,
        "oracle equivalence",
        pass,
        format!(
            "{instances} tiny instances, worst gap {worst_gap:.2e}, worst gap-0 difference {worst_exact:.2e}, {secs:.1} s {failures:?}"
        ),
    );
    assert!(pass);
}

#[test]
fn risk_trend() {
    let cfg = default_cfg();
    assert_eq!(
        cfg.constellation.num_planes * cfg.constellation.sats_per_plane,
        60
    );
    assert_eq!(
        (cfg.scenario.anchors.len(), cfg.scenario.users_per_slice),
        (5, 10)
    );
    assert_eq!(cfg.constellation.num_epochs, 15);
    assert_eq!(cfg.methods[0].weights, ObjectiveWeights::proposed());
    let exp = default_run();
    let risk = |m| mean(rows(exp, m).map(|r| r.risk.exact));
    let (p, b1, b3) = (risk("proposed"), risk("B1"), risk("B3"));
    let pass = p <= 0.6 * b3 && p <= 0.25 * b1;
    report(
        3,
        "risk trend",
        pass,
        format!("mean exact risk proposed {p:.4}, B3 {b3:.4}, B1 {b1:.4}"),
    );
    assert!(pass);
}

#[test]
fn migration_suppression() {
    let exp = default_run();
    let mig = |m| mean(rows(exp, m).map(|r| r.mig_avoidable as f64));
    let (p, b1, b3) = (mig("proposed"), mig("B1"), mig("B3"));
    let first_zero = exp
        .reports
        .iter()
        .filter(|r| r.epoch == 0)
        .all(|r| r.mig_avoidable == 0);
    let pass = p <= 0.3 * b3 && p <= 0.05 * b1 && first_zero;
    report(
        4,
        "migration suppression",
        pass,
        format!("mean avoidable migrations proposed {p:.2}, B3 {b3:.2}, B1 {b1:.2}; epoch 0 all zero: {first_zero}"),
    );
    assert!(pass);
}

#[test]
fn utilization_ordering() {
    let exp = default_run();
    let util_mean = |m| mean(rows(exp, m).map(|r| r.util_mean_pct));
    let util_peak = |m| rows(exp, m).map(|r| r.util_peak_pct).fold(0.0, f64::max);
    let (pm, b1m) = (util_mean("proposed"), util_mean("B1"));
    let (pp, b3p) = (util_peak("proposed"), util_peak("B3"));
    let all_low = exp
        .reports
        .iter()
        .all(|r| r.util_peak_pct < 20.0 && r.util_mean_pct < 20.0);
    let pass = pm > b1m && pp <= b3p && all_low;
    report(
        5,
        "utilization ordering",
        pass,
        format!("mean util proposed {pm:.3}% > B1 {b1m:.3}%; peak proposed {pp:.2}% vs B3 {b3p:.2}%; all < 20%: {all_low}"),
    );
    assert!(pass);
}

#[test]
fn warm_start_effect() {
    let exp = default_run();
    let p: Vec<_> = rows(exp, "proposed").collect();
    let cold_nodes = p[0].nodes as f64;
    let warm_nodes = mean(p[1..].iter().map(|r| r.nodes as f64));
    let cold_ms = p[0].stage_ms[2];
    let warm_ms = mean(p[1..].iter().map(|r| r.stage_ms[2]));
    let pass = warm_nodes < cold_nodes && warm_ms < cold_ms;
    report(
        6,
        "warm-start effect",
        pass,
        format!("stage-3 nodes cold {cold_nodes} vs warm mean {warm_nodes:.1}; wall time cold {cold_ms:.1} ms vs warm mean {warm_ms:.1} ms"),
    );
    assert!(pass);
}

#[test]
fn annealing_mechanics() {
    let params = SaParams::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let trials = 200_000;
    let k = params.iterations / 3;
    let tk = temperature(&params, k);
    let hits = (0..trials)
        .filter(|_| metropolis_accept(tk, tk, &mut rng))
        .count();
    let rate = hits as f64 / trials as f64;
    let t_mid = temperature(&params, params.iterations / 2);
    let mid_err = (t_mid - (params.t0 * params.t_end).sqrt()).abs();

    let cons = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
    let sc = generate_scenario(42, &ScenarioConfig::default(), cons.len()).unwrap();
    let snap = cons.snapshot(5, &sc.user_locations()).unwrap();
    let prev = greedy_place(&sc, &cons.snapshot(4, &sc.user_locations()).unwrap()).unwrap();
    let ctx = MigrationContext::new(Some(prev), &sc, &snap);
    let start = greedy_place(&sc, &snap).unwrap();
    let (moves, delta_err) = audit_incremental_deltas(
        &start,
        &sc,
        &snap,
        &ctx,
        &ObjectiveWeights::proposed(),
        &normalization_bounds(&sc),
        RiskMode::Exact,
        10_000,
        3,
    );
    let pass =
        (rate - 0.368).abs() <= 0.01 && mid_err <= 1e-9 && moves >= 10_000 && delta_err <= 1e-9;
    report(
        7,
        "annealing mechanics",
        pass,
        format!(
            "acceptance at delta = T: {rate:.4} over {trials} trials; |T_mid - sqrt(T0 T_end)| = {mid_err:.1e}; max delta error {delta_err:.1e} over {moves} moves"
        ),
    );
    assert!(pass);
}

#[test]
fn constraint_soundness() {
    let exp = default_run();
    let sc = &exp.scenario;
    let mut bad = Vec::new();
    for r in &exp.reports {
        let ok = r.placement.as_ref().is_some_and(|p| {
            p.is_complete() && validate(p, sc, &exp.snapshots[r.epoch]).feasible()
        });
        if !ok {
            bad.push(format!("epoch {} {}", r.epoch, r.method));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut injected, mut caught) = (0, 0);
    for r in exp.reports.iter().filter(|r| r.placement.is_some()) {
        let p = r.placement.as_ref().unwrap();
        let snap = &exp.snapshots[r.epoch];

        // capacity: shrink a loaded satellite just below its load
        let loads = satellite_loads(p, sc);
        let loaded: Vec<usize> = (0..loads.len()).filter(|&s| loads[s] > 0.0).collect();
        let s = loaded[rng.gen_range(0..loaded.len())];
        let mut tight = sc.clone();
        tight.capacity_cpu[s] = loads[s] * 0.999;
        injected += 1;
        caught += usize::from(!validate(p, &tight, snap).capacity.is_empty());

        // delay: cut one user's budget below its end-to-end delay
        let fu = rng.gen_range(0..sc.num_users());
        let (n, u) = sc.user_of(fu);
        let d = e2e_delay(p, sc, snap, n, u).unwrap().total();
        let mut strict = sc.clone();
        strict.slices[n].users[u].delay_budget_ms = d * 0.999;
        injected += 1;
        caught += usize::from(!validate(p, &strict, snap).delay.is_empty());

        // visibility: move an ingress to a satellite the user cannot see
        let hidden: Vec<usize> = (0..sc.num_satellites)
            .filter(|&s| !snap.visibility[fu].is_visible(s))
            .collect();
        let e = sc.user_entries(fu).start;
        let mut moved = p.clone();
        moved.assign(e, Slot::new(0, hidden[rng.gen_range(0..hidden.len())]));
        injected += 1;
        caught += usize::from(!validate(&moved, sc, snap).visibility.is_empty());
    }
    let pass = bad.is_empty() && caught == injected && exp.reports.len() == 60;
    report(
        8,
        "constraint soundness",
        pass,
        format!(
            "{} emitted placements, {} invalid {bad:?}; {caught}/{injected} injected violations caught",
            exp.reports.len(),
            bad.len()
        ),
    );
    assert!(pass);
}

#[test]
fn determinism() {
    let cfg = default_cfg();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    emit_csv(&default_run().reports, &a, cfg.report_wall_times).unwrap();
    emit_csv(
        &run_experiment(&cfg).unwrap().reports,
        &b,
        cfg.report_wall_times,
    )
    .unwrap();
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    let pass = a == b && !a.is_empty();
    report(
        9,
        "determinism",
        pass,
        format!(
            "two runs with seed {}: {} bytes, identical: {}",
            cfg.seed,
            a.len(),
            a == b
        ),
    );
    assert!(pass);
}
