use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::constellation::{build_walker_star, WalkerConfig};
use crate::placement::{validate, Slot};
use crate::scenario::{generate_scenario, RiskCounting, ScenarioConfig, VnfKind};
use crate::testkit::{line_snapshot, toy_scenario};

use VnfKind::*;

fn walker_case(seed: u64, epoch: usize) -> (Scenario<f64>, ConstellationSnapshot<f64>) {
    let c = build_walker_star(&WalkerConfig::default()).unwrap();
    let sc = generate_scenario(seed, &ScenarioConfig::default(), c.len()).unwrap();
    let snap = c.snapshot(epoch, &sc.user_locations()).unwrap();
    (sc, snap)
}

fn quick_cfg() -> SolverConfig<f64> {
    SolverConfig {
        sa: SaParams {
            iterations: 3_000,
            ..SaParams::default()
        },
        bnb: BnbConfig {
            node_budget: Some(300),
            ..BnbConfig::default()
        },
        ..SolverConfig::default()
    }
}

#[test]
fn acceptance_probability_matches_closed_form() {
    let p = acceptance_probability(0.1, 0.5);
    assert!((p - (-0.2f64).exp()).abs() < 1e-12);
    assert!((p - 0.818730753).abs() < 1e-9);
    assert_eq!(acceptance_probability(-1.0, 0.5), 1.0);
    assert_eq!(acceptance_probability(0.0, 0.5), 1.0);
}

#[test]
fn schedule_midpoint_is_geometric_mean() {
    let p = SaParams::<f64> {
        t0: 1.0,
        t_end: 0.01,
        iterations: 1000,
        ..SaParams::default()
    };
    assert!((temperature(&p, 500) - 0.1).abs() < 1e-12);
    assert_eq!(temperature(&p, 0), 1.0);
    assert!(temperature(&p, 999) > p.t_end);
}

#[test]
fn downhill_moves_always_accepted() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!((0..100).all(|_| metropolis_accept(-1e-3, 1e-9, &mut rng)));
    let hits = (0..20_000)
        .filter(|_| metropolis_accept(0.1, 0.5, &mut rng))
        .count();
    let rate = hits as f64 / 20_000.0;
    assert!((rate - 0.8187).abs() < 0.015, "rate {rate}");
}

#[test]
fn bad_parameters_rejected() {
    let p = SaParams::<f64> {
        t0: 0.01,
        t_end: 1.0,
        ..SaParams::default()
    };
    assert!(p.validate().is_err());
    assert!(ObjectiveWeights::new(0.5, 0.5, 0.5).is_err());
    assert!(BnbConfig::<f64> {
        gap: -0.1,
        ..BnbConfig::default()
    }
    .validate()
    .is_err());
}

#[test]
fn greedy_is_feasible_on_walker_scenario() {
    let (sc, snap) = walker_case(42, 0);
    let p = greedy_place(&sc, &snap).unwrap();
    assert!(validate(&p, &sc, &snap).feasible());
}

#[test]
fn greedy_reports_user_that_cannot_fit() {
    let sc = toy_scenario(&[&[Fw, Ids]], &[1], 2, 0.5, 1);
    let snap = line_snapshot(2, 1.0, vec![vec![0]], 2.0);
    match greedy_place(&sc, &snap) {
        Err(Error::InfeasibleUser {
            slice: 0, user: 0, ..
        }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn incremental_objective_tracks_full_recompute() {
    let (sc, snap) = walker_case(7, 3);
    let start = greedy_place(&sc, &snap).unwrap();
    let norms = normalization_bounds(&sc);
    let prev = greedy_place(&sc, &walker_case(7, 2).1).unwrap();
    let ctx = MigrationContext::new(Some(prev), &sc, &snap);
    for mode in [RiskMode::Exact, RiskMode::CoarseLb] {
        let (n, err) = audit_incremental_deltas(
            &start,
            &sc,
            &snap,
            &ctx,
            &ObjectiveWeights::proposed(),
            &norms,
            mode,
            10_000,
            11,
        );
        assert_eq!(n, 10_000);
        assert!(err < 1e-9, "{mode:?}: {err}");
    }
}

#[test]
fn incremental_objective_tracks_full_recompute_assignment_counting() {
    let (mut sc, snap) = walker_case(8, 1);
    sc.risk_counting = RiskCounting::Assignment;
    let start = greedy_place(&sc, &snap).unwrap();
    let ctx = MigrationContext::initial(&sc);
    let (n, err) = audit_incremental_deltas(
        &start,
        &sc,
        &snap,
        &ctx,
        &ObjectiveWeights::proposed(),
        &normalization_bounds(&sc),
        RiskMode::Exact,
        3_000,
        5,
    );
    assert_eq!(n, 3_000);
    assert!(err < 1e-9, "{err}");
}

#[test]
fn stages_never_worsen_the_objective() {
    for (seed, epoch) in [(1, 0), (2, 5), (3, 9)] {
        let (sc, snap) = walker_case(seed, epoch);
        let r = hybrid_solve(
            &sc,
            &snap,
            None,
            &ObjectiveWeights::proposed(),
            &quick_cfg(),
        )
        .unwrap();
        let [g, s, b] = r.stage_objectives;
        assert!(g >= s && s >= b, "{g} {s} {b}");
        assert!(validate(&r.placement, &sc, &snap).feasible());
        let recombined = r.terms.combine(&ObjectiveWeights::proposed(), &r.norms);
        assert!((recombined - r.objective).abs() < 1e-9);
    }
}

#[test]
fn solve_is_deterministic_across_restarts() {
    let (sc, snap) = walker_case(4, 2);
    let mut cfg = quick_cfg();
    cfg.sa.restarts = 3;
    cfg.sa.seed = 99;
    let a = hybrid_solve(&sc, &snap, None, &ObjectiveWeights::proposed(), &cfg).unwrap();
    let b = hybrid_solve(&sc, &snap, None, &ObjectiveWeights::proposed(), &cfg).unwrap();
    assert_eq!(a.placement, b.placement);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.nodes, b.nodes);
}

#[test]
fn zero_node_budget_returns_incumbent() {
    let (sc, snap) = walker_case(5, 0);
    let start = greedy_place(&sc, &snap).unwrap();
    let ctx = MigrationContext::initial(&sc);
    let norms = normalization_bounds(&sc);
    let w = ObjectiveWeights::proposed();
    let cfg = BnbConfig {
        node_budget: Some(0),
        ..BnbConfig::default()
    };
    let out =
        branch_and_bound(&start, &sc, &snap, &ctx, &w, &norms, RiskMode::Exact, &cfg).unwrap();
    assert_eq!(out.placement, start);
    assert_eq!(out.nodes, 0);
    assert_eq!(
        out.objective,
        objective(&start, &ctx, &w, &norms, &sc, RiskMode::Exact)
    );
}

#[test]
fn user_without_coverage_is_infeasible() {
    let sc = toy_scenario(&[&[Fw]], &[2], 3, 100.0, 1);
    let snap = line_snapshot(3, 1.0, vec![vec![0], vec![]], 2.0);
    match hybrid_solve(
        &sc,
        &snap,
        None,
        &ObjectiveWeights::proposed(),
        &SolverConfig::default(),
    ) {
        Err(Error::InfeasibleUser {
            slice: 0,
            user: 1,
            position: 0,
        }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn brute_force_refuses_huge_spaces() {
    let (sc, snap) = walker_case(1, 0);
    let ctx = MigrationContext::initial(&sc);
    let r = brute_force(
        &sc,
        &snap,
        &ctx,
        &ObjectiveWeights::proposed(),
        &normalization_bounds(&sc),
        RiskMode::Exact,
        BRUTE_FORCE_LEAF_CAP,
    );
    assert!(matches!(r, Err(Error::SearchSpaceTooLarge { .. })));
}

/// Random tiny instance: up to three slices, chains of one or two VNFs,
/// one or two users each, four satellites on a line.
fn tiny_instance(
) -> impl Strategy<Value = (Scenario<f64>, ConstellationSnapshot<f64>, Option<Placement>)> {
    let kinds = prop::sample::select(vec![Fw, Ids, Enc]);
    (
        prop::collection::vec(prop::collection::vec(kinds, 1..=2), 2..=3),
        prop::collection::vec(1usize..=2, 3),
        prop::collection::vec(prop::collection::vec(0usize..4, 1..=2), 6),
        1.0f64..6.0,
        any::<bool>(),
        0u64..1000,
    )
        .prop_filter_map(
            "search space too large",
            |(chains, users, vis, cap, warm, seed)| {
                let refs: Vec<&[VnfKind]> = chains.iter().map(|c| c.as_slice()).collect();
                let users = &users[..chains.len()];
                let mut sc = toy_scenario(&refs, users, 4, cap, 2);
                sc.risk.isolation = vec![vec![0.5; chains.len()]; chains.len()];
                let leaves = 8f64.powi(sc.entries().len() as i32);
                if leaves > 3e5 {
                    return None;
                }
                let snap = line_snapshot(4, 1.0, vis[..sc.num_users()].to_vec(), 2.0);
                let prev = if warm {
                    // any complete assignment works as a previous epoch
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    use rand::Rng;
                    Some(Placement::from_slots(
                        (0..sc.entries().len())
                            .map(|_| Some(Slot::new(rng.gen_range(0..2), rng.gen_range(0..4))))
                            .collect(),
                    ))
                } else {
                    None
                };
                Some((sc, snap, prev))
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_search_matches_brute_force((sc, snap, prev) in tiny_instance(), coarse in any::<bool>()) {
        let mode = if coarse { RiskMode::CoarseLb } else { RiskMode::Exact };
        let ctx = MigrationContext::new(prev, &sc, &snap);
        let norms = normalization_bounds(&sc);
        let w = ObjectiveWeights::proposed();
        let brute = brute_force(&sc, &snap, &ctx, &w, &norms, mode, BRUTE_FORCE_LEAF_CAP);
        let Ok(start) = greedy_place(&sc, &snap) else {
            // greedy may miss a tight packing; nothing to warm-start from
            return Ok(());
        };
        let (_, best) = brute.unwrap();
        let cfg = BnbConfig { gap: 0.0, node_budget: None, time_budget_ms: None };
        let out = branch_and_bound(&start, &sc, &snap, &ctx, &w, &norms, mode, &cfg).unwrap();
        prop_assert!(out.completed);
        prop_assert!((out.objective - best).abs() < 1e-9, "bnb {} brute {}", out.objective, best);
        prop_assert!(validate(&out.placement, &sc, &snap).feasible());
        prop_assert_eq!(out.gap, 0.0);
    }

    #[test]
    fn annealing_never_returns_worse_than_its_start((sc, snap, prev) in tiny_instance(), seed in 0u64..50) {
        let Ok(start) = greedy_place(&sc, &snap) else { return Ok(()); };
        let ctx = MigrationContext::new(prev, &sc, &snap);
        let norms = normalization_bounds(&sc);
        let w = ObjectiveWeights::proposed();
        let params = SaParams { iterations: 500, seed, ..SaParams::default() };
        let out = sa_optimize(&start, &sc, &snap, &ctx, &w, &norms, &params, RiskMode::Exact).unwrap();
        prop_assert!(validate(&out.placement, &sc, &snap).feasible());
        prop_assert!(out.objective <= objective(&start, &ctx, &w, &norms, &sc, RiskMode::Exact) + 1e-12);
    }
}

#[test]
fn incremental_flows_match_validator() {
    let (sc, snap) = walker_case(3, 4);
    let p = greedy_place(&sc, &snap).unwrap();
    let ctx = MigrationContext::initial(&sc);
    let scales = objective::Scales::new(&ObjectiveWeights::proposed(), &normalization_bounds(&sc));
    let st = state::EvalState::from_placement(&sc, &snap, &ctx, scales, RiskMode::Exact, &p);
    assert_eq!(
        st.flows_snapshot(),
        crate::placement::check_isl_capacity(&p, &snap, &sc).flows
    );
}

#[test]
fn hybrid_recovers_when_greedy_strands_a_user() {
    // tight capacity on the tiny config strands greedy on a few epochs
    let base: crate::harness::ExperimentConfig<f64> =
        crate::harness::ExperimentConfig::from_toml_str(include_str!(
            "../../../../configs/tiny.toml"
        ))
        .unwrap();
    let mut hit = false;
    for seed in 0..40 {
        let mut cfg = base.clone();
        cfg.seed = seed;
        let (sc, snaps) = cfg.build().unwrap();
        for snap in &snaps {
            if snap.visibility.iter().any(|v| v.visible.is_empty())
                || greedy_place(&sc, snap).is_ok()
            {
                continue;
            }
            let ctx = MigrationContext::initial(&sc);
            let norms = normalization_bounds(&sc);
            let w = ObjectiveWeights::proposed();
            if brute_force(
                &sc,
                snap,
                &ctx,
                &w,
                &norms,
                RiskMode::Exact,
                BRUTE_FORCE_LEAF_CAP,
            )
            .is_err()
            {
                continue;
            }
            hit = true;
            let r = hybrid_solve(&sc, snap, None, &w, &cfg.solver).unwrap();
            assert!(validate(&r.placement, &sc, snap).feasible());
        }
    }
    assert!(hit, "no stranded instance among the seeds");
}
