//! The whole pipeline instantiated at `f32`.

use leo_sfc::harness::{run_experiment, ExperimentConfig};
use leo_sfc::placement::validate;
use leo_sfc::risk::risk_triple;

const TINY: &str = include_str!("../../../configs/tiny.toml");

#[test]
fn tiny_experiment_runs_in_single_precision() {
    let cfg = ExperimentConfig::<f32>::from_toml_str(TINY).unwrap();
    let exp = run_experiment(&cfg).unwrap();
    assert_eq!(
        exp.reports.len(),
        cfg.constellation.num_epochs * cfg.methods.len()
    );
    for r in &exp.reports {
        let p = r.placement.as_ref().expect("tiny config is feasible");
        assert!(validate(p, &exp.scenario, &exp.snapshots[r.epoch]).feasible());
        let t = risk_triple(p, &exp.scenario).unwrap();
        assert!(t.lb <= t.exact && t.exact <= t.ub);
        assert!(r.objective.is_finite());
    }
}

#[test]
fn single_and_double_precision_agree_on_risk() {
    let lo = run_experiment(&ExperimentConfig::<f32>::from_toml_str(TINY).unwrap()).unwrap();
    let hi = run_experiment(&ExperimentConfig::<f64>::from_toml_str(TINY).unwrap()).unwrap();
    // placements may differ at ties; recompute the f64 risk of each f32 placement instead
    for r in &lo.reports {
        let p = r.placement.as_ref().unwrap();
        let exact64 = risk_triple(p, &hi.scenario).unwrap().exact;
        assert!((f64::from(r.risk.exact) - exact64).abs() <= 1e-4 * exact64.abs().max(1.0));
    }
}
