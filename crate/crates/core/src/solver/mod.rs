//! Three-stage placement solver: greedy construction, simulated annealing,
//! then branch and bound warm-started from the best placement so far.

mod bnb;
mod brute;
mod greedy;
mod objective;
mod sa;
pub(crate) mod state;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use bnb::{branch_and_bound, BnbConfig, BnbOutcome};
pub use brute::{brute_force, BRUTE_FORCE_LEAF_CAP};
pub use greedy::greedy_place;
pub use objective::{
    normalization_bounds, objective, objective_terms, NormalizationBounds, ObjectiveTerms,
    ObjectiveWeights, RiskMode,
};
pub use sa::{
    acceptance_probability, audit_incremental_deltas, metropolis_accept, sa_optimize, temperature,
    SaOutcome, SaParams,
};

use crate::constellation::ConstellationSnapshot;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::placement::{validate, MigrationContext, Placement};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct SolverConfig<T> {
    pub risk_mode: RiskMode,
    pub sa: SaParams<T>,
    pub bnb: BnbConfig<T>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            risk_mode: RiskMode::Exact,
            sa: SaParams::default(),
            bnb: BnbConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub placement: Placement,
    pub objective: T,
    pub terms: ObjectiveTerms<T>,
    pub norms: NormalizationBounds<T>,
    pub ctx: MigrationContext,
    /// Wall time of the three stages.
    pub stage_ms: [f64; 3],
    /// Objective after greedy, annealing and branch and bound.
    pub stage_objectives: [T; 3],
    pub nodes: u64,
    pub gap: T,
    pub completed: bool,
}

/// Slot trials allowed for the construction fallback.
const BACKTRACK_BUDGET: u64 = 200_000;

/// Solves one epoch. `prev` is the previous epoch's placement, if any; it
/// drives the migration term and, when still feasible, can warm-start the
/// exact stage.
pub fn hybrid_solve<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    prev: Option<&Placement>,
    weights: &ObjectiveWeights<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    weights.validate()?;
    let mode = cfg.risk_mode;

    let t = Instant::now();
    for fu in 0..sc.num_users() {
        if snap.visibility[fu].visible.is_empty() {
            let (slice, user) = sc.user_of(fu);
            return Err(Error::InfeasibleUser {
                slice,
                user,
                position: 0,
            });
        }
    }
    let ctx = MigrationContext::new(prev.cloned(), sc, snap);
    let norms = normalization_bounds(sc);
    let t1 = ms(t);

    let t = Instant::now();
    // a stranded greedy pass falls back to a budgeted backtracking search
    let greedy = match greedy_place(sc, snap) {
        Ok(p) => p,
        Err(e) => greedy::backtrack_place(sc, snap, BACKTRACK_BUDGET).ok_or(e)?,
    };
    let g_obj = objective(&greedy, &ctx, weights, &norms, sc, mode);
    let sa = sa_optimize(&greedy, sc, snap, &ctx, weights, &norms, &cfg.sa, mode)?;
    let t2 = ms(t);

    let t = Instant::now();
    let mut start = sa.placement;
    if let Some(p) = prev {
        if p.len() == sc.entries().len() && validate(p, sc, snap).feasible() {
            let v = objective(p, &ctx, weights, &norms, sc, mode);
            if v < sa.objective {
                start = p.clone();
            }
        }
    }
    let bb = branch_and_bound(&start, sc, snap, &ctx, weights, &norms, mode, &cfg.bnb)?;
    let t3 = ms(t);

    let terms = objective_terms(&bb.placement, &ctx, sc, mode);
    Ok(SolveResult {
        placement: bb.placement,
        objective: bb.objective,
        terms,
        norms,
        ctx,
        stage_ms: [t1, t2, t3],
        stage_objectives: [g_obj, sa.objective, bb.objective],
        nodes: bb.nodes,
        gap: bb.gap,
        completed: bb.completed,
    })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests;
