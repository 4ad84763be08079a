//! Risk-aware placement of security service function chains on a LEO
//! constellation that moves between epochs.
//!
//! Everything numeric is generic over [`num::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the CLI and the
//! shipped configurations use.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constellation;
pub mod error;
pub mod harness;
pub mod num;
pub mod placement;
pub mod risk;
pub mod scenario;
pub mod solver;

#[cfg(test)]
pub(crate) mod testkit;

pub use error::{Error, Result};

/// Default scalar.
pub type Scalar = f64;
pub type WalkerConfig = constellation::WalkerConfig<Scalar>;
pub type Constellation = constellation::Constellation<Scalar>;
pub type Snapshot = constellation::ConstellationSnapshot<Scalar>;
pub type Scenario = scenario::Scenario<Scalar>;
pub type ScenarioConfig = scenario::ScenarioConfig<Scalar>;
pub type RiskTriple = risk::RiskTriple<Scalar>;
pub type ObjectiveWeights = solver::ObjectiveWeights<Scalar>;
pub type SolverConfig = solver::SolverConfig<Scalar>;
pub type SolveResult = solver::SolveResult<Scalar>;
pub type ExperimentConfig = harness::ExperimentConfig<Scalar>;
pub type EpochReport = harness::EpochReport<Scalar>;
