use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("epoch {epoch} out of range (num_epochs = {num_epochs})")]
    EpochOutOfRange { epoch: usize, num_epochs: usize },

    #[error("risk weight requested for self-pair (slice {0})")]
    SelfPair(usize),

    #[error("risk bound sandwich violated: lb = {lb}, exact = {exact}, ub = {ub}")]
    Sandwich { lb: f64, exact: f64, ub: f64 },

    #[error("user ({slice}, {user}) is not fully assigned")]
    Incomplete { slice: usize, user: usize },

    #[error("ingress satellite {sat} not visible to user ({slice}, {user})")]
    IngressNotVisible {
        slice: usize,
        user: usize,
        sat: usize,
    },

    #[error("no ISL route between satellites {from} and {to}")]
    Unreachable { from: usize, to: usize },

    #[error("no feasible satellite for user ({slice}, {user}) at chain position {position}")]
    InfeasibleUser {
        slice: usize,
        user: usize,
        position: usize,
    },

    #[error("search space of {leaves:e} leaves exceeds the cap of {cap:e}")]
    SearchSpaceTooLarge { leaves: f64, cap: f64 },

    #[error("no feasible placement exists")]
    NoFeasiblePlacement,

    #[error("placement record error: {0}")]
    PlacementFormat(String),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
