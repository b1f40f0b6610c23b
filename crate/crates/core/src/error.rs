use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    ShapeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("nuclear spin multiplicity must be positive")]
    ZeroMultiplicity,

    #[error("operation requires the 2-dim singlet/triplet space, got dim {0}")]
    NotStSpace(usize),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure at t = {time}: {reason}")]
    Numeric { time: f64, reason: String },

    #[error("cannot step a recombined (dead) state")]
    DeadState,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("conditional ensemble is empty at t = {0}")]
    EmptyEnsemble(f64),

    #[error("information gain requires a Jones-Hore series")]
    NotJonesHore,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
