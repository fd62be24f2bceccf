use thiserror::Error;

/// Errors produced by the simulator and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),

    #[error("closed-form optimum {closed} disagrees with numeric optimum {numeric}")]
    OracleMismatch { closed: f64, numeric: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
