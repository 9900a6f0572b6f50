//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file (XYZ, term list, ...).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Inconsistent or unsupported configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Geometry with (near-)coincident nuclei.
    #[error("singular geometry: {0}")]
    Singularity(String),

    /// Ill-conditioned overlap / linear dependence in the basis.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// Iterative procedure ran out of cycles.
    #[error("{context} did not converge after {cycles} cycles (last energy {last_energy} Ha)")]
    Convergence {
        context: String,
        cycles: usize,
        last_energy: f64,
    },

    /// Qubit or memory budget exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An operation was handed a value that violates its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Random structure packing failed.
    #[error("packing infeasible: {0}")]
    Packing(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
