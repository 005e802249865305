use thiserror::Error;

#[derive(Debug, Error)]
pub enum VdpError {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coherent amplitude |alpha|^2 = {norm_sq:.3} is unsafe for n_max = {n_max}; need n_max >= {required}")]
    TruncationUnsafe {
        norm_sq: f64,
        n_max: usize,
        required: usize,
    },

    #[error("Hamiltonian variant `{variant}` requires {expected} mode(s), space has {found}")]
    ModeMismatch {
        variant: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time stepping unstable: trace drift {drift:.3e} at t = {time:.4}; retry with dt <= {suggested_dt:.3e}")]
    Unstable {
        drift: f64,
        time: f64,
        suggested_dt: f64,
    },

    #[error("steady-state kernel is not one-dimensional: {0}")]
    DegenerateKernel(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("Langevin integration diverged: |alpha| = {magnitude:.3e} at t = {time:.4} (realization {realization})")]
    Diverged {
        magnitude: f64,
        time: f64,
        realization: usize,
    },

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, VdpError>;
