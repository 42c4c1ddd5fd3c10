use thiserror::Error;

use crate::model::SpinBranch;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate scale: |g2~'| = 1 makes the bias and offset singular")]
    DegenerateScale,

    #[error("spectral collapse in the {branch} branch: {reason}")]
    SpectralCollapse { branch: SpinBranch, reason: String },

    #[error("truncation too small: n_max = {n_max} (need at least 2)")]
    TruncationTooSmall { n_max: usize },

    #[error("parity is broken by g2 = {g2:e}; sector projection needs g2 = 0")]
    ParityBroken { g2: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("factorization of H - {shift} I is singular")]
    FactorizationSingular { shift: f64 },

    #[error("truncation cap {cap} exceeded before convergence (last n_max = {last_n_max})")]
    TruncationCapExceeded { cap: usize, last_n_max: usize },

    #[error("spin-filtered displacement is undefined at g2~ = 0")]
    UndefinedForZeroG2,

    #[error("spin component weight {rho:e} is too small")]
    VanishingWeight { rho: f64 },

    #[error("wave-function grid too coarse: norm = {norm}")]
    GridTooCoarse { norm: f64 },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("detector predicate does not change across the bracket")]
    NoSignChange,

    #[error("not found: {0}")]
    NotFound(String),

    #[error("grid is not rectangular: {0}")]
    NonRectangularGrid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::DegenerateScale
                | Error::SpectralCollapse { .. }
                | Error::TruncationTooSmall { .. }
                | Error::ParityBroken { .. }
                | Error::OutOfDomain(_)
                | Error::GridTooCoarse { .. }
                | Error::NonRectangularGrid(_)
                | Error::Config(_)
        )
    }
}
