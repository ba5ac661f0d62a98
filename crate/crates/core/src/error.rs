//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("inverse transform left an imaginary residue of {residue:e}; input spectrum is not Hermitian")]
    NonHermitianInput { residue: f64 },

    #[error("block level {level} outside the resolvable range 0..={max}")]
    LevelOutOfRange { level: i32, max: i32 },

    #[error("mollifier construction failed: {0}")]
    MomentSolveFailed(String),

    #[error("parameter constraint violated: {0}")]
    ParamConstraintViolated(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("data of support radius {radius} propagated for time {time} wraps around the box of half-width {half_width}")]
    WrapAroundRisk {
        radius: f64,
        time: f64,
        half_width: f64,
    },

    #[error("times must satisfy 0 <= s <= t <= 1 (got s = {s}, t = {t})")]
    BadTimeOrder { s: f64, t: f64 },

    #[error("path has no time slices")]
    EmptyPath,

    #[error("spectral measure is not integrable near the origin: {0}")]
    NonIntegrableAtOrigin(String),

    #[error("temporal covariance is not positive definite")]
    CholeskyFailure,

    #[error("time partition mismatch: {0}")]
    PartitionMismatch(String),

    #[error("Riemann sums failed to converge: Cauchy differences grew at levels {levels:?}")]
    NotConverging { levels: Vec<u32> },

    #[error("Picard iteration diverged: increments {deltas:?}")]
    PicardDiverged { deltas: Vec<f64> },

    #[error("no admissible exponents: {0}")]
    Infeasible(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
