use thiserror::Error;

/// Errors produced by the field, state, geometry and dynamics routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("degenerate state: the wavefunction vanishes identically")]
    DegenerateState,

    #[error("value is masked at grid index {0}")]
    Masked(usize),

    #[error("wavefunction is not normalized (integral of |psi|^2 = {0})")]
    NotNormalized(f64),

    #[error("state does not fit the grid: {0}")]
    Truncation(String),

    #[error("state kind `{0}` is not an energy eigenstate")]
    NotEigenstate(String),

    #[error("no closed-form Fermi set for state kind `{0}`")]
    NoClosedForm(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("position lies outside the grid")]
    OutOfDomain,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite; symplectic spectrum undefined")]
    NotPositiveDefinite,

    #[error("symplectic eigenvalues are not paired (mismatch {0:e})")]
    UnpairedSpectrum(f64),

    #[error("conjugate plane {axis} is coupled to other coordinates (entry {value:e})")]
    NotSeparable { axis: usize, value: f64 },

    #[error("propagation aborted at step {step} (t = {time}): norm drift {drift:e}")]
    PropagationAborted { step: usize, time: f64, drift: f64 },

    #[error("node formed during nonlinear evolution at step {step} (t = {time})")]
    NodeFormation { step: usize, time: f64 },

    #[error("time series frames are not uniformly spaced")]
    NonUniformTimes,

    #[error("time series needs at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
