use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected L={expected_l}, N={expected_n}; got L={got_l}, N={got_n}")]
    GridMismatch {
        expected_l: f64,
        expected_n: usize,
        got_l: f64,
        got_n: usize,
    },

    #[error("profile contains a non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("parity tag {tag} violated: defect {defect:e}")]
    ParityViolation { tag: &'static str, defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shifted symbol is not positive at tau = {tau}: value {value:e}")]
    NonPositiveShiftedSymbol { tau: f64, value: f64 },

    #[error("input profile is identically zero")]
    ZeroInput,

    #[error("iteration collapsed: <Q, Q^(alpha+1)> = {0:e} at iteration {1}")]
    Collapse(f64, usize),

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("singular jacobian: even-subspace gap {gap:e} below floor {floor:e}")]
    SingularJacobian { gap: f64, floor: f64 },

    #[error("newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("exponent window violated: {0}")]
    WindowViolation(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("identity violated: {0}")]
    IdentityViolation(String),

    #[error("profile support reaches the grid boundary: {0}")]
    SupportViolation(String),

    #[error("diagonal contribution is {0:.3} of the total")]
    DiagonalHandling(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the caller's input rather than by the numerics.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::GridMismatch { .. }
                | Error::ParityViolation { .. }
                | Error::InvalidParameter(_)
                | Error::NonPositiveShiftedSymbol { .. }
                | Error::ZeroInput
                | Error::WindowViolation(_)
                | Error::SupportViolation(_)
                | Error::Parse(_)
        )
    }
}
