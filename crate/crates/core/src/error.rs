use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("generator B(t) is not symmetric at t = {t} (residual {residual:e})")]
    AsymmetricGenerator { t: f64, residual: f64 },
    #[error("matrix is not symmetric (residual {0:e})")]
    NotSymmetric(f64),
    #[error("blocks B_pp and B_xx do not commute (residual {0:e})")]
    NonCommutingBlocks(f64),
    #[error("block {0} is singular")]
    SingularBlock(&'static str),
    #[error("B_pp B_xx has a non-positive eigenvalue {0:e}")]
    NegativeSpectrum(f64),
    #[error("symplectic residual {residual:e} at t = {t} exceeds ceiling {ceiling:e}; reduce dt")]
    StepTooLarge { t: f64, residual: f64, ceiling: f64 },
    #[error("multi-index order {order} exceeds the maximum {max}")]
    OrderOverflow { order: usize, max: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("Lambda_p is singular at t = {0}")]
    SingularLambdaP(f64),
    #[error("degenerate frame: Xi is singular")]
    DegenerateFrame,
    #[error("dispersion matrix is not positive definite")]
    NonPositiveDispersion,
    #[error("quadrature form needs nu != 0 (mode {0})")]
    FrameRequiresNu(usize),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("not symplectic: residual of S_p S_x^T - S_x S_p^T is {residual_sym:e}, of S_p S_p^dag - S_x S_x^dag - E is {residual_unit:e}")]
    NotSymplectic { residual_sym: f64, residual_unit: f64 },
    #[error("S_p is singular")]
    SingularSp,
    #[error("overlap matrix D is singular")]
    SingularD,
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
}
