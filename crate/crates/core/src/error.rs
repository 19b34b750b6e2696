use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {re} + {im}i is outside the domain: {reason}")]
    Domain { re: f64, im: f64, reason: String },

    #[error("quadrature did not reach tolerance: estimated error {error:e} on value {value:e}")]
    QuadratureFailure { value: f64, error: f64 },

    #[error("multiplicative convolution is not valid: {0}")]
    Validity(String),

    #[error("moment requirement violated: {0}")]
    Moment(String),

    #[error("fixed-point iteration did not converge in {max_iter} iterations (residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("no theorem covers alpha = {alpha}, p = {p}: {reason}")]
    OutOfRegion { alpha: f64, p: u32, reason: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("x = {x} is within atom range (eps*|G| = {weight:e})")]
    AtomProximity { x: f64, weight: f64 },

    #[error("precision budget exceeded: {flagged} of {total} grid points lost digits to cancellation")]
    PrecisionBudget { flagged: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(z: num_complex::Complex64, reason: impl Into<String>) -> Self {
        Error::Domain { re: z.re, im: z.im, reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
