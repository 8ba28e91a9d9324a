use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("covariance spectrum [{min:.6e}, {max:.6e}] is outside [1/eta, eta] with eta = {eta}")]
    SpectrumOutOfClass { min: f64, max: f64, eta: f64 },

    #[error("explicit covariance is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("signal pattern infeasible: {0}")]
    PatternInfeasible(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot split {rows} rows into {parts} parts")]
    TooFewRows { rows: usize, parts: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    DidNotConverge { solver: &'static str, iterations: usize, residual: f64, iterate: Vec<f64> },

    #[error("support of size {support} needs more than {rows} rows")]
    SupportTooLarge { support: usize, rows: usize },

    #[error("quadrature did not reach tolerance (error estimate {0:.3e})")]
    QuadratureFailure(f64),

    #[error("sub-block of {rows} rows is below the minimum of {min}")]
    BlockTooSmall { rows: usize, min: usize },

    #[error("risk curve is not bracketed: risk(lo) = {risk_lo:.4}, risk(hi) = {risk_hi:.4}, gamma = {gamma}")]
    NotBracketed { risk_lo: f64, risk_hi: f64, gamma: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite(_) | Error::DidNotConverge { .. } | Error::QuadratureFailure(_))
    }
}
