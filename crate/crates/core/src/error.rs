use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "insufficient sample: population `{population}` has {count} value(s), at least 2 required"
    )]
    InsufficientSample { population: String, count: usize },

    #[error("invalid datum in population `{population}` at index {index}: {value}")]
    InvalidDatum {
        population: String,
        index: usize,
        value: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("objective returned NaN at {point:?}")]
    NanObjective { point: Vec<f64> },

    #[error("optimizer did not converge after {iterations} iterations (best objective {objective}) at {point:?}")]
    NotConverged {
        point: Vec<f64>,
        objective: f64,
        iterations: usize,
        trace: Vec<(usize, f64)>,
    },

    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),

    #[error("{failed} of {trials} trials failed, above the 5% limit; first failure: {first}")]
    TooManyFailures {
        failed: usize,
        trials: usize,
        first: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("window too small: maximizer lies on the grid boundary")]
    WindowTooSmall,

    #[error("non-finite integrand at mu={mu}, sigma_sq={sigma_sq}")]
    NonFiniteIntegrand { mu: f64, sigma_sq: f64 },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid datum at line {line}: {message}")]
    InvalidRecord { line: u64, message: String },

    #[error("duplicate population id `{0}`")]
    DuplicatePopulation(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical or optimizer failure, as opposed to bad input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::NanObjective { .. }
                | Error::NotConverged { .. }
                | Error::DegeneratePrior(_)
                | Error::TooManyFailures { .. }
                | Error::NonFiniteIntegrand { .. }
                | Error::WindowTooSmall
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
