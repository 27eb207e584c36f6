use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid of {points} points cannot represent {max_mode} modes (need at least {required})")]
    GridTooSmall {
        points: usize,
        max_mode: usize,
        required: usize,
    },

    #[error("mode 0 of a real field must have zero imaginary part (got {0})")]
    ComplexMean(f64),

    #[error("coefficient array must contain at least mode 0")]
    EmptyField,

    #[error("invalid Sobolev index {0}")]
    InvalidSobolevIndex(f64),

    #[error("perturbation multiplier V({mode}) = {value} must exceed -1")]
    InvalidPerturbation { mode: usize, value: f64 },

    #[error("max_mode mismatch: {0} vs {1}")]
    ModeMismatch(usize, usize),

    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("truncation {truncation} exceeds field max_mode {max_mode}")]
    TruncationTooLarge { truncation: usize, max_mode: usize },

    #[error("non-finite coefficients at t = {time}; reduce dt")]
    BlowUp { time: f64 },

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("brute-force transport limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("Sinkhorn did not converge in {iterations} iterations (marginal error {residual:e})")]
    SinkhornNotConverged { iterations: usize, residual: f64 },

    #[error("no constant on the search grid satisfies scenario {worst} (needs C >= {required:e})")]
    CalibrationFailed { worst: usize, required: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn at_sample(self, index: usize) -> Self {
        Error::Sample {
            index,
            source: Box::new(self),
        }
    }
}
