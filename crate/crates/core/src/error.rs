use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spin sector: 2S = {twice_s} (need 2S >= 1)")]
    InvalidSector { twice_s: i64 },

    #[error("invalid temperature {0} (must be finite and > 0)")]
    InvalidTemperature(f64),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("invalid squeezing parameter r = {0} (must be >= 0)")]
    InvalidSqueezing(f64),

    #[error("eigensolver did not converge for eigenvalue {index} of a {order}x{order} matrix")]
    EigensolverFailure { order: usize, index: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionError { expected: usize, found: usize },

    #[error("parameter mismatch between runs: {0}")]
    ParameterMismatch(String),

    #[error("pair (2n = {twice_n}, 2m = {twice_m}) is classically forbidden for 2S = {twice_s}")]
    ClassicallyForbidden {
        twice_s: u32,
        twice_n: i32,
        twice_m: i32,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no row operates as an engine (W > 0)")]
    NoEngineOperation,

    #[error("label 2n = {twice_n} is not in the sector with 2S = {twice_s}")]
    InvalidLabel { twice_s: u32, twice_n: i32 },

    #[error("N = {n}: {source}")]
    AtSize {
        n: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_size(self, n: u32) -> Self {
        Error::AtSize {
            n,
            source: Box::new(self),
        }
    }

    /// The underlying error with any `AtSize` context peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtSize { source, .. } => source.root(),
            e => e,
        }
    }
}
