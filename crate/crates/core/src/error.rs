use thiserror::Error;

/// Errors raised by the copula, estimation and testing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("copula is not symmetric (max |C(u,v) - C(v,u)| = {0:e})")]
    NotSymmetric(f64),
    #[error("copula is not invariant under reflections (max deviation {0:e})")]
    NotInvariant(f64),
    #[error("invalid FGM generators: {0}")]
    InvalidGenerators(String),
    #[error("invalid Pickands dependence function: {0}")]
    InvalidPickands(String),
    #[error("invalid Archimedean generator: {0}")]
    InvalidGenerator(String),
    #[error("copula has neither a sampler nor a Markov kernel")]
    NoSamplingPath,
    #[error("copula has no Markov kernel")]
    NoKernel,
    #[error("copula has no density")]
    NoDensity,
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {err:e})")]
    QuadratureFailure { tol: f64, err: f64 },
    #[error("ties present in column {column} (rows {rows:?})")]
    TiesPresent { column: usize, rows: Vec<usize> },
    #[error("too few observations: got {got}, need at least {need}")]
    TooFewObservations { got: usize, need: usize },
    #[error("ordering violated: first copula does not precede the second")]
    OrderViolated,
    #[error("degenerate bootstrap variance {0:e}")]
    DegenerateVariance(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
