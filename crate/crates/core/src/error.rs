use thiserror::Error;

/// Failure modes shared by every module.
///
/// The CLI maps these onto exit codes: configuration-type errors to 2,
/// regime errors to 3 and numerical errors to 4 (see [`Error::exit_code`]).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{coordinate} = {value} is outside its domain {domain}")]
    Domain {
        coordinate: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("singular spinor weight: r = 0 has no inverse transform")]
    SingularWeight,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("ill-conditioned asymptotic fit (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("spectral pollution: {0}")]
    Pollution(String),
    #[error("basis under-resolved: reconstruction error {0:.3e}")]
    UnderResolved(f64),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. }
            | Error::Argument(_)
            | Error::Config(_)
            | Error::Shape(_)
            | Error::Precondition(_) => 2,
            Error::Regime(_) => 3,
            Error::SingularWeight
            | Error::IllConditioned { .. }
            | Error::Resolution(_)
            | Error::Numeric(_)
            | Error::Pollution(_)
            | Error::UnderResolved(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
