use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("two-photon pump must be positive, got G = {0}")]
    NonPositivePump(f64),
    #[error("rate `{name}` must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("parameter `{0}` is not finite")]
    NonFiniteParameter(&'static str),
    #[error("no bistability: only the trivial fixed point exists for these parameters")]
    NoBistability,
    #[error("Fock truncation N = {got} is too small (need at least {min})")]
    TruncationTooSmall { got: usize, min: usize },
    #[error("steady state leaks into the top Fock level (occupation {occupation:.3e} at N = {truncation}); increase N")]
    TruncationLeak { truncation: usize, occupation: f64 },
    #[error("dense eigensolve did not converge")]
    EigensolveFailed,
    #[error("steady-state linear solve is singular")]
    SingularSteadyState,
    #[error("the gap solver needs two-photon dissipation eta > 0")]
    EtaZero,
    #[error("complex potential is singular at this point (log argument vanishes)")]
    PotentialSingularity,
    #[error("Hessian determinant ratio is not positive; outside the Eyring-Kramers domain")]
    NegativeDeterminantRatio,
    #[error("hypergeometric series did not converge within {0} terms")]
    MaxTermsExceeded(usize),
    #[error("lower hypergeometric parameter is a non-positive integer (Pochhammer pole)")]
    LowerParameterPole,
    #[error("trajectory became non-finite; reduce the time step")]
    NonFinite,
    #[error("no trajectory escaped before the time cutoff")]
    AllCensored,
    #[error("critical-ratio predicate has the same value at both ends of the bracket")]
    PredicateNotBracketed,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used for per-cell status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositivePump(_) => "non_positive_pump",
            Error::NegativeRate { .. } => "negative_rate",
            Error::NonFiniteParameter(_) => "non_finite_parameter",
            Error::NoBistability => "no_bistability",
            Error::TruncationTooSmall { .. } => "truncation_too_small",
            Error::TruncationLeak { .. } => "truncation_leak",
            Error::EigensolveFailed => "eigensolve_failed",
            Error::SingularSteadyState => "singular_steady_state",
            Error::EtaZero => "eta_zero",
            Error::PotentialSingularity => "potential_singularity",
            Error::NegativeDeterminantRatio => "negative_determinant_ratio",
            Error::MaxTermsExceeded(_) => "max_terms_exceeded",
            Error::LowerParameterPole => "lower_parameter_pole",
            Error::NonFinite => "non_finite",
            Error::AllCensored => "all_censored",
            Error::PredicateNotBracketed => "predicate_not_bracketed",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }

    /// Whether the error stems from bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonPositivePump(_)
                | Error::NegativeRate { .. }
                | Error::NonFiniteParameter(_)
                | Error::InvalidGrid(_)
                | Error::InvalidSpec(_)
                | Error::InvalidArgument(_)
                | Error::Config { .. }
                | Error::TruncationTooSmall { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
