use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length of letter {letter} is not positive")]
    NonPositiveLength { letter: usize },
    #[error("permutation is not a bijection onto 1..{d}")]
    NotBijective { d: usize },
    #[error("permutation is reducible: first {k} letters form an invariant block")]
    ReduciblePermutation { k: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {value} outside the domain [0, {bound})")]
    OutOfDomain { value: String, bound: String },
    #[error("operation requires exact arithmetic")]
    FloatModeUnsupported,
    #[error("degenerate lengths at Rauzy step {step}: the two last intervals are equal")]
    DegenerateLengths { step: usize },
    #[error("Zorich block exceeded {cap} Rauzy steps (near-rational input?)")]
    KappaCapExceeded { cap: usize },
    #[error("orbit iteration exceeded horizon {horizon}")]
    HorizonExceeded { horizon: u64 },
    #[error("arrows do not concatenate at position {index}")]
    BrokenChain { index: usize },
    #[error("{what}: nothing found within budget ({stats})")]
    NotFoundWithinBudget { what: String, stats: String },
    #[error("lengths are outside the balanced neighbourhood: spread {spread} > {bound} or not increasing")]
    PreconditionU { spread: String, bound: String },
    #[error("bound D = {d} must exceed m*M = {bound}")]
    PreconditionD { d: String, bound: String },
    #[error("|zeta| = {zeta} must be below half the minimal segment length {half_gamma}")]
    ZetaTooLarge { zeta: String, half_gamma: String },
    #[error("value {value} exceeds the bound M = {bound}")]
    ValueBoundExceeded { value: String, bound: String },
    #[error("cocycle sampling rejected {attempts} draws")]
    RejectionBudgetExceeded { attempts: usize },
    #[error("strip return not found within {cap} steps")]
    CapExceeded { cap: u64 },
    #[error("estimate did not converge: confidence {confidence} above {threshold}")]
    NonConvergence { confidence: f64, threshold: f64 },
    #[error("no returns to the balanced domain within {budget} Zorich steps")]
    NoReturnsWithinBudget { budget: usize },
    #[error("spectral gap condition fails: (1+eps)*theta2/theta1 = {value} >= 1")]
    SpectralGapViolated { value: f64 },
    #[error("no admissible constants: {reason}")]
    NoAdmissibleConstants { reason: String },
    #[error("invalid cocycle: {0}")]
    InvalidCocycle(String),
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveLength { .. } => "NON_POSITIVE_LENGTH",
            Error::NotBijective { .. } => "NOT_BIJECTIVE",
            Error::ReduciblePermutation { .. } => "REDUCIBLE_PERMUTATION",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::OutOfDomain { .. } => "OUT_OF_DOMAIN",
            Error::FloatModeUnsupported => "FLOAT_MODE_UNSUPPORTED",
            Error::DegenerateLengths { .. } => "DEGENERATE_LENGTHS",
            Error::KappaCapExceeded { .. } => "KAPPA_CAP_EXCEEDED",
            Error::HorizonExceeded { .. } => "HORIZON_EXCEEDED",
            Error::BrokenChain { .. } => "BROKEN_CHAIN",
            Error::NotFoundWithinBudget { .. } => "NOT_FOUND_WITHIN_BUDGET",
            Error::PreconditionU { .. } => "PRECONDITION_U",
            Error::PreconditionD { .. } => "PRECONDITION_D",
            Error::ZetaTooLarge { .. } => "ZETA_TOO_LARGE",
            Error::ValueBoundExceeded { .. } => "VALUE_BOUND_EXCEEDED",
            Error::RejectionBudgetExceeded { .. } => "REJECTION_BUDGET_EXCEEDED",
            Error::CapExceeded { .. } => "CAP_EXCEEDED",
            Error::NonConvergence { .. } => "NON_CONVERGENCE",
            Error::NoReturnsWithinBudget { .. } => "NO_RETURNS_WITHIN_BUDGET",
            Error::SpectralGapViolated { .. } => "SPECTRAL_GAP_VIOLATED",
            Error::NoAdmissibleConstants { .. } => "NO_ADMISSIBLE_CONSTANTS",
            Error::InvalidCocycle(_) => "INVALID_COCYCLE",
            Error::BadConfig(_) => "BAD_CONFIG",
            Error::Parse(_) => "PARSE_ERROR",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
