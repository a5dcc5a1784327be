use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("prime {0} does not split")]
    NonSplitPrime(u64),
    #[error("class number formula gave a non-integral value: {0}")]
    NonIntegralResult(String),
    #[error("orders are not nested as required: {0}")]
    ConductorMismatch(String),
    #[error("not a valid field discriminant: {0}")]
    InvalidDiscriminant(i64),
    #[error("no finite twist satisfies the unit congruence: {0}")]
    NoSolution(String),
    #[error("class number {0} > 1 is not supported here")]
    ClassNumberUnsupported(u64),
    #[error("character is not primitive: {0}")]
    NotPrimitive(String),
    #[error("conductor exponent s = {s} lies in the excluded range 1 <= s < ord_p(N0) = {ord}")]
    ConductorGap { s: u32, ord: u32 },
    #[error("internal consistency check failed: {0}")]
    InternalMismatch(String),
    #[error("a(l) vanishes at split prime {0}")]
    VanishingSplitCoefficient(u64),
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("multiplicativity fails: a({0}) != a({1}) a({2})")]
    MultiplicativityError(u64, u64, u64),
    #[error("Hecke recursion fails at p = {0}, exponent {1}")]
    RecursionError(u64, u32),
    #[error("p-adic precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by p^{0} is not exact")]
    DivisionNotExact(u32),
    #[error("cyclotomic level p^{have} too small, need p^{need}")]
    CyclotomicLevelTooSmall { have: u32, need: u32 },
    #[error("coefficient a({0}) is not p-integral")]
    CoefficientNotIntegral(usize),
    #[error("component measure {0} is not supported on units")]
    NotDepleted(usize),
    #[error("series tail {tail:e} too large relative to value {value:e}")]
    PrecisionLoss { tail: f64, value: f64 },
    #[error("representatives do not cover the class group: {0}")]
    IncompleteRepresentatives(String),
    #[error("division by zero at prime {0}")]
    DivisionByZero(u64),
    #[error("Dirichlet series converges too slowly: last term {0:e}")]
    SlowConvergence(f64),
    #[error("p^M exceeds the supported modulus range: {0}")]
    PrecisionTooLarge(String),
    #[error("character type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable variant name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::BoundExceeded(_) => "BoundExceeded",
            Error::NonSplitPrime(_) => "NonSplitPrime",
            Error::NonIntegralResult(_) => "NonIntegralResult",
            Error::ConductorMismatch(_) => "ConductorMismatch",
            Error::InvalidDiscriminant(_) => "InvalidDiscriminant",
            Error::NoSolution(_) => "NoSolution",
            Error::ClassNumberUnsupported(_) => "ClassNumberUnsupported",
            Error::NotPrimitive(_) => "NotPrimitive",
            Error::ConductorGap { .. } => "ConductorGap",
            Error::InternalMismatch(_) => "InternalMismatch",
            Error::VanishingSplitCoefficient(_) => "VanishingSplitCoefficient",
            Error::SchemaError(_) => "SchemaError",
            Error::MultiplicativityError(..) => "MultiplicativityError",
            Error::RecursionError(..) => "RecursionError",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::DivisionNotExact(_) => "DivisionNotExact",
            Error::CyclotomicLevelTooSmall { .. } => "CyclotomicLevelTooSmall",
            Error::CoefficientNotIntegral(_) => "CoefficientNotIntegral",
            Error::NotDepleted(_) => "NotDepleted",
            Error::PrecisionLoss { .. } => "PrecisionLoss",
            Error::IncompleteRepresentatives(_) => "IncompleteRepresentatives",
            Error::DivisionByZero(_) => "DivisionByZero",
            Error::SlowConvergence(_) => "SlowConvergence",
            Error::PrecisionTooLarge(_) => "PrecisionTooLarge",
            Error::TypeMismatch(_) => "TypeMismatch",
            Error::Unsupported(_) => "Unsupported",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
