use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure a library operation can report.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`]),
/// which the command-line front end uses for its JSON error payloads and exit
/// statuses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("divisor has an infinite coefficient and cannot be negated")]
    InfiniteCoefficient,
    #[error("every generator is zero")]
    AllZero,
    #[error("{0} is not prime")]
    NonPrime(String),
    #[error("prime factor {0} does not fit in 64 bits")]
    PrimeTooLarge(String),
    #[error("insufficient precision at p = {prime}: need {needed} digits, have {available}")]
    InsufficientPrecision {
        prime: u64,
        needed: u64,
        available: u64,
    },
    #[error("scale must be non-negative")]
    NegativeScale,
    #[error("no denominator cap supplied for prime {0}")]
    MissingCap(u64),
    #[error("divisor has an infinite coefficient; the section set is infinite")]
    InfiniteType,
    #[error("scale must be positive")]
    ZeroScale,
    #[error("no multiplier supplied for prime {0}")]
    MissingPrime(u64),
    #[error("element is not in the group of sections")]
    NotInGroup,
    #[error("generator {residue} is not a unit modulo {modulus}")]
    NonUnitGenerator { residue: u64, modulus: u64 },
    #[error("prime {0} ramifies in the cover")]
    Ramified(u64),
    #[error("fiber points lie over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("quadrature did not converge (achieved error {achieved:e})")]
    QuadratureFailure { achieved: f64 },
    #[error("requested {requested} zeros but the table holds {available}")]
    InsufficientZeros { requested: usize, available: usize },
    #[error("|1 - u| vanishes at this place")]
    FixedPointSingular,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroInput => "ZeroInput",
            Error::InfiniteCoefficient => "InfiniteCoefficient",
            Error::AllZero => "AllZero",
            Error::NonPrime(_) => "NonPrime",
            Error::PrimeTooLarge(_) => "PrimeTooLarge",
            Error::InsufficientPrecision { .. } => "InsufficientPrecision",
            Error::NegativeScale => "NegativeScale",
            Error::MissingCap(_) => "MissingCap",
            Error::InfiniteType => "InfiniteType",
            Error::ZeroScale => "ZeroScale",
            Error::MissingPrime(_) => "MissingPrime",
            Error::NotInGroup => "NotInGroup",
            Error::NonUnitGenerator { .. } => "NonUnitGenerator",
            Error::Ramified(_) => "Ramified",
            Error::PrimeMismatch(..) => "PrimeMismatch",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::InsufficientZeros { .. } => "InsufficientZeros",
            Error::FixedPointSingular => "FixedPointSingular",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
        }
    }
}
