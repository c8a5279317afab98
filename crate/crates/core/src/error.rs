use thiserror::Error;

use crate::distributions::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid step CDF: {0}")]
    InvalidStepCdf(String),

    #[error("invalid piecewise-linear target: {0}")]
    InvalidTarget(String),

    #[error("total mass {0} is below 1")]
    MassBelowOne(Rational),

    #[error("unknown builtin distribution `{0}`")]
    UnknownBuiltin(String),

    #[error("invalid parameters for builtin `{name}`: {reason}")]
    BuiltinParams { name: String, reason: String },

    #[error("marked set is empty")]
    EmptyMarked,

    #[error("residue {residue} is outside 1..={q}")]
    ResidueOutOfRange { residue: u64, q: u64 },

    #[error("residue {0} is listed twice")]
    DuplicateResidue(u64),

    #[error("period must be positive")]
    ZeroPeriod,

    #[error("conditions C violated: {0}")]
    ConditionsViolated(String),

    #[error("not in the class of concave limits: {0}")]
    ClassViolated(String),

    #[error("invalid rational step CDF: {0}")]
    InvalidRationalF(String),

    #[error("invalid stamp parameters: {0}")]
    InvalidStampParams(String),

    #[error("value {0} does not fit the integer range used for periods")]
    TooLarge(String),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(Rational),

    #[error("no rational approximation within {eps} found for mesh sizes up to {max_n}")]
    StarUnreachable { eps: Rational, max_n: u64 },

    #[error("tower of height 2^{m} is shorter than the stamp height {q}")]
    TowerTooShort { m: u32, q: u64 },

    #[error("tower exponent {0} is out of range")]
    TowerExponent(u32),

    #[error("subtower check needs at least two subtowers, got {0}")]
    TooFewSubtowers(u64),

    #[error("epsilon schedule must be strictly decreasing and positive")]
    BadSchedule,

    #[error("invalid system description: {0}")]
    InvalidSystem(String),

    #[error("target event has measure zero")]
    NullTarget,

    #[error("every trajectory was censored at horizon {0}")]
    AllCensored(u64),

    #[error("empty sample")]
    EmptySample,

    #[error("{0}")]
    Parse(String),
}
