use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("denominator of {value} is divisible by p = {p}")]
    DenominatorNotUnit { value: String, p: u64 },

    #[error("requested {requested} digits but only {available} are known")]
    PrecisionExceeded { requested: u32, available: u32 },

    #[error("cannot invert a non-unit (valuation {valuation})")]
    NonUnitDivisor { valuation: u32 },

    #[error("series constant term is not a unit")]
    NonUnitConstantTerm,

    #[error("constant term matrix is singular modulo p^{precision}")]
    SingularConstantTerm { precision: u32 },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("denominator factor vanishes identically at degree {degree}")]
    DegenerateDenominator { degree: usize },

    #[error("value did not stabilize modulo p^{target} up to representative precision {last}")]
    NoStabilization { target: u32, last: u32 },

    #[error("no candidate survived at stage {stage} (try a larger order or pole bound)")]
    NoSurvivor { stage: usize },

    #[error("{count} candidates survive at stage {stage}; digits are ambiguous")]
    MultipleSurvivors { stage: usize, count: usize, sample: Vec<Vec<Vec<u32>>> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
