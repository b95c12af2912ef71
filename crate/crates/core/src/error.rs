use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {family} parameter: {reason}")]
    InvalidParameter { family: &'static str, reason: String },

    #[error("quantile {q} maps to an unbounded support endpoint")]
    UnboundedQuantile { q: f64 },

    #[error("operation requires a density but the distribution has atoms")]
    AtomicDistribution,

    #[error("value {x} lies outside the support [{lo}, {hi}]")]
    OutsideSupport { x: f64, lo: f64, hi: f64 },

    #[error("revenue r(1-F(r)) still increasing at the search cap {cap}; supremum not attained")]
    SupremumNotAttained { cap: f64 },

    #[error("supports do not overlap on an interval of positive width")]
    DisjointSupports,

    #[error("weights row {row} sums to {sum}, expected 1")]
    WeightRowSum { row: usize, sum: f64 },

    #[error("negative weight {value} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },

    #[error("malformed market: {0}")]
    MalformedMarket(String),

    #[error("component {index} is not regular")]
    IrregularComponent { index: usize },

    #[error("profile space k^n = {size} exceeds cap {cap}")]
    ProfileSpaceTooLarge { size: f64, cap: usize },

    #[error("reserve {0} is negative")]
    NegativeReserve(f64),

    #[error("mechanism misuse: {0}")]
    InvalidMechanism(String),

    #[error("value {value} of bidder {bidder} is outside its prior's support")]
    ValueOutsideSupport { bidder: usize, value: f64 },

    #[error("bidder index {index} out of range for {len} bidders")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("allocation rule is not monotone in the bid of bidder {bidder}")]
    NonMonotoneAllocation { bidder: usize },

    #[error("mechanism failed on sample {sample}: {source}")]
    SampleFailure {
        sample: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("tail integral did not converge within tolerance {tol}")]
    DivergentTail { tol: f64 },

    #[error("ratio denominator is zero")]
    ZeroDenominator,

    #[error("only {found} samples with diverging winners, need at least {needed}")]
    InsufficientDivergenceSamples { found: u64, needed: u64 },

    #[error("no component hazard-rate dominates the rest (components {a} and {b} cross near x = {crossing})")]
    NoDominantComponent { a: usize, b: usize, crossing: f64 },

    #[error("delta must satisfy 0 < delta <= 1/k, got delta = {delta}, k = {k}")]
    InvalidDelta { delta: f64, k: usize },

    #[error("group size {t} is too small, need at least {needed}")]
    GroupTooSmall { t: usize, needed: usize },

    #[error("plan assumption not verified: {0}")]
    AssumptionUnverified(String),

    #[error("{path}: {reason}")]
    Schema { path: String, reason: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
