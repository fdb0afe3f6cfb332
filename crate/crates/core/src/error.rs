use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid root system spec: {0}")]
    InvalidSpec(String),

    #[error("operation requires a {expected} root system, got {spec}")]
    WrongKind { spec: String, expected: &'static str },

    #[error("root system mismatch: {left} vs {right}")]
    SpecMismatch { left: String, right: String },

    #[error("anchor mismatch: {left:?} vs {right:?}")]
    AnchorMismatch { left: Vec<i64>, right: Vec<i64> },

    #[error("vector of length {got} where {expected} coordinates were expected")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generator index {index} out of range 1..={count}")]
    BadGenerator { index: usize, count: usize },

    #[error("coefficient query at height {height} exceeds truncation depth {depth}")]
    OutOfTruncation { height: i64, depth: u32 },

    #[error("operation requires an exact (finite support) series")]
    NotExact,

    #[error("term {beta:?} leaves the anchor cone of a truncated series")]
    OutsideAnchorCone { beta: Vec<i64> },

    #[error("truncation depth would become negative ({0})")]
    NegativeDepth(i64),

    #[error("geometric inverse needs a displacement of positive height")]
    ZeroHeightDisplacement,

    #[error("division by (1 - e^{{a_{generator}}}) left a nonzero remainder on the line through {beta:?}")]
    NonExactDivision { generator: usize, beta: Vec<i64> },

    #[error("series is not divisible by (1 - e^-beta) along the line through {beta:?}")]
    NotDivisible { beta: Vec<i64> },

    #[error("layer {length} has {size} elements, above the cap of {cap}")]
    LayerCapExceeded { length: usize, size: usize, cap: usize },

    #[error("the identity element has no left descent")]
    IdentityHasNoDescent,

    #[error("labels {0:?} are not dominant")]
    NotDominant(Vec<i64>),

    #[error("generator {generator} does not extend {word:?} to a longer element")]
    LengthCondition { generator: usize, word: Vec<usize> },

    #[error("series division impossible: divisor has leading coefficient {0}")]
    DivisionLeadingTerm(String),

    #[error("quotient has support {beta:?} off the imaginary axis")]
    OffImaginaryAxis { beta: Vec<i64> },

    #[error("symmetrizer did not stabilize (walked {walked} layers)")]
    Unstabilized { walked: usize },

    #[error("rational parameter must be nonzero")]
    ZeroParameter,

    #[error("could not parse {what}: {input}")]
    Parse { what: &'static str, input: String },

    #[error("layer cache I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}
