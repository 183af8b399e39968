use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two or more chromosomes were combined that do not share a schema.
    #[error("schema mismatch: `{left}` vs `{right}`")]
    SchemaMismatch { left: String, right: String },

    #[error("invalid gene at locus {locus}: {reason}")]
    InvalidGene { locus: usize, reason: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    /// The metric cannot be applied to the schema (e.g. Hamming on real loci).
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid crossover mask: {0}")]
    InvalidMask(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("geometrically impossible configuration: {0}")]
    Impossible(String),

    #[error("invalid pair distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    /// Operation only defined for some schemas, e.g. volume on non-real loci.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("value {value} not in explicit sequence support")]
    NotInSupport { value: f64 },

    /// Exact integer arithmetic overflowed.
    #[error("arithmetic overflow in exact distance")]
    Overflow,

    #[error("objective `{name}` failed: {reason}")]
    Objective { name: String, reason: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("malformed chromosome JSON: {0}")]
    Json(String),
}
