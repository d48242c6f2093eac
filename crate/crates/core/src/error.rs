use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("2*alpha2*beta^2 = {0} must be < 1")]
    BeyondCritical(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("overflow in {0}")]
    Overflow(&'static str),

    #[error("N = {n} exceeds the enumeration limit {limit}")]
    EnumerationLimit { n: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("estimated cost of {ops:.3e} operations exceeds the guard {limit:.3e}")]
    CostGuard { ops: f64, limit: f64 },

    #[error("kmax = {0} is not supported (must be between 1 and {1})")]
    KmaxOutOfRange(usize, usize),

    #[error("polynomial too large: {0} terms")]
    PolynomialSize(usize),

    #[error("bisection bracket could not be established: {0}")]
    Bracket(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("incremental energy drifted: cached {cached}, recomputed {recomputed}")]
    Drift { cached: f64, recomputed: f64 },

    #[error("malformed disorder dump: {0}")]
    Format(String),

    #[error("replica {replica_id} (seed {seed:#018x}) failed: {source}")]
    Replica {
        replica_id: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
