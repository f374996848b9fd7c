use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    ZeroVertices,

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: u32, n: usize },

    #[error("vertex {0} appears more than once")]
    DuplicateVertex(u32),

    #[error("vertex set {0:?} does not induce a complete subgraph")]
    NotComplete(Vec<u32>),

    #[error("set size {size} outside the allowed range [{min}, {max}]")]
    SetSize { size: usize, min: usize, max: usize },

    #[error("clique order k = {k} invalid for n = {n} (need 3 <= k <= n)")]
    InvalidOrder { k: usize, n: usize },

    #[error("C({n}, {k}) does not fit in a signed 64-bit count")]
    CountOverflow { n: usize, k: usize },

    #[error("clique storage needs {needed} bytes, budget is {budget}")]
    MemoryBudget { needed: u128, budget: u64 },

    #[error("no K_k remains; the process has terminated")]
    Terminated,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step {i} gives edge density {p} < 0")]
    DensityOutOfRange { i: f64, p: f64 },

    #[error("edge density must be positive, got {0}")]
    NonPositiveDensity(f64),

    #[error("k = {k} is below {min}, the smallest order these formulas are stated for")]
    OrderTooSmall { k: usize, min: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bound hypothesis violated: {0}")]
    BoundHypothesis(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no traces supplied")]
    EmptyInput,

    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
