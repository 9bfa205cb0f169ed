use thiserror::Error;

/// Errors raised by the library. Hypothesis, test, and node indices are 0-based.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty restriction")]
    EmptyRestriction,
    #[error("rounding undefined for n < 2")]
    RoundingUndefined,
    #[error("test index {0} out of range")]
    TestOutOfRange(usize),
    #[error("hypothesis index {0} out of range")]
    HypothesisOutOfRange(usize),
    #[error("instance invalid at S: hypotheses {0} and {1} are not distinguished by any test")]
    InvalidAt(usize, usize),
    #[error("node {0} does not belong to this tree")]
    ForeignNode(usize),
    #[error("hypothesis {0} is consistent with no node of the tree")]
    Inconsistent(usize),
    #[error("identity requires completeness")]
    Incomplete,
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("search budget exceeded after {expansions} expansions ({memo_entries} memo entries)")]
    BudgetExceeded { expansions: u64, memo_entries: usize },
    #[error("weight ratio {ratio} exceeds the configured bound R = {bound}")]
    RatioViolated { ratio: f64, bound: f64 },
    #[error("uniform mode requires uniform weights")]
    NotUniform,
    #[error("element {0} is not covered")]
    Uncovered(usize),
    #[error("vertices do not form a downward path")]
    NotAPath,
    #[error("tree is not greedy at node {0}")]
    NotGreedy(usize),
    #[error("chain structure violated: {0}")]
    ChainStructure(String),
    #[error("bound undefined: C_OPT = {0} is not above 1")]
    BoundUndefined(f64),
    #[error("analysis requires strictly positive weights")]
    ZeroWeight,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("n0 too small for r")]
    ReductionTooSmall,
    #[error("could not generate a valid instance after {0} attempts")]
    GenerationFailed(usize),
    #[error("weights not representable in this arithmetic mode: {0}")]
    NotRepresentable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
