use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Lukasiewicz path: {0}")]
    InvalidPath(String),
    #[error("invalid plane tree: {0}")]
    InvalidTree(String),
    #[error("index {index} out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("no critical point: {0}")]
    NoCriticalPoint(String),
    #[error("weight sequence has zero radius of convergence")]
    DivergentWeights,
    #[error("normalizing series diverges at b = {0}")]
    DivergentNormalizer(f64),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("rejection budget of {budget} draws exhausted ({attempts} attempts)")]
    Timeout { budget: u64, attempts: u64 },
    #[error("tree with a single vertex has no root subtree")]
    DegenerateTree,
    #[error("decoration incompatible with tree: {0}")]
    IncompatibleDecoration(String),
    #[error("edge set is not a spanning tree: {0}")]
    NotATree(String),
    #[error("chords {0:?} and {1:?} cross")]
    CrossingEdges((usize, usize), (usize, usize)),
    #[error("n = {n} exceeds the enumeration guard {max}")]
    TooLarge { n: usize, max: usize },
    #[error("labelling incompatible with tree: {0}")]
    IncompatibleLabelling(String),
    #[error("empty input")]
    EmptySet,
    #[error("empty batch")]
    EmptyBatch,
    #[error("level 2^{level} is finer than allowed for resolution {m}")]
    ResolutionTooFine { level: u32, m: usize },
    #[error("insert resolution {got} does not match face size {expected}")]
    ResolutionMismatch { expected: usize, got: usize },
    #[error("composition produced crossing chords")]
    CrossingAfterMap,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
