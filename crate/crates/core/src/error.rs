use thiserror::Error;

/// Errors produced while building graphs, parsing inputs, or running solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlpError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("graph is disconnected: node {unreachable} is not reachable from node 0")]
    DisconnectedGraph { unreachable: usize },

    #[error("edge {index} ({i}, {j}) has non-positive weight {weight}")]
    NonPositiveWeight {
        index: usize,
        i: usize,
        j: usize,
        weight: f64,
    },

    #[error("edge {index} is a self-loop on node {node}")]
    SelfLoop { index: usize, node: usize },

    #[error("edge {index} duplicates the undirected pair ({i}, {j})")]
    DuplicateEdge { index: usize, i: usize, j: usize },

    #[error("node index {node} out of range for a graph with {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at position {index}")]
    NonFiniteValue { index: usize },

    #[error("sampling set is empty")]
    EmptySamplingSet,

    #[error("node {node} is labeled more than once")]
    DuplicateLabel { node: usize },

    #[error("iterate became non-finite at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),

    #[error("bound violation at K = {k}: {message}")]
    BoundViolation { k: usize, message: String },
}

impl SlpError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            SlpError::Parse { .. } | SlpError::Io(_) => 1,
            SlpError::NonFiniteIterate { .. } => 3,
            SlpError::BoundViolation { .. } => 4,
            SlpError::InvalidConfig(_) => 64,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SlpError>;
