use thiserror::Error;

/// Errors produced by network construction, the Kirchhoff solver and the
/// optimization routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("network must have at least one vertex")]
    EmptyNetwork,
    #[error("vertex {vertex} out of range for a network with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) has non-positive length {length}")]
    NonpositiveLength { u: usize, v: usize, length: f64 },
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("sources do not sum to zero (sum = {sum:e})")]
    UnbalancedSources { sum: f64 },
    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("conductivity on edge {edge} is invalid ({value})")]
    InvalidConductivity { edge: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("support of the conductivities is disconnected")]
    DisconnectedSupport,
    #[error("Kirchhoff system is ill-conditioned (relative residual {residual:e})")]
    IllConditioned { residual: f64 },
    #[error("Kirchhoff system is not solvable for these conductivities")]
    Unsolvable,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("brute force limited to {limit} vertices, got {actual}")]
    TooLarge { limit: usize, actual: usize },
    #[error("estimated {estimated:.3e} spanning trees exceeds limit {limit}")]
    TooManyTrees { estimated: f64, limit: u64 },
    #[error("edge set is not a spanning tree: {0}")]
    NotASpanningTree(String),
    #[error("active edges contain no cycle")]
    NoCycle,
    #[error("cycle edge {edge} violates the stationarity relation (relative error {error:e})")]
    NotStationary { edge: usize, error: f64 },
    #[error("perturbation leaves the admissible set on edge {edge}")]
    LeavesAdmissibleSet { edge: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

impl NetError {
    /// Short machine-readable tag, used in CLI error JSON and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            NetError::EmptyNetwork => "EmptyNetwork",
            NetError::VertexOutOfRange { .. } => "VertexOutOfRange",
            NetError::SelfLoop(_) => "SelfLoop",
            NetError::DuplicateEdge(..) => "DuplicateEdge",
            NetError::NonpositiveLength { .. } => "NonpositiveLength",
            NetError::DisconnectedGraph { .. } => "DisconnectedGraph",
            NetError::UnbalancedSources { .. } => "UnbalancedSources",
            NetError::LengthMismatch { .. } => "LengthMismatch",
            NetError::InvalidConductivity { .. } => "InvalidConductivity",
            NetError::InvalidParameter(_) => "InvalidParameter",
            NetError::DisconnectedSupport => "DisconnectedSupport",
            NetError::IllConditioned { .. } => "IllConditioned",
            NetError::Unsolvable => "Unsolvable",
            NetError::NonSymmetric(_) => "NonSymmetric",
            NetError::TooLarge { .. } => "TooLarge",
            NetError::TooManyTrees { .. } => "TooManyTrees",
            NetError::NotASpanningTree(_) => "NotASpanningTree",
            NetError::NoCycle => "NoCycle",
            NetError::NotStationary { .. } => "NotStationary",
            NetError::LeavesAdmissibleSet { .. } => "LeavesAdmissibleSet",
            NetError::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, NetError>;
