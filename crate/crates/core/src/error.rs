use num_bigint::BigUint;
use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate facet {0:?}")]
    DuplicateFacet(Vec<u32>),

    #[error("complex has no facets")]
    Empty,

    #[error("not a closed 3-manifold: triangle {triangle:?} lies in {facets} facet(s)")]
    NotClosed { triangle: [u32; 3], facets: usize },

    #[error("invalid closed 3-manifold: {0}")]
    InvalidManifold(String),

    #[error("complex is disconnected ({0} components)")]
    Disconnected(usize),

    #[error("graph is disconnected")]
    DisconnectedGraph,

    #[error("spanning tree does not match graph: {0}")]
    TreeMismatch(String),

    #[error("graph has {count} spanning trees, above the limit of {limit}")]
    TooManyTrees { count: BigUint, limit: u64 },

    #[error("complex has {vertices} vertices, above the canonical-form bound of {bound}")]
    TooManyVertices { vertices: usize, bound: usize },

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
