use thiserror::Error;

use crate::graph::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertices {u} and {v} are not connected")]
    Disconnected { u: Vertex, v: Vertex },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no 3-regular graph on {n} vertices exists (n must be even and at least 4)")]
    Handshake { n: usize },

    #[error("could not reach girth {girth} on {n} vertices within {budget} repair steps")]
    GenerationFailed { n: usize, girth: u64, budget: usize },

    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("instance rejected: {0}")]
    InvalidInstance(String),

    #[error("solution rejected: {0}")]
    InvalidSolution(String),

    #[error("{relevant} family members intersect the path non-contiguously; exact set cover is limited to {limit}")]
    Capacity { relevant: usize, limit: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("superadditivity violated: {0}")]
    Superadditivity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
