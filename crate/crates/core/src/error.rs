use crate::NodeId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("node id {id} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { id: NodeId, node_count: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("assignment has {got} entries but the graph has {expected} nodes")]
    AssignmentLength { got: usize, expected: usize },
    #[error("subgraph label {label} out of range for {roots} roots")]
    LabelOutOfRange { label: i64, roots: usize },
    #[error("instance has {nodes} nodes, exhaustive search is limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("no regrowable subset of subgraphs exists")]
    NoRegrowableSubset,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
