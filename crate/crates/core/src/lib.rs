//! Size-constrained bi-connected graph partitioning.
//!
//! Given a graph, a set of root nodes and a capacity `M`, pick one
//! node-disjoint subgraph per root, each bi-connected and at most `M` nodes,
//! covering as many nodes as possible. Subgraphs are grown by randomized
//! open-ear decomposition ([`ear`]), combined by [`solver`] and improved by
//! [`local_search`]. [`generator`] builds unit-disc instances with known
//! optima and [`verify`] checks solutions and computes exact optima for tiny
//! graphs.
//!
//! Coordinates are generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the common choices.

pub mod bench;
pub mod ear;
pub mod error;
pub mod generator;
pub mod graph;
pub mod instance;
pub mod local_search;
pub mod scalar;
pub mod solver;
pub mod verify;

pub type NodeId = usize;

pub use error::{Error, Result};
pub use generator::{generate_instance, reduce_mpgsd_star, GenConfig, GeneratedInstance};
pub use graph::Graph;
pub use instance::{Instance, InstanceMeta};
pub use local_search::{local_search, SearchMode, SearchStats};
pub use scalar::{Point, Scalar};
pub use solver::{generate_solution, Solution, SolverConfig};
pub use verify::{brute_force_optimum, verify_solution, VerifyReport};

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
pub type GeneratedInstance64 = GeneratedInstance<f64>;
pub type GeneratedInstance32 = GeneratedInstance<f32>;
