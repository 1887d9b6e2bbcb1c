//! Sparse subgraphs of edge-colored graphs that keep distances, reachability
//! or flow intact when a color class (a shared-risk group of edges) or a
//! bounded set of individual edges fails.
//!
//! The crate has three layers:
//!
//! * primitives — [`graph`] (colored graphs, fault sets, live views),
//!   [`metric`] (seeded tie-broken shortest paths), [`hitting`] (suffix
//!   families and hitting sets);
//! * builders — [`sourcewise_cft`], [`sourcewise_eft`], [`derived`],
//!   [`single_pair`] construct fault-tolerant preservers, and
//!   [`lowerbounds`] generates instances on which no preserver can be small;
//! * checking — [`verify`] re-derives every guarantee by brute-force fault
//!   enumeration, independently of how the builders work.

mod combinatorics;
pub mod derived;
pub mod exec;
pub mod graph;
pub mod hitting;
pub mod instances;
pub mod io;
pub mod lowerbounds;
pub mod metric;
pub mod single_pair;
pub mod sourcewise_cft;
pub mod sourcewise_eft;
pub mod sweep;
pub mod verify;

use thiserror::Error;

/// Errors shared by the subgraph builders.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error("construction requires unit edge weights")]
    RequiresUnitWeights,
    #[error("construction requires an undirected graph")]
    RequiresUndirected,
    #[error("source set must be nonempty")]
    NoSources,
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(graph::Vertex),
    #[error("verification kept failing after {retries} reseeds")]
    RetryCapExceeded { retries: usize },
    #[error("restoration decomposition needs {edges} interleaving edges, over the budget {budget}")]
    RestorationTooLong { edges: usize, budget: usize },
    #[error(transparent)]
    Hitting(#[from] hitting::HittingError),
    #[error(transparent)]
    Metric(#[from] metric::MetricError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
}
