//! Manifold learning on top of pluggable nearest-neighbor indexes.
//!
//! The crate bundles:
//!
//! * exact and approximate K-nearest-neighbor search (k-d tree with an
//!   epsilon pruning knob, a random-hyperplane tree forest, and a
//!   hierarchical navigable small-world graph) behind one query interface,
//! * four spectral embedding algorithms (Isomap, LLE, Laplacian Eigenmaps,
//!   Hessian LLE) driven by the neighbor graphs,
//! * embedding-quality measures built on neighborhood rankings and the
//!   co-ranking matrix, plus density-based anomaly flagging,
//! * a histogram pipeline that turns discrete distributions into vectors
//!   whose L2/L1 distances reproduce Hellinger/Total-Variation distances,
//!   so statistical manifolds can ride the same indexes.
//!
//! All randomized structures take an explicit 64-bit seed and are
//! deterministic: the same seed yields the same index and the same query
//! answers, independent of thread count.

pub mod ann;
pub mod cloud;
pub mod distributions;
pub mod error;
pub mod graph;
pub mod io;
pub mod manifold;
pub mod metric;
pub mod quality;
pub mod synthetic;

pub use cloud::{Coordinates, Embedding, PointCloud};
pub use error::{Error, Result};
pub use graph::{brute_force_knn, rank_matrix, Neighbor, NeighborGraph, RankStructure};
pub use metric::Metric;
