//! Nearest-neighbor indexes behind one query interface.
//!
//! Three index families cover the exact/approximate trade-off: a k-d tree
//! (exact at `epsilon = 0`), a forest of random-hyperplane trees queried
//! through a shared priority queue, and a hierarchical navigable small-world
//! graph. [`knn_graph`] drives any of them (or the brute-force oracle) to
//! produce the [`NeighborGraph`] consumed by the manifold stage, timing
//! index build plus queries.

mod annoy;
mod hnsw;
mod kdtree;

pub use annoy::AnnoyForest;
pub use hnsw::HnswIndex;
pub use kdtree::KdTree;

use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::graph::{brute_force_knn, Neighbor, NeighborGraph};
use crate::metric::Metric;

/// Bounded max-heap keeping the K best `(distance, index)` candidates.
pub(crate) struct BestK {
    k: usize,
    heap: BinaryHeap<HeapEntry>,
}

struct HeapEntry(Neighbor);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp_key(&other.0) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp_key(&other.0)
    }
}

impl BestK {
    pub(crate) fn new(k: usize) -> Self {
        BestK { k, heap: BinaryHeap::with_capacity(k + 1) }
    }

    #[inline]
    pub(crate) fn offer(&mut self, nb: Neighbor) {
        if self.heap.len() < self.k {
            self.heap.push(HeapEntry(nb));
        } else if let Some(top) = self.heap.peek() {
            if nb.cmp_key(&top.0) == std::cmp::Ordering::Less {
                self.heap.pop();
                self.heap.push(HeapEntry(nb));
            }
        }
    }

    /// Current pruning bound: the k-th best distance, or infinity while the
    /// heap is not yet full.
    #[inline]
    pub(crate) fn bound(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |e| e.0.distance)
        }
    }

    pub(crate) fn into_sorted(self) -> Vec<Neighbor> {
        let mut out: Vec<Neighbor> = self.heap.into_iter().map(|e| e.0).collect();
        out.sort_unstable_by(Neighbor::cmp_key);
        out
    }
}

/// Which index answers the kNN queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Brute,
    KdTree,
    Annoy,
    Hnsw,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Brute => write!(f, "brute"),
            Backend::KdTree => write!(f, "kdtree"),
            Backend::Annoy => write!(f, "annoy"),
            Backend::Hnsw => write!(f, "hnsw"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Backend::Brute),
            "kdtree" => Ok(Backend::KdTree),
            "annoy" => Ok(Backend::Annoy),
            "hnsw" => Ok(Backend::Hnsw),
            other => Err(Error::param(format!("unknown backend '{other}'"))),
        }
    }
}

/// Build and query parameters for every backend, with the defaults used by
/// the benchmark harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnParams {
    pub metric: Metric,
    /// k-d tree: leaf size (1 reproduces the build-to-singletons tree).
    pub leaf_capacity: usize,
    /// k-d tree: approximation tolerance; 0 is exact.
    pub epsilon: f64,
    /// Annoy: number of random-hyperplane trees.
    pub n_trees: usize,
    /// Annoy: maximum leaf size.
    pub kappa: usize,
    /// Annoy: stop expanding once this many candidates are collected.
    pub search_k: usize,
    /// HNSW: edges added per insertion.
    pub n_links: usize,
    /// HNSW: candidate width while inserting.
    pub ef_construction: usize,
    /// HNSW: candidate width while querying.
    pub ef: usize,
    /// Seed for every randomized structure.
    pub seed: u64,
}

impl Default for AnnParams {
    fn default() -> Self {
        AnnParams {
            metric: Metric::Euclidean,
            leaf_capacity: 1,
            epsilon: 0.0,
            n_trees: 50,
            kappa: 16,
            search_k: 500,
            n_links: 16,
            ef_construction: 200,
            ef: 50,
            seed: 0,
        }
    }
}

/// A neighbor graph plus how long the index build and the queries took.
#[derive(Debug, Clone)]
pub struct KnnGraphResult {
    pub graph: NeighborGraph,
    /// Wall-clock seconds for index build + all queries (nothing else).
    pub seconds: f64,
    /// Rows where the backend could not produce K neighbors.
    pub short_rows: Vec<usize>,
}

/// Build the K-nearest-neighbor graph of `cloud` with the chosen backend.
///
/// Every indexed point is queried for `K + 1` neighbors and the point itself
/// is dropped, so a duplicate of the query survives as a distance-0
/// neighbor. Wall-clock time covers index build plus queries.
pub fn knn_graph(
    cloud: &PointCloud,
    k: usize,
    backend: Backend,
    params: &AnnParams,
) -> Result<KnnGraphResult> {
    use crate::cloud::Coordinates;
    let n = cloud.len();
    if k == 0 {
        return Err(Error::param("K must be >= 1"));
    }
    if n < k + 1 {
        return Err(Error::param(format!("K={k} requires at least {} points", k + 1)));
    }

    let start = Instant::now();
    let rows: Vec<Vec<Neighbor>> = match backend {
        Backend::Brute => {
            let graph = brute_force_knn(cloud, k, params.metric)?;
            return Ok(KnnGraphResult {
                graph,
                seconds: start.elapsed().as_secs_f64(),
                short_rows: Vec::new(),
            });
        }
        Backend::KdTree => {
            let tree = KdTree::build(cloud, params.leaf_capacity, params.metric)?;
            (0..n)
                .into_par_iter()
                .map(|i| tree.query_excluding(cloud.row(i), k, params.epsilon, Some(i)))
                .collect::<Result<_>>()?
        }
        Backend::Annoy => {
            if params.search_k < k {
                return Err(Error::param("search_k must be >= K"));
            }
            let forest = AnnoyForest::build(
                cloud,
                params.n_trees,
                params.kappa,
                params.seed,
                params.metric,
            )?;
            let search_k = params.search_k.max(k + 1);
            (0..n)
                .into_par_iter()
                .map(|i| {
                    forest
                        .query_excluding(cloud.row(i), k, search_k, Some(i))
                        .map(|r| r.neighbors)
                })
                .collect::<Result<_>>()?
        }
        Backend::Hnsw => {
            if params.ef < k {
                return Err(Error::param("ef must be >= K"));
            }
            let index = HnswIndex::build(
                cloud,
                params.n_links,
                params.ef_construction,
                params.seed,
                params.metric,
            )?;
            let ef = params.ef.max(k + 1);
            (0..n)
                .into_par_iter()
                .map(|i| index.query_excluding(cloud.row(i), k, ef, Some(i)))
                .collect::<Result<_>>()?
        }
    };
    let seconds = start.elapsed().as_secs_f64();

    let graph = NeighborGraph::from_rows(k, rows)?;
    let short_rows = graph.short_rows();
    Ok(KnnGraphResult { graph, seconds, short_rows })
}

/// Fraction of true K-nearest-neighbor slots recovered by an approximate
/// graph, in [0, 1].
pub fn recall(approx: &NeighborGraph, exact: &NeighborGraph) -> Result<f64> {
    if approx.len() != exact.len() {
        return Err(Error::input("graphs cover different point counts"));
    }
    if approx.k() != exact.k() {
        return Err(Error::input("graphs use different K"));
    }
    let n = exact.len();
    let k = exact.k();
    let mut hits = 0usize;
    for i in 0..n {
        let truth: std::collections::HashSet<usize> =
            exact.neighbors(i).iter().map(|nb| nb.index).collect();
        hits += approx
            .neighbors(i)
            .iter()
            .filter(|nb| truth.contains(&nb.index))
            .count();
    }
    Ok(hits as f64 / (n * k) as f64)
}
