//! All-pairs shortest paths over the symmetrized neighbor graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::graph::NeighborGraph;

use super::mds::DistanceMatrix;

/// Shortest-path lengths along the neighbor graph, with connected-component
/// labels; unreachable pairs hold infinity rather than a silent large value.
#[derive(Debug, Clone)]
pub struct GeodesicDistances {
    n: usize,
    dist: Vec<f64>,
    /// Component label per node, counted in discovery order from node 0.
    pub components: Vec<usize>,
    pub n_components: usize,
}

/// Undirected adjacency by union: an edge survives if either endpoint lists
/// the other; shared edges keep the smaller length.
pub(crate) fn symmetrized_adjacency(graph: &NeighborGraph) -> Vec<Vec<(usize, f64)>> {
    let n = graph.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for nb in graph.neighbors(i) {
            adj[i].push((nb.index, nb.distance));
            adj[nb.index].push((i, nb.distance));
        }
    }
    for row in &mut adj {
        row.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        row.dedup_by_key(|e| e.0);
    }
    adj
}

pub(crate) fn component_labels(adj: &[Vec<(usize, f64)>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0usize;
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        labels[start] = next;
        while let Some(v) = stack.pop() {
            for &(j, _) in &adj[v] {
                if labels[j] == usize::MAX {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    (labels, next)
}

#[derive(PartialEq)]
struct QueueItem(f64, usize);
impl Eq for QueueItem {}
impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse(QueueItem(0.0, source)));
    while let Some(Reverse(QueueItem(d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(j, w) in &adj[v] {
            let cand = d + w;
            if cand < dist[j] {
                dist[j] = cand;
                heap.push(Reverse(QueueItem(cand, j)));
            }
        }
    }
    dist
}

/// Single-source shortest paths from every node (Dijkstra per source).
pub fn geodesic_distances(graph: &NeighborGraph) -> GeodesicDistances {
    let adj = symmetrized_adjacency(graph);
    let n = adj.len();
    let (components, n_components) = component_labels(&adj);
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&adj, s)).collect();
    GeodesicDistances { n, dist: rows.concat(), components, n_components }
}

impl GeodesicDistances {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn is_connected(&self) -> bool {
        self.n_components == 1
    }

    /// Node indices of the largest component (ties to the smaller label),
    /// ascending.
    pub fn largest_component(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_components];
        for &c in &self.components {
            sizes[c] += 1;
        }
        let best = (0..self.n_components)
            .max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)))
            .unwrap_or(0);
        (0..self.n).filter(|&i| self.components[i] == best).collect()
    }

    /// Dense distance matrix restricted to `indices` (must be one
    /// component, so every entry is finite).
    pub fn submatrix(&self, indices: &[usize]) -> DistanceMatrix {
        let m = indices.len();
        let mut data = vec![0.0; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                data[a * m + b] = self.distance(i, j);
            }
        }
        DistanceMatrix::new(data, m).expect("component distances are finite and symmetric")
    }
}
