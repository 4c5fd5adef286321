//! Forest of random-hyperplane trees with a shared query-time priority
//! queue.
//!
//! Each tree recursively splits its point set by a hyperplane equidistant
//! from two randomly chosen points until leaves hold at most `kappa` points.
//! A query descends every tree to the leaf containing the query point,
//! keeps the opposite-side partitions in one queue keyed by hyperplane
//! distance, and expands the closest ones until `search_k` candidates are
//! collected; the candidates are then scored brute-force under the index
//! metric.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cloud::{Coordinates, PointCloud};
use crate::error::{Error, Result};
use crate::graph::{k_smallest, Neighbor};
use crate::metric::Metric;

enum TreeNode {
    Split {
        normal: Vec<f64>,
        offset: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        items: Vec<u32>,
    },
}

/// One randomized tree, nodes in an arena with the root at index 0.
struct Tree {
    nodes: Vec<TreeNode>,
    degenerate_splits: usize,
}

/// Random-hyperplane tree forest over a copied point set.
pub struct AnnoyForest {
    trees: Vec<Tree>,
    data: Vec<f64>,
    dim: usize,
    len: usize,
    kappa: usize,
    metric: Metric,
    seed: u64,
}

/// Outcome of a forest query.
#[derive(Debug, Clone)]
pub struct AnnoyQueryResult {
    pub neighbors: Vec<Neighbor>,
    /// True when the candidate pool was exhausted before reaching K.
    pub short: bool,
}

/// Queue entry ordered by (hyperplane distance, tree, node) so pops are
/// deterministic under ties.
#[derive(PartialEq)]
struct QueueEntry {
    margin: f64,
    tree: usize,
    node: usize,
}

impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.margin
            .total_cmp(&other.margin)
            .then(self.tree.cmp(&other.tree))
            .then(self.node.cmp(&other.node))
    }
}

impl AnnoyForest {
    /// Build `n_trees` independent trees; deterministic for a given seed.
    pub fn build(
        cloud: &PointCloud,
        n_trees: usize,
        kappa: usize,
        seed: u64,
        metric: Metric,
    ) -> Result<AnnoyForest> {
        if cloud.len() < 2 {
            return Err(Error::input("forest needs at least two points"));
        }
        if n_trees == 0 {
            return Err(Error::param("n_trees must be >= 1"));
        }
        if kappa == 0 {
            return Err(Error::param("kappa must be >= 1"));
        }
        let data = cloud.as_slice().to_vec();
        let dim = cloud.dim();
        let len = cloud.len();

        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let tree_seeds: Vec<u64> = (0..n_trees).map(|_| master.random()).collect();

        // Trees are independent; building them in parallel cannot change the
        // result because each consumes only its own derived seed.
        let trees: Vec<Tree> = tree_seeds
            .into_par_iter()
            .map(|tree_seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
                let mut tree = Tree { nodes: Vec::new(), degenerate_splits: 0 };
                let items: Vec<u32> = (0..len as u32).collect();
                build_node(&mut tree, &data, dim, kappa, items, &mut rng);
                tree
            })
            .collect();

        Ok(AnnoyForest { trees, data, dim, len, kappa, metric, seed })
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Splits that fell back to an axis midpoint because anchor sampling
    /// kept drawing coincident points.
    pub fn degenerate_splits(&self) -> usize {
        self.trees.iter().map(|t| t.degenerate_splits).sum()
    }

    /// Largest leaf across the forest. Test support.
    pub fn max_leaf_size(&self) -> usize {
        self.trees
            .iter()
            .flat_map(|t| t.nodes.iter())
            .filter_map(|n| match n {
                TreeNode::Leaf { items } => Some(items.len()),
                TreeNode::Split { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Check that every tree partitions all point indices. Test support.
    pub fn partitions_hold(&self) -> bool {
        self.trees.iter().all(|tree| {
            let mut seen = vec![false; self.len];
            for node in &tree.nodes {
                if let TreeNode::Leaf { items } = node {
                    for &i in items {
                        if seen[i as usize] {
                            return false;
                        }
                        seen[i as usize] = true;
                    }
                }
            }
            seen.iter().all(|&s| s)
        })
    }

    /// Structural equality with another forest. Test support.
    pub fn same_structure(&self, other: &AnnoyForest) -> bool {
        self.len == other.len
            && self.trees.len() == other.trees.len()
            && self
                .trees
                .iter()
                .zip(&other.trees)
                .all(|(a, b)| {
                    a.nodes.len() == b.nodes.len()
                        && a.nodes.iter().zip(&b.nodes).all(|(x, y)| match (x, y) {
                            (
                                TreeNode::Split { normal: n1, offset: o1, left: l1, right: r1 },
                                TreeNode::Split { normal: n2, offset: o2, left: l2, right: r2 },
                            ) => n1 == n2 && o1 == o2 && l1 == l2 && r1 == r2,
                            (TreeNode::Leaf { items: i1 }, TreeNode::Leaf { items: i2 }) => {
                                i1 == i2
                            }
                            _ => false,
                        })
                })
    }

    /// K approximate nearest neighbors of `q`.
    pub fn query(&self, q: &[f64], k: usize, search_k: usize) -> Result<AnnoyQueryResult> {
        self.query_excluding(q, k, search_k, None)
    }

    /// As [`AnnoyForest::query`], skipping one indexed point in the returned
    /// list (it still counts toward the `search_k` candidate pool).
    pub fn query_excluding(
        &self,
        q: &[f64],
        k: usize,
        search_k: usize,
        exclude: Option<usize>,
    ) -> Result<AnnoyQueryResult> {
        if q.len() != self.dim {
            return Err(Error::input(format!(
                "query has dimension {}, index has {}",
                q.len(),
                self.dim
            )));
        }
        if search_k < k {
            return Err(Error::param("search_k must be >= K"));
        }

        let maxsize_queue = 2 * search_k;
        let mut queue: BinaryHeap<Reverse<QueueEntry>> = BinaryHeap::new();
        let mut seen = vec![false; self.len];
        let mut candidates: Vec<u32> = Vec::with_capacity(search_k + self.kappa);

        // Descend every tree to the leaf containing q, queueing each
        // opposite-side partition keyed by its hyperplane distance.
        for (t, tree) in self.trees.iter().enumerate() {
            self.descend(t, tree, 0, q, &mut queue, &mut seen, &mut candidates);
        }

        // Expand the nearest queued partitions until the candidate union is
        // big enough or nothing is left.
        while candidates.len() < search_k {
            let Some(Reverse(entry)) = queue.pop() else {
                break;
            };
            self.descend(
                entry.tree,
                &self.trees[entry.tree],
                entry.node,
                q,
                &mut queue,
                &mut seen,
                &mut candidates,
            );
            trim_queue(&mut queue, maxsize_queue);
        }

        // Brute-force the candidate pool under the index metric.
        let mut scored: Vec<Neighbor> = candidates
            .iter()
            .map(|&c| c as usize)
            .filter(|&c| Some(c) != exclude)
            .map(|c| Neighbor::new(c, self.metric.distance(q, self.point(c))))
            .collect();
        let neighbors = k_smallest(&mut scored, k);
        let short = neighbors.len() < k;
        Ok(AnnoyQueryResult { neighbors, short })
    }

    fn descend(
        &self,
        t: usize,
        tree: &Tree,
        start: usize,
        q: &[f64],
        queue: &mut BinaryHeap<Reverse<QueueEntry>>,
        seen: &mut [bool],
        candidates: &mut Vec<u32>,
    ) {
        let mut node = start;
        loop {
            match &tree.nodes[node] {
                TreeNode::Leaf { items } => {
                    for &i in items {
                        if !seen[i as usize] {
                            seen[i as usize] = true;
                            candidates.push(i);
                        }
                    }
                    return;
                }
                TreeNode::Split { normal, offset, left, right } => {
                    // Normals are unit length, so the signed side value is
                    // the hyperplane distance itself.
                    let side: f64 =
                        q.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() - offset;
                    let (same, opposite) = if side < 0.0 {
                        (*left, *right)
                    } else {
                        (*right, *left)
                    };
                    queue.push(Reverse(QueueEntry { margin: side.abs(), tree: t, node: opposite }));
                    node = same;
                }
            }
        }
    }
}

fn trim_queue(queue: &mut BinaryHeap<Reverse<QueueEntry>>, maxsize: usize) {
    if queue.len() > maxsize {
        let mut entries: Vec<Reverse<QueueEntry>> = std::mem::take(queue).into_vec();
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        entries.truncate(maxsize);
        *queue = entries.into();
    }
}

fn build_node(
    tree: &mut Tree,
    data: &[f64],
    dim: usize,
    kappa: usize,
    items: Vec<u32>,
    rng: &mut ChaCha8Rng,
) -> usize {
    let id = tree.nodes.len();
    tree.nodes.push(TreeNode::Leaf { items: Vec::new() });
    if items.len() <= kappa {
        tree.nodes[id] = TreeNode::Leaf { items };
        return id;
    }

    let point = |i: u32| &data[i as usize * dim..(i as usize + 1) * dim];

    // Draw two distinct anchor points; coincident coordinates force a
    // resample, then an axis-midpoint fallback.
    let mut anchors: Option<(u32, u32)> = None;
    for _ in 0..8 {
        let a = items[rng.random_range(0..items.len())];
        let b = items[rng.random_range(0..items.len())];
        if a != b && point(a) != point(b) {
            anchors = Some((a, b));
            break;
        }
    }

    let (mut left_items, mut right_items, normal, offset);
    match anchors {
        Some((a, b)) => {
            let pa = point(a);
            let pb = point(b);
            // Unit normal of the plane equidistant from the anchors, so
            // query-time side values are true hyperplane distances.
            let mut n: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| y - x).collect();
            let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut n {
                *v /= norm;
            }
            let c: f64 = pa
                .iter()
                .zip(pb)
                .zip(&n)
                .map(|((x, y), nv)| 0.5 * (x + y) * nv)
                .sum();
            left_items = Vec::new();
            right_items = Vec::new();
            for &i in &items {
                let side: f64 =
                    point(i).iter().zip(&n).map(|(v, nv)| v * nv).sum::<f64>() - c;
                if side < 0.0 {
                    left_items.push(i);
                } else {
                    right_items.push(i);
                }
            }
            normal = n;
            offset = c;
        }
        None => {
            // All sampled pairs coincided: cut a random axis at the midpoint
            // of its range.
            tree.degenerate_splits += 1;
            let axis = rng.random_range(0..dim);
            let lo = items
                .iter()
                .map(|&i| point(i)[axis])
                .fold(f64::INFINITY, f64::min);
            let hi = items
                .iter()
                .map(|&i| point(i)[axis])
                .fold(f64::NEG_INFINITY, f64::max);
            let c = 0.5 * (lo + hi);
            left_items = Vec::new();
            right_items = Vec::new();
            for &i in &items {
                if point(i)[axis] < c {
                    left_items.push(i);
                } else {
                    right_items.push(i);
                }
            }
            let mut n = vec![0.0; dim];
            n[axis] = 1.0;
            normal = n;
            offset = c;
        }
    }

    if left_items.is_empty() || right_items.is_empty() {
        // Identical points cannot be separated by any plane; split them
        // evenly by position so recursion terminates.
        tree.degenerate_splits += 1;
        let mut all = left_items;
        all.extend(right_items);
        let half = all.len() / 2;
        right_items = all.split_off(half);
        left_items = all;
    }

    let left = build_node(tree, data, dim, kappa, left_items, rng);
    let right = build_node(tree, data, dim, kappa, right_items, rng);
    tree.nodes[id] = TreeNode::Split { normal, offset, left, right };
    id
}
