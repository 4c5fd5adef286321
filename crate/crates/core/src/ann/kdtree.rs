//! Binary space-partitioning tree with axis-orthogonal splits.
//!
//! Splits choose the dimension of maximum spread and cut at the midpoint of
//! the two middle order statistics; search prunes a sibling subtree whenever
//! the ball of radius `best_kth / (1 + epsilon)` around the query misses the
//! subtree's tightest bounding box. `epsilon = 0` gives exact neighbors,
//! `epsilon > 0` trades accuracy for fewer visited branches while keeping
//! the `(1 + epsilon)`-approximation guarantee on every returned distance.

use crate::cloud::{Coordinates, PointCloud};
use crate::error::{Error, Result};
use crate::graph::Neighbor;
use crate::metric::Metric;

use super::BestK;

enum Node {
    Internal {
        split_dim: usize,
        split_value: f64,
        left: usize,
        right: usize,
        // True when tied order statistics forced an even positional split
        // instead of a value split.
        degenerate: bool,
    },
    Leaf {
        points: Vec<usize>,
    },
}

/// k-d tree over a copied point set.
pub struct KdTree {
    nodes: Vec<Node>,
    // Tightest axis-aligned bounding box per node, laid out as
    // [min_0..min_p, max_0..max_p].
    boxes: Vec<f64>,
    data: Vec<f64>,
    dim: usize,
    len: usize,
    leaf_capacity: usize,
    metric: Metric,
    degenerate_splits: usize,
}

impl KdTree {
    /// Build a tree whose leaves hold at most `leaf_capacity` points.
    pub fn build(cloud: &PointCloud, leaf_capacity: usize, metric: Metric) -> Result<KdTree> {
        if leaf_capacity == 0 {
            return Err(Error::param("leaf capacity must be >= 1"));
        }
        let mut tree = KdTree {
            nodes: Vec::new(),
            boxes: Vec::new(),
            data: cloud.as_slice().to_vec(),
            dim: cloud.dim(),
            len: cloud.len(),
            leaf_capacity,
            metric,
            degenerate_splits: 0,
        };
        let all: Vec<usize> = (0..cloud.len()).collect();
        tree.build_node(all);
        Ok(tree)
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn build_node(&mut self, points: Vec<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { points: Vec::new() });
        self.boxes.extend(std::iter::repeat_n(0.0, 2 * self.dim));
        self.write_bbox(id, &points);

        if points.len() <= self.leaf_capacity {
            self.nodes[id] = Node::Leaf { points };
            return id;
        }

        // Splitting dimension maximizes spread (max - min).
        let mut split_dim = 0;
        let mut best_spread = f64::NEG_INFINITY;
        for dim in 0..self.dim {
            let spread = self.boxes[id * 2 * self.dim + self.dim + dim]
                - self.boxes[id * 2 * self.dim + dim];
            if spread > best_spread {
                best_spread = spread;
                split_dim = dim;
            }
        }

        // Midpoint of the two middle order statistics along the split axis.
        let mut values: Vec<f64> = points.iter().map(|&i| self.point(i)[split_dim]).collect();
        values.sort_unstable_by(f64::total_cmp);
        let nu = values.len() / 2;
        let split_value = 0.5 * (values[nu - 1] + values[nu]);

        let mut left_pts = Vec::with_capacity(nu);
        let mut right_pts = Vec::with_capacity(points.len() - nu);
        for &i in &points {
            if self.point(i)[split_dim] < split_value {
                left_pts.push(i);
            } else {
                right_pts.push(i);
            }
        }
        let degenerate = left_pts.is_empty() || right_pts.is_empty();
        if degenerate {
            // Tied order statistics (duplicates) make the value split
            // one-sided; fall back to an even split by position.
            self.degenerate_splits += 1;
            let mut sorted: Vec<usize> = left_pts;
            sorted.extend(right_pts);
            sorted.sort_unstable_by(|&a, &b| {
                self.point(a)[split_dim]
                    .total_cmp(&self.point(b)[split_dim])
                    .then(a.cmp(&b))
            });
            let half = sorted.len() / 2;
            right_pts = sorted.split_off(half);
            left_pts = sorted;
        }

        let left = self.build_node(left_pts);
        let right = self.build_node(right_pts);
        self.nodes[id] = Node::Internal { split_dim, split_value, left, right, degenerate };
        id
    }

    fn write_bbox(&mut self, id: usize, points: &[usize]) {
        let base = id * 2 * self.dim;
        for dim in 0..self.dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in points {
                let v = self.point(i)[dim];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            self.boxes[base + dim] = lo;
            self.boxes[base + self.dim + dim] = hi;
        }
    }

    /// Number of indexed points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Splits that had to fall back to an even positional split because the
    /// middle order statistics coincided.
    pub fn degenerate_splits(&self) -> usize {
        self.degenerate_splits
    }

    /// Distance from `q` to the bounding box of `node` under the tree metric.
    fn box_distance(&self, node: usize, q: &[f64]) -> f64 {
        let base = node * 2 * self.dim;
        match self.metric {
            Metric::Euclidean => {
                let mut acc = 0.0;
                for dim in 0..self.dim {
                    let lo = self.boxes[base + dim];
                    let hi = self.boxes[base + self.dim + dim];
                    let d = (lo - q[dim]).max(q[dim] - hi).max(0.0);
                    acc += d * d;
                }
                acc.sqrt()
            }
            Metric::Manhattan => {
                let mut acc = 0.0;
                for dim in 0..self.dim {
                    let lo = self.boxes[base + dim];
                    let hi = self.boxes[base + self.dim + dim];
                    acc += (lo - q[dim]).max(q[dim] - hi).max(0.0);
                }
                acc
            }
        }
    }

    /// K nearest neighbors of `q` with the `(1 + epsilon)` guarantee.
    pub fn query(&self, q: &[f64], k: usize, epsilon: f64) -> Result<Vec<Neighbor>> {
        self.query_excluding(q, k, epsilon, None)
    }

    /// As [`KdTree::query`], skipping one indexed point (the query itself
    /// when building a kNN graph over the indexed sample).
    pub fn query_excluding(
        &self,
        q: &[f64],
        k: usize,
        epsilon: f64,
        exclude: Option<usize>,
    ) -> Result<Vec<Neighbor>> {
        if q.len() != self.dim {
            return Err(Error::input(format!(
                "query has dimension {}, index has {}",
                q.len(),
                self.dim
            )));
        }
        let available = self.len - usize::from(exclude.is_some());
        if k > available {
            return Err(Error::param(format!(
                "K={k} exceeds the {available} searchable points"
            )));
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::param("epsilon must be >= 0"));
        }
        let mut best = BestK::new(k);
        self.search(0, q, epsilon, exclude, &mut best);
        Ok(best.into_sorted())
    }

    fn search(&self, node: usize, q: &[f64], epsilon: f64, exclude: Option<usize>, best: &mut BestK) {
        match &self.nodes[node] {
            Node::Leaf { points } => {
                for &i in points {
                    if Some(i) == exclude {
                        continue;
                    }
                    best.offer(Neighbor::new(i, self.metric.distance(q, self.point(i))));
                }
            }
            Node::Internal { split_dim, split_value, left, right, .. } => {
                let (near, far) = if q[*split_dim] < *split_value {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, q, epsilon, exclude, best);
                // Shrinking the probe ball by 1/(1+eps) is what makes the
                // search approximate; the pruned branch can only hold points
                // within (1+eps) of the current k-th best.
                if self.box_distance(far, q) <= best.bound() / (1.0 + epsilon) {
                    self.search(far, q, epsilon, exclude, best);
                }
            }
        }
    }

    /// Walk the tree and hand `(depth, node contents)` of each leaf to `f`.
    pub fn for_each_leaf(&self, mut f: impl FnMut(&[usize])) {
        for node in &self.nodes {
            if let Node::Leaf { points } = node {
                f(points);
            }
        }
    }

    /// Check the partition invariant at every internal node. Test support.
    pub fn partition_holds(&self) -> bool {
        self.check_partition(0)
    }

    fn check_partition(&self, node: usize) -> bool {
        match &self.nodes[node] {
            Node::Leaf { .. } => true,
            Node::Internal { split_dim, split_value, left, right, degenerate } => {
                let value_split_ok = *degenerate
                    || (self
                        .collect(*left)
                        .iter()
                        .all(|&i| self.point(i)[*split_dim] < *split_value)
                        && self
                            .collect(*right)
                            .iter()
                            .all(|&i| self.point(i)[*split_dim] >= *split_value));
                let partition = self.collect(*left).len() + self.collect(*right).len()
                    == self.collect(node).len();
                partition
                    && value_split_ok
                    && self.check_partition(*left)
                    && self.check_partition(*right)
            }
        }
    }

    fn collect(&self, node: usize) -> Vec<usize> {
        match &self.nodes[node] {
            Node::Leaf { points } => points.clone(),
            Node::Internal { left, right, .. } => {
                let mut out = self.collect(*left);
                out.extend(self.collect(*right));
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::brute_force_knn;
    use crate::synthetic::gaussian_cloud;

    #[test]
    fn root_split_midpoint() {
        let cloud = PointCloud::new(vec![1.0, 2.0, 3.0, 4.0], 1).unwrap();
        let tree = KdTree::build(&cloud, 1, Metric::Euclidean).unwrap();
        match &tree.nodes[0] {
            Node::Internal { split_dim, split_value, .. } => {
                assert_eq!(*split_dim, 0);
                assert_eq!(*split_value, 2.5);
            }
            Node::Leaf { .. } => panic!("expected an internal root"),
        }
    }

    #[test]
    fn single_point_is_one_leaf() {
        let cloud = PointCloud::new(vec![7.0, 8.0], 2).unwrap();
        let tree = KdTree::build(&cloud, 1, Metric::Euclidean).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        let mut leaves = 0;
        tree.for_each_leaf(|pts| {
            leaves += 1;
            assert_eq!(pts, &[0]);
        });
        assert_eq!(leaves, 1);
    }

    #[test]
    fn hundred_points_hundred_leaves() {
        let cloud = gaussian_cloud(100, 3, 11);
        let tree = KdTree::build(&cloud, 1, Metric::Euclidean).unwrap();
        let mut leaves = 0;
        let mut seen = [false; 100];
        tree.for_each_leaf(|pts| {
            leaves += 1;
            assert_eq!(pts.len(), 1);
            seen[pts[0]] = true;
        });
        assert_eq!(leaves, 100);
        assert!(seen.iter().all(|&s| s));
        assert!(tree.partition_holds());
        assert_eq!(tree.degenerate_splits(), 0);
    }

    #[test]
    fn duplicate_heavy_build_terminates() {
        let mut vals = vec![2.0f64; 9];
        vals.push(3.0);
        let cloud = PointCloud::new(vals, 1).unwrap();
        let tree = KdTree::build(&cloud, 1, Metric::Euclidean).unwrap();
        assert!(tree.degenerate_splits() > 0);
        let mut total = 0;
        tree.for_each_leaf(|pts| total += pts.len());
        assert_eq!(total, 10);
    }

    #[test]
    fn exact_query_toy() {
        let cloud =
            PointCloud::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0], vec![6.0, 8.0]]).unwrap();
        let tree = KdTree::build(&cloud, 1, Metric::Euclidean).unwrap();
        let out = tree.query_excluding(&[0.0, 0.0], 1, 0.0, Some(0)).unwrap();
        assert_eq!(out, vec![Neighbor::new(1, 5.0)]);
    }

    #[test]
    fn exact_matches_brute_force() {
        let cloud = gaussian_cloud(500, 8, 5);
        let tree = KdTree::build(&cloud, 8, Metric::Euclidean).unwrap();
        let oracle = brute_force_knn(&cloud, 10, Metric::Euclidean).unwrap();
        for i in 0..cloud.len() {
            let got = tree.query_excluding(cloud.row(i), 10, 0.0, Some(i)).unwrap();
            assert_eq!(got.as_slice(), oracle.neighbors(i), "query {i}");
        }
    }

    #[test]
    fn epsilon_bound_holds() {
        let cloud = gaussian_cloud(400, 6, 9);
        let tree = KdTree::build(&cloud, 4, Metric::Euclidean).unwrap();
        let oracle = brute_force_knn(&cloud, 10, Metric::Euclidean).unwrap();
        let eps = 1.0;
        for i in 0..cloud.len() {
            let got = tree.query_excluding(cloud.row(i), 10, eps, Some(i)).unwrap();
            for (rank, nb) in got.iter().enumerate() {
                let true_kth = oracle.neighbors(i)[rank].distance;
                assert!(
                    nb.distance <= (1.0 + eps) * true_kth + 1e-12,
                    "query {i} rank {rank}: {} vs {}",
                    nb.distance,
                    true_kth
                );
            }
        }
    }

    #[test]
    fn manhattan_queries_work() {
        let cloud = gaussian_cloud(200, 5, 3);
        let tree = KdTree::build(&cloud, 4, Metric::Manhattan).unwrap();
        let oracle = brute_force_knn(&cloud, 5, Metric::Manhattan).unwrap();
        for i in 0..cloud.len() {
            let got = tree.query_excluding(cloud.row(i), 5, 0.0, Some(i)).unwrap();
            assert_eq!(got.as_slice(), oracle.neighbors(i));
        }
    }

    #[test]
    fn k_too_large_rejected() {
        let cloud = gaussian_cloud(5, 2, 1);
        let tree = KdTree::build(&cloud, 2, Metric::Euclidean).unwrap();
        assert!(tree.query(&[0.0, 0.0], 6, 0.0).is_err());
        assert!(tree.query_excluding(&[0.0, 0.0], 5, 0.0, Some(0)).is_err());
    }
}
