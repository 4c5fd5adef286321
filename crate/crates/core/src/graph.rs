//! K-ary neighborhoods, the brute-force distance oracle, and neighborhood
//! rankings.
//!
//! Every neighbor list in the crate is ordered by `(distance, index)`: ties
//! in distance are broken by the smaller point index. The approximate
//! indexes adopt the same rule, which makes "recall = 1.0" an exact,
//! bit-for-bit testable statement against [`brute_force_knn`].

use rayon::prelude::*;

use crate::cloud::Coordinates;
use crate::error::{Error, Result};
use crate::metric::Metric;

/// One directed neighbor edge: target index and edge length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl Neighbor {
    pub fn new(index: usize, distance: f64) -> Self {
        Neighbor { index, distance }
    }

    /// Total order by `(distance, index)`; the crate-wide tie rule.
    #[inline]
    pub fn cmp_key(&self, other: &Neighbor) -> std::cmp::Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

/// Per-point ordered K-ary neighborhoods with edge lengths.
///
/// Rows may be shorter than `k` only when an approximate backend could not
/// produce enough candidates; such rows are tracked and surfaced through
/// [`NeighborGraph::short_rows`].
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    k: usize,
    rows: Vec<Vec<Neighbor>>,
}

impl NeighborGraph {
    /// Validate and wrap per-point neighbor lists.
    pub fn from_rows(k: usize, rows: Vec<Vec<Neighbor>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("neighborhood size K must be >= 1"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() > k {
                return Err(Error::input(format!("row {i} has more than K={k} neighbors")));
            }
            for pair in row.windows(2) {
                if pair[0].cmp_key(&pair[1]) != std::cmp::Ordering::Less {
                    return Err(Error::input(format!(
                        "row {i} not sorted by (distance, index)"
                    )));
                }
            }
            let mut seen = std::collections::HashSet::new();
            for nb in row {
                if nb.index == i {
                    return Err(Error::input(format!("self-loop at point {i}")));
                }
                if nb.index >= rows.len() {
                    return Err(Error::input(format!(
                        "row {i} references out-of-range point {}",
                        nb.index
                    )));
                }
                if !nb.distance.is_finite() || nb.distance < 0.0 {
                    return Err(Error::input(format!("row {i} has an invalid distance")));
                }
                if !seen.insert(nb.index) {
                    return Err(Error::input(format!(
                        "row {i} lists point {} twice",
                        nb.index
                    )));
                }
            }
        }
        Ok(NeighborGraph { k, rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.rows[i]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[Neighbor]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    /// Indices of rows holding fewer than `k` neighbors.
    pub fn short_rows(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| self.rows[i].len() < self.k)
            .collect()
    }

    pub fn is_short(&self) -> bool {
        self.rows.iter().any(|r| r.len() < self.k)
    }

    /// Line-oriented text form: `i, j_1:d_1, ..., j_K:d_K` per row, with
    /// distances printed as shortest round-trip decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&i.to_string());
            for nb in row {
                out.push_str(&format!(", {}:{}", nb.index, nb.distance));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut k = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let idx: usize = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad row index", lineno + 1)))?;
            if idx != rows.len() {
                return Err(Error::Format(format!(
                    "line {}: expected row {}, found {idx}",
                    lineno + 1,
                    rows.len()
                )));
            }
            let mut row = Vec::new();
            for field in fields {
                let (j, d) = field.split_once(':').ok_or_else(|| {
                    Error::Format(format!("line {}: expected j:distance", lineno + 1))
                })?;
                let j: usize = j
                    .parse()
                    .map_err(|_| Error::Format(format!("line {}: bad neighbor index", lineno + 1)))?;
                let d: f64 = d
                    .parse()
                    .map_err(|_| Error::Format(format!("line {}: bad distance", lineno + 1)))?;
                row.push(Neighbor::new(j, d));
            }
            k = k.max(row.len());
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Format("empty neighbor-graph file".into()));
        }
        NeighborGraph::from_rows(k, rows)
    }
}

/// The K nearest entries of `dists` excluding `skip`, by `(distance, index)`.
pub(crate) fn k_smallest(dists: &mut Vec<Neighbor>, k: usize) -> Vec<Neighbor> {
    let k = k.min(dists.len());
    if k == 0 {
        return Vec::new();
    }
    if k < dists.len() {
        dists.select_nth_unstable_by(k - 1, Neighbor::cmp_key);
        dists.truncate(k);
    }
    dists.sort_unstable_by(Neighbor::cmp_key);
    std::mem::take(dists)
}

/// Exact K nearest neighbors of every point by full pairwise scan.
///
/// The `O(N^2)` baseline every index is validated against.
pub fn brute_force_knn<C: Coordinates + Sync>(
    cloud: &C,
    k: usize,
    metric: Metric,
) -> Result<NeighborGraph> {
    let n = cloud.len();
    if k == 0 {
        return Err(Error::param("K must be >= 1"));
    }
    if k >= n {
        return Err(Error::param(format!("K={k} requires at least {} points", k + 1)));
    }
    let rows: Vec<Vec<Neighbor>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let qi = cloud.row(i);
            let mut dists: Vec<Neighbor> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Neighbor::new(j, metric.distance(qi, cloud.row(j))))
                .collect();
            k_smallest(&mut dists, k)
        })
        .collect();
    NeighborGraph::from_rows(k, rows)
}

/// N x N neighborhood rankings of one space.
///
/// `rank(i, j)` is 1 when `j` is the nearest neighbor of `i`; the diagonal
/// is defined as 0. Distance ties rank the smaller index first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankStructure {
    n: usize,
    ranks: Vec<u32>,
}

impl RankStructure {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.ranks[i * self.n + j]
    }

    /// The K-ary neighborhood `{j : rank(i, j) <= k}`, ordered by rank.
    pub fn neighborhood(&self, i: usize, k: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; k];
        for j in 0..self.n {
            let r = self.rank(i, j) as usize;
            if r >= 1 && r <= k {
                out[r - 1] = j;
            }
        }
        out.retain(|&j| j != usize::MAX);
        out
    }
}

/// Rank all pairwise distances of a space.
///
/// Self is excluded from the competitor set, so a duplicate of point `i`
/// cannot push another point's rank to 0; off-diagonal ranks are always a
/// permutation of `1..N-1`.
pub fn rank_matrix<C: Coordinates + Sync>(space: &C, metric: Metric) -> Result<RankStructure> {
    let n = space.len();
    if n < 2 {
        return Err(Error::input("ranking needs at least two points"));
    }
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let qi = space.row(i);
            let mut order: Vec<Neighbor> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Neighbor::new(j, metric.distance(qi, space.row(j))))
                .collect();
            order.sort_unstable_by(Neighbor::cmp_key);
            let mut row = vec![0u32; n];
            for (pos, nb) in order.iter().enumerate() {
                row[nb.index] = pos as u32 + 1;
            }
            row
        })
        .collect();
    Ok(RankStructure { n, ranks: rows.concat() })
}
