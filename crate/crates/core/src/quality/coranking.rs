//! Co-ranking matrix: the contingency table of input-space vs output-space
//! neighborhood ranks.

use crate::error::{Error, Result};
use crate::graph::RankStructure;

/// `(N-1) x (N-1)` counts `q[k][l] = #{(i,j) : rank_in(i,j)=k and
/// rank_out(i,j)=l}`, 1-based in both coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CoRankingMatrix {
    n: usize,
    q: Vec<u32>,
}

impl CoRankingMatrix {
    /// Number of points behind the table (the table itself is (N-1)^2).
    pub fn points(&self) -> usize {
        self.n
    }

    /// Count at input rank `k`, output rank `l` (both 1-based).
    #[inline]
    pub fn count(&self, k: usize, l: usize) -> u32 {
        self.q[(k - 1) * (self.n - 1) + (l - 1)]
    }

    pub fn row_sum(&self, k: usize) -> u64 {
        (1..self.n).map(|l| self.count(k, l) as u64).sum()
    }

    pub fn col_sum(&self, l: usize) -> u64 {
        (1..self.n).map(|k| self.count(k, l) as u64).sum()
    }

    pub fn total(&self) -> u64 {
        self.q.iter().map(|&c| c as u64).sum()
    }
}

/// Count rank co-occurrences of two spaces over the same points.
pub fn coranking(input_ranks: &RankStructure, output_ranks: &RankStructure) -> Result<CoRankingMatrix> {
    let n = input_ranks.len();
    if output_ranks.len() != n {
        return Err(Error::input("rank structures cover different point counts"));
    }
    let mut q = vec![0u32; (n - 1) * (n - 1)];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = input_ranks.rank(i, j) as usize;
            let l = output_ranks.rank(i, j) as usize;
            q[(k - 1) * (n - 1) + (l - 1)] += 1;
        }
    }
    Ok(CoRankingMatrix { n, q })
}

/// Upper-left `K x K` block mass of the co-ranking matrix over `K N`.
pub fn q_nx(q: &CoRankingMatrix, k: usize) -> Result<f64> {
    let n = q.points();
    if k == 0 || k > n - 1 {
        return Err(Error::param(format!("K={k} out of range 1..={}", n - 1)));
    }
    let mut mass = 0u64;
    for kk in 1..=k {
        for ll in 1..=k {
            mass += q.count(kk, ll) as u64;
        }
    }
    Ok(mass as f64 / (k * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointCloud;
    use crate::graph::rank_matrix;
    use crate::metric::Metric;
    use crate::synthetic::gaussian_cloud;

    #[test]
    fn identity_embedding_is_diagonal() {
        let cloud = gaussian_cloud(10, 3, 1);
        let ranks = rank_matrix(&cloud, Metric::Euclidean).unwrap();
        let q = coranking(&ranks, &ranks).unwrap();
        for k in 1..10 {
            for l in 1..10 {
                assert_eq!(q.count(k, l), if k == l { 10 } else { 0 });
            }
        }
    }

    #[test]
    fn reversed_ranks_fill_the_antidiagonal() {
        // Three collinear points vs their mirrored order: enumerate all six
        // ordered pairs by hand.
        let input = PointCloud::new(vec![0.0, 1.0, 3.0], 1).unwrap();
        let output = PointCloud::new(vec![0.0, -1.0, -3.0], 1).unwrap();
        let in_ranks = rank_matrix(&input, Metric::Euclidean).unwrap();
        let out_ranks = rank_matrix(&output, Metric::Euclidean).unwrap();
        // The mirror preserves every pairwise distance, so ranks agree and
        // the co-ranking matrix is diagonal: (k,l) pairs are
        // (1,1) x 3 and (2,2) x 3.
        let q = coranking(&in_ranks, &out_ranks).unwrap();
        assert_eq!(q.count(1, 1), 3);
        assert_eq!(q.count(2, 2), 3);
        assert_eq!(q.total(), 6);

        // A genuinely rank-reversing output: distances from each point flip
        // near and far. Input 0,1,3 vs output where point 2 moves between
        // the others: verify by direct pair enumeration.
        let output2 = PointCloud::new(vec![0.0, 10.0, 4.0], 1).unwrap();
        let out2 = rank_matrix(&output2, Metric::Euclidean).unwrap();
        let q2 = coranking(&in_ranks, &out2).unwrap();
        let mut expect = [0u32; 4];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let k = in_ranks.rank(i, j) as usize;
                    let l = out2.rank(i, j) as usize;
                    expect[(k - 1) * 2 + (l - 1)] += 1;
                }
            }
        }
        for k in 1..=2 {
            for l in 1..=2 {
                assert_eq!(q2.count(k, l), expect[(k - 1) * 2 + (l - 1)]);
            }
        }
    }

    #[test]
    fn row_and_column_sums_equal_n() {
        let a = gaussian_cloud(25, 4, 3);
        let b = gaussian_cloud(25, 2, 4);
        let ra = rank_matrix(&a, Metric::Euclidean).unwrap();
        let rb = rank_matrix(&b, Metric::Euclidean).unwrap();
        let q = coranking(&ra, &rb).unwrap();
        for k in 1..25 {
            assert_eq!(q.row_sum(k), 25);
            assert_eq!(q.col_sum(k), 25);
        }
        assert_eq!(q.total(), 25 * 24);
    }

    #[test]
    fn q_nx_identity_and_full_k() {
        let cloud = gaussian_cloud(20, 3, 9);
        let ranks = rank_matrix(&cloud, Metric::Euclidean).unwrap();
        let q = coranking(&ranks, &ranks).unwrap();
        for k in 1..20 {
            assert_eq!(q_nx(&q, k).unwrap(), 1.0);
        }
        // K = N-1 counts all mass for any embedding.
        let other = gaussian_cloud(20, 2, 10);
        let out_ranks = rank_matrix(&other, Metric::Euclidean).unwrap();
        let q2 = coranking(&ranks, &out_ranks).unwrap();
        assert_eq!(q_nx(&q2, 19).unwrap(), 1.0);
        assert!(q_nx(&q2, 0).is_err());
        assert!(q_nx(&q2, 20).is_err());
    }

    #[test]
    fn q_nx_equals_mean_overlap() {
        let a = gaussian_cloud(30, 4, 5);
        let b = gaussian_cloud(30, 2, 6);
        let ra = rank_matrix(&a, Metric::Euclidean).unwrap();
        let rb = rank_matrix(&b, Metric::Euclidean).unwrap();
        let q = coranking(&ra, &rb).unwrap();
        let k = 5;
        let got = q_nx(&q, k).unwrap();
        // Oracle: mean neighborhood overlap via explicit sets.
        let mut overlap = 0usize;
        for i in 0..30 {
            let ua: std::collections::HashSet<usize> =
                ra.neighborhood(i, k).into_iter().collect();
            let vb: std::collections::HashSet<usize> =
                rb.neighborhood(i, k).into_iter().collect();
            overlap += ua.intersection(&vb).count();
        }
        let expect = overlap as f64 / (k * 30) as f64;
        assert!((got - expect).abs() < 1e-12);
    }
}
