//! Locally linear embedding: reconstruct each point from its neighbors with
//! sum-to-one weights, then find the low-dimensional configuration best
//! preserved by the same weights.
//!
//! Only the sum-to-one constraint is enforced on the weights (no
//! nonnegativity), matching the original method.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::cloud::{Coordinates, Embedding, PointCloud};
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;

use super::eigen::{fix_column_signs, symmetric_eigen_ascending};
use super::ManifoldOutput;

/// Sparse per-point reconstruction weights, rows summing to one over each
/// point's neighborhood.
#[derive(Debug, Clone)]
pub struct LocalWeights {
    rows: Vec<Vec<(usize, f64)>>,
}

impl LocalWeights {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(neighbor index, weight)` pairs for point `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Residual of reconstructing `cloud[i]` from its weighted neighbors.
    pub fn reconstruction_residual(&self, cloud: &PointCloud, i: usize) -> f64 {
        let mut recon = vec![0.0; cloud.dim()];
        for &(j, w) in &self.rows[i] {
            for (r, v) in recon.iter_mut().zip(cloud.row(j)) {
                *r += w * v;
            }
        }
        cloud
            .row(i)
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Solve the constrained local Gram systems for every point.
///
/// `reg` scales the identity ridge by the Gram trace; the local system is
/// singular whenever K exceeds the ambient dimension, so `reg = 0` is only
/// usable on data in general position.
pub fn local_weights(cloud: &PointCloud, graph: &NeighborGraph, reg: f64) -> Result<LocalWeights> {
    if graph.len() != cloud.len() {
        return Err(Error::input("graph and cloud cover different point counts"));
    }
    if reg < 0.0 {
        return Err(Error::param("regularization must be >= 0"));
    }
    if graph.k() < 2 {
        return Err(Error::param("LLE needs K >= 2"));
    }
    let rows: Vec<Result<Vec<(usize, f64)>>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let nbrs = graph.neighbors(i);
            let k = nbrs.len();
            let xi = cloud.row(i);
            // Gram matrix of the centered neighbors.
            let diffs: Vec<Vec<f64>> = nbrs
                .iter()
                .map(|nb| {
                    cloud
                        .row(nb.index)
                        .iter()
                        .zip(xi)
                        .map(|(a, b)| a - b)
                        .collect()
                })
                .collect();
            let mut gram = DMatrix::zeros(k, k);
            for a in 0..k {
                for b in a..k {
                    let dot: f64 = diffs[a].iter().zip(&diffs[b]).map(|(x, y)| x * y).sum();
                    gram[(a, b)] = dot;
                    gram[(b, a)] = dot;
                }
            }
            let trace = gram.trace();
            // An all-duplicate neighborhood has zero trace; fall back to a
            // bare ridge so the solve stays defined.
            let ridge = if trace > 0.0 { reg * trace } else { reg };
            for a in 0..k {
                gram[(a, a)] += ridge;
            }
            let rhs = DVector::from_element(k, 1.0);
            let solved = gram.lu().solve(&rhs).ok_or_else(|| {
                Error::NumericalFailure(format!(
                    "singular local Gram system at point {i}; use reg > 0"
                ))
            })?;
            let sum: f64 = solved.iter().sum();
            if !sum.is_finite() || sum.abs() < 1e-300 {
                return Err(Error::NumericalFailure(format!(
                    "weights at point {i} do not normalize; use reg > 0"
                )));
            }
            Ok(nbrs
                .iter()
                .zip(solved.iter())
                .map(|(nb, w)| (nb.index, w / sum))
                .collect())
        })
        .collect();
    let rows: Vec<Vec<(usize, f64)>> = rows.into_iter().collect::<Result<_>>()?;
    Ok(LocalWeights { rows })
}

/// Embedding matrix `M = (I - W)' (I - W)` assembled densely.
fn embedding_matrix(weights: &LocalWeights) -> DMatrix<f64> {
    let n = weights.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] += 1.0;
        for &(j, wj) in weights.row(i) {
            m[(i, j)] -= wj;
            m[(j, i)] -= wj;
            for &(l, wl) in weights.row(i) {
                m[(j, l)] += wj * wl;
            }
        }
    }
    m
}

/// Locally linear embedding into `d` dimensions.
///
/// The output takes the eigenvectors for the `d` smallest eigenvalues of
/// `(I - W)'(I - W)` after the constant one, scaled so each output
/// coordinate has unit variance.
pub fn lle(cloud: &PointCloud, graph: &NeighborGraph, d: usize, reg: f64) -> Result<ManifoldOutput> {
    let n = cloud.len();
    if d == 0 || d + 1 >= n {
        return Err(Error::param(format!("d={d} out of range for N={n}")));
    }
    let weights = local_weights(cloud, graph, reg)?;
    let m = embedding_matrix(&weights);
    let (values, vectors) = symmetric_eigen_ascending(m)?;

    let mut coords = vec![0.0; n * d];
    let mut eigenvalues = Vec::with_capacity(d);
    for col in 0..d {
        let src = col + 1; // skip the constant bottom eigenvector
        eigenvalues.push(values[src]);
        let column = vectors.column(src);
        let mean: f64 = column.iter().sum::<f64>() / n as f64;
        let var: f64 = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
        for i in 0..n {
            coords[i * d + col] = column[i] * scale;
        }
    }
    fix_column_signs(&mut coords, n, d);
    Ok(ManifoldOutput::full(Embedding::new(coords, d)?, eigenvalues))
}
