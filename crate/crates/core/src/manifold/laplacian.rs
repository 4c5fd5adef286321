//! Laplacian Eigenmaps: bottom eigenvectors of the generalized problem
//! `L v = lambda D v` over the symmetrized neighbor graph.

use nalgebra::DMatrix;

use crate::cloud::Embedding;
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;

use super::eigen::{fix_column_signs, generalized_eigen_diag};
use super::geodesic::{component_labels, symmetrized_adjacency};
use super::ManifoldOutput;

/// Edge weighting for the graph Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplacianWeights {
    /// Connected edges weigh 1.
    Binary,
    /// Heat kernel `exp(-dist^2 / (2 sigma^2))`; approaches binary weights
    /// as sigma grows.
    Heat { sigma: f64 },
}

/// Symmetric weighted adjacency with degree vector; `L = D - W` is kept
/// implicit in sparse form and densified only for the eigensolve.
#[derive(Debug, Clone)]
pub struct GraphLaplacian {
    adj: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
}

impl GraphLaplacian {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    /// Dense `L = D - W` restricted to `indices`.
    pub fn dense_l(&self, indices: &[usize]) -> DMatrix<f64> {
        let m = indices.len();
        let pos: std::collections::HashMap<usize, usize> =
            indices.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let mut l = DMatrix::zeros(m, m);
        for (a, &i) in indices.iter().enumerate() {
            let mut degree = 0.0;
            for &(j, w) in &self.adj[i] {
                if let Some(&b) = pos.get(&j) {
                    l[(a, b)] -= w;
                    degree += w;
                }
            }
            l[(a, a)] += degree;
        }
        l
    }

    /// Degrees restricted to `indices` (recomputed within the subgraph).
    pub fn degrees_within(&self, indices: &[usize]) -> Vec<f64> {
        let member: std::collections::HashSet<usize> = indices.iter().copied().collect();
        indices
            .iter()
            .map(|&i| {
                self.adj[i]
                    .iter()
                    .filter(|(j, _)| member.contains(j))
                    .map(|&(_, w)| w)
                    .sum()
            })
            .collect()
    }
}

/// Build the weighted Laplacian from a neighbor graph (symmetrized by
/// union).
pub fn graph_laplacian(graph: &NeighborGraph, weights: LaplacianWeights) -> Result<GraphLaplacian> {
    if let LaplacianWeights::Heat { sigma } = weights {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::param("heat-kernel sigma must be > 0"));
        }
    }
    let adj = symmetrized_adjacency(graph);
    let adj: Vec<Vec<(usize, f64)>> = adj
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(j, dist)| {
                    let w = match weights {
                        LaplacianWeights::Binary => 1.0,
                        LaplacianWeights::Heat { sigma } => {
                            (-dist * dist / (2.0 * sigma * sigma)).exp()
                        }
                    };
                    (j, w)
                })
                .collect()
        })
        .collect();
    let degrees: Vec<f64> = adj
        .iter()
        .map(|row| row.iter().map(|&(_, w)| w).sum())
        .collect();
    Ok(GraphLaplacian { adj, degrees })
}

/// Laplacian Eigenmaps into `d` dimensions.
///
/// Uses the largest connected component when the graph is disconnected.
/// Output columns are the D-orthonormal eigenvectors of the `d` smallest
/// nonzero generalized eigenvalues, which are also returned.
pub fn laplacian_eigenmaps(
    graph: &NeighborGraph,
    d: usize,
    weights: LaplacianWeights,
) -> Result<ManifoldOutput> {
    if d == 0 {
        return Err(Error::param("target dimension must be >= 1"));
    }
    let laplacian = graph_laplacian(graph, weights)?;
    let (labels, n_components) = component_labels(&laplacian.adj);
    let kept: Vec<usize> = if n_components == 1 {
        (0..laplacian.len()).collect()
    } else {
        let mut sizes = vec![0usize; n_components];
        for &c in &labels {
            sizes[c] += 1;
        }
        let best = (0..n_components)
            .max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)))
            .unwrap();
        log::warn!(
            "laplacian eigenmaps: {} components; embedding the largest ({} points)",
            n_components,
            sizes[best]
        );
        (0..laplacian.len()).filter(|&i| labels[i] == best).collect()
    };
    if d >= kept.len() {
        return Err(Error::param(format!(
            "d={d} must be smaller than the component size {}",
            kept.len()
        )));
    }

    let l = laplacian.dense_l(&kept);
    let degrees = laplacian.degrees_within(&kept);
    let (values, vectors) = generalized_eigen_diag(&l, &degrees)?;

    // Zero modes: one per connected component of the subgraph (exactly one
    // here); threshold relative to the top of the spectrum.
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero_tol = 1e-9 * max_abs.max(1.0);
    let first_nonzero = values.iter().position(|&v| v > zero_tol).ok_or_else(|| {
        Error::NumericalFailure("laplacian spectrum is entirely zero".into())
    })?;
    if first_nonzero + d > kept.len() {
        return Err(Error::param(format!(
            "d={d} exceeds the available nonzero spectrum"
        )));
    }

    let m = kept.len();
    let mut coords = vec![0.0; m * d];
    let mut eigenvalues = Vec::with_capacity(d);
    for col in 0..d {
        let src = first_nonzero + col;
        eigenvalues.push(values[src]);
        for i in 0..m {
            coords[i * d + col] = vectors[(i, src)];
        }
    }
    fix_column_signs(&mut coords, m, d);
    let dropped: Vec<usize> = (0..laplacian.len()).filter(|i| !kept.contains(i)).collect();
    Ok(ManifoldOutput {
        embedding: Embedding::new(coords, d)?,
        eigenvalues,
        kept,
        dropped,
    })
}
