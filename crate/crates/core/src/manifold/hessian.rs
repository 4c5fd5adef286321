//! Hessian LLE: estimate a discrete Hessian functional from per-neighborhood
//! tangent coordinates and embed with its bottom nonconstant eigenvectors.
//!
//! Per neighborhood: center the neighbor rows, take the SVD for a tangent
//! basis, build the design matrix of [ones | linear | quadratic] columns in
//! tangent coordinates, orthonormalize, and keep the rows matching the
//! quadratic block. Accumulating their outer products over all
//! neighborhoods yields a positive semidefinite N x N form whose null space
//! is spanned by the isometric coordinates (plus the constant).

use nalgebra::DMatrix;

use crate::cloud::{Coordinates, Embedding, PointCloud};
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;

use super::eigen::{fix_column_signs, symmetric_eigen_ascending};
use super::ManifoldOutput;

/// Accumulated discrete Hessian quadratic form.
#[derive(Debug, Clone)]
pub struct HessianEstimator {
    form: DMatrix<f64>,
    /// Neighborhoods skipped for rank deficiency.
    pub skipped: Vec<usize>,
}

impl HessianEstimator {
    pub fn len(&self) -> usize {
        self.form.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.form.is_empty()
    }

    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }
}

/// Minimum neighborhood size for target dimension `d`: one constant column,
/// `d` linear columns, and `d(d+1)/2` quadratic columns must fit.
pub fn min_neighbors(d: usize) -> usize {
    d * (d + 1) / 2 + d + 1
}

/// Build the accumulated Hessian form.
pub fn hessian_form(cloud: &PointCloud, graph: &NeighborGraph, d: usize) -> Result<HessianEstimator> {
    let n = cloud.len();
    if graph.len() != n {
        return Err(Error::input("graph and cloud cover different point counts"));
    }
    if d == 0 {
        return Err(Error::param("target dimension must be >= 1"));
    }
    let need = min_neighbors(d);
    if graph.k() < need {
        return Err(Error::param(format!(
            "hessian estimation with d={d} needs K >= {need}, got K={}",
            graph.k()
        )));
    }
    let dd = d * (d + 1) / 2;
    let mut form = DMatrix::zeros(n, n);
    let mut skipped = Vec::new();

    for center in 0..n {
        let nbrs = graph.neighbors(center);
        let k = nbrs.len();
        if k < need {
            skipped.push(center);
            continue;
        }

        // Tangent coordinates: left singular vectors of the centered
        // neighborhood rows.
        let p = cloud.dim();
        let mut mean = vec![0.0; p];
        for nb in nbrs {
            for (m, v) in mean.iter_mut().zip(cloud.row(nb.index)) {
                *m += v / k as f64;
            }
        }
        let mut centered = DMatrix::zeros(k, p);
        for (a, nb) in nbrs.iter().enumerate() {
            for (b, (v, m)) in cloud.row(nb.index).iter().zip(&mean).enumerate() {
                centered[(a, b)] = v - m;
            }
        }
        // Left singular vectors via the K x K Gram matrix: equivalent to
        // the SVD of the centered rows and robust on exactly rank-deficient
        // patches (a flat neighborhood makes the direct SVD ill-behaved).
        let gram = &centered * centered.transpose();
        let (gram_values, gram_vectors) = match symmetric_eigen_ascending(gram) {
            Ok(pair) => pair,
            Err(_) => {
                skipped.push(center);
                continue;
            }
        };
        let sv: Vec<f64> = (0..d)
            .map(|b| gram_values[k - 1 - b].max(0.0).sqrt())
            .collect();
        if sv[d - 1] <= 1e-12 * sv[0].max(1e-300) {
            skipped.push(center);
            continue;
        }
        let u = DMatrix::from_fn(k, d, |a, b| gram_vectors[(a, k - 1 - b)]);

        // Design matrix: ones, tangent coordinates, squares, cross terms.
        let cols = 1 + d + dd;
        let mut z = DMatrix::zeros(k, cols);
        for a in 0..k {
            z[(a, 0)] = 1.0;
            for b in 0..d {
                z[(a, 1 + b)] = u[(a, b)];
            }
            let mut c = 1 + d;
            for b in 0..d {
                z[(a, c)] = u[(a, b)] * u[(a, b)];
                c += 1;
            }
            for b in 0..d {
                for e in (b + 1)..d {
                    z[(a, c)] = u[(a, b)] * u[(a, e)];
                    c += 1;
                }
            }
        }

        if !gram_schmidt(&mut z) {
            skipped.push(center);
            continue;
        }

        // Quadratic-block rows of the orthonormalized transpose estimate
        // the Hessian entries; accumulate their pairwise products.
        for r in 0..dd {
            let col = 1 + d + r;
            for (a, nba) in nbrs.iter().enumerate() {
                let za = z[(a, col)];
                if za == 0.0 {
                    continue;
                }
                for (b, nbb) in nbrs.iter().enumerate() {
                    form[(nba.index, nbb.index)] += za * z[(b, col)];
                }
            }
        }
    }

    if skipped.len() * 10 > n {
        return Err(Error::NumericalFailure(format!(
            "{} of {n} neighborhoods were rank-deficient",
            skipped.len()
        )));
    }
    if !skipped.is_empty() {
        log::warn!("hessian form: skipped {} rank-deficient neighborhoods", skipped.len());
    }
    // Numerical symmetrization of the accumulated form.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (form[(i, j)] + form[(j, i)]);
            form[(i, j)] = avg;
            form[(j, i)] = avg;
        }
    }
    Ok(HessianEstimator { form, skipped })
}

/// In-place modified Gram-Schmidt on the columns; false when a column
/// degenerates.
fn gram_schmidt(z: &mut DMatrix<f64>) -> bool {
    let (rows, cols) = z.shape();
    for j in 0..cols {
        for prev in 0..j {
            let dot: f64 = (0..rows).map(|i| z[(i, j)] * z[(i, prev)]).sum();
            for i in 0..rows {
                z[(i, j)] -= dot * z[(i, prev)];
            }
        }
        let norm: f64 = (0..rows).map(|i| z[(i, j)] * z[(i, j)]).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return false;
        }
        for i in 0..rows {
            z[(i, j)] /= norm;
        }
    }
    true
}

/// Hessian LLE into `d` dimensions.
///
/// Output columns are the eigenvectors of the `d` smallest eigenvalues
/// after the constant one, normalized to unit norm and scaled by sqrt(N).
pub fn hessian_lle(cloud: &PointCloud, graph: &NeighborGraph, d: usize) -> Result<ManifoldOutput> {
    let n = cloud.len();
    if d + 1 >= n {
        return Err(Error::param(format!("d={d} out of range for N={n}")));
    }
    let estimator = hessian_form(cloud, graph, d)?;
    let (values, vectors) = symmetric_eigen_ascending(estimator.form.clone())?;

    let mut coords = vec![0.0; n * d];
    let mut eigenvalues = Vec::with_capacity(d);
    let scale = (n as f64).sqrt();
    for col in 0..d {
        let src = col + 1; // skip the constant bottom eigenvector
        eigenvalues.push(values[src]);
        let column = vectors.column(src);
        let norm = column.norm();
        for i in 0..n {
            coords[i * d + col] = column[i] / norm * scale;
        }
    }
    fix_column_signs(&mut coords, n, d);
    Ok(ManifoldOutput::full(Embedding::new(coords, d)?, eigenvalues))
}
