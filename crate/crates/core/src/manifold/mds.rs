//! Classical multidimensional scaling: embed a distance matrix through the
//! spectral decomposition of its double-centered squared form.

use nalgebra::DMatrix;

use crate::cloud::Embedding;
use crate::error::{Error, Result};

use super::eigen::{fix_column_signs, symmetric_eigen_ascending};

/// Symmetric distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(data: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::input("distance matrix must be square and non-empty"));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::input("distance matrix diagonal must be zero"));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::input("distance matrix entries must be finite and >= 0"));
                }
                if (v - data[j * n + i]).abs() > 1e-9 * (1.0 + v.abs()) {
                    return Err(Error::input("distance matrix must be symmetric"));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    /// Pairwise distances of a coordinate set under a callback metric.
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self::new(data, n)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Embedding plus the eigenvalues behind each output column.
#[derive(Debug, Clone)]
pub struct MdsOutput {
    pub embedding: Embedding,
    /// Eigenvalue of the double-centered matrix per output column,
    /// descending.
    pub eigenvalues: Vec<f64>,
    /// Columns emitted as zeros because fewer than `d` positive eigenvalues
    /// existed.
    pub padded_columns: usize,
}

/// Classical MDS of a distance matrix into `d` dimensions.
///
/// Double-centers the squared distances, eigendecomposes, and scales the
/// top-`d` eigenvectors by the square roots of their eigenvalues. Columns
/// beyond the positive spectrum are zero (Euclidean-unrealizable directions
/// contribute nothing).
pub fn classical_mds(dist: &DistanceMatrix, d: usize) -> Result<MdsOutput> {
    let n = dist.len();
    if d == 0 {
        return Err(Error::param("target dimension must be >= 1"));
    }
    if n < 2 {
        return Err(Error::input("need at least two points to embed"));
    }

    // B = -1/2 J D^2 J via double centering of squared distances.
    let mut sq = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = dist.get(i, j);
            sq[i * n + j] = v * v;
        }
    }
    let mut row_mean = vec![0.0; n];
    for i in 0..n {
        row_mean[i] = sq[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64;
    }
    let grand_mean = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (sq[i * n + j] - row_mean[i] - row_mean[j] + grand_mean);
        }
    }

    let (values, vectors) = symmetric_eigen_ascending(b)?;
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * max_abs.max(1.0);

    let mut coords = vec![0.0; n * d];
    let mut eigenvalues = Vec::with_capacity(d);
    let mut padded = 0usize;
    for col in 0..d {
        // Descending from the top of the ascending order.
        let src = n - 1 - col;
        let lambda = if col < n { values[src] } else { f64::NEG_INFINITY };
        if col >= n || lambda <= tol {
            eigenvalues.push(if col < n { lambda } else { 0.0 });
            padded += 1;
            continue; // zero column
        }
        eigenvalues.push(lambda);
        let scale = lambda.sqrt();
        for i in 0..n {
            coords[i * d + col] = vectors[(i, src)] * scale;
        }
    }
    if padded > 0 {
        log::warn!("classical MDS: only {} positive eigenvalues for d={d}; zero-padded", d - padded);
    }
    fix_column_signs(&mut coords, n, d);
    Ok(MdsOutput {
        embedding: Embedding::new(coords, d)?,
        eigenvalues,
        padded_columns: padded,
    })
}
