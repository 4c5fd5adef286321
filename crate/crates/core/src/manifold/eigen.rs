//! Thin wrappers around the dense symmetric eigensolver, with ascending
//! ordering and the diagonal-metric generalized problem reduced to the
//! standard one.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// matching unit-norm columns.
pub(crate) fn symmetric_eigen_ascending(mat: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::input("eigendecomposition needs a square matrix"));
    }
    let n = mat.nrows();
    let eig = mat.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Solve `L v = lambda D v` for symmetric `L` and positive diagonal `D` by
/// the similarity transform `D^{-1/2} L D^{-1/2}`.
///
/// Returned eigenvectors are D-orthonormal: `v' D v = 1`.
pub(crate) fn generalized_eigen_diag(
    l: &DMatrix<f64>,
    diag: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = l.nrows();
    if diag.len() != n {
        return Err(Error::input("diagonal length does not match the matrix"));
    }
    if diag.iter().any(|&d| d <= 0.0 || !d.is_finite()) {
        return Err(Error::NumericalFailure(
            "degree matrix must be strictly positive".into(),
        ));
    }
    let s: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut sym = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = l[(i, j)] * s[i] * s[j];
        }
    }
    // Enforce exact symmetry against accumulation noise.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = avg;
            sym[(j, i)] = avg;
        }
    }
    let (values, mut vectors) = symmetric_eigen_ascending(sym)?;
    for j in 0..n {
        for i in 0..n {
            vectors[(i, j)] *= s[i];
        }
    }
    Ok((values, vectors))
}

/// Flip each column so its largest-magnitude entry is positive, making runs
/// comparable across eigensolver sign choices.
pub(crate) fn fix_column_signs(coords: &mut [f64], n: usize, d: usize) {
    for j in 0..d {
        let mut best = 0.0f64;
        let mut best_val = 0.0f64;
        for i in 0..n {
            let v = coords[i * d + j];
            if v.abs() > best {
                best = v.abs();
                best_val = v;
            }
        }
        if best_val < 0.0 {
            for i in 0..n {
                coords[i * d + j] = -coords[i * d + j];
            }
        }
    }
}
