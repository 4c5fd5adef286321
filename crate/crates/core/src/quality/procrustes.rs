//! Local Procrustes fit: how well each input neighborhood is reproduced by
//! an orthonormal map plus shift applied to the output neighborhood.

use nalgebra::DMatrix;

use crate::cloud::{Coordinates, Embedding, PointCloud};
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;

/// Per-neighborhood Procrustes statistic summed per the overall measure;
/// returns `1 - G` so larger is better.
///
/// For each point the optimal column-orthonormal `A` (input-dim x
/// output-dim) and shift `b` minimize the squared residual of mapping the
/// output neighbors onto the input neighbors; the normalizer is the raw
/// (uncentered) squared norm of the input neighbors. Degenerate
/// neighborhoods with zero normalizer are skipped.
pub fn procrustes_measure(
    cloud: &PointCloud,
    emb: &Embedding,
    graph_in: &NeighborGraph,
) -> Result<f64> {
    let n = cloud.len();
    if emb.len() != n || graph_in.len() != n {
        return Err(Error::input("cloud, embedding, and graph sizes differ"));
    }
    if graph_in.k() < 2 {
        return Err(Error::param("procrustes measure needs K >= 2"));
    }
    let p = cloud.dim();
    let d = emb.dim();

    let mut total = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        let nbrs = graph_in.neighbors(i);
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let denom: f64 = nbrs
            .iter()
            .map(|nb| cloud.row(nb.index).iter().map(|v| v * v).sum::<f64>())
            .sum();
        if denom <= 1e-300 {
            log::warn!("procrustes: neighborhood of point {i} has zero norm; skipped");
            continue;
        }
        let gi = procrustes_statistic(
            |a, out| {
                let row = cloud.row(nbrs[a].index);
                out[..p].copy_from_slice(row);
            },
            |a, out| {
                let row = emb.row(nbrs[a].index);
                out[..d].copy_from_slice(row);
            },
            k,
            p,
            d,
        );
        total += gi / denom;
        used += 1;
    }
    if used == 0 {
        return Err(Error::NumericalFailure(
            "every neighborhood was degenerate".into(),
        ));
    }
    Ok(1.0 - total / used as f64)
}

/// `min over {A: A'A = I}, b of sum_j ||x_j - A y_j - b||^2` via the
/// centered cross-covariance factorization.
fn procrustes_statistic(
    fill_x: impl Fn(usize, &mut [f64]),
    fill_y: impl Fn(usize, &mut [f64]),
    k: usize,
    p: usize,
    d: usize,
) -> f64 {
    let mut xs = DMatrix::zeros(k, p);
    let mut ys = DMatrix::zeros(k, d);
    let mut buf = vec![0.0; p.max(d)];
    for a in 0..k {
        fill_x(a, &mut buf);
        for b in 0..p {
            xs[(a, b)] = buf[b];
        }
        fill_y(a, &mut buf);
        for b in 0..d {
            ys[(a, b)] = buf[b];
        }
    }
    center_rows(&mut xs);
    center_rows(&mut ys);

    let cross = xs.transpose() * &ys; // p x d
    let sigma_sum: f64 = cross.svd(false, false).singular_values.iter().sum();
    let sx: f64 = xs.iter().map(|v| v * v).sum();
    let sy: f64 = ys.iter().map(|v| v * v).sum();
    (sx + sy - 2.0 * sigma_sum).max(0.0)
}

fn center_rows(m: &mut DMatrix<f64>) {
    let (rows, cols) = m.shape();
    for c in 0..cols {
        let mean: f64 = (0..rows).map(|r| m[(r, c)]).sum::<f64>() / rows as f64;
        for r in 0..rows {
            m[(r, c)] -= mean;
        }
    }
}

/// Relative full-Procrustes residual of `coords` against `truth`
/// (translation, rotation/reflection, and scale removed), both row-major.
///
/// Zero means exact recovery; used to validate isometry-preserving
/// embeddings against generating coordinates.
pub fn procrustes_residual(
    truth: &[f64],
    coords: &[f64],
    n: usize,
    truth_dim: usize,
    coord_dim: usize,
) -> f64 {
    let mut t = DMatrix::from_fn(n, truth_dim, |r, c| truth[r * truth_dim + c]);
    let mut y = DMatrix::from_fn(n, coord_dim, |r, c| coords[r * coord_dim + c]);
    center_rows(&mut t);
    center_rows(&mut y);
    let st: f64 = t.iter().map(|v| v * v).sum();
    let sy: f64 = y.iter().map(|v| v * v).sum();
    if st <= 0.0 || sy <= 0.0 {
        return if st == sy { 0.0 } else { 1.0 };
    }
    let cross = t.transpose() * &y;
    let sigma_sum: f64 = cross.svd(false, false).singular_values.iter().sum();
    // Optimal scale s = sigma_sum / sy; residual = st - sigma_sum^2 / sy.
    (1.0 - sigma_sum * sigma_sum / (sy * st)).max(0.0)
}

/// Coefficient of determination of regressing `truth` on `coords` plus an
/// intercept; 1 means the truth is an exact affine image of the coordinates.
pub fn affine_r_squared(
    truth: &[f64],
    coords: &[f64],
    n: usize,
    truth_dim: usize,
    coord_dim: usize,
) -> f64 {
    let t = DMatrix::from_fn(n, truth_dim, |r, c| truth[r * truth_dim + c]);
    let mut z = DMatrix::from_element(n, coord_dim + 1, 1.0);
    for r in 0..n {
        for c in 0..coord_dim {
            z[(r, c)] = coords[r * coord_dim + c];
        }
    }
    let svd = z.svd(true, true);
    let beta = svd
        .solve(&t, 1e-12)
        .expect("least-squares solve on finite data");
    let fitted = DMatrix::from_fn(n, coord_dim + 1, |r, c| {
        if c < coord_dim {
            coords[r * coord_dim + c]
        } else {
            1.0
        }
    }) * beta;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for c in 0..truth_dim {
        let mean: f64 = (0..n).map(|r| t[(r, c)]).sum::<f64>() / n as f64;
        for r in 0..n {
            ss_res += (t[(r, c)] - fitted[(r, c)]).powi(2);
            ss_tot += (t[(r, c)] - mean).powi(2);
        }
    }
    if ss_tot <= 0.0 {
        return if ss_res <= 1e-18 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}
