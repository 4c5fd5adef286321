//! Gaussian product-kernel density over a 2-d embedding, flagging the
//! lowest-density points as anomalies.

use serde::{Deserialize, Serialize};

use crate::cloud::{Coordinates, Embedding};
use crate::error::{Error, Result};

/// Per-point density estimates plus the flagged lowest-density indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub densities: Vec<f64>,
    /// The `count` lowest-density point indices, lowest first; ties broken
    /// by smaller index.
    pub anomaly_indices: Vec<usize>,
    /// Bandwidth used per axis.
    pub bandwidths: Vec<f64>,
}

/// Kernel density at every embedded point with normal-reference bandwidths,
/// flagging the `count` lowest.
pub fn density_anomalies(emb: &Embedding, count: usize) -> Result<DensityReport> {
    if emb.dim() != 2 {
        return Err(Error::param(format!(
            "density flagging runs on 2-d embeddings, got d={}",
            emb.dim()
        )));
    }
    let n = emb.len();
    if count == 0 || n < count {
        return Err(Error::param(format!("need at least {count} points, have {n}")));
    }
    let d = emb.dim();

    // Normal-reference rule per axis: sigma * (4 / (d + 2))^(1/(d+4)) *
    // n^(-1/(d+4)); for d = 2 the leading constant is exactly 1.
    let exponent = -1.0 / (d as f64 + 4.0);
    let constant = (4.0 / (d as f64 + 2.0)).powf(1.0 / (d as f64 + 4.0));
    let mut bandwidths = Vec::with_capacity(d);
    for axis in 0..d {
        let col = emb.column(axis);
        let mean: f64 = col.iter().sum::<f64>() / n as f64;
        let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (n as f64 - 1.0).max(1.0);
        let sigma = var.sqrt();
        let mut h = sigma * constant * (n as f64).powf(exponent);
        if h <= 0.0 {
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            log::warn!("density: axis {axis} has zero variance; flooring bandwidth");
            h = if range > 0.0 { 1e-9 * range } else { 1e-9 };
        }
        bandwidths.push(h);
    }

    let norm = bandwidths
        .iter()
        .map(|h| h * (2.0 * std::f64::consts::PI).sqrt())
        .product::<f64>()
        * n as f64;
    let densities: Vec<f64> = (0..n)
        .map(|i| {
            let yi = emb.row(i);
            let mut sum = 0.0;
            for j in 0..n {
                let yj = emb.row(j);
                let mut expo = 0.0;
                for a in 0..d {
                    let z = (yi[a] - yj[a]) / bandwidths[a];
                    expo += z * z;
                }
                sum += (-0.5 * expo).exp();
            }
            sum / norm
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| densities[a].total_cmp(&densities[b]).then(a.cmp(&b)));
    order.truncate(count);
    Ok(DensityReport { densities, anomaly_indices: order, bandwidths })
}
