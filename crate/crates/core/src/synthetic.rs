//! Seeded synthetic datasets for tests, demos, and benchmark runs.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::PointCloud;

/// `n` points drawn i.i.d. standard normal in `dim` dimensions.
pub fn gaussian_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n * dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    PointCloud::new(data, dim).expect("generated cloud is valid")
}

/// `n` points uniform on a `width x height` rectangle, rigidly rotated into
/// `ambient_dim` dimensions and translated.
///
/// Returns the ambient cloud together with the flat 2-d coordinates
/// (row-major, `n x 2`) that generated it, for recovery checks against
/// isometry-preserving embeddings.
pub fn rotated_rectangle(
    n: usize,
    width: f64,
    height: f64,
    ambient_dim: usize,
    seed: u64,
) -> (PointCloud, Vec<f64>) {
    assert!(ambient_dim >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = Vec::with_capacity(n * 2);
    for _ in 0..n {
        flat.push(rng.random::<f64>() * width);
        flat.push(rng.random::<f64>() * height);
    }

    // Random rotation: Q factor of a Gaussian matrix via Gram-Schmidt.
    let q = random_orthonormal(ambient_dim, &mut rng);
    let shift: Vec<f64> = (0..ambient_dim).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();

    let mut data = vec![0.0; n * ambient_dim];
    for i in 0..n {
        let (x, y) = (flat[2 * i], flat[2 * i + 1]);
        for r in 0..ambient_dim {
            // Only the first two columns of the rotation act on the plane.
            data[i * ambient_dim + r] = q[r * ambient_dim] * x + q[r * ambient_dim + 1] * y + shift[r];
        }
    }
    (
        PointCloud::new(data, ambient_dim).expect("generated cloud is valid"),
        flat,
    )
}

/// Dense orthonormal matrix (row-major `dim x dim`).
fn random_orthonormal(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= dot * ci;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            cols.push(v);
        }
    }
    let mut out = vec![0.0; dim * dim];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..dim {
            out[i * dim + j] = c[i];
        }
    }
    out
}

/// `n` points on an `intrinsic_dim`-dimensional linear subspace of
/// `ambient_dim`-space, plus isotropic noise.
///
/// Stand-in for image-like benchmark data: high ambient dimension, low
/// intrinsic dimension.
pub fn low_rank_cloud(
    n: usize,
    ambient_dim: usize,
    intrinsic_dim: usize,
    noise: f64,
    seed: u64,
) -> PointCloud {
    assert!(intrinsic_dim <= ambient_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = random_orthonormal(ambient_dim, &mut rng);
    let mut data = vec![0.0; n * ambient_dim];
    for i in 0..n {
        let latent: Vec<f64> = (0..intrinsic_dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        for r in 0..ambient_dim {
            let mut v = 0.0;
            for (c, z) in latent.iter().enumerate() {
                v += basis[r * ambient_dim + c] * z;
            }
            let eps: f64 = StandardNormal.sample(&mut rng);
            data[i * ambient_dim + r] = v + noise * eps;
        }
    }
    PointCloud::new(data, ambient_dim).expect("generated cloud is valid")
}

/// `n` points evenly spaced on a circle of the given radius.
pub fn circle(n: usize, radius: f64) -> PointCloud {
    let data: Vec<f64> = (0..n)
        .flat_map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [radius * theta.cos(), radius * theta.sin()]
        })
        .collect();
    PointCloud::new(data, 2).expect("generated cloud is valid")
}

/// Synthetic half-hourly electricity demand for one household.
///
/// Returns one value series per period slot (`periods` slots, each holding
/// `weeks` observations): a time-of-day profile with morning and evening
/// peaks, weekly weekend lift, annual seasonality, multiplicative noise, and
/// occasional spikes. `missing_rate` blanks values to NaN.
pub fn household_demand(
    seed: u64,
    periods: usize,
    weeks: usize,
    missing_rate: f64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: f64 = 0.25 + rng.random::<f64>() * 0.5;
    let evening_peak = 0.8 + rng.random::<f64>() * 0.8;
    let morning_peak = 0.3 + rng.random::<f64>() * 0.5;
    let weekend_lift = 1.0 + rng.random::<f64>() * 0.4;
    let spike_rate = 0.01 + rng.random::<f64>() * 0.03;

    let slots_per_day = (periods / 7).max(1);
    let mut out = Vec::with_capacity(periods);
    for h in 0..periods {
        let day = h / slots_per_day;
        let slot = h % slots_per_day;
        let tod = slot as f64 / slots_per_day as f64; // fraction of the day
        let morning = morning_peak * (-((tod - 0.33) * 9.0).powi(2)).exp();
        let evening = evening_peak * (-((tod - 0.79) * 7.0).powi(2)).exp();
        let weekend = if day >= 5 { weekend_lift } else { 1.0 };
        let profile = (base + morning + evening) * weekend;

        let mut series = Vec::with_capacity(weeks);
        for w in 0..weeks {
            if rng.random::<f64>() < missing_rate {
                series.push(f64::NAN);
                continue;
            }
            let season = 1.0 + 0.25 * (2.0 * std::f64::consts::PI * w as f64 / 52.0).sin();
            let noise = 0.7 + rng.random::<f64>() * 0.6;
            let spike = if rng.random::<f64>() < spike_rate {
                1.5 + rng.random::<f64>() * 3.0
            } else {
                0.0
            };
            series.push(profile * season * noise + spike);
        }
        out.push(series);
    }
    out
}

/// Long-format demand records `(household id, period, value)` for `n`
/// households; NaN marks missing readings.
pub fn households_long(
    n: usize,
    periods: usize,
    weeks: usize,
    seed: u64,
) -> Vec<(String, usize, f64)> {
    let mut out = Vec::new();
    for h in 0..n {
        let id = format!("h{:04}", h + 1);
        let series = household_demand(seed.wrapping_add(h as u64), periods, weeks, 0.02);
        for (period, values) in series.iter().enumerate() {
            for &v in values {
                out.push((id.clone(), period, v));
            }
        }
    }
    out
}
