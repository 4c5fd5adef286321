//! Distance kernels and probability-vector transforms.
//!
//! Two vector metrics (L2 and L1) back every index and oracle in the crate.
//! The probability-side helpers map discrete distributions onto vectors so
//! that Hellinger distance becomes a Euclidean distance of `sqrt(p)` vectors
//! and Total Variation becomes a (halved) Manhattan distance of raw mass
//! vectors. The constant factors do not change neighbor order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tag selecting the vector metric used by indexes and oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    /// Distance between two equal-length slices.
    ///
    /// Hot path used inside the indexes; lengths are asserted, not returned
    /// as errors. Use [`euclidean`] / [`manhattan`] for checked variants.
    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Euclidean => sum_sq_diff(a, b).sqrt(),
            Metric::Manhattan => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .sum(),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Euclidean => write!(f, "euclidean"),
            Metric::Manhattan => write!(f, "manhattan"),
        }
    }
}

#[inline]
fn sum_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::input(format!(
            "vector length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite entry in vector"));
    }
    Ok(())
}

/// L2 distance with input validation.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    Ok(Metric::Euclidean.distance(a, b))
}

/// L1 distance with input validation.
pub fn manhattan(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    Ok(Metric::Manhattan.distance(a, b))
}

/// Tolerance on `sum(pmf) - 1` accepted by the probability helpers.
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

fn check_pmf(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::input("empty probability vector"));
    }
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::input("probability vector has negative or non-finite mass"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
        return Err(Error::input(format!(
            "probability vector sums to {sum}, outside 1 +- {PMF_SUM_TOLERANCE}"
        )));
    }
    Ok(())
}

/// Element-wise square root of a probability vector.
///
/// The Euclidean distance between two such vectors, divided by sqrt(2), is
/// the Hellinger distance between the underlying distributions, so these
/// coordinates can be fed directly to any L2 index.
pub fn hellinger_coords(pmf: &[f64]) -> Result<Vec<f64>> {
    check_pmf(pmf)?;
    Ok(pmf.iter().map(|v| v.sqrt()).collect())
}

/// Hellinger distance between two probability vectors, normalized to [0, 1].
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    let (a, b) = (hellinger_coords(p)?, hellinger_coords(q)?);
    if a.len() != b.len() {
        return Err(Error::input("probability vectors differ in length"));
    }
    Ok(Metric::Euclidean.distance(&a, &b) / std::f64::consts::SQRT_2)
}

/// Total Variation distance: half the L1 distance, in [0, 1].
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pmf(p)?;
    check_pmf(q)?;
    if p.len() != q.len() {
        return Err(Error::input("probability vectors differ in length"));
    }
    Ok(0.5 * Metric::Manhattan.distance(p, q))
}
