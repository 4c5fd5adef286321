//! Discrete distributions over a shared grid.
//!
//! Raw observations are pooled to fix an evenly spaced grid, each series is
//! binned into a probability mass vector on that grid, and the vectors (or
//! their element-wise square roots) feed the nearest-neighbor indexes:
//! Manhattan distance on raw mass vectors reproduces Total Variation
//! ordering, Euclidean distance on square-rooted vectors reproduces
//! Hellinger ordering. Per-period vectors can be stacked so a single
//! Manhattan distance equals the sum of per-period Total Variation
//! distances (times the constant 2 from TV = L1/2).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evenly spaced bin edges spanning the pooled data range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    edges: Vec<f64>,
}

impl BinGrid {
    /// Number of bins.
    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// The `G + 1` ascending edges.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn min(&self) -> f64 {
        self.edges[0]
    }

    pub fn max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Bin index for a value: left-closed/right-open intervals, with the
    /// last bin closed on the right. Values outside the range get None.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !x.is_finite() || x < self.min() || x > self.max() {
            return None;
        }
        if x == self.max() {
            return Some(self.bins() - 1);
        }
        let width = (self.max() - self.min()) / self.bins() as f64;
        let mut g = ((x - self.min()) / width) as usize;
        g = g.min(self.bins() - 1);
        // Guard the float division against edge rounding.
        while g > 0 && x < self.edges[g] {
            g -= 1;
        }
        while g + 1 < self.bins() && x >= self.edges[g + 1] {
            g += 1;
        }
        Some(g)
    }
}

/// Evenly spaced grid between the pooled minimum and maximum.
pub fn build_grid(values: &[f64], bins: usize) -> Result<BinGrid> {
    if bins == 0 {
        return Err(Error::param("bin count must be >= 1"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_nan() {
            continue;
        }
        if !v.is_finite() {
            return Err(Error::input("non-finite value in pooled data"));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::input("no usable values to build a grid"));
    }
    if lo == hi {
        return Err(Error::input(
            "all pooled values are equal; the grid would be degenerate",
        ));
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|g| lo + (hi - lo) * g as f64 / bins as f64)
        .collect();
    Ok(BinGrid { edges })
}

/// Probability mass vector over a [`BinGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pmf: Vec<f64>,
    grid: BinGrid,
    /// Non-missing observations behind the estimate; 0 flags an empty
    /// distribution.
    support_count: usize,
}

impl DiscreteDistribution {
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn support_count(&self) -> usize {
        self.support_count
    }

    pub fn is_empty(&self) -> bool {
        self.support_count == 0
    }
}

/// Bin one value series into a mass vector; NaN entries are treated as
/// missing and the normalizer is the count of used values.
pub fn bin_series(values: &[f64], grid: &BinGrid) -> DiscreteDistribution {
    let mut counts = vec![0usize; grid.bins()];
    let mut used = 0usize;
    for &v in values {
        if let Some(g) = grid.bin_of(v) {
            counts[g] += 1;
            used += 1;
        }
    }
    let pmf = if used == 0 {
        vec![0.0; grid.bins()]
    } else {
        counts.iter().map(|&c| c as f64 / used as f64).collect()
    };
    DiscreteDistribution { pmf, grid: grid.clone(), support_count: used }
}

/// How a distribution is presented to a vector index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// Element-wise square root; pair with the Euclidean metric.
    Hellinger,
    /// Raw mass vector; pair with the Manhattan metric.
    Tv,
}

impl std::str::FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hellinger" => Ok(FeatureMode::Hellinger),
            "tv" => Ok(FeatureMode::Tv),
            other => Err(Error::param(format!("unknown feature mode '{other}'"))),
        }
    }
}

/// Vector representation of a distribution for index consumption.
pub fn to_feature_vector(dist: &DiscreteDistribution, mode: FeatureMode) -> Result<Vec<f64>> {
    if dist.is_empty() {
        return Err(Error::input("empty distribution has no feature vector"));
    }
    Ok(match mode {
        FeatureMode::Hellinger => dist.pmf.iter().map(|v| v.sqrt()).collect(),
        FeatureMode::Tv => dist.pmf.clone(),
    })
}

/// Per-period mass vectors concatenated into one household vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedDistribution {
    data: Vec<f64>,
    periods: usize,
    bins: usize,
    /// Period slots whose distribution was empty (all block mass zero).
    pub empty_periods: Vec<usize>,
}

impl StackedDistribution {
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Mass block of one period slot.
    pub fn block(&self, h: usize) -> &[f64] {
        &self.data[h * self.bins..(h + 1) * self.bins]
    }
}

/// Concatenate per-period distributions sharing one grid.
///
/// The Manhattan distance between two stacked vectors equals twice the sum
/// over periods of the Total Variation distances (TV being half the L1
/// norm), so the stacked form preserves the per-period-sum neighbor order
/// exactly.
pub fn stack_household(dists: &[DiscreteDistribution]) -> Result<StackedDistribution> {
    let first = dists
        .first()
        .ok_or_else(|| Error::input("no per-period distributions to stack"))?;
    let grid = &first.grid;
    let bins = grid.bins();
    let mut data = Vec::with_capacity(dists.len() * bins);
    let mut empty_periods = Vec::new();
    for (h, d) in dists.iter().enumerate() {
        if d.grid != *grid {
            return Err(Error::input(format!(
                "period {h} was binned on a different grid"
            )));
        }
        if d.is_empty() {
            empty_periods.push(h);
        }
        data.extend_from_slice(&d.pmf);
    }
    Ok(StackedDistribution { data, periods: dists.len(), bins, empty_periods })
}
