//! Dataset containers: ambient-space input points and low-dimensional output
//! points. Both are immutable after construction and store row-major data so
//! a point is always a contiguous slice.

use crate::error::{Error, Result};

/// Anything that exposes N fixed-length coordinate rows.
///
/// Implemented by [`PointCloud`] and [`Embedding`] so rank and distance
/// routines can run on either space.
pub trait Coordinates {
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn row(&self, i: usize) -> &[f64];

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn validate_matrix(data: &[f64], n: usize, dim: usize, what: &str) -> Result<()> {
    if n == 0 || dim == 0 {
        return Err(Error::input(format!("{what} must have N >= 1 and dim >= 1")));
    }
    if data.len() != n * dim {
        return Err(Error::input(format!(
            "{what} storage holds {} values, expected {n} x {dim}",
            data.len()
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::input(format!("{what} contains a non-finite coordinate")));
    }
    Ok(())
}

/// N input points in R^p, with optional external row identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    ids: Option<Vec<String>>,
}

impl PointCloud {
    /// Build from row-major storage of shape `N x dim`.
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("point cloud must have dim >= 1"));
        }
        let n = data.len() / dim;
        validate_matrix(&data, n, dim, "point cloud")?;
        Ok(PointCloud { data, n, dim, ids: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("ragged rows in point cloud"));
        }
        Self::new(rows.concat(), dim)
    }

    /// Attach per-row identifiers; they must be unique and cover every row.
    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::input(format!(
                "{} ids for {} points",
                ids.len(),
                self.n
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if !ids.iter().all(|id| seen.insert(id)) {
            return Err(Error::input("duplicate point id"));
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    /// Identifier for row `i`: the external id when present, else the index.
    pub fn id_of(&self, i: usize) -> String {
        match &self.ids {
            Some(ids) => ids[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// The sub-cloud at the given row indices (ids carried over).
    pub fn subset(&self, indices: &[usize]) -> Result<PointCloud> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.n {
                return Err(Error::input(format!("subset index {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
        }
        let cloud = PointCloud::new(data, self.dim)?;
        match &self.ids {
            Some(ids) => cloud.with_ids(indices.iter().map(|&i| ids[i].clone()).collect()),
            None => Ok(cloud),
        }
    }
}

impl Coordinates for PointCloud {
    fn len(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// N output points in R^d produced by a manifold-learning algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Vec<f64>,
    n: usize,
    d: usize,
}

impl Embedding {
    pub fn new(coords: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("embedding must have d >= 1"));
        }
        let n = coords.len() / d;
        validate_matrix(&coords, n, d, "embedding")?;
        Ok(Embedding { coords, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::input("ragged rows in embedding"));
        }
        Self::new(rows.concat(), d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    /// Column `j` gathered into a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.coords[i * self.d + j]).collect()
    }
}

impl Coordinates for Embedding {
    fn len(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }
}
