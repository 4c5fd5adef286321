//! Spectral manifold-learning algorithms over a neighbor graph, plus their
//! shared numerical substrate (shortest paths, classical MDS, symmetric and
//! generalized eigensolves).

mod eigen;
mod geodesic;
mod hessian;
mod laplacian;
mod lle;
mod mds;

pub use geodesic::{geodesic_distances, GeodesicDistances};
pub use hessian::{hessian_form, hessian_lle, HessianEstimator};
pub use laplacian::{graph_laplacian, laplacian_eigenmaps, GraphLaplacian, LaplacianWeights};
pub use lle::{lle, local_weights, LocalWeights};
pub use mds::{classical_mds, DistanceMatrix, MdsOutput};

use crate::cloud::Embedding;
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;

/// Output of a manifold-learning run.
#[derive(Debug, Clone)]
pub struct ManifoldOutput {
    pub embedding: Embedding,
    /// Eigenvalues attached to the output columns (meaning depends on the
    /// algorithm: MDS magnitudes for Isomap, bottom-spectrum values for the
    /// others).
    pub eigenvalues: Vec<f64>,
    /// Original point indices of the embedded rows, ascending.
    pub kept: Vec<usize>,
    /// Points dropped because they fell outside the largest connected
    /// component.
    pub dropped: Vec<usize>,
}

impl ManifoldOutput {
    pub(crate) fn full(embedding: Embedding, eigenvalues: Vec<f64>) -> Self {
        use crate::cloud::Coordinates;
        let kept = (0..embedding.len()).collect();
        ManifoldOutput { embedding, eigenvalues, kept, dropped: Vec::new() }
    }
}

/// Which algorithm to run; the common currency of the CLI and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Isomap,
    Lle,
    LaplacianEigenmaps,
    HessianLle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Isomap,
        Algorithm::Lle,
        Algorithm::LaplacianEigenmaps,
        Algorithm::HessianLle,
    ];
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Isomap => write!(f, "isomap"),
            Algorithm::Lle => write!(f, "lle"),
            Algorithm::LaplacianEigenmaps => write!(f, "laplacian_eigenmaps"),
            Algorithm::HessianLle => write!(f, "hessian_lle"),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isomap" => Ok(Algorithm::Isomap),
            "lle" => Ok(Algorithm::Lle),
            "le" | "laplacian_eigenmaps" => Ok(Algorithm::LaplacianEigenmaps),
            "hlle" | "hessian_lle" => Ok(Algorithm::HessianLle),
            other => Err(Error::param(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Default hyperparameters for the dispatch helper.
#[derive(Debug, Clone)]
pub struct ManifoldParams {
    /// LLE Gram regularization, scaled by the local trace.
    pub lle_reg: f64,
    /// Laplacian Eigenmaps weighting.
    pub weights: LaplacianWeights,
}

impl Default for ManifoldParams {
    fn default() -> Self {
        ManifoldParams { lle_reg: 1e-3, weights: LaplacianWeights::Binary }
    }
}

/// Run one algorithm on a prepared cloud/graph pair.
pub fn run_algorithm(
    algorithm: Algorithm,
    cloud: &crate::cloud::PointCloud,
    graph: &NeighborGraph,
    d: usize,
    params: &ManifoldParams,
) -> Result<ManifoldOutput> {
    match algorithm {
        Algorithm::Isomap => isomap(graph, d),
        Algorithm::Lle => lle(cloud, graph, d, params.lle_reg),
        Algorithm::LaplacianEigenmaps => laplacian_eigenmaps(graph, d, params.weights),
        Algorithm::HessianLle => hessian_lle(cloud, graph, d),
    }
}

/// Isomap: classical MDS on graph geodesic distances.
///
/// On a disconnected graph the largest component is embedded and the other
/// indices are reported in `dropped`.
pub fn isomap(graph: &NeighborGraph, d: usize) -> Result<ManifoldOutput> {
    let geo = geodesic_distances(graph);
    let kept = geo.largest_component();
    if kept.len() < d + 1 {
        return Err(Error::InvalidState(format!(
            "largest component has {} points, need at least {}",
            kept.len(),
            d + 1
        )));
    }
    if !geo.is_connected() {
        log::warn!(
            "isomap: graph has {} components; embedding the largest ({} of {} points)",
            geo.n_components,
            kept.len(),
            geo.len()
        );
    }
    let dist = geo.submatrix(&kept);
    let out = classical_mds(&dist, d)?;
    let dropped: Vec<usize> = (0..geo.len()).filter(|i| !kept.contains(i)).collect();
    Ok(ManifoldOutput {
        embedding: out.embedding,
        eigenvalues: out.eigenvalues,
        kept,
        dropped,
    })
}
