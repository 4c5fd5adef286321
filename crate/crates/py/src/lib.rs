//! Python bindings: the dataset containers, the three nearest-neighbor
//! indexes plus the brute-force oracle, the four spectral embeddings, the
//! quality measures, and the histogram/statistical-distance pipeline.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use manifold_ann::ann;
use manifold_ann::distributions as dist;
use manifold_ann::manifold;
use manifold_ann::metric;
use manifold_ann::quality;
use manifold_ann::synthetic;
use manifold_ann::{Coordinates, Error};

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::InvalidParameter(m) | Error::InvalidInput(m) | Error::Format(m) => {
            PyValueError::new_err(m)
        }
        Error::InvalidState(m) | Error::NumericalFailure(m) => PyRuntimeError::new_err(m),
        Error::Io(e) => PyIOError::new_err(e.to_string()),
    }
}

fn parse_metric(name: &str) -> PyResult<manifold_ann::Metric> {
    match name {
        "euclidean" | "l2" => Ok(manifold_ann::Metric::Euclidean),
        "manhattan" | "l1" => Ok(manifold_ann::Metric::Manhattan),
        other => Err(PyValueError::new_err(format!("unknown metric '{other}'"))),
    }
}

/// N points in row-major layout.
#[pyclass(name = "PointCloud", skip_from_py_object)]
#[derive(Clone)]
struct PyPointCloud {
    inner: manifold_ann::PointCloud,
}

#[pymethods]
impl PyPointCloud {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyPointCloud { inner: manifold_ann::PointCloud::from_rows(&rows).map_err(to_py_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.row(i).to_vec())
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(|r| r.to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        format!("PointCloud(n={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

/// N output points of an embedding.
#[pyclass(name = "Embedding", skip_from_py_object)]
#[derive(Clone)]
struct PyEmbedding {
    inner: manifold_ann::Embedding,
}

#[pymethods]
impl PyEmbedding {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyEmbedding { inner: manifold_ann::Embedding::from_rows(&rows).map_err(to_py_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(|r| r.to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Embedding(n={}, d={})", self.inner.len(), self.inner.dim())
    }
}

/// Per-point neighborhoods with edge lengths.
#[pyclass(name = "NeighborGraph", skip_from_py_object)]
#[derive(Clone)]
struct PyNeighborGraph {
    inner: manifold_ann::NeighborGraph,
}

#[pymethods]
impl PyNeighborGraph {
    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(index, distance)` pairs of point `i`, nearest first.
    fn neighbors(&self, i: usize) -> PyResult<Vec<(usize, f64)>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self
            .inner
            .neighbors(i)
            .iter()
            .map(|nb| (nb.index, nb.distance))
            .collect())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyNeighborGraph {
            inner: manifold_ann::NeighborGraph::from_text(text).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("NeighborGraph(n={}, k={})", self.inner.len(), self.inner.k())
    }
}

/// Exact K nearest neighbors by full pairwise scan.
#[pyfunction]
#[pyo3(signature = (cloud, k, metric = "euclidean"))]
fn brute_force_knn(cloud: &PyPointCloud, k: usize, metric: &str) -> PyResult<PyNeighborGraph> {
    let metric = parse_metric(metric)?;
    Ok(PyNeighborGraph {
        inner: manifold_ann::brute_force_knn(&cloud.inner, k, metric).map_err(to_py_err)?,
    })
}

/// Build a kNN graph with the chosen backend; returns the graph and the
/// wall-clock seconds spent on index build plus queries.
#[pyfunction]
#[pyo3(signature = (cloud, k, backend = "kdtree", metric = "euclidean", epsilon = 0.0,
                    n_trees = 50, kappa = 16, search_k = 500, n_links = 16,
                    ef_construction = 200, ef = 50, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn knn_graph(
    cloud: &PyPointCloud,
    k: usize,
    backend: &str,
    metric: &str,
    epsilon: f64,
    n_trees: usize,
    kappa: usize,
    search_k: usize,
    n_links: usize,
    ef_construction: usize,
    ef: usize,
    seed: u64,
) -> PyResult<(PyNeighborGraph, f64)> {
    let backend: ann::Backend = backend.parse().map_err(to_py_err)?;
    let params = ann::AnnParams {
        metric: parse_metric(metric)?,
        leaf_capacity: 1,
        epsilon,
        n_trees,
        kappa,
        search_k,
        n_links,
        ef_construction,
        ef,
        seed,
    };
    let out = ann::knn_graph(&cloud.inner, k, backend, &params).map_err(to_py_err)?;
    Ok((PyNeighborGraph { inner: out.graph }, out.seconds))
}

/// Fraction of exact neighbor slots recovered by an approximate graph.
#[pyfunction]
fn recall(approx: &PyNeighborGraph, exact: &PyNeighborGraph) -> PyResult<f64> {
    ann::recall(&approx.inner, &exact.inner).map_err(to_py_err)
}

/// k-d tree with epsilon-approximate queries.
#[pyclass(name = "KdTree")]
struct PyKdTree {
    inner: ann::KdTree,
}

#[pymethods]
impl PyKdTree {
    #[new]
    #[pyo3(signature = (cloud, leaf_capacity = 1, metric = "euclidean"))]
    fn new(cloud: &PyPointCloud, leaf_capacity: usize, metric: &str) -> PyResult<Self> {
        Ok(PyKdTree {
            inner: ann::KdTree::build(&cloud.inner, leaf_capacity, parse_metric(metric)?)
                .map_err(to_py_err)?,
        })
    }

    #[pyo3(signature = (point, k, epsilon = 0.0))]
    fn query(&self, point: Vec<f64>, k: usize, epsilon: f64) -> PyResult<Vec<(usize, f64)>> {
        Ok(self
            .inner
            .query(&point, k, epsilon)
            .map_err(to_py_err)?
            .into_iter()
            .map(|nb| (nb.index, nb.distance))
            .collect())
    }
}

/// Random-hyperplane tree forest.
#[pyclass(name = "AnnoyForest")]
struct PyAnnoyForest {
    inner: ann::AnnoyForest,
}

#[pymethods]
impl PyAnnoyForest {
    #[new]
    #[pyo3(signature = (cloud, n_trees = 50, kappa = 16, seed = 0, metric = "euclidean"))]
    fn new(
        cloud: &PyPointCloud,
        n_trees: usize,
        kappa: usize,
        seed: u64,
        metric: &str,
    ) -> PyResult<Self> {
        Ok(PyAnnoyForest {
            inner: ann::AnnoyForest::build(&cloud.inner, n_trees, kappa, seed, parse_metric(metric)?)
                .map_err(to_py_err)?,
        })
    }

    /// Returns `(neighbors, short)`: the candidate pool may run out before
    /// K neighbors exist.
    #[pyo3(signature = (point, k, search_k = 500))]
    fn query(
        &self,
        point: Vec<f64>,
        k: usize,
        search_k: usize,
    ) -> PyResult<(Vec<(usize, f64)>, bool)> {
        let out = self.inner.query(&point, k, search_k).map_err(to_py_err)?;
        Ok((
            out.neighbors.into_iter().map(|nb| (nb.index, nb.distance)).collect(),
            out.short,
        ))
    }
}

/// Hierarchical navigable small-world graph.
#[pyclass(name = "HnswIndex")]
struct PyHnswIndex {
    inner: ann::HnswIndex,
}

#[pymethods]
impl PyHnswIndex {
    #[new]
    #[pyo3(signature = (cloud, n_links = 16, ef_construction = 200, seed = 0, metric = "euclidean"))]
    fn new(
        cloud: &PyPointCloud,
        n_links: usize,
        ef_construction: usize,
        seed: u64,
        metric: &str,
    ) -> PyResult<Self> {
        Ok(PyHnswIndex {
            inner: ann::HnswIndex::build(
                &cloud.inner,
                n_links,
                ef_construction,
                seed,
                parse_metric(metric)?,
            )
            .map_err(to_py_err)?,
        })
    }

    #[pyo3(signature = (point, k, ef = 50))]
    fn query(&self, point: Vec<f64>, k: usize, ef: usize) -> PyResult<Vec<(usize, f64)>> {
        Ok(self
            .inner
            .query(&point, k, ef)
            .map_err(to_py_err)?
            .into_iter()
            .map(|nb| (nb.index, nb.distance))
            .collect())
    }

    #[getter]
    fn top_layer(&self) -> usize {
        self.inner.top_layer()
    }

    #[getter]
    fn layer0_components(&self) -> usize {
        self.inner.layer0_components()
    }
}

/// Output of a manifold-learning run.
#[pyclass(name = "ManifoldResult")]
struct PyManifoldResult {
    #[pyo3(get)]
    embedding: PyEmbedding,
    #[pyo3(get)]
    eigenvalues: Vec<f64>,
    #[pyo3(get)]
    kept: Vec<usize>,
    #[pyo3(get)]
    dropped: Vec<usize>,
}

impl From<manifold::ManifoldOutput> for PyManifoldResult {
    fn from(out: manifold::ManifoldOutput) -> Self {
        PyManifoldResult {
            embedding: PyEmbedding { inner: out.embedding },
            eigenvalues: out.eigenvalues,
            kept: out.kept,
            dropped: out.dropped,
        }
    }
}

/// Isomap: classical MDS over graph geodesics.
#[pyfunction]
fn isomap(graph: &PyNeighborGraph, d: usize) -> PyResult<PyManifoldResult> {
    Ok(manifold::isomap(&graph.inner, d).map_err(to_py_err)?.into())
}

/// Locally linear embedding.
#[pyfunction]
#[pyo3(signature = (cloud, graph, d, reg = 1e-3))]
fn lle(cloud: &PyPointCloud, graph: &PyNeighborGraph, d: usize, reg: f64) -> PyResult<PyManifoldResult> {
    Ok(manifold::lle(&cloud.inner, &graph.inner, d, reg)
        .map_err(to_py_err)?
        .into())
}

/// Laplacian eigenmaps; heat-kernel weights when sigma is given, binary
/// otherwise.
#[pyfunction]
#[pyo3(signature = (graph, d, sigma = None))]
fn laplacian_eigenmaps(graph: &PyNeighborGraph, d: usize, sigma: Option<f64>) -> PyResult<PyManifoldResult> {
    let weights = match sigma {
        Some(sigma) => manifold::LaplacianWeights::Heat { sigma },
        None => manifold::LaplacianWeights::Binary,
    };
    Ok(manifold::laplacian_eigenmaps(&graph.inner, d, weights)
        .map_err(to_py_err)?
        .into())
}

/// Hessian LLE.
#[pyfunction]
fn hessian_lle(cloud: &PyPointCloud, graph: &PyNeighborGraph, d: usize) -> PyResult<PyManifoldResult> {
    Ok(manifold::hessian_lle(&cloud.inner, &graph.inner, d)
        .map_err(to_py_err)?
        .into())
}

/// Every embedding-quality measure at one K, as a dict.
#[pyfunction]
#[pyo3(signature = (cloud, embedding, k = 20, metric = "euclidean"))]
fn quality_report<'py>(
    py: Python<'py>,
    cloud: &PyPointCloud,
    embedding: &PyEmbedding,
    k: usize,
    metric: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let report = quality::quality_report(&cloud.inner, &embedding.inner, k, parse_metric(metric)?)
        .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("k", report.k)?;
    dict.set_item("lcmc", report.lcmc)?;
    dict.set_item("trustworthiness", report.trustworthiness)?;
    dict.set_item("continuity", report.continuity)?;
    dict.set_item("mrre_input", report.mrre_input)?;
    dict.set_item("mrre_output", report.mrre_output)?;
    dict.set_item("q_nx", report.q_nx)?;
    dict.set_item("procrustes", report.procrustes)?;
    Ok(dict)
}

/// Kernel-density estimates over a 2-d embedding plus the lowest-density
/// point indices.
#[pyfunction]
#[pyo3(signature = (embedding, count = 10))]
fn density_anomalies<'py>(
    py: Python<'py>,
    embedding: &PyEmbedding,
    count: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let report = quality::density_anomalies(&embedding.inner, count).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("densities", report.densities)?;
    dict.set_item("anomaly_indices", report.anomaly_indices)?;
    dict.set_item("bandwidths", report.bandwidths)?;
    Ok(dict)
}

/// Hellinger distance between probability vectors, in [0, 1].
#[pyfunction]
fn hellinger(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    metric::hellinger(&p, &q).map_err(to_py_err)
}

/// Total variation distance between probability vectors, in [0, 1].
#[pyfunction]
fn total_variation(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    metric::total_variation(&p, &q).map_err(to_py_err)
}

/// Evenly spaced histogram grid over pooled values.
#[pyclass(name = "BinGrid", skip_from_py_object)]
#[derive(Clone)]
struct PyBinGrid {
    inner: dist::BinGrid,
}

#[pymethods]
impl PyBinGrid {
    #[getter]
    fn edges(&self) -> Vec<f64> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn bins(&self) -> usize {
        self.inner.bins()
    }
}

#[pyfunction]
#[pyo3(signature = (values, bins = 200))]
fn build_grid(values: Vec<f64>, bins: usize) -> PyResult<PyBinGrid> {
    Ok(PyBinGrid { inner: dist::build_grid(&values, bins).map_err(to_py_err)? })
}

/// Bin a value series (NaN = missing) into a probability mass vector.
#[pyfunction]
fn bin_series(values: Vec<f64>, grid: &PyBinGrid) -> (Vec<f64>, usize) {
    let d = dist::bin_series(&values, &grid.inner);
    let support = d.support_count();
    (d.pmf().to_vec(), support)
}

/// Vector form of a mass vector: sqrt mass for "hellinger" (pair with L2),
/// raw mass for "tv" (pair with L1).
#[pyfunction]
fn to_feature_vector(pmf: Vec<f64>, mode: &str) -> PyResult<Vec<f64>> {
    let mode: dist::FeatureMode = mode.parse().map_err(to_py_err)?;
    if pmf.iter().all(|&v| v == 0.0) {
        return Err(PyValueError::new_err("empty distribution has no feature vector"));
    }
    match mode {
        dist::FeatureMode::Hellinger => Ok(pmf.iter().map(|v| v.sqrt()).collect()),
        dist::FeatureMode::Tv => Ok(pmf),
    }
}

/// Concatenate per-period mass vectors (all on `grid`) into one household
/// vector whose Manhattan distances equal twice the per-period TV sums.
#[pyfunction]
fn stack_household(pmfs: Vec<Vec<f64>>, grid: &PyBinGrid) -> PyResult<Vec<f64>> {
    let bins = grid.inner.bins();
    let mut out = Vec::with_capacity(pmfs.len() * bins);
    for (h, pmf) in pmfs.iter().enumerate() {
        if pmf.len() != bins {
            return Err(PyValueError::new_err(format!(
                "period {h}: {} bins, grid has {bins}",
                pmf.len()
            )));
        }
        out.extend_from_slice(pmf);
    }
    Ok(out)
}

#[pyfunction]
fn gaussian_cloud(n: usize, dim: usize, seed: u64) -> PyPointCloud {
    PyPointCloud { inner: synthetic::gaussian_cloud(n, dim, seed) }
}

#[pyfunction]
#[pyo3(signature = (n, ambient_dim, intrinsic_dim, noise = 0.01, seed = 0))]
fn low_rank_cloud(
    n: usize,
    ambient_dim: usize,
    intrinsic_dim: usize,
    noise: f64,
    seed: u64,
) -> PyPointCloud {
    PyPointCloud { inner: synthetic::low_rank_cloud(n, ambient_dim, intrinsic_dim, noise, seed) }
}

/// Flat rectangle rotated into higher dimensions; returns the ambient
/// cloud and the generating 2-d coordinates.
#[pyfunction]
#[pyo3(signature = (n, width = 2.0, height = 1.0, ambient_dim = 5, seed = 0))]
fn rotated_rectangle(
    n: usize,
    width: f64,
    height: f64,
    ambient_dim: usize,
    seed: u64,
) -> (PyPointCloud, Vec<Vec<f64>>) {
    let (cloud, flat) = synthetic::rotated_rectangle(n, width, height, ambient_dim, seed);
    let truth = flat.chunks_exact(2).map(|c| c.to_vec()).collect();
    (PyPointCloud { inner: cloud }, truth)
}

/// Seeded synthetic half-hourly demand: one value series per period slot.
#[pyfunction]
#[pyo3(signature = (seed = 0, periods = 336, weeks = 104, missing_rate = 0.02))]
fn household_demand(seed: u64, periods: usize, weeks: usize, missing_rate: f64) -> Vec<Vec<f64>> {
    synthetic::household_demand(seed, periods, weeks, missing_rate)
}

#[pymodule]
fn manifold_ann_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointCloud>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_class::<PyNeighborGraph>()?;
    m.add_class::<PyKdTree>()?;
    m.add_class::<PyAnnoyForest>()?;
    m.add_class::<PyHnswIndex>()?;
    m.add_class::<PyManifoldResult>()?;
    m.add_class::<PyBinGrid>()?;
    m.add_function(wrap_pyfunction!(brute_force_knn, m)?)?;
    m.add_function(wrap_pyfunction!(knn_graph, m)?)?;
    m.add_function(wrap_pyfunction!(recall, m)?)?;
    m.add_function(wrap_pyfunction!(isomap, m)?)?;
    m.add_function(wrap_pyfunction!(lle, m)?)?;
    m.add_function(wrap_pyfunction!(laplacian_eigenmaps, m)?)?;
    m.add_function(wrap_pyfunction!(hessian_lle, m)?)?;
    m.add_function(wrap_pyfunction!(quality_report, m)?)?;
    m.add_function(wrap_pyfunction!(density_anomalies, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(build_grid, m)?)?;
    m.add_function(wrap_pyfunction!(bin_series, m)?)?;
    m.add_function(wrap_pyfunction!(to_feature_vector, m)?)?;
    m.add_function(wrap_pyfunction!(stack_household, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_cloud, m)?)?;
    m.add_function(wrap_pyfunction!(low_rank_cloud, m)?)?;
    m.add_function(wrap_pyfunction!(rotated_rectangle, m)?)?;
    m.add_function(wrap_pyfunction!(household_demand, m)?)?;
    Ok(())
}
