//! Parameter sweeps: run each grid point, time the graph stage, measure
//! recall against a cached exact graph, score requested embeddings, and
//! stream the records out.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use manifold_ann::ann::{knn_graph, recall, Backend};
use manifold_ann::manifold::{run_algorithm, Algorithm, ManifoldParams};
use manifold_ann::quality::{quality_report, QualityReport};
use manifold_ann::{Coordinates, Error, NeighborGraph, PointCloud, Result};

use crate::config::RunConfig;
use crate::dataset::Dataset;

/// One parameter point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    KdTree { epsilon: f64 },
    Annoy { n_trees: usize, search_k: usize },
    Hnsw { n_links: usize, ef: usize },
}

/// The default grids: epsilon 0..5 step 0.1 (51 points), n_trees 2..100
/// step 2 at fixed search_k (50 points), n_links 2..200 step 2 at fixed ef
/// (100 points).
pub fn default_grid(backends: &[Backend], config: &RunConfig) -> Vec<GridPoint> {
    let mut grid = Vec::new();
    for &backend in backends {
        match backend {
            Backend::KdTree => {
                grid.extend((0..=50).map(|i| GridPoint::KdTree { epsilon: i as f64 * 0.1 }));
            }
            Backend::Annoy => {
                grid.extend((1..=50).map(|i| GridPoint::Annoy {
                    n_trees: 2 * i,
                    search_k: config.search_k,
                }));
            }
            Backend::Hnsw => {
                grid.extend((1..=100).map(|i| GridPoint::Hnsw { n_links: 2 * i, ef: config.ef }));
            }
            Backend::Brute => {}
        }
    }
    grid
}

/// One sweep row: the parameter point, its timing and recall, and the
/// quality report of every algorithm that ran on its graph.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRecord {
    pub backend: String,
    pub epsilon: Option<f64>,
    pub n_trees: Option<usize>,
    pub search_k: Option<usize>,
    pub n_links: Option<usize>,
    pub ef: Option<usize>,
    pub build_query_seconds: f64,
    pub recall: Option<f64>,
    /// True when grid points ran concurrently (timing fidelity reduced).
    pub parallel: bool,
    pub quality: BTreeMap<String, QualityReport>,
    /// Per-point or per-algorithm failures; the sweep continues past them.
    pub error: Option<String>,
}

impl SweepRecord {
    fn for_point(point: GridPoint) -> SweepRecord {
        let mut record = SweepRecord {
            backend: String::new(),
            epsilon: None,
            n_trees: None,
            search_k: None,
            n_links: None,
            ef: None,
            build_query_seconds: 0.0,
            recall: None,
            parallel: false,
            quality: BTreeMap::new(),
            error: None,
        };
        match point {
            GridPoint::KdTree { epsilon } => {
                record.backend = "kdtree".into();
                record.epsilon = Some(epsilon);
            }
            GridPoint::Annoy { n_trees, search_k } => {
                record.backend = "annoy".into();
                record.n_trees = Some(n_trees);
                record.search_k = Some(search_k);
            }
            GridPoint::Hnsw { n_links, ef } => {
                record.backend = "hnsw".into();
                record.n_links = Some(n_links);
                record.ef = Some(ef);
            }
        }
        record
    }

    fn push_error(&mut self, context: &str, err: &Error) {
        let msg = format!("{context}: {err}");
        match &mut self.error {
            Some(existing) => {
                existing.push_str("; ");
                existing.push_str(&msg);
            }
            None => self.error = Some(msg),
        }
    }
}

/// Run one grid point against a prepared dataset and cached exact graph.
fn run_point(
    point: GridPoint,
    dataset: &Dataset,
    exact: &NeighborGraph,
    config: &RunConfig,
    mask_timing: bool,
) -> SweepRecord {
    let mut record = SweepRecord::for_point(point);
    let mut params = config.ann_params();
    params.metric = dataset.metric;
    let backend = match point {
        GridPoint::KdTree { epsilon } => {
            params.epsilon = epsilon;
            Backend::KdTree
        }
        GridPoint::Annoy { n_trees, search_k } => {
            params.n_trees = n_trees;
            params.search_k = search_k;
            Backend::Annoy
        }
        GridPoint::Hnsw { n_links, ef } => {
            params.n_links = n_links;
            params.ef = ef;
            Backend::Hnsw
        }
    };

    let out = match knn_graph(&dataset.cloud, config.k, backend, &params) {
        Ok(out) => out,
        Err(err) => {
            record.push_error("knn_graph", &err);
            return record;
        }
    };
    record.build_query_seconds = if mask_timing { 0.0 } else { out.seconds };
    match recall(&out.graph, exact) {
        Ok(r) => record.recall = Some(r),
        Err(err) => record.push_error("recall", &err),
    }

    let manifold_params = ManifoldParams::default();
    for &algorithm in &config.algorithms {
        match run_algorithm(algorithm, &dataset.cloud, &out.graph, config.dim, &manifold_params) {
            Ok(result) => {
                let cloud_for_quality: Result<PointCloud> =
                    if result.kept.len() == dataset.cloud.len() {
                        Ok(dataset.cloud.clone())
                    } else {
                        dataset.cloud.subset(&result.kept)
                    };
                match cloud_for_quality.and_then(|cloud| {
                    quality_report(&cloud, &result.embedding, config.k, dataset.metric)
                }) {
                    Ok(report) => {
                        record.quality.insert(algorithm.to_string(), report);
                    }
                    Err(err) => record.push_error(&algorithm.to_string(), &err),
                }
            }
            Err(err) => record.push_error(&algorithm.to_string(), &err),
        }
    }
    record
}

/// Run the sweep, invoking `on_record` as each row lands so partial runs
/// stay usable.
///
/// With `parallel` set, grid points run concurrently (throughput over
/// timing fidelity); rows are marked, kept in grid order, and streamed only
/// once all have finished.
pub fn run_sweep(
    dataset: &Dataset,
    grid: &[GridPoint],
    config: &RunConfig,
    mask_timing: bool,
    parallel: bool,
    mut on_record: impl FnMut(&SweepRecord) -> Result<()>,
) -> Result<Vec<SweepRecord>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    // Exact graph cached once; every recall in the sweep measures against
    // it. The k-d tree at epsilon = 0 is exact and faster than brute force.
    let mut exact_params = config.ann_params();
    exact_params.metric = dataset.metric;
    exact_params.epsilon = 0.0;
    let exact = knn_graph(&dataset.cloud, config.k, Backend::KdTree, &exact_params)?.graph;

    // Warm-up: first grid point once, discarded, so the first timed row
    // does not pay one-time costs.
    let _ = run_point(grid[0], dataset, &exact, config, true);

    if parallel {
        let mut records: Vec<SweepRecord> = grid
            .par_iter()
            .map(|&point| {
                let mut record = run_point(point, dataset, &exact, config, mask_timing);
                record.parallel = true;
                record
            })
            .collect();
        for record in &mut records {
            on_record(record)?;
        }
        return Ok(records);
    }

    let mut records = Vec::with_capacity(grid.len());
    for &point in grid {
        let record = run_point(point, dataset, &exact, config, mask_timing);
        on_record(&record)?;
        records.push(record);
    }
    Ok(records)
}

/// Stable CSV column order: identity columns, timing, recall, error, then
/// the 8 report fields per algorithm present.
pub fn csv_header(algorithms: &[Algorithm]) -> String {
    let mut cols = vec![
        "backend".to_string(),
        "epsilon".to_string(),
        "n_trees".to_string(),
        "search_k".to_string(),
        "n_links".to_string(),
        "ef".to_string(),
        "build_query_seconds".to_string(),
        "recall".to_string(),
        "parallel".to_string(),
        "error".to_string(),
    ];
    for algorithm in algorithms {
        for field in [
            "k",
            "lcmc",
            "trustworthiness",
            "continuity",
            "mrre_input",
            "mrre_output",
            "q_nx",
            "procrustes",
        ] {
            cols.push(format!("{algorithm}_{field}"));
        }
    }
    cols.join(",")
}

fn opt_to_field<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), |x| x.to_string())
}

pub fn csv_row(record: &SweepRecord, algorithms: &[Algorithm]) -> String {
    let mut fields = vec![
        record.backend.clone(),
        opt_to_field(&record.epsilon),
        opt_to_field(&record.n_trees),
        opt_to_field(&record.search_k),
        opt_to_field(&record.n_links),
        opt_to_field(&record.ef),
        record.build_query_seconds.to_string(),
        opt_to_field(&record.recall),
        record.parallel.to_string(),
        record.error.clone().unwrap_or_default().replace(',', ";"),
    ];
    for algorithm in algorithms {
        match record.quality.get(&algorithm.to_string()) {
            Some(q) => {
                fields.push(q.k.to_string());
                for v in [
                    q.lcmc,
                    q.trustworthiness,
                    q.continuity,
                    q.mrre_input,
                    q.mrre_output,
                    q.q_nx,
                    q.procrustes,
                ] {
                    fields.push(v.to_string());
                }
            }
            None => fields.extend(std::iter::repeat_n(String::new(), 8)),
        }
    }
    fields.join(",")
}

/// Emit records as CSV (stable column order) or a JSON array.
pub fn emit_records<W: Write>(
    writer: &mut W,
    records: &[SweepRecord],
    algorithms: &[Algorithm],
    format: &str,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no sweep records to emit".into()));
    }
    match format {
        "csv" => {
            writeln!(writer, "{}", csv_header(algorithms))?;
            for record in records {
                writeln!(writer, "{}", csv_row(record, algorithms))?;
            }
        }
        "json" => {
            serde_json::to_writer_pretty(&mut *writer, records)
                .map_err(|e| Error::Format(format!("JSON emit failed: {e}")))?;
            writeln!(writer)?;
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown report format '{other}'"
            )))
        }
    }
    Ok(())
}

/// Parse a CSV produced by [`emit_records`] back into records.
#[cfg(test)]
pub fn parse_records_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty sweep CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let mut records = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Format("sweep CSV row width mismatch".into()));
        }
        let get = |name: &str| -> Option<&str> {
            cols.iter()
                .position(|c| *c == name)
                .map(|i| fields[i])
                .filter(|v| !v.is_empty())
        };
        let mut record = SweepRecord {
            backend: get("backend").unwrap_or_default().to_string(),
            epsilon: get("epsilon").map(|v| v.parse()).transpose().map_err(bad)?,
            n_trees: get("n_trees").map(|v| v.parse()).transpose().map_err(bad)?,
            search_k: get("search_k").map(|v| v.parse()).transpose().map_err(bad)?,
            n_links: get("n_links").map(|v| v.parse()).transpose().map_err(bad)?,
            ef: get("ef").map(|v| v.parse()).transpose().map_err(bad)?,
            build_query_seconds: get("build_query_seconds")
                .map(|v| v.parse())
                .transpose()
                .map_err(bad)?
                .unwrap_or(0.0),
            recall: get("recall").map(|v| v.parse()).transpose().map_err(bad)?,
            parallel: get("parallel").map(|v| v == "true").unwrap_or(false),
            quality: BTreeMap::new(),
            error: get("error").map(|v| v.to_string()),
        };
        for algorithm in Algorithm::ALL {
            let prefix = algorithm.to_string();
            let field = |name: &str| get(&format!("{prefix}_{name}"));
            if let Some(k) = field("k") {
                let parse = |name: &str| -> Result<f64> {
                    field(name)
                        .ok_or_else(|| Error::Format(format!("missing {prefix}_{name}")))?
                        .parse()
                        .map_err(|_| Error::Format(format!("bad {prefix}_{name}")))
                };
                record.quality.insert(
                    prefix.clone(),
                    QualityReport {
                        k: k.parse().map_err(bad)?,
                        lcmc: parse("lcmc")?,
                        trustworthiness: parse("trustworthiness")?,
                        continuity: parse("continuity")?,
                        mrre_input: parse("mrre_input")?,
                        mrre_output: parse("mrre_output")?,
                        q_nx: parse("q_nx")?,
                        procrustes: parse("procrustes")?,
                    },
                );
            }
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
fn bad<E: std::fmt::Display>(e: E) -> Error {
    Error::Format(format!("sweep CSV parse: {e}"))
}
