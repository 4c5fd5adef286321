//! End-to-end run: ingest, featurize, build the neighbor graph, embed,
//! score, and flag anomalies, writing every artifact into one directory.
//!
//! The written files are a pure function of the configuration (timing is
//! printed, never serialized), so a repeated seeded run is byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use manifold_ann::ann::knn_graph;
use manifold_ann::io::write_embedding_csv;
use manifold_ann::manifold::{run_algorithm, ManifoldParams};
use manifold_ann::quality::{density_anomalies, quality_report};
use manifold_ann::{Coordinates, Error, Result};

use crate::config::RunConfig;
use crate::dataset::Dataset;

pub struct PipelineSummary {
    pub n: usize,
    pub feature_dim: usize,
    pub graph_seconds: f64,
    pub dropped: usize,
    pub density_written: bool,
}

/// Run the full pipeline and write `graph.txt`, `embedding.csv`,
/// `quality.json`, and (for 2-d embeddings) `density.json` under `out_dir`.
pub fn run_pipeline(dataset: &Dataset, config: &RunConfig, out_dir: &Path) -> Result<PipelineSummary> {
    fs::create_dir_all(out_dir)?;
    let algorithm = *config
        .algorithms
        .first()
        .ok_or_else(|| Error::InvalidParameter("pipeline needs an algorithm".into()))?;

    let mut params = config.ann_params();
    params.metric = dataset.metric;
    let graph_out = knn_graph(&dataset.cloud, config.k, config.backend, &params)
        .map_err(|e| stage("knn-graph", e))?;
    if !graph_out.short_rows.is_empty() {
        log::warn!(
            "{} rows returned fewer than K neighbors",
            graph_out.short_rows.len()
        );
    }
    fs::write(out_dir.join("graph.txt"), graph_out.graph.to_text())?;

    let result = run_algorithm(
        algorithm,
        &dataset.cloud,
        &graph_out.graph,
        config.dim,
        &ManifoldParams::default(),
    )
    .map_err(|e| stage("embedding", e))?;

    let kept_cloud = if result.kept.len() == dataset.cloud.len() {
        dataset.cloud.clone()
    } else {
        dataset.cloud.subset(&result.kept)?
    };
    let ids: Vec<String> = result.kept.iter().map(|&i| dataset.cloud.id_of(i)).collect();
    let mut emb_file = fs::File::create(out_dir.join("embedding.csv"))?;
    write_embedding_csv(&mut emb_file, &result.embedding, Some(&ids))?;

    let report = quality_report(&kept_cloud, &result.embedding, config.k, dataset.metric)
        .map_err(|e| stage("quality", e))?;
    let mut quality_file = fs::File::create(out_dir.join("quality.json"))?;
    serde_json::to_writer_pretty(&mut quality_file, &report)
        .map_err(|e| Error::Format(format!("quality serialization: {e}")))?;
    writeln!(quality_file)?;

    let density_written = if config.dim == 2 {
        let report = density_anomalies(&result.embedding, 10.min(result.embedding.len()))
            .map_err(|e| stage("density", e))?;
        let mut file = fs::File::create(out_dir.join("density.json"))?;
        serde_json::to_writer_pretty(&mut file, &report)
            .map_err(|e| Error::Format(format!("density serialization: {e}")))?;
        writeln!(file)?;
        true
    } else {
        println!("density report skipped: embedding dimension is {} (needs 2)", config.dim);
        false
    };

    Ok(PipelineSummary {
        n: dataset.cloud.len(),
        feature_dim: dataset.cloud.dim(),
        graph_seconds: graph_out.seconds,
        dropped: result.dropped.len(),
        density_written,
    })
}

fn stage(name: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("{name}: {m}")),
        Error::InvalidInput(m) => Error::InvalidInput(format!("{name}: {m}")),
        Error::InvalidState(m) => Error::InvalidState(format!("{name}: {m}")),
        Error::NumericalFailure(m) => Error::NumericalFailure(format!("{name}: {m}")),
        Error::Format(m) => Error::Format(format!("{name}: {m}")),
        Error::Io(e) => Error::Io(e),
    }
}
