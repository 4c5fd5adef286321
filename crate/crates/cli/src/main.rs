//! Command-line driver for the manifold-learning toolkit.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 data or format error,
//! 4 numerical failure.

mod config;
mod dataset;
mod idx;
mod pipeline;
mod sweep;

use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifold_ann::ann::{knn_graph, recall, Backend};
use manifold_ann::io::{read_embedding_csv, write_points_csv};
use manifold_ann::manifold::{run_algorithm, Algorithm, ManifoldParams};
use manifold_ann::quality::{density_anomalies, quality_report};
use manifold_ann::{Error, Result};

use config::{parse_algorithms, parse_config_file, parse_metric, resolve, DataMode, RunConfig};

#[derive(Parser)]
#[command(
    name = "manifold-ann",
    version,
    about = "Manifold learning with pluggable exact/approximate nearest-neighbor search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; unset values fall back to the config
/// file, then to the benchmark defaults.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Input dataset: CSV, IDX image file, or a synthetic spec such as
    /// synthetic:gaussian:n=500,p=8 / synthetic:household:periods=336,weeks=104
    input: Option<String>,
    /// Flat key=value config file; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Neighbor-search backend: brute, kdtree, annoy, hnsw.
    #[arg(long)]
    backend: Option<Backend>,
    /// Vector metric: l2 or l1 (forced by hellinger/tv modes).
    #[arg(long, value_parser = parse_metric)]
    metric: Option<manifold_ann::Metric>,
    /// Neighborhood size.
    #[arg(short, long)]
    k: Option<usize>,
    /// Embedding dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// k-d tree approximation tolerance (0 = exact).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Annoy: number of random-hyperplane trees.
    #[arg(long)]
    n_trees: Option<usize>,
    /// Annoy: candidate-pool size.
    #[arg(long)]
    search_k: Option<usize>,
    /// HNSW: links added per insertion.
    #[arg(long)]
    n_links: Option<usize>,
    /// HNSW: query candidate width.
    #[arg(long)]
    ef: Option<usize>,
    /// Seed for every randomized structure.
    #[arg(long)]
    seed: Option<u64>,
    /// Histogram bin count for distribution modes.
    #[arg(long)]
    bins: Option<usize>,
    /// Data handling: raw, hellinger, or tv.
    #[arg(long)]
    mode: Option<DataMode>,
    /// Stack per-period distributions into one vector per id.
    #[arg(long)]
    stack: bool,
    /// Keep only the first N input rows (index order).
    #[arg(long)]
    limit: Option<usize>,
    /// Comma-separated algorithms (isomap,lle,le,hlle) or "all".
    #[arg(long)]
    algorithms: Option<String>,
    /// Output path (file or directory depending on the subcommand).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn into_config(self) -> Result<RunConfig> {
        self.into_config_with(RunConfig::default())
    }

    fn into_config_with(self, defaults: RunConfig) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => Default::default(),
        };
        let mode = match self.mode {
            Some(m) => m,
            None => match file.get("mode") {
                Some(raw) => raw.parse()?,
                None => defaults.mode,
            },
        };
        let metric = match self.metric {
            Some(m) => m,
            None => match file.get("metric") {
                Some(raw) => parse_metric(raw)?,
                None => defaults.metric,
            },
        };
        let algorithms = match self.algorithms.as_deref().or(file.get("algorithms").map(String::as_str)) {
            Some(raw) => parse_algorithms(raw)?,
            None => defaults.algorithms.clone(),
        };
        let input = match self.input {
            Some(i) => i,
            None => file.get("input").cloned().ok_or_else(|| {
                Error::InvalidParameter("no input dataset given (argument or config)".into())
            })?,
        };
        let out = self.out.or_else(|| file.get("out").map(PathBuf::from));
        Ok(RunConfig {
            input,
            metric,
            backend: resolve(self.backend, &file, "backend", defaults.backend)?,
            k: resolve(self.k, &file, "k", defaults.k)?,
            dim: resolve(self.dim, &file, "dim", defaults.dim)?,
            epsilon: resolve(self.epsilon, &file, "epsilon", defaults.epsilon)?,
            n_trees: resolve(self.n_trees, &file, "n-trees", defaults.n_trees)?,
            search_k: resolve(self.search_k, &file, "search-k", defaults.search_k)?,
            n_links: resolve(self.n_links, &file, "n-links", defaults.n_links)?,
            ef: resolve(self.ef, &file, "ef", defaults.ef)?,
            seed: resolve(self.seed, &file, "seed", defaults.seed)?,
            bins: resolve(self.bins, &file, "bins", defaults.bins)?,
            mode,
            stack: self.stack || file.get("stack").map(|v| v == "true").unwrap_or(false),
            limit: self.limit.or_else(|| file.get("limit").and_then(|v| v.parse().ok())),
            algorithms,
            out,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset (CSV/IDX/synthetic) and write it as canonical CSV.
    Ingest(CommonArgs),
    /// Build the K-nearest-neighbor graph and write its text form.
    Knn(CommonArgs),
    /// Embed a dataset with one manifold-learning algorithm.
    Embed(CommonArgs),
    /// Score an embedding against its input data.
    Quality(QualityArgs),
    /// Sweep tuning-parameter grids, recording time, recall, and quality.
    Sweep(SweepArgs),
    /// Full run: graph, embedding, quality, density anomalies.
    Pipeline(CommonArgs),
    /// Flag the lowest-density points of a 2-d embedding.
    Anomaly(AnomalyArgs),
}

#[derive(Args)]
struct QualityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Embedding CSV produced by `embed` or `pipeline`.
    #[arg(long)]
    embedding: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Restrict each backend's grid to its first N points.
    #[arg(long)]
    grid_limit: Option<usize>,
    /// Report format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write zeros to the timing column (deterministic output bytes).
    #[arg(long)]
    mask_timing: bool,
    /// Run grid points concurrently; rows are marked, timing fidelity drops.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct AnomalyArgs {
    /// Embedding CSV to scan.
    embedding: PathBuf,
    /// How many lowest-density points to flag.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => 2,
        Error::InvalidInput(_) | Error::InvalidState(_) | Error::Format(_) | Error::Io(_) => 3,
        Error::NumericalFailure(_) => 4,
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(path) => Ok(Box::new(std::fs::File::create(path)?)),
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(args) => {
            let config = args.into_config()?;
            let ds = dataset::load(&config)?;
            use manifold_ann::Coordinates;
            let mut out = open_out(&config.out)?;
            write_points_csv(&mut out, &ds.cloud)?;
            eprintln!(
                "ingested {} x {} ({}, metric {})",
                ds.cloud.len(),
                ds.cloud.dim(),
                ds.kind,
                ds.metric
            );
            Ok(())
        }
        Command::Knn(args) => {
            let config = args.into_config()?;
            let ds = dataset::load(&config)?;
            let mut params = config.ann_params();
            params.metric = ds.metric;
            let result = knn_graph(&ds.cloud, config.k, config.backend, &params)?;
            let mut out = open_out(&config.out)?;
            out.write_all(result.graph.to_text().as_bytes())?;
            eprintln!(
                "graph: backend {} K {} in {:.3}s ({} short rows)",
                config.backend,
                config.k,
                result.seconds,
                result.short_rows.len()
            );
            // When the backend is approximate, report recall against the
            // exact graph for convenience.
            if config.backend != Backend::Brute {
                let mut exact_params = params.clone();
                exact_params.epsilon = 0.0;
                let exact = knn_graph(&ds.cloud, config.k, Backend::KdTree, &exact_params)?;
                eprintln!("recall vs exact: {:.6}", recall(&result.graph, &exact.graph)?);
            }
            Ok(())
        }
        Command::Embed(args) => {
            let config = args.into_config()?;
            let ds = dataset::load(&config)?;
            let algorithm = *config.algorithms.first().unwrap_or(&Algorithm::Isomap);
            let mut params = config.ann_params();
            params.metric = ds.metric;
            let graph = knn_graph(&ds.cloud, config.k, config.backend, &params)?;
            let result = run_algorithm(
                algorithm,
                &ds.cloud,
                &graph.graph,
                config.dim,
                &ManifoldParams::default(),
            )?;
            if !result.dropped.is_empty() {
                eprintln!(
                    "dropped {} points outside the largest component",
                    result.dropped.len()
                );
            }
            let ids: Vec<String> = result.kept.iter().map(|&i| ds.cloud.id_of(i)).collect();
            let mut out = open_out(&config.out)?;
            manifold_ann::io::write_embedding_csv(&mut out, &result.embedding, Some(&ids))?;
            eprintln!("embedded with {algorithm} into d={} (graph {:.3}s)", config.dim, graph.seconds);
            Ok(())
        }
        Command::Quality(args) => {
            let config = args.common.into_config()?;
            let ds = dataset::load(&config)?;
            let file = std::fs::File::open(&args.embedding)?;
            let (embedding, _ids) = read_embedding_csv(BufReader::new(file))?;
            let report = quality_report(&ds.cloud, &embedding, config.k, ds.metric)?;
            let mut out = open_out(&config.out)?;
            serde_json::to_writer_pretty(&mut out, &report)
                .map_err(|e| Error::Format(format!("quality serialization: {e}")))?;
            writeln!(out)?;
            Ok(())
        }
        Command::Sweep(args) => {
            let config = args.common.into_config()?;
            let ds = dataset::load(&config)?;
            let backends = match config.backend {
                Backend::Brute => vec![Backend::KdTree, Backend::Annoy, Backend::Hnsw],
                one => vec![one],
            };
            let mut grid = Vec::new();
            for backend in backends {
                let mut part = sweep::default_grid(&[backend], &config);
                if let Some(limit) = args.grid_limit {
                    part.truncate(limit);
                }
                grid.extend(part);
            }
            let algorithms = config.algorithms.clone();
            match args.format.as_str() {
                "csv" => {
                    // Rows land in the file as they are produced.
                    let mut out = open_out(&config.out)?;
                    writeln!(out, "{}", sweep::csv_header(&algorithms))?;
                    out.flush()?;
                    sweep::run_sweep(&ds, &grid, &config, args.mask_timing, args.parallel, |record| {
                        writeln!(out, "{}", sweep::csv_row(record, &algorithms))?;
                        out.flush()?;
                        Ok(())
                    })?;
                }
                "json" => {
                    let records =
                        sweep::run_sweep(&ds, &grid, &config, args.mask_timing, args.parallel, |_| Ok(()))?;
                    let mut out = open_out(&config.out)?;
                    sweep::emit_records(&mut out, &records, &algorithms, "json")?;
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown report format '{other}'"
                    )))
                }
            }
            Ok(())
        }
        Command::Pipeline(args) => {
            // Visualization workflow: the embedding defaults to the plane.
            let config = args.into_config_with(RunConfig { dim: 2, ..RunConfig::default() })?;
            let out_dir = config
                .out
                .clone()
                .ok_or_else(|| Error::InvalidParameter("pipeline needs --out DIR".into()))?;
            let ds = dataset::load(&config)?;
            let summary = pipeline::run_pipeline(&ds, &config, &out_dir)?;
            println!(
                "pipeline done: N={} features={} graph {:.3}s dropped={} density={}",
                summary.n,
                summary.feature_dim,
                summary.graph_seconds,
                summary.dropped,
                summary.density_written
            );
            Ok(())
        }
        Command::Anomaly(args) => {
            let file = std::fs::File::open(&args.embedding)?;
            let (embedding, ids) = read_embedding_csv(BufReader::new(file))?;
            let report = density_anomalies(&embedding, args.count)?;
            let mut out = open_out(&args.out)?;
            serde_json::to_writer_pretty(&mut out, &report)
                .map_err(|e| Error::Format(format!("density serialization: {e}")))?;
            writeln!(out)?;
            eprintln!(
                "lowest-density points: {}",
                report
                    .anomaly_indices
                    .iter()
                    .map(|&i| ids[i].clone())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
    }
}
