//! Run configuration: paper-default values, a flat key=value config file,
//! and command-line overrides (flags win).

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use manifold_ann::ann::{AnnParams, Backend};
use manifold_ann::manifold::Algorithm;
use manifold_ann::{Error, Metric, Result};

/// Feature handling for the input data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    /// Rows are coordinates already.
    Raw,
    /// Bin into distributions, embed sqrt mass vectors under L2.
    Hellinger,
    /// Bin into distributions, embed raw mass vectors under L1.
    Tv,
}

impl FromStr for DataMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(DataMode::Raw),
            "hellinger" => Ok(DataMode::Hellinger),
            "tv" => Ok(DataMode::Tv),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

/// Everything a run needs; defaults mirror the benchmark protocol
/// (K = 20, d = 5 for sweeps, d = 2 for visualization pipelines).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: String,
    pub metric: Metric,
    pub backend: Backend,
    pub k: usize,
    pub dim: usize,
    pub epsilon: f64,
    pub n_trees: usize,
    pub search_k: usize,
    pub n_links: usize,
    pub ef: usize,
    pub seed: u64,
    pub bins: usize,
    pub mode: DataMode,
    pub stack: bool,
    pub limit: Option<usize>,
    pub algorithms: Vec<Algorithm>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: String::new(),
            metric: Metric::Euclidean,
            backend: Backend::Brute,
            k: 20,
            dim: 5,
            epsilon: 0.0,
            n_trees: 50,
            search_k: 500,
            n_links: 16,
            ef: 50,
            seed: 0,
            bins: 200,
            mode: DataMode::Raw,
            stack: false,
            limit: None,
            algorithms: Algorithm::ALL.to_vec(),
            out: None,
        }
    }
}

impl RunConfig {
    pub fn ann_params(&self) -> AnnParams {
        AnnParams {
            metric: self.metric,
            leaf_capacity: 1,
            epsilon: self.epsilon,
            n_trees: self.n_trees,
            kappa: 16,
            search_k: self.search_k,
            n_links: self.n_links,
            ef_construction: 200,
            ef: self.ef,
            seed: self.seed,
        }
    }
}

/// Parse a flat `key=value` config file; `#` starts a comment.
pub fn parse_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!(
                "config line {}: expected key=value, got '{line}'",
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// One resolved setting: command-line flag beats config file beats default.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw.parse::<T>().map_err(|_| {
            Error::InvalidParameter(format!("config key '{key}': cannot parse '{raw}'"))
        }),
        None => Ok(default),
    }
}

/// Parse `--metric l2|l1` (also accepts the metric names).
pub fn parse_metric(s: &str) -> Result<Metric> {
    match s {
        "l2" | "euclidean" => Ok(Metric::Euclidean),
        "l1" | "manhattan" => Ok(Metric::Manhattan),
        other => Err(Error::InvalidParameter(format!("unknown metric '{other}'"))),
    }
}

/// Comma-separated algorithm list.
pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    if s == "all" {
        return Ok(Algorithm::ALL.to_vec());
    }
    s.split(',')
        .map(|name| name.trim().parse::<Algorithm>())
        .collect()
}
