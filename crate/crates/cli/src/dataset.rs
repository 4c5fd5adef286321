//! Input loading: numeric CSV, IDX images, long-format demand series, and
//! `synthetic:` specs, all normalized into an index-ready point cloud.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::Path;

use manifold_ann::distributions::{bin_series, build_grid, stack_household, to_feature_vector, FeatureMode};
use manifold_ann::io::{read_demand_csv, read_points_csv, DemandRecord};
use manifold_ann::synthetic;
use manifold_ann::{Coordinates, Error, Metric, PointCloud, Result};

use crate::config::{DataMode, RunConfig};
use crate::idx;

/// A loaded dataset: feature vectors plus the metric they are meant to be
/// searched under.
pub struct Dataset {
    pub cloud: PointCloud,
    pub metric: Metric,
    /// What the rows are: raw points, per-period distributions, or stacked
    /// households.
    pub kind: &'static str,
}

/// Load `config.input` according to the data mode.
///
/// Raw mode accepts wide CSV, IDX images, and point-cloud `synthetic:`
/// specs. Hellinger/TV modes accept long-format demand CSV and the demand
/// `synthetic:` specs, bin them on a pooled grid, and emit mass/sqrt-mass
/// vectors under the matched metric.
pub fn load(config: &RunConfig) -> Result<Dataset> {
    if let Some(spec) = config.input.strip_prefix("synthetic:") {
        return load_synthetic(spec, config);
    }
    let path = Path::new(&config.input);
    if !path.exists() {
        return Err(Error::Format(format!("input '{}' does not exist", config.input)));
    }
    match config.mode {
        DataMode::Raw => {
            let cloud = if idx::looks_like_idx(path) {
                let file = std::fs::File::open(path)?;
                idx::read_idx_images_limited(BufReader::new(file), config.limit)?
            } else {
                let file = std::fs::File::open(path)?;
                let cloud = read_points_csv(BufReader::new(file))?;
                truncate(cloud, config.limit)?
            };
            Ok(Dataset { cloud, metric: config.metric, kind: "points" })
        }
        DataMode::Hellinger | DataMode::Tv => {
            let file = std::fs::File::open(path)?;
            let records = read_demand_csv(BufReader::new(file))?;
            featurize_demand(records, config)
        }
    }
}

fn truncate(cloud: PointCloud, limit: Option<usize>) -> Result<PointCloud> {
    match limit {
        Some(limit) if limit < cloud.len() => {
            let dim = cloud.dim();
            PointCloud::new(cloud.as_slice()[..limit * dim].to_vec(), dim)
        }
        _ => Ok(cloud),
    }
}

fn load_synthetic(spec: &str, config: &RunConfig) -> Result<Dataset> {
    let (kind, params) = match spec.split_once(':') {
        Some((kind, rest)) => (kind, parse_params(rest)?),
        None => (spec, BTreeMap::new()),
    };
    let get = |key: &str, default: usize| -> usize {
        params.get(key).and_then(|v| v.parse().ok()).unwrap_or(default)
    };
    let getf = |key: &str, default: f64| -> f64 {
        params.get(key).and_then(|v| v.parse().ok()).unwrap_or(default)
    };
    match kind {
        "gaussian" => {
            let cloud = synthetic::gaussian_cloud(get("n", 500), get("p", 8), config.seed);
            Ok(Dataset { cloud, metric: config.metric, kind: "points" })
        }
        "lowrank" => {
            let cloud = synthetic::low_rank_cloud(
                get("n", 10_000),
                get("p", 50),
                get("d", 5),
                getf("noise", 0.01),
                config.seed,
            );
            Ok(Dataset { cloud, metric: config.metric, kind: "points" })
        }
        "rectangle" => {
            let (cloud, _) = synthetic::rotated_rectangle(
                get("n", 400),
                getf("width", 2.0),
                getf("height", 1.0),
                get("p", 5),
                config.seed,
            );
            Ok(Dataset { cloud, metric: config.metric, kind: "points" })
        }
        "circle" => {
            let cloud = synthetic::circle(get("n", 64), getf("radius", 1.0));
            Ok(Dataset { cloud, metric: config.metric, kind: "points" })
        }
        "household" => {
            let records = household_records(1, get("periods", 336), get("weeks", 104), getf("missing", 0.02), config.seed);
            featurize_demand(records, config)
        }
        "households" => {
            let records = household_records(
                get("n", 20),
                get("periods", 336),
                get("weeks", 30),
                getf("missing", 0.02),
                config.seed,
            );
            featurize_demand(records, config)
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown synthetic dataset '{other}'"
        ))),
    }
}

fn household_records(
    n: usize,
    periods: usize,
    weeks: usize,
    missing: f64,
    seed: u64,
) -> Vec<DemandRecord> {
    let mut out = Vec::new();
    for h in 0..n {
        let id = if n == 1 { "household".to_string() } else { format!("h{:04}", h + 1) };
        let series = synthetic::household_demand(seed.wrapping_add(h as u64), periods, weeks, missing);
        for (period, values) in series.iter().enumerate() {
            for &value in values {
                out.push(DemandRecord { id: id.clone(), period, value });
            }
        }
    }
    out
}

fn parse_params(rest: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for part in rest.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("synthetic spec: expected key=value, got '{part}'"))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Bin demand records and emit feature vectors per the data mode.
///
/// Without `--stack`, each (id, period) pair becomes one observation (its
/// distribution pooled over occurrences); with `--stack`, each id becomes
/// one observation holding its per-period blocks concatenated.
pub fn featurize_demand(records: Vec<DemandRecord>, config: &RunConfig) -> Result<Dataset> {
    let feature_mode = match config.mode {
        DataMode::Hellinger => FeatureMode::Hellinger,
        DataMode::Tv => FeatureMode::Tv,
        DataMode::Raw => {
            return Err(Error::InvalidParameter(
                "demand data needs --mode hellinger or --mode tv".into(),
            ))
        }
    };
    let metric = match feature_mode {
        FeatureMode::Hellinger => Metric::Euclidean,
        FeatureMode::Tv => Metric::Manhattan,
    };

    let pooled: Vec<f64> = records.iter().map(|r| r.value).collect();
    let grid = build_grid(&pooled, config.bins)?;

    // Group values by (id, period); BTreeMap keeps output order stable.
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in &records {
        groups
            .entry((r.id.clone(), r.period))
            .or_default()
            .push(r.value);
    }

    if config.stack {
        // One observation per id: per-period blocks on the shared grid.
        let mut per_id: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for ((id, period), values) in groups {
            per_id.entry(id).or_default().insert(period, values);
        }
        let periods: usize = per_id
            .values()
            .flat_map(|m| m.keys().copied())
            .max()
            .map_or(0, |p| p + 1);
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (id, mut by_period) in per_id {
            let dists: Vec<_> = (0..periods)
                .map(|p| bin_series(&by_period.remove(&p).unwrap_or_default(), &grid))
                .collect();
            let stacked = stack_household(&dists)?;
            if !stacked.empty_periods.is_empty() {
                log::warn!(
                    "household {id}: {} empty period slots",
                    stacked.empty_periods.len()
                );
            }
            rows.push(match feature_mode {
                FeatureMode::Hellinger => stacked
                    .as_slice()
                    .iter()
                    .map(|v| v.sqrt())
                    .collect::<Vec<f64>>(),
                FeatureMode::Tv => stacked.as_slice().to_vec(),
            });
            ids.push(id);
        }
        let cloud = PointCloud::from_rows(&rows)?.with_ids(ids)?;
        Ok(Dataset { cloud, metric, kind: "stacked" })
    } else {
        let single_id = {
            let mut ids = records.iter().map(|r| &r.id);
            let first = ids.next();
            first.is_none_or(|f| records.iter().all(|r| &r.id == f))
        };
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for ((id, period), values) in groups {
            let dist = bin_series(&values, &grid);
            if dist.is_empty() {
                log::warn!("observation {id}/{period} has no usable values; skipped");
                continue;
            }
            rows.push(to_feature_vector(&dist, feature_mode)?);
            ids.push(if single_id { period.to_string() } else { format!("{id}/{period}") });
        }
        let cloud = PointCloud::from_rows(&rows)?.with_ids(ids)?;
        Ok(Dataset { cloud, metric, kind: "distributions" })
    }
}
