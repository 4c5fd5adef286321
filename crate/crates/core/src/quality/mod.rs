//! Embedding-quality measures.
//!
//! Every measure compares the neighborhood structure of the input space with
//! that of the output space, normalized so 1 is best. LCMC and the
//! co-ranking criterion count neighborhood overlap; trustworthiness and
//! continuity penalize rank displacement of intruding/escaping neighbors;
//! the mean relative rank errors penalize displacement of every neighbor;
//! the Procrustes measure additionally checks local geometry.

mod coranking;
mod density;
mod procrustes;

pub use coranking::{coranking, q_nx, CoRankingMatrix};
pub use density::{density_anomalies, DensityReport};
pub use procrustes::{affine_r_squared, procrustes_measure, procrustes_residual};

use serde::{Deserialize, Serialize};

use crate::cloud::{Coordinates, Embedding, PointCloud};
use crate::error::{Error, Result};
use crate::graph::{brute_force_knn, rank_matrix, NeighborGraph, RankStructure};
use crate::metric::Metric;

fn check_pair(graph_in: &NeighborGraph, graph_out: &NeighborGraph) -> Result<(usize, usize)> {
    if graph_in.len() != graph_out.len() {
        return Err(Error::input("graphs cover different point counts"));
    }
    if graph_in.k() != graph_out.k() {
        return Err(Error::input("graphs use different K"));
    }
    Ok((graph_in.len(), graph_in.k()))
}

/// Local continuity meta-criterion: mean neighborhood overlap adjusted for
/// chance, `(1/NK) sum_i (|U cap V| - K^2/(N-1))`.
pub fn lcmc(graph_in: &NeighborGraph, graph_out: &NeighborGraph) -> Result<f64> {
    let (n, k) = check_pair(graph_in, graph_out)?;
    let mut overlap = 0usize;
    for i in 0..n {
        let u: std::collections::HashSet<usize> =
            graph_in.neighbors(i).iter().map(|nb| nb.index).collect();
        overlap += graph_out
            .neighbors(i)
            .iter()
            .filter(|nb| u.contains(&nb.index))
            .count();
    }
    Ok(overlap as f64 / (n * k) as f64 - k as f64 / (n - 1) as f64)
}

fn tc_normalizer(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    if 2 * k < n {
        nf * kf * (2.0 * nf - 3.0 * kf - 1.0)
    } else {
        nf * (nf - kf) * (nf - kf - 1.0)
    }
}

/// Trustworthiness: penalizes points that intrude into output
/// neighborhoods, weighted by their input-space rank excess.
pub fn trustworthiness(
    input_ranks: &RankStructure,
    graph_in: &NeighborGraph,
    graph_out: &NeighborGraph,
) -> Result<f64> {
    let (n, k) = check_pair(graph_in, graph_out)?;
    if input_ranks.len() != n {
        return Err(Error::input("rank structure size differs from graphs"));
    }
    let g_k = tc_normalizer(n, k);
    let mut sum = 0.0;
    for i in 0..n {
        let u: std::collections::HashSet<usize> =
            graph_in.neighbors(i).iter().map(|nb| nb.index).collect();
        for nb in graph_out.neighbors(i) {
            if !u.contains(&nb.index) {
                sum += input_ranks.rank(i, nb.index) as f64 - k as f64;
            }
        }
    }
    if g_k == 0.0 {
        return Ok(1.0); // K = N-1: no room for intruders
    }
    Ok(1.0 - 2.0 / g_k * sum)
}

/// Continuity: penalizes input neighbors lost from the output neighborhood,
/// weighted by their output-space rank excess.
pub fn continuity(
    output_ranks: &RankStructure,
    graph_in: &NeighborGraph,
    graph_out: &NeighborGraph,
) -> Result<f64> {
    let (n, k) = check_pair(graph_in, graph_out)?;
    if output_ranks.len() != n {
        return Err(Error::input("rank structure size differs from graphs"));
    }
    let g_k = tc_normalizer(n, k);
    let mut sum = 0.0;
    for i in 0..n {
        let v: std::collections::HashSet<usize> =
            graph_out.neighbors(i).iter().map(|nb| nb.index).collect();
        for nb in graph_in.neighbors(i) {
            if !v.contains(&nb.index) {
                sum += output_ranks.rank(i, nb.index) as f64 - k as f64;
            }
        }
    }
    if g_k == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - 2.0 / g_k * sum)
}

/// Mean relative rank errors, reported as `(1 - W_input, 1 - W_output)` so
/// larger is better.
pub fn mrre(
    input_ranks: &RankStructure,
    output_ranks: &RankStructure,
    graph_in: &NeighborGraph,
    graph_out: &NeighborGraph,
) -> Result<(f64, f64)> {
    let (n, k) = check_pair(graph_in, graph_out)?;
    if input_ranks.len() != n || output_ranks.len() != n {
        return Err(Error::input("rank structure size differs from graphs"));
    }
    let h_k: f64 = n as f64
        * (1..=k)
            .map(|i| ((n as f64) - 2.0 * i as f64 + 1.0).abs() / i as f64)
            .sum::<f64>();
    let mut w_input = 0.0;
    let mut w_output = 0.0;
    for i in 0..n {
        for nb in graph_in.neighbors(i) {
            let rho = input_ranks.rank(i, nb.index) as f64;
            let r = output_ranks.rank(i, nb.index) as f64;
            w_input += (rho - r).abs() / rho;
        }
        for nb in graph_out.neighbors(i) {
            let rho = input_ranks.rank(i, nb.index) as f64;
            let r = output_ranks.rank(i, nb.index) as f64;
            w_output += (rho - r).abs() / r;
        }
    }
    Ok((1.0 - w_input / h_k, 1.0 - w_output / h_k))
}

/// Every measure of one embedding at one K, JSON-ready.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub k: usize,
    pub lcmc: f64,
    pub trustworthiness: f64,
    pub continuity: f64,
    pub mrre_input: f64,
    pub mrre_output: f64,
    pub q_nx: f64,
    pub procrustes: f64,
}

impl QualityReport {
    pub const CSV_HEADER: &'static str =
        "k,lcmc,trustworthiness,continuity,mrre_input,mrre_output,q_nx,procrustes";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.k,
            self.lcmc,
            self.trustworthiness,
            self.continuity,
            self.mrre_input,
            self.mrre_output,
            self.q_nx,
            self.procrustes
        )
    }
}

/// Compute every measure of `emb` against `cloud` at neighborhood size `k`.
///
/// Both spaces are ranked with exact brute-force neighborhoods (the output
/// space always under the Euclidean metric).
pub fn quality_report(
    cloud: &PointCloud,
    emb: &Embedding,
    k: usize,
    metric: Metric,
) -> Result<QualityReport> {
    if cloud.len() != emb.len() {
        return Err(Error::input("cloud and embedding cover different point counts"));
    }
    if k == 0 || k >= cloud.len() {
        return Err(Error::param(format!(
            "quality K={k} out of range for N={}",
            cloud.len()
        )));
    }
    let input_ranks = rank_matrix(cloud, metric)?;
    let output_ranks = rank_matrix(emb, Metric::Euclidean)?;
    let graph_in = brute_force_knn(cloud, k, metric)?;
    let graph_out = brute_force_knn(emb, k, Metric::Euclidean)?;
    let q = coranking(&input_ranks, &output_ranks)?;
    let (mrre_input, mrre_output) = mrre(&input_ranks, &output_ranks, &graph_in, &graph_out)?;
    Ok(QualityReport {
        k,
        lcmc: lcmc(&graph_in, &graph_out)?,
        trustworthiness: trustworthiness(&input_ranks, &graph_in, &graph_out)?,
        continuity: continuity(&output_ranks, &graph_in, &graph_out)?,
        mrre_input,
        mrre_output,
        q_nx: q_nx(&q, k)?,
        procrustes: procrustes_measure(cloud, emb, &graph_in)?,
    })
}
