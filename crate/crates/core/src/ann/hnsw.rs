//! Hierarchical navigable small-world graph.
//!
//! Points are inserted sequentially; each draws a maximum layer from a
//! geometric-tailed distribution so high layers stay sparse. Queries descend
//! greedily from the top layer's entry point (moving while a neighbor
//! improves) and finish with a best-first search of width `ef` on layer 0.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{Coordinates, PointCloud};
use crate::error::{Error, Result};
use crate::graph::Neighbor;
use crate::metric::Metric;

/// Hierarchical graph index over a copied point set.
pub struct HnswIndex {
    data: Vec<f64>,
    dim: usize,
    len: usize,
    metric: Metric,
    n_links: usize,
    level_scale: f64,
    seed: u64,
    /// Per point: adjacency per layer, outermost index = point.
    links: Vec<Vec<Vec<u32>>>,
    /// Highest layer of each point.
    levels: Vec<usize>,
    entry: usize,
    top_layer: usize,
    layer0_components: usize,
}

struct HeapNb(Neighbor);

impl PartialEq for HeapNb {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp_key(&other.0) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapNb {}
impl PartialOrd for HeapNb {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapNb {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp_key(&other.0)
    }
}

/// Maximum layer drawn from floor(-ln(u) * scale), u uniform on (0, 1].
#[inline]
pub(crate) fn sample_level(u: f64, scale: f64) -> usize {
    (-u.ln() * scale).floor() as usize
}

impl HnswIndex {
    /// Insert every point of `cloud` in index order; deterministic for a
    /// given seed.
    pub fn build(
        cloud: &PointCloud,
        n_links: usize,
        ef_construction: usize,
        seed: u64,
        metric: Metric,
    ) -> Result<HnswIndex> {
        if n_links == 0 {
            return Err(Error::param("n_links must be >= 1"));
        }
        if ef_construction == 0 {
            return Err(Error::param("ef_construction must be >= 1"));
        }
        // Keeps the expected layer-population ratio at 1/n_links; a single
        // link would give scale 1/ln(1), so it degrades to one layer tier.
        let level_scale = if n_links >= 2 { 1.0 / (n_links as f64).ln() } else { 1.0 };

        let mut index = HnswIndex {
            data: cloud.as_slice().to_vec(),
            dim: cloud.dim(),
            len: 0,
            metric,
            n_links,
            level_scale,
            seed,
            links: Vec::with_capacity(cloud.len()),
            levels: Vec::with_capacity(cloud.len()),
            entry: 0,
            top_layer: 0,
            layer0_components: 0,
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..cloud.len() {
            let u = 1.0 - rng.random::<f64>(); // (0, 1]
            let level = sample_level(u, level_scale);
            index.insert(i, level, ef_construction);
        }
        index.layer0_components = index.count_layer0_components();
        if index.layer0_components > 1 {
            log::warn!(
                "hnsw layer-0 graph has {} components; increase n_links or ef_construction",
                index.layer0_components
            );
        }
        Ok(index)
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    fn dist(&self, q: &[f64], i: usize) -> f64 {
        self.metric.distance(q, self.point(i))
    }

    fn max_degree(&self, layer: usize) -> usize {
        if layer == 0 {
            2 * self.n_links
        } else {
            self.n_links
        }
    }

    fn insert(&mut self, i: usize, level: usize, ef_construction: usize) {
        self.links.push(vec![Vec::new(); level + 1]);
        self.levels.push(level);
        if self.len == 0 {
            self.len = 1;
            self.entry = i;
            self.top_layer = level;
            return;
        }
        self.len += 1;
        let q = self.point(i).to_vec();

        let mut ep = vec![self.entry];
        let mut layer = self.top_layer;
        while layer > level {
            ep = vec![self.greedy_closest(&q, ep[0], layer)];
            if layer == 0 {
                break;
            }
            layer -= 1;
        }

        for layer in (0..=level.min(self.top_layer)).rev() {
            let found = self.search_layer(&q, &ep, ef_construction, layer, None);
            let chosen: Vec<u32> = found
                .iter()
                .take(self.n_links)
                .map(|nb| nb.index as u32)
                .collect();
            for &nb in &chosen {
                self.links[i][layer].push(nb);
                self.links[nb as usize][layer].push(i as u32);
                if self.links[nb as usize][layer].len() > self.max_degree(layer) {
                    self.prune(nb as usize, layer);
                }
            }
            ep = found.iter().map(|nb| nb.index).collect();
            if ep.is_empty() {
                ep = vec![self.entry];
            }
        }

        if level > self.top_layer {
            self.top_layer = level;
            self.entry = i;
        }
    }

    /// Keep only the closest neighbors of an over-full node, removing the
    /// reverse edges so links stay mutual. A dropped neighbor keeps the edge
    /// if it would otherwise end up isolated.
    fn prune(&mut self, node: usize, layer: usize) {
        let base = self.point(node).to_vec();
        let mut ordered: Vec<Neighbor> = self.links[node][layer]
            .iter()
            .map(|&j| Neighbor::new(j as usize, self.dist(&base, j as usize)))
            .collect();
        ordered.sort_unstable_by(Neighbor::cmp_key);
        let cap = self.max_degree(layer);
        let mut kept: Vec<u32> = ordered[..cap.min(ordered.len())]
            .iter()
            .map(|nb| nb.index as u32)
            .collect();
        for nb in &ordered[cap.min(ordered.len())..] {
            let j = nb.index;
            if self.links[j][layer].len() <= 1 {
                kept.push(j as u32);
                continue;
            }
            self.links[j][layer].retain(|&v| v as usize != node);
        }
        self.links[node][layer] = kept;
    }

    /// Move to the best neighbor while one strictly improves on the current
    /// point; ties never move, so the walk terminates.
    fn greedy_closest(&self, q: &[f64], start: usize, layer: usize) -> usize {
        let mut current = Neighbor::new(start, self.dist(q, start));
        loop {
            let mut best = current;
            for &j in &self.links[current.index][layer] {
                let cand = Neighbor::new(j as usize, self.dist(q, j as usize));
                if cand.cmp_key(&best) == std::cmp::Ordering::Less {
                    best = cand;
                }
            }
            if best.index == current.index {
                return current.index;
            }
            current = best;
        }
    }

    /// Best-first search with a candidate list of width `ef`, returning the
    /// `ef` closest found, ascending.
    fn search_layer(
        &self,
        q: &[f64],
        entries: &[usize],
        ef: usize,
        layer: usize,
        exclude: Option<usize>,
    ) -> Vec<Neighbor> {
        let mut visited = vec![false; self.links.len()];
        let mut frontier: BinaryHeap<Reverse<HeapNb>> = BinaryHeap::new();
        let mut found: BinaryHeap<HeapNb> = BinaryHeap::new();

        for &e in entries {
            if visited[e] {
                continue;
            }
            visited[e] = true;
            let nb = Neighbor::new(e, self.dist(q, e));
            frontier.push(Reverse(HeapNb(nb)));
            found.push(HeapNb(nb));
        }
        while found.len() > ef {
            found.pop();
        }

        while let Some(Reverse(HeapNb(cand))) = frontier.pop() {
            if found.len() == ef {
                if let Some(worst) = found.peek() {
                    if cand.cmp_key(&worst.0) == std::cmp::Ordering::Greater {
                        break;
                    }
                }
            }
            for &j in &self.links[cand.index][layer] {
                let j = j as usize;
                if visited[j] {
                    continue;
                }
                visited[j] = true;
                let nb = Neighbor::new(j, self.dist(q, j));
                if found.len() < ef
                    || nb.cmp_key(&found.peek().unwrap().0) == std::cmp::Ordering::Less
                {
                    frontier.push(Reverse(HeapNb(nb)));
                    found.push(HeapNb(nb));
                    if found.len() > ef {
                        found.pop();
                    }
                }
            }
        }

        let mut out: Vec<Neighbor> = found.into_iter().map(|h| h.0).collect();
        out.sort_unstable_by(Neighbor::cmp_key);
        if let Some(x) = exclude {
            out.retain(|nb| nb.index != x);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn top_layer(&self) -> usize {
        self.top_layer
    }

    pub fn level_scale(&self) -> f64 {
        self.level_scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-point maximum layers.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Points present at `layer` or above.
    pub fn layer_population(&self, layer: usize) -> usize {
        self.levels.iter().filter(|&&l| l >= layer).count()
    }

    /// Number of connected components of the layer-0 graph.
    pub fn layer0_components(&self) -> usize {
        self.layer0_components
    }

    fn count_layer0_components(&self) -> usize {
        if self.len == 0 {
            return 0;
        }
        let mut seen = vec![false; self.len];
        let mut components = 0;
        for start in 0..self.len {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &j in &self.links[v][0] {
                    if !seen[j as usize] {
                        seen[j as usize] = true;
                        stack.push(j as usize);
                    }
                }
            }
        }
        components
    }

    /// Structural equality with another index. Test support.
    pub fn same_structure(&self, other: &HnswIndex) -> bool {
        self.levels == other.levels && self.links == other.links && self.entry == other.entry
    }

    /// K approximate nearest neighbors of `q`.
    pub fn query(&self, q: &[f64], k: usize, ef: usize) -> Result<Vec<Neighbor>> {
        self.query_excluding(q, k, ef, None)
    }

    /// As [`HnswIndex::query`], dropping one indexed point from the result.
    pub fn query_excluding(
        &self,
        q: &[f64],
        k: usize,
        ef: usize,
        exclude: Option<usize>,
    ) -> Result<Vec<Neighbor>> {
        if self.len == 0 {
            return Err(Error::InvalidState("query on an empty index".into()));
        }
        if q.len() != self.dim {
            return Err(Error::input(format!(
                "query has dimension {}, index has {}",
                q.len(),
                self.dim
            )));
        }
        if ef < k {
            return Err(Error::param("ef must be >= K"));
        }
        let mut ep = self.entry;
        for layer in (1..=self.top_layer).rev() {
            ep = self.greedy_closest(q, ep, layer);
        }
        let mut out = self.search_layer(q, &[ep], ef.max(k + usize::from(exclude.is_some())), 0, exclude);
        out.truncate(k);
        Ok(out)
    }
}
