//! Synthetic graphs and attributes.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::FeatureMatrix;
use crate::metrics::FeatureKind;
use crate::seeding;

const DEGREE_RETRIES: usize = 64;

/// Graph plus ground-truth attributes for every node.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: Option<Vec<usize>>,
    pub feature_kind: FeatureKind,
}

impl DatasetBundle {
    pub fn new(
        graph: Graph,
        features: FeatureMatrix,
        labels: Option<Vec<usize>>,
        feature_kind: FeatureKind,
    ) -> Result<Self> {
        features.check_shape(graph.n_nodes(), "features")?;
        if let Some(l) = &labels {
            if l.len() != graph.n_nodes() {
                return Err(Error::input(format!(
                    "{} labels for {} nodes",
                    l.len(),
                    graph.n_nodes()
                )));
            }
        }
        if feature_kind == FeatureKind::Binary && !features.is_binary() {
            return Err(Error::input(
                "binary dataset holds values other than 0 and 1",
            ));
        }
        Ok(DatasetBundle {
            graph,
            features,
            labels,
            feature_kind,
        })
    }
}

/// Node counts per degree; index is the degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHistogram(pub Vec<usize>);

impl DegreeHistogram {
    pub fn of(graph: &Graph) -> Self {
        let max = graph.degrees().iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0usize; max + 1];
        for &d in graph.degrees() {
            counts[d as usize] += 1;
        }
        DegreeHistogram(counts)
    }

    pub fn count(&self, degree: usize) -> usize {
        self.0.get(degree).copied().unwrap_or(0)
    }

    pub fn isolated(&self) -> usize {
        self.count(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTailParams {
    pub n_nodes: usize,
    /// Target mean degree over all nodes, isolated ones included.
    pub mean_degree: f64,
    /// Power-law exponent of the degree distribution.
    pub exponent: f64,
    /// Fraction of nodes forced to degree zero.
    pub isolated_fraction: f64,
    pub seed: u64,
}

impl Default for LongTailParams {
    fn default() -> Self {
        LongTailParams {
            n_nodes: 1000,
            mean_degree: 4.0,
            exponent: 2.5,
            isolated_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Normalized `p(k) ∝ k^-exponent` for `k` in `[kmin, kmax]`; index 0 is `kmin`.
pub fn truncated_power_law(kmin: usize, kmax: usize, exponent: f64) -> Vec<f64> {
    let w: Vec<f64> = (kmin..=kmax).map(|k| (k as f64).powf(-exponent)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn pl_mean(kmin: usize, kmax: usize, exponent: f64) -> f64 {
    truncated_power_law(kmin, kmax, exponent)
        .iter()
        .enumerate()
        .map(|(i, p)| (kmin + i) as f64 * p)
        .sum()
}

/// Configuration-model graph with a truncated power-law degree sequence.
///
/// Degrees of non-isolated nodes are drawn from `k^-exponent` on
/// `[kmin, kmax]`, mixing two adjacent `kmin` values to hit the requested
/// mean. Stubs are matched uniformly at random; self-loops and repeated pairs
/// are dropped, so realized degrees can fall slightly short of the draw.
pub fn generate_longtail_graph(params: &LongTailParams) -> Result<(Graph, DegreeHistogram)> {
    let LongTailParams {
        n_nodes: n,
        mean_degree,
        exponent,
        isolated_fraction,
        seed,
    } = *params;
    if n < 10 {
        return Err(Error::input("long-tail generator needs at least 10 nodes"));
    }
    if !(0.0..=0.5).contains(&isolated_fraction) {
        return Err(Error::input(format!(
            "isolated fraction must lie in [0, 0.5], got {isolated_fraction}"
        )));
    }
    if !(exponent > 1.0) {
        return Err(Error::input(format!(
            "exponent must exceed 1, got {exponent}"
        )));
    }
    if !(mean_degree > 0.0) {
        return Err(Error::input("mean degree must be positive"));
    }
    let mut rng = seeding::rng(seed, seeding::LONGTAIL);
    let n_iso = (isolated_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (isolated, active) = order.split_at(n_iso);
    let n_active = active.len();
    if n_active < 2 {
        return Err(Error::input("fewer than two nodes left to connect"));
    }

    let target = mean_degree * n as f64 / n_active as f64;
    let kmax = ((n_active as f64 * target).sqrt().max(2.0 * target).ceil() as usize)
        .min(n_active - 1)
        .max(1);
    if target > pl_mean(kmax, kmax, exponent) {
        return Err(Error::input(format!(
            "mean degree {mean_degree} infeasible for {n} nodes"
        )));
    }
    // Mix kmin = a (weight w) with a + 1 so the mean lands on target.
    let mut a = 1;
    while a < kmax && pl_mean(a + 1, kmax, exponent) <= target {
        a += 1;
    }
    let lo = pl_mean(a, kmax, exponent);
    let hi = if a < kmax {
        pl_mean(a + 1, kmax, exponent)
    } else {
        lo
    };
    let w_lo = if hi > lo {
        ((hi - target) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let dist_lo = WeightedIndex::new(truncated_power_law(a, kmax, exponent)).expect("weights");
    let dist_hi = WeightedIndex::new(truncated_power_law((a + 1).min(kmax), kmax, exponent))
        .expect("weights");

    let mut degrees = vec![0usize; n];
    let mut feasible = false;
    for _ in 0..DEGREE_RETRIES {
        let mut total = 0usize;
        for &v in active {
            let d = if rng.random::<f64>() < w_lo {
                a + dist_lo.sample(&mut rng)
            } else {
                (a + 1).min(kmax) + dist_hi.sample(&mut rng)
            };
            degrees[v] = d;
            total += d;
        }
        if total.is_multiple_of(2) {
            feasible = true;
            break;
        }
    }
    if !feasible {
        return Err(Error::Numerical(format!(
            "no even-sum degree sequence after {DEGREE_RETRIES} draws"
        )));
    }
    for &v in isolated {
        degrees[v] = 0;
    }

    let mut stubs: Vec<usize> = Vec::with_capacity(degrees.iter().sum());
    for (v, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v, d));
    }
    stubs.shuffle(&mut rng);
    let edges: Vec<(usize, usize)> = stubs
        .chunks_exact(2)
        .filter(|p| p[0] != p[1])
        .map(|p| (p[0], p[1]))
        .collect();
    let graph = Graph::new(n, &edges)?;
    let hist = DegreeHistogram::of(&graph);
    Ok((graph, hist))
}

/// Uniform random graph with exactly `n_edges` distinct edges.
pub fn generate_random_graph(n_nodes: usize, n_edges: usize, seed: u64) -> Result<Graph> {
    let max = n_nodes.saturating_mul(n_nodes.saturating_sub(1)) / 2;
    if n_edges > max {
        return Err(Error::input(format!(
            "{n_edges} edges do not fit in a simple graph on {n_nodes} nodes"
        )));
    }
    let mut rng = seeding::rng(seed, seeding::RANDOM_GRAPH);
    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(n_edges);
    let mut edges = Vec::with_capacity(n_edges);
    while edges.len() < n_edges {
        let u = rng.random_range(0..n_nodes);
        let v = rng.random_range(0..n_nodes);
        if u == v {
            continue;
        }
        let key = (u.min(v) as u32, u.max(v) as u32);
        if seen.insert(key) {
            edges.push((u, v));
        }
    }
    Graph::new(n_nodes, &edges)
}

/// Independent uniform `[0, 1)` entries, for timing and smoke tests.
pub fn uniform_features(n_nodes: usize, n_features: usize, seed: u64) -> FeatureMatrix {
    let mut rng = seeding::rng(seed, seeding::UNIFORM);
    let values = (0..n_nodes * n_features)
        .map(|_| rng.random::<f64>())
        .collect();
    FeatureMatrix::from_vec(n_nodes, n_features, values).expect("shape matches by construction")
}

/// Controls for [`synthesize_bundle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_features: usize,
    pub kind: FeatureKind,
    pub n_classes: usize,
    pub latent_dim: usize,
    /// Lazy random-walk smoothing steps applied to the latent factors.
    pub smoothing_steps: usize,
    /// Weight of the node-specific latent signal against feature popularity.
    pub signal: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_features: 64,
            kind: FeatureKind::Binary,
            n_classes: 4,
            latent_dim: 8,
            smoothing_steps: 4,
            signal: 1.5,
            seed: 0,
        }
    }
}

/// Homophilous attributes and labels on a given graph.
///
/// Every node gets Gaussian latent factors smoothed over the graph, so
/// neighbors resemble each other while isolated nodes keep unsmoothed noise.
/// Each feature has a popularity drawn from a decaying profile; a node's
/// feature value combines that popularity with a random projection of its
/// latent factors. Labels are the argmax of another projection.
pub fn synthesize_bundle(graph: Graph, params: &SynthParams) -> Result<DatasetBundle> {
    let n = graph.n_nodes();
    let SynthParams {
        n_features,
        kind,
        n_classes,
        latent_dim,
        smoothing_steps,
        signal,
        seed,
    } = *params;
    if n_features == 0 || latent_dim == 0 {
        return Err(Error::input(
            "need at least one feature and one latent dimension",
        ));
    }
    if n_classes < 2 {
        return Err(Error::input("need at least two classes"));
    }
    let mut rng = seeding::rng(seed, seeding::SYNTH);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };

    let mut latent = FeatureMatrix::zeros(n, latent_dim);
    latent.as_mut_slice().iter_mut().for_each(|v| *v = normal());
    for _ in 0..smoothing_steps {
        let prop = graph.propagate(&latent)?;
        for (v, p) in latent.as_mut_slice().iter_mut().zip(prop.as_slice()) {
            *v = 0.5 * *v + 0.5 * p;
        }
    }
    // Per-node unit scale keeps isolated (unsmoothed) and hub nodes comparable.
    for i in 0..n {
        let row = latent.row_mut(i);
        let norm = (row.iter().map(|v| v * v).sum::<f64>() / latent_dim as f64).sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }

    let scale = 1.0 / (latent_dim as f64).sqrt();
    let proj: Vec<f64> = (0..latent_dim * n_features)
        .map(|_| normal() * scale)
        .collect();
    let class_proj: Vec<f64> = (0..latent_dim * n_classes).map(|_| normal()).collect();
    // Popularity decays with rank; ranks are shuffled across feature indices.
    let mut ranks: Vec<usize> = (0..n_features).collect();
    ranks.shuffle(&mut rng);
    let base: Vec<f64> = match kind {
        FeatureKind::Binary => ranks
            .iter()
            .map(|&r| {
                let p = 0.35 * ((r + 1) as f64).powf(-0.6);
                (p / (1.0 - p)).ln()
            })
            .collect(),
        FeatureKind::Continuous => ranks
            .iter()
            .map(|&r| 2.0 * ((r + 1) as f64).powf(-0.5))
            .collect(),
    };

    let mut features = FeatureMatrix::zeros(n, n_features);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let h = latent.row(i);
        let mut best = (f64::NEG_INFINITY, 0usize);
        for c in 0..n_classes {
            let s: f64 = (0..latent_dim)
                .map(|d| h[d] * class_proj[d * n_classes + c])
                .sum();
            if s > best.0 {
                best = (s, c);
            }
        }
        labels.push(best.1);
        for f in 0..n_features {
            let s: f64 = (0..latent_dim)
                .map(|d| h[d] * proj[d * n_features + f])
                .sum();
            let logit = base[f] + signal * s;
            let v = match kind {
                FeatureKind::Binary => {
                    let p = 1.0 / (1.0 + (-logit).exp());
                    if rng.random::<f64>() < p {
                        1.0
                    } else {
                        0.0
                    }
                }
                FeatureKind::Continuous => logit + 0.3 * rng.sample::<f64, _>(StandardNormal),
            };
            features.set(i, f, v);
        }
    }
    DatasetBundle::new(graph, features, Some(labels), kind)
}
