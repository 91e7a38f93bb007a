//! Evaluation pipeline: route every source/destination pair under a model,
//! merge the routes into a sampled graph and summarise hop statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, NodeId, Topology, TopologyMetrics};
use crate::models::{ModelError, ModelSpec, Route, Router};

/// Mass given to a bin missing from one side before computing KL.
pub const SMOOTHING_MASS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("none of the {pairs} source/destination pairs is connected")]
    AllUnreachable { pairs: usize },
}

/// Normalized distribution over non-negative integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    bins: BTreeMap<usize, f64>,
    total_count: usize,
}

impl Histogram {
    pub fn from_observations(values: impl IntoIterator<Item = usize>) -> Option<Self> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for v in values {
            *counts.entry(v).or_default() += 1;
        }
        Self::from_counts(counts)
    }

    pub fn from_counts(counts: BTreeMap<usize, usize>) -> Option<Self> {
        let total: usize = counts.values().sum();
        if total == 0 {
            return None;
        }
        let bins = counts
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|(k, c)| (k, c as f64 / total as f64))
            .collect();
        Some(Histogram {
            bins,
            total_count: total,
        })
    }

    /// Normalizes non-negative masses; zero masses are dropped.
    pub fn from_masses(masses: impl IntoIterator<Item = (usize, f64)>) -> Option<Self> {
        let mut bins: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, m) in masses {
            if m > 0.0 {
                *bins.entry(k).or_default() += m;
            }
        }
        let total: f64 = bins.values().sum();
        if bins.is_empty() || !total.is_finite() {
            return None;
        }
        bins.values_mut().for_each(|m| *m /= total);
        Some(Histogram {
            bins,
            total_count: 0,
        })
    }

    /// Bin-wise mean of several histograms, each weighted equally.
    pub fn average(hists: &[Histogram]) -> Option<Self> {
        let n = hists.len() as f64;
        let mut bins: BTreeMap<usize, f64> = BTreeMap::new();
        for h in hists {
            for (&k, &m) in &h.bins {
                *bins.entry(k).or_default() += m / n;
            }
        }
        let mut out = Histogram::from_masses(bins)?;
        out.total_count = hists.iter().map(|h| h.total_count).sum();
        Some(out)
    }

    pub fn mass(&self, k: usize) -> f64 {
        self.bins.get(&k).copied().unwrap_or(0.0)
    }

    pub fn bins(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.bins.iter().map(|(&k, &m)| (k, m))
    }

    pub fn support_len(&self) -> usize {
        self.bins.len()
    }

    /// Number of observations behind the histogram (0 if built from masses).
    pub fn total_count(&self) -> usize {
        self.total_count
    }

    pub fn mean(&self) -> f64 {
        self.bins.iter().map(|(&k, &m)| k as f64 * m).sum()
    }

    /// Shannon entropy in nats over the support.
    pub fn entropy(&self) -> f64 {
        self.bins.values().map(|&p| -p * p.ln()).sum::<f64>() + 0.0
    }
}

/// Hop-count distribution of `routes`.
pub fn length_distribution(routes: &[Route]) -> Option<Histogram> {
    Histogram::from_observations(routes.iter().map(Route::hops))
}

/// `D(P || Q) = sum_i P(i) ln(P(i) / Q(i))` over the union support, after
/// giving each bin missing from one side [`SMOOTHING_MASS`] and
/// renormalizing that side.
pub fn distribution_distance(p: &Histogram, q: &Histogram) -> f64 {
    let support: Vec<usize> = p
        .bins
        .keys()
        .chain(q.bins.keys())
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let smoothed = |h: &Histogram| -> Vec<f64> {
        let raw: Vec<f64> = support
            .iter()
            .map(|&k| h.bins.get(&k).copied().unwrap_or(SMOOTHING_MASS))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|m| m / total).collect()
    };
    let (ps, qs) = (smoothed(p), smoothed(q));
    ps.iter()
        .zip(&qs)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}

/// Degree distribution of the nodes found at each hop position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopDegreeProfile {
    /// Index `h` holds `p_h(k)`; hop 0 is the source.
    pub hops: Vec<Histogram>,
    /// `I(h) = -sum_k p_h(k) ln p_h(k)`.
    pub entropy: Vec<f64>,
}

pub fn hop_degree_profile(routes: &[Route], t: &Topology) -> Option<HopDegreeProfile> {
    let longest = routes.iter().map(|r| r.nodes().len()).max()?;
    let mut counts: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); longest];
    for r in routes {
        for (h, &v) in r.nodes().iter().enumerate() {
            *counts[h].entry(t.degree(v)).or_default() += 1;
        }
    }
    let hops: Vec<Histogram> = counts
        .into_iter()
        .map(|c| Histogram::from_counts(c).expect("every hop below the longest route is populated"))
        .collect();
    let entropy = hops.iter().map(Histogram::entropy).collect();
    Some(HopDegreeProfile { hops, entropy })
}

/// Mean degree over every occurrence of an intermediate (non-endpoint)
/// route node.
pub fn mean_intermediate_degree(routes: &[Route], t: &Topology) -> Option<f64> {
    let (sum, n) = routes
        .iter()
        .flat_map(|r| r.intermediate())
        .fold((0usize, 0usize), |(s, n), &v| (s + t.degree(v), n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

/// Graph of the nodes and consecutive-pair edges appearing in `routes`,
/// relabeled densely in ascending original id.
pub fn merge_routes(routes: &[Route]) -> Result<Topology, GraphError> {
    let mut ids: Vec<NodeId> = routes
        .iter()
        .flat_map(|r| r.nodes().iter().copied())
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let dense = |v: NodeId| ids.binary_search(&v).unwrap();
    let edges: Vec<(NodeId, NodeId)> = routes
        .iter()
        .flat_map(|r| r.nodes().windows(2).map(|p| (dense(p[0]), dense(p[1]))))
        .collect();
    Topology::from_edges(&edges)
}

/// Per-repetition averages of the sampled-graph metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub node_count: f64,
    pub edge_count: f64,
    pub avg_degree: f64,
    pub gamma: Option<f64>,
    pub clustering: f64,
    pub heterogeneity: f64,
}

impl MetricsSummary {
    pub fn mean_of(metrics: &[TopologyMetrics]) -> Self {
        let n = metrics.len() as f64;
        let avg = |f: fn(&TopologyMetrics) -> f64| metrics.iter().map(f).sum::<f64>() / n;
        let gammas: Vec<f64> = metrics.iter().filter_map(|m| m.gamma).collect();
        MetricsSummary {
            node_count: avg(|m| m.node_count as f64),
            edge_count: avg(|m| m.edge_count as f64),
            avg_degree: avg(|m| m.avg_degree),
            gamma: (!gammas.is_empty()).then(|| gammas.iter().sum::<f64>() / gammas.len() as f64),
            clustering: avg(|m| m.clustering),
            heterogeneity: avg(|m| m.heterogeneity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub sources: Vec<NodeId>,
    pub destinations: Vec<NodeId>,
    /// Ignored (treated as 1) for deterministic models.
    pub repetitions: usize,
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, sources: Vec<NodeId>, destinations: Vec<NodeId>) -> Self {
        ExperimentConfig {
            model,
            sources,
            destinations,
            repetitions: 1,
            base_seed: 0,
        }
    }

    pub fn effective_repetitions(&self) -> usize {
        if self.model.kind().is_stochastic() {
            self.repetitions.max(1)
        } else {
            1
        }
    }

    /// Seed used for repetition `r`.
    pub fn repetition_seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Repetition {
    pub seed: u64,
    pub routes: Vec<Route>,
    pub metrics: TopologyMetrics,
    pub length_distribution: Histogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Model with defaults resolved against the topology.
    pub model: ModelSpec,
    /// Pairs routed per repetition (`s == d` excluded).
    pub pairs: usize,
    /// Pairs without a route; identical in every repetition.
    pub unreachable_count: usize,
    pub repetitions: Vec<Repetition>,
    pub sampled_metrics: MetricsSummary,
    /// Bin-wise mean of the per-repetition hop distributions.
    pub length_distribution: Histogram,
    pub mean_route_length: f64,
    pub profile: HopDegreeProfile,
    pub mean_intermediate_degree: Option<f64>,
}

impl ExperimentResult {
    /// Routes of all repetitions in repetition order.
    pub fn routes(&self) -> impl Iterator<Item = &Route> {
        self.repetitions.iter().flat_map(|r| r.routes.iter())
    }

    pub fn all_routes(&self) -> Vec<Route> {
        self.routes().cloned().collect()
    }
}

/// Routes found from one source, pairs attempted, pairs unreachable.
type SourceBatch = (Vec<Route>, usize, usize);

fn route_pairs(
    router: &Router<'_>,
    sources: &[NodeId],
    destinations: &[NodeId],
) -> Result<SourceBatch, ExperimentError> {
    let per_source: Vec<Result<SourceBatch, ModelError>> = sources
        .par_iter()
        .map(|&s| {
            let targets: Vec<NodeId> = destinations.iter().copied().filter(|&d| d != s).collect();
            let found = router.routes_from(s, &targets)?;
            let pairs = found.len();
            let routes: Vec<Route> = found.into_iter().flatten().collect();
            let missing = pairs - routes.len();
            Ok((routes, pairs, missing))
        })
        .collect();
    let mut routes = Vec::new();
    let (mut pairs, mut missing) = (0, 0);
    for chunk in per_source {
        let (r, p, m) = chunk?;
        routes.extend(r);
        pairs += p;
        missing += m;
    }
    Ok((routes, pairs, missing))
}

/// Runs `cfg` on `t`. Parallel over sources on the current rayon pool; the
/// result does not depend on the pool size.
pub fn run_experiment(
    t: &Topology,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult, ExperimentError> {
    if cfg.sources.is_empty() {
        return Err(ExperimentError::Empty("source set"));
    }
    if cfg.destinations.is_empty() {
        return Err(ExperimentError::Empty("destination set"));
    }
    for &v in cfg.sources.iter().chain(&cfg.destinations) {
        if !t.contains(v) {
            return Err(GraphError::UnknownNode(v).into());
        }
    }
    cfg.model.validate()?;
    let model = cfg.model.resolve(t);

    let mut repetitions = Vec::with_capacity(cfg.effective_repetitions());
    let mut pairs = 0;
    let mut unreachable_count = 0;
    for r in 0..cfg.effective_repetitions() {
        let seed = cfg.repetition_seed(r);
        let router = Router::new(t, &model, seed)?;
        let (routes, p, missing) = route_pairs(&router, &cfg.sources, &cfg.destinations)?;
        pairs = p;
        unreachable_count = missing;
        let Some(length_distribution) = length_distribution(&routes) else {
            return Err(ExperimentError::AllUnreachable { pairs: p });
        };
        let sampled = merge_routes(&routes)?;
        repetitions.push(Repetition {
            seed,
            metrics: TopologyMetrics::of(&sampled),
            length_distribution,
            routes,
        });
    }

    let per_rep: Vec<Histogram> = repetitions
        .iter()
        .map(|r| r.length_distribution.clone())
        .collect();
    let length_distribution = Histogram::average(&per_rep).expect("at least one repetition");
    let metrics: Vec<TopologyMetrics> = repetitions.iter().map(|r| r.metrics).collect();
    let all: Vec<Route> = repetitions
        .iter()
        .flat_map(|r| r.routes.iter().cloned())
        .collect();
    let profile = hop_degree_profile(&all, t).expect("routes exist");
    Ok(ExperimentResult {
        model,
        pairs,
        unreachable_count,
        sampled_metrics: MetricsSummary::mean_of(&metrics),
        mean_route_length: length_distribution.mean(),
        length_distribution,
        profile,
        mean_intermediate_degree: mean_intermediate_degree(&all, t),
        repetitions,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub result: ExperimentResult,
    /// KL divergence from this row's distribution to the reference.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    /// Row with the smallest distance; the smaller alpha wins ties.
    pub fn best(&self) -> Option<usize> {
        best_index(self.rows.iter().map(|r| (r.alpha, r.distance)))
    }
}

pub(crate) fn best_index(rows: impl Iterator<Item = (f64, f64)>) -> Option<usize> {
    rows.enumerate()
        .min_by(|(_, a), (_, b)| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .map(|(i, _)| i)
}

/// Runs `base` once per alpha and scores each hop distribution against
/// `reference`.
pub fn alpha_sweep(
    t: &Topology,
    base: &ExperimentConfig,
    alphas: &[f64],
    reference: &Histogram,
) -> Result<Sweep, ExperimentError> {
    if alphas.is_empty() {
        return Err(ExperimentError::Empty("alpha list"));
    }
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let cfg = ExperimentConfig {
                model: base.model.with_alpha(alpha),
                ..base.clone()
            };
            let result = run_experiment(t, &cfg)?;
            let distance = distribution_distance(&result.length_distribution, reference);
            Ok(SweepRow {
                alpha,
                result,
                distance,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(Sweep { rows })
}
