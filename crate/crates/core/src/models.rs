//! The four route models: unweighted shortest paths (USPM), the node degree
//! model (NDM), local-information weights (LIM) and bounded-Pareto path
//! features (PFM).

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, EdgeWeights, GraphError, NodeId, PathTree, Topology};

/// Documented LIM exponent range.
pub const LIM_ALPHA_RANGE: (f64, f64) = (-5.0, 3.0);
/// Default lower bound of the PFM weight distribution.
pub const DEFAULT_PARETO_MIN: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid model parameter: {0}")]
    Parameter(String),
    #[error(
        "LIM weights at node {node} are not representable for alpha {alpha}; \
         stay within alpha in [{}, {}]", LIM_ALPHA_RANGE.0, LIM_ALPHA_RANGE.1
    )]
    Overflow { node: NodeId, alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Uspm,
    Ndm,
    Lim,
    Pfm,
}

impl ModelKind {
    pub fn is_stochastic(self) -> bool {
        matches!(self, ModelKind::Pfm)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Uspm => "uspm",
            ModelKind::Ndm => "ndm",
            ModelKind::Lim => "lim",
            ModelKind::Pfm => "pfm",
        })
    }
}

/// A route model and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Uspm,
    Ndm,
    Lim {
        alpha: f64,
    },
    Pfm {
        alpha: f64,
        pareto_min: f64,
        /// Upper bound; `None` means the node count of the routed topology.
        pareto_max: Option<f64>,
    },
}

impl ModelSpec {
    pub fn lim(alpha: f64) -> Self {
        ModelSpec::Lim { alpha }
    }

    pub fn pfm(alpha: f64) -> Self {
        ModelSpec::Pfm {
            alpha,
            pareto_min: DEFAULT_PARETO_MIN,
            pareto_max: None,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Uspm => ModelKind::Uspm,
            ModelSpec::Ndm => ModelKind::Ndm,
            ModelSpec::Lim { .. } => ModelKind::Lim,
            ModelSpec::Pfm { .. } => ModelKind::Pfm,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            ModelSpec::Lim { alpha } | ModelSpec::Pfm { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Same model with a different exponent; parameterless models are
    /// returned unchanged.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        match *self {
            ModelSpec::Lim { .. } => ModelSpec::Lim { alpha },
            ModelSpec::Pfm {
                pareto_min,
                pareto_max,
                ..
            } => ModelSpec::Pfm {
                alpha,
                pareto_min,
                pareto_max,
            },
            other => other,
        }
    }

    /// Checks the documented parameter ranges.
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            ModelSpec::Uspm | ModelSpec::Ndm => Ok(()),
            ModelSpec::Lim { alpha } => {
                let (lo, hi) = LIM_ALPHA_RANGE;
                if alpha.is_finite() && (lo..=hi).contains(&alpha) {
                    Ok(())
                } else {
                    Err(ModelError::Parameter(format!(
                        "LIM alpha {alpha} outside [{lo}, {hi}]"
                    )))
                }
            }
            ModelSpec::Pfm {
                alpha,
                pareto_min,
                pareto_max,
            } => {
                // an unresolved upper bound is checked once |V| is known
                BoundedPareto::new(alpha, pareto_min, pareto_max.unwrap_or(f64::MAX)).map(|_| ())
            }
        }
    }

    /// Fills in `pareto_max = |V|` when unset.
    pub fn resolve(&self, t: &Topology) -> Self {
        match *self {
            ModelSpec::Pfm {
                alpha,
                pareto_min,
                pareto_max: None,
            } => ModelSpec::Pfm {
                alpha,
                pareto_min,
                pareto_max: Some(t.node_count() as f64),
            },
            other => other,
        }
    }
}

/// Where a route came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Recorded trace, possibly with repeated nodes.
    Trace,
    Model(ModelKind),
}

/// Ordered hop sequence from a source to a destination.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    nodes: Vec<NodeId>,
    provenance: Provenance,
}

impl Route {
    /// # Panics
    /// If `nodes` is empty.
    pub fn new(nodes: Vec<NodeId>, provenance: Provenance) -> Self {
        assert!(!nodes.is_empty(), "a route has at least one node");
        Route { nodes, provenance }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Nodes strictly between source and destination.
    pub fn intermediate(&self) -> &[NodeId] {
        if self.nodes.len() <= 2 {
            &[]
        } else {
            &self.nodes[1..self.nodes.len() - 1]
        }
    }

    pub fn is_simple(&self) -> bool {
        let mut seen: Vec<NodeId> = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Every consecutive pair is an edge of `t`.
    pub fn is_walk_in(&self, t: &Topology) -> bool {
        self.nodes.iter().all(|&v| t.contains(v))
            && self.nodes.windows(2).all(|p| t.has_edge(p[0], p[1]))
    }
}

/// Local-information weights: `w(s->i) = k_i^alpha / sum_j k_j^alpha` over
/// the neighbors `j` of `s`.
///
/// Powers are evaluated relative to the largest exponent at each node, so
/// large `|alpha| ln k` does not overflow; only an underflowed weight is an
/// error.
pub fn lim_weights(t: &Topology, alpha: f64) -> Result<EdgeWeights, ModelError> {
    if !alpha.is_finite() {
        return Err(ModelError::Parameter(format!(
            "alpha must be finite, got {alpha}"
        )));
    }
    let mut values = vec![0.0; t.arc_count()];
    let mut logs = Vec::new();
    for s in 0..t.node_count() {
        let nbrs = t.neighbors(s);
        if nbrs.is_empty() {
            continue;
        }
        logs.clear();
        logs.extend(nbrs.iter().map(|&i| alpha * (t.degree(i) as f64).ln()));
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = logs.iter().map(|&l| (l - top).exp()).sum();
        for (arc, &l) in t.arc_range(s).zip(&logs) {
            let w = (l - top).exp() / norm;
            if !(w > 0.0 && w.is_finite()) {
                return Err(ModelError::Overflow { node: s, alpha });
            }
            values[arc] = w;
        }
    }
    Ok(EdgeWeights::new(t, values)?)
}

/// Bounded Pareto distribution on `[min, max)` with shape `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedPareto {
    alpha: f64,
    min: f64,
    max: f64,
    // 1 - (min/max)^alpha
    mass: f64,
}

impl BoundedPareto {
    pub fn new(alpha: f64, min: f64, max: f64) -> Result<Self, ModelError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ModelError::Parameter(format!(
                "Pareto alpha must be > 0, got {alpha}"
            )));
        }
        if !(min.is_finite() && min > 0.0 && max.is_finite() && max > min) {
            return Err(ModelError::Parameter(format!(
                "Pareto bounds need 0 < L < M, got L={min}, M={max}"
            )));
        }
        Ok(BoundedPareto {
            alpha,
            min,
            max,
            mass: 1.0 - (min / max).powf(alpha),
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.min {
            0.0
        } else if x >= self.max {
            1.0
        } else {
            (1.0 - (self.min / x).powf(self.alpha)) / self.mass
        }
    }

    /// Inverse CDF for `u` in `[0, 1)`; the result lies in `[min, max)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let x = self.min * (1.0 - u * self.mass).powf(-1.0 / self.alpha);
        if x >= self.max {
            // rounding at u -> 1
            f64::from_bits(self.max.to_bits() - 1)
        } else {
            x.max(self.min)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

pub fn sample_bounded_pareto(alpha: f64, min: f64, max: f64, u: f64) -> Result<f64, ModelError> {
    if !(0.0..1.0).contains(&u) {
        return Err(ModelError::Parameter(format!(
            "u must lie in [0, 1), got {u}"
        )));
    }
    Ok(BoundedPareto::new(alpha, min, max)?.quantile(u))
}

/// Independent bounded-Pareto weight on every directed arc.
///
/// Draws are made in arc-index order from a ChaCha8 stream seeded with
/// `seed`, so the table depends only on the topology and the seed.
pub fn pfm_weights(
    t: &Topology,
    alpha: f64,
    min: f64,
    max: f64,
    seed: u64,
) -> Result<EdgeWeights, ModelError> {
    let dist = BoundedPareto::new(alpha, min, max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..t.arc_count()).map(|_| dist.sample(&mut rng)).collect();
    Ok(EdgeWeights::new(t, values)?)
}

pub fn route_uspm(t: &Topology, s: NodeId, d: NodeId) -> Result<Option<Route>, ModelError> {
    Ok(graph::bfs_path(t, s, d)?.map(|p| Route::new(p, Provenance::Model(ModelKind::Uspm))))
}

/// Weighted shortest path, shared by LIM and PFM.
pub fn route_weighted(
    t: &Topology,
    w: &EdgeWeights,
    s: NodeId,
    d: NodeId,
    kind: ModelKind,
) -> Result<Option<Route>, ModelError> {
    Ok(graph::dijkstra_path(t, w, s, d)?.map(|p| Route::new(p, Provenance::Model(kind))))
}

/// Neighbor of `x` with the largest degree, smallest id on ties.
pub fn highest_degree_neighbor(t: &Topology, x: NodeId) -> Option<NodeId> {
    let mut best: Option<NodeId> = None;
    for &v in t.neighbors(x) {
        if best.is_none_or(|b| t.degree(v) > t.degree(b)) {
            best = Some(v);
        }
    }
    best
}

/// Greedy climb toward high-degree nodes. Stops at a node that is the
/// highest-degree neighbor of its own highest-degree neighbor, at an
/// isolated node, or before revisiting a node already on the path.
pub fn degree_climb(t: &Topology, start: NodeId) -> Vec<NodeId> {
    let mut path = vec![start];
    let mut on_path: HashSet<NodeId> = HashSet::from([start]);
    let mut x = start;
    while let Some(y) = highest_degree_neighbor(t, x) {
        if highest_degree_neighbor(t, y) == Some(x) || on_path.contains(&y) {
            break;
        }
        path.push(y);
        on_path.insert(y);
        x = y;
    }
    path
}

/// Cuts every loop out of a walk, keeping the first visit of each node.
pub fn remove_cycles(walk: &[NodeId]) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = Vec::with_capacity(walk.len());
    let mut position: HashMap<NodeId, usize> = HashMap::new();
    for &v in walk {
        if let Some(&p) = position.get(&v) {
            for dropped in out.drain(p + 1..) {
                position.remove(&dropped);
            }
        } else {
            position.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

/// Node degree model route from `s` to `d`.
///
/// Both endpoints climb with [`degree_climb`]. If the climbs share a node,
/// the route follows the source climb to the first shared node and the
/// reversed destination climb from there. Otherwise the climbs are joined
/// by a minimum-hop connector between their node sets.
pub fn route_ndm(t: &Topology, s: NodeId, d: NodeId) -> Result<Option<Route>, ModelError> {
    for v in [s, d] {
        if !t.contains(v) {
            return Err(GraphError::UnknownNode(v).into());
        }
    }
    let wrap = |nodes| Route::new(nodes, Provenance::Model(ModelKind::Ndm));
    if s == d {
        return Ok(Some(wrap(vec![s])));
    }
    let up = degree_climb(t, s);
    let down = degree_climb(t, d);
    let down_index: HashMap<NodeId, usize> =
        down.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    if let Some((i, j)) = up
        .iter()
        .enumerate()
        .find_map(|(i, v)| down_index.get(v).map(|&j| (i, j)))
    {
        let mut nodes = up[..=i].to_vec();
        nodes.extend(down[..j].iter().rev());
        return Ok(Some(wrap(remove_cycles(&nodes))));
    }

    let Some(connector) = connect_sets(t, &up, &down) else {
        return Ok(None);
    };
    let a = connector[0];
    let b = *connector.last().unwrap();
    let ia = up.iter().position(|&v| v == a).unwrap();
    let jb = down_index[&b];
    let mut nodes = up[..=ia].to_vec();
    nodes.extend(&connector[1..connector.len() - 1]);
    nodes.extend(down[..=jb].iter().rev());
    Ok(Some(wrap(remove_cycles(&nodes))))
}

/// Minimum-hop path from any node of `from` to any node of `to`.
///
/// The endpoint in `to` is the closest one, smallest id on ties; the path
/// back to `from` takes the smallest-id predecessor at every step.
pub fn connect_sets(t: &Topology, from: &[NodeId], to: &[NodeId]) -> Option<Vec<NodeId>> {
    let n = t.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut pred = vec![NodeId::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    let mut seeds = from.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    for &v in &seeds {
        dist[v] = 0;
        queue.push_back(v);
    }
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in t.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = next;
                pred[v] = u;
                queue.push_back(v);
            } else if dist[v] == next && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    let target = to
        .iter()
        .copied()
        .filter(|&v| dist[v] != usize::MAX)
        .min_by_key(|&v| (dist[v], v))?;
    let mut path = vec![target];
    let mut v = target;
    while dist[v] != 0 {
        v = pred[v];
        path.push(v);
    }
    path.reverse();
    Some(path)
}

enum Plan {
    Unweighted,
    Weighted(EdgeWeights),
    Ndm,
}

/// A model bound to a topology, with its weights precomputed.
pub struct Router<'a> {
    topology: &'a Topology,
    kind: ModelKind,
    plan: Plan,
}

impl<'a> Router<'a> {
    /// Prepares `spec` on `t`. `seed` only affects PFM.
    pub fn new(t: &'a Topology, spec: &ModelSpec, seed: u64) -> Result<Self, ModelError> {
        spec.validate()?;
        let plan = match spec.resolve(t) {
            ModelSpec::Uspm => Plan::Unweighted,
            ModelSpec::Ndm => Plan::Ndm,
            ModelSpec::Lim { alpha } => Plan::Weighted(lim_weights(t, alpha)?),
            ModelSpec::Pfm {
                alpha,
                pareto_min,
                pareto_max,
            } => Plan::Weighted(pfm_weights(
                t,
                alpha,
                pareto_min,
                pareto_max.expect("resolved"),
                seed,
            )?),
        };
        Ok(Router {
            topology: t,
            kind: spec.kind(),
            plan,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn weights(&self) -> Option<&EdgeWeights> {
        match &self.plan {
            Plan::Weighted(w) => Some(w),
            _ => None,
        }
    }

    pub fn route(&self, s: NodeId, d: NodeId) -> Result<Option<Route>, ModelError> {
        Ok(self
            .routes_from(s, std::slice::from_ref(&d))?
            .pop()
            .flatten())
    }

    /// Routes from `s` to each destination, in order. Tree-based models
    /// compute one shortest-path tree for all of them.
    pub fn routes_from(
        &self,
        s: NodeId,
        destinations: &[NodeId],
    ) -> Result<Vec<Option<Route>>, ModelError> {
        let t = self.topology;
        for &d in destinations {
            if !t.contains(d) {
                return Err(GraphError::UnknownNode(d).into());
            }
        }
        let tree: PathTree = match &self.plan {
            Plan::Ndm => {
                return destinations.iter().map(|&d| route_ndm(t, s, d)).collect();
            }
            Plan::Unweighted => graph::bfs_tree(t, s)?,
            Plan::Weighted(w) => graph::dijkstra_tree(t, w, s)?,
        };
        let provenance = Provenance::Model(self.kind);
        Ok(destinations
            .iter()
            .map(|&d| tree.path_to(d).map(|p| Route::new(p, provenance)))
            .collect())
    }
}
