//! Immutable undirected topology, structural metrics and shortest-path
//! primitives shared by every route model.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node identifier, `0..node_count`.
pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge list is empty after dropping self-loops")]
    NoEdges,
    #[error("node {0} is not part of the topology")]
    UnknownNode(NodeId),
    #[error("degree distribution needs at least two distinct degrees >= 1, got {0}")]
    DegenerateFit(usize),
    #[error("arc {from}->{to} has invalid weight {weight}")]
    InvalidWeight {
        from: NodeId,
        to: NodeId,
        weight: f64,
    },
    #[error("weight table has {got} arcs, topology has {expected}")]
    WeightShape { expected: usize, got: usize },
}

/// What `Topology::from_edges_counted` discarded from its input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DroppedEdges {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Undirected simple graph stored as compressed sparse rows.
///
/// Neighbor lists are strictly ascending, which the path searches rely on
/// for their deterministic tie-breaking. Arcs are indexed by their position
/// in the flattened neighbor array; `EdgeWeights` uses the same indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
}

impl Topology {
    /// Builds a topology over nodes `0..=max id`, dropping self-loops and
    /// duplicate pairs.
    pub fn from_edges(edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        Self::from_edges_counted(edges).map(|(t, _)| t)
    }

    /// Like `from_edges`, but spans at least `node_count` nodes so trailing
    /// ids without edges stay in the graph as isolated nodes.
    pub fn with_node_count(
        node_count: usize,
        edges: &[(NodeId, NodeId)],
    ) -> Result<Self, GraphError> {
        Self::build(node_count, edges).map(|(t, _)| t)
    }

    pub fn from_edges_counted(
        edges: &[(NodeId, NodeId)],
    ) -> Result<(Self, DroppedEdges), GraphError> {
        Self::build(0, edges)
    }

    fn build(
        min_nodes: usize,
        edges: &[(NodeId, NodeId)],
    ) -> Result<(Self, DroppedEdges), GraphError> {
        let mut dropped = DroppedEdges::default();
        let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                dropped.self_loops += 1;
                continue;
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        dropped.duplicates = before - pairs.len();
        if pairs.is_empty() {
            return Err(GraphError::NoEdges);
        }

        let node_count = edges
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0)
            .max(min_nodes);
        let mut degree = vec![0usize; node_count];
        for &(u, v) in &pairs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut neighbors = vec![0; 2 * pairs.len()];
        // `pairs` is sorted by (min, max); filling both directions in this order
        // leaves every row ascending without a second sort.
        for &(u, v) in &pairs {
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        for &(u, v) in &pairs {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
        }
        Ok((Topology { offsets, neighbors }, dropped))
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Number of directed arcs, i.e. twice the edge count.
    pub fn arc_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.node_count()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Arc indices of the outgoing arcs of `v`, aligned with `neighbors(v)`.
    pub fn arc_range(&self, v: NodeId) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    /// Index of arc `u -> v`, if the edge exists.
    pub fn arc_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.neighbors(u)
            .binary_search(&v)
            .ok()
            .map(|i| self.offsets[u] + i)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u) && self.contains(v) && self.arc_index(u, v).is_some()
    }

    /// All undirected edges as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).map(move |v| self.degree(v))
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(v))
        }
    }
}

/// `2|E| / |V|`.
pub fn average_degree(t: &Topology) -> f64 {
    2.0 * t.edge_count() as f64 / t.node_count() as f64
}

/// `<k^2> / <k>^2` over all nodes.
pub fn heterogeneity(t: &Topology) -> f64 {
    let n = t.node_count() as f64;
    let (sum, sum_sq) = t.degrees().fold((0.0, 0.0), |(s, s2), k| {
        let k = k as f64;
        (s + k, s2 + k * k)
    });
    let mean = sum / n;
    (sum_sq / n) / (mean * mean)
}

/// Global clustering coefficient together with the counts it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clustering {
    pub coefficient: f64,
    pub triangles: u64,
    pub connected_triples: u64,
}

impl Clustering {
    /// True when the graph has no connected triple and the coefficient was
    /// set to 0 by convention.
    pub fn is_degenerate(&self) -> bool {
        self.connected_triples == 0
    }
}

/// `3 N_triangles / N_triples`, with `N_triples = sum_v C(k_v, 2)`.
pub fn clustering_coefficient(t: &Topology) -> Clustering {
    let connected_triples: u64 = t
        .degrees()
        .map(|k| (k as u64) * (k as u64).saturating_sub(1) / 2)
        .sum();
    let mut triangles = 0u64;
    for u in 0..t.node_count() {
        let nu = t.neighbors(u);
        for &v in nu.iter().filter(|&&v| v > u) {
            // count w > v adjacent to both u and v by a sorted merge
            let nv = t.neighbors(v);
            let (mut i, mut j) = (0, 0);
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    Ordering::Less => i += 1,
                    Ordering::Greater => j += 1,
                    Ordering::Equal => {
                        if nu[i] > v {
                            triangles += 1;
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    let coefficient = if connected_triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / connected_triples as f64
    };
    Clustering {
        coefficient,
        triangles,
        connected_triples,
    }
}

/// Empirical degree distribution `p(k)` over the observed degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    points: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    pub fn of(t: &Topology) -> Self {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for k in t.degrees() {
            *counts.entry(k).or_default() += 1;
        }
        Self::from_weights(counts.into_iter().map(|(k, c)| (k, c as f64)))
    }

    /// Normalizes arbitrary non-negative weights per degree; zero weights are
    /// left out of the support.
    pub fn from_weights(weights: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, w) in weights {
            if w > 0.0 {
                *merged.entry(k).or_default() += w;
            }
        }
        let total: f64 = merged.values().sum();
        DegreeDistribution {
            points: merged.into_iter().map(|(k, w)| (k, w / total)).collect(),
        }
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().map(|&(k, _)| k)
    }

    pub fn probability(&self, k: usize) -> f64 {
        self.points
            .binary_search_by_key(&k, |&(d, _)| d)
            .map(|i| self.points[i].1)
            .unwrap_or(0.0)
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }
}

pub fn degree_distribution(t: &Topology) -> DegreeDistribution {
    DegreeDistribution::of(t)
}

/// Negated slope of an ordinary least-squares fit of `ln p(k)` on `ln k`,
/// using every supported degree `k >= 1` without binning.
pub fn powerlaw_exponent(d: &DegreeDistribution) -> Result<f64, GraphError> {
    let pts: Vec<(f64, f64)> = d
        .points
        .iter()
        .filter(|&&(k, _)| k >= 1)
        .map(|&(k, p)| ((k as f64).ln(), p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(GraphError::DegenerateFit(pts.len()));
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        let dx = x - mean_x;
        (sxy + dx * (y - mean_y), sxx + dx * dx)
    });
    Ok(-(sxy / sxx))
}

/// Exponent from a least-squares fit of `ln P(K >= k)` on `ln k`; the
/// complementary CDF decays as `k^(1 - gamma)`. Less sensitive to the
/// sparse tail than [`powerlaw_exponent`].
pub fn powerlaw_exponent_ccdf(d: &DegreeDistribution) -> Result<f64, GraphError> {
    let pts: Vec<(usize, f64)> = d.points.iter().copied().filter(|&(k, _)| k >= 1).collect();
    if pts.len() < 2 {
        return Err(GraphError::DegenerateFit(pts.len()));
    }
    let mut tail = pts.iter().map(|p| p.1).sum::<f64>();
    let mut ccdf = Vec::with_capacity(pts.len());
    for &(k, p) in &pts {
        ccdf.push((k, tail));
        tail -= p;
    }
    let fit = DegreeDistribution { points: ccdf };
    Ok(1.0 + powerlaw_exponent(&fit)?)
}

/// The structural summary reported for real and sampled graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyMetrics {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_degree: f64,
    /// `None` when fewer than two distinct degrees exist.
    pub gamma: Option<f64>,
    pub clustering: f64,
    pub heterogeneity: f64,
}

impl TopologyMetrics {
    pub fn of(t: &Topology) -> Self {
        TopologyMetrics {
            node_count: t.node_count(),
            edge_count: t.edge_count(),
            avg_degree: average_degree(t),
            gamma: powerlaw_exponent(&DegreeDistribution::of(t)).ok(),
            clustering: clustering_coefficient(t).coefficient,
            heterogeneity: heterogeneity(t),
        }
    }
}

/// Directed per-arc weights over a topology, indexed like its arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    values: Vec<f64>,
}

impl EdgeWeights {
    /// Wraps a weight table aligned with `t`'s arc indices, rejecting
    /// non-positive or non-finite entries.
    pub fn new(t: &Topology, values: Vec<f64>) -> Result<Self, GraphError> {
        if values.len() != t.arc_count() {
            return Err(GraphError::WeightShape {
                expected: t.arc_count(),
                got: values.len(),
            });
        }
        for u in 0..t.node_count() {
            for (arc, &v) in t.arc_range(u).zip(t.neighbors(u)) {
                let w = values[arc];
                if !(w.is_finite() && w > 0.0) {
                    return Err(GraphError::InvalidWeight {
                        from: u,
                        to: v,
                        weight: w,
                    });
                }
            }
        }
        Ok(EdgeWeights { values })
    }

    pub fn uniform(t: &Topology, w: f64) -> Result<Self, GraphError> {
        Self::new(t, vec![w; t.arc_count()])
    }

    pub fn arc(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Weight of `u -> v`, if that arc exists.
    pub fn get(&self, t: &Topology, u: NodeId, v: NodeId) -> Option<f64> {
        t.arc_index(u, v).map(|i| self.values[i])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EdgeWeights {
            values: self.values.iter().map(|w| w * factor).collect(),
        }
    }
}

const NO_PRED: NodeId = NodeId::MAX;

/// Single-source shortest-path tree; `path_to` reconstructs routes.
#[derive(Debug, Clone)]
pub struct PathTree {
    source: NodeId,
    pred: Vec<NodeId>,
    reached: Vec<bool>,
}

impl PathTree {
    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn reaches(&self, target: NodeId) -> bool {
        self.reached.get(target).copied().unwrap_or(false)
    }

    /// Node sequence from the source to `target`, or `None` if unreachable.
    pub fn path_to(&self, target: NodeId) -> Option<Vec<NodeId>> {
        if !self.reaches(target) {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while v != self.source {
            v = self.pred[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }
}

/// Minimum-hop tree from `source`. Among equal-hop predecessors the
/// smallest node id wins.
pub fn bfs_tree(t: &Topology, source: NodeId) -> Result<PathTree, GraphError> {
    t.check(source)?;
    let n = t.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut pred = vec![NO_PRED; n];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
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
    let reached = dist.iter().map(|&d| d != usize::MAX).collect();
    Ok(PathTree {
        source,
        pred,
        reached,
    })
}

pub fn bfs_path(
    t: &Topology,
    source: NodeId,
    target: NodeId,
) -> Result<Option<Vec<NodeId>>, GraphError> {
    t.check(target)?;
    Ok(bfs_tree(t, source)?.path_to(target))
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-weight tree from `source` over directed arc weights. Equal-cost
/// predecessors are resolved toward the smallest node id.
pub fn dijkstra_tree(
    t: &Topology,
    w: &EdgeWeights,
    source: NodeId,
) -> Result<PathTree, GraphError> {
    t.check(source)?;
    if w.values.len() != t.arc_count() {
        return Err(GraphError::WeightShape {
            expected: t.arc_count(),
            got: w.values.len(),
        });
    }
    let n = t.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: source,
    });
    while let Some(HeapEntry { cost, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for (arc, &v) in t.arc_range(u).zip(t.neighbors(u)) {
            if done[v] {
                continue;
            }
            let weight = w.values[arc];
            if !(weight.is_finite() && weight > 0.0) {
                return Err(GraphError::InvalidWeight {
                    from: u,
                    to: v,
                    weight,
                });
            }
            let candidate = cost + weight;
            if candidate < dist[v] {
                dist[v] = candidate;
                pred[v] = u;
                heap.push(HeapEntry {
                    cost: candidate,
                    node: v,
                });
            } else if candidate == dist[v] && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    Ok(PathTree {
        source,
        pred,
        reached: done,
    })
}

pub fn dijkstra_path(
    t: &Topology,
    w: &EdgeWeights,
    source: NodeId,
    target: NodeId,
) -> Result<Option<Vec<NodeId>>, GraphError> {
    t.check(target)?;
    Ok(dijkstra_tree(t, w, source)?.path_to(target))
}

/// Sum of arc weights along `path`, accumulated from the source.
pub fn path_cost(t: &Topology, w: &EdgeWeights, path: &[NodeId]) -> Option<f64> {
    path.windows(2)
        .try_fold(0.0, |acc, pair| w.get(t, pair[0], pair[1]).map(|x| acc + x))
}
