//! Brute-force reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the routing code it checks;
//! only the `Topology` accessors are shared.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use routesim_core::{EdgeWeights, NodeId, Topology};

/// G(n, p) edge list, retried until it has at least one edge.
pub fn random_edges<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(NodeId, NodeId)> {
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        if !edges.is_empty() {
            return edges;
        }
    }
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Topology {
    Topology::with_node_count(n, &random_edges(rng, n, p)).unwrap()
}

/// Weight of the arc `u -> v`, looked up by scanning the neighbor list.
pub fn arc_weight(t: &Topology, w: &EdgeWeights, u: NodeId, v: NodeId) -> f64 {
    let start = t.arc_range(u).start;
    let offset = t
        .neighbors(u)
        .iter()
        .position(|&x| x == v)
        .expect("arc exists");
    w.values()[start + offset]
}

/// Every simple path from `s` to `d`, by depth-first enumeration.
pub fn simple_paths(t: &Topology, s: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
    fn walk(t: &Topology, d: NodeId, path: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let u = *path.last().unwrap();
        if u == d {
            out.push(path.clone());
            return;
        }
        for &v in t.neighbors(u) {
            if !path.contains(&v) {
                path.push(v);
                walk(t, d, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(t, d, &mut vec![s], &mut out);
    out
}

/// Cost of a path, summed from the source end.
pub fn cost_of(t: &Topology, w: &EdgeWeights, path: &[NodeId]) -> f64 {
    let mut total = 0.0;
    for pair in path.windows(2) {
        total += arc_weight(t, w, pair[0], pair[1]);
    }
    total
}

/// Minimum-cost simple path by exhaustive enumeration. Among equal-cost
/// paths the winner is the one whose node sequence read from `d` back to `s`
/// is lexicographically smallest, which is the path obtained by always
/// stepping back to the smallest-id predecessor.
pub fn min_cost_path(
    t: &Topology,
    w: &EdgeWeights,
    s: NodeId,
    d: NodeId,
) -> Option<(f64, Vec<NodeId>)> {
    let mut best: Option<(f64, Vec<NodeId>)> = None;
    for path in simple_paths(t, s, d) {
        let c = cost_of(t, w, &path);
        let better = match &best {
            None => true,
            Some((bc, bp)) => c < *bc || (c == *bc && path.iter().rev().lt(bp.iter().rev())),
        };
        if better {
            best = Some((c, path));
        }
    }
    best
}

/// All-pairs hop distances by Floyd–Warshall; `usize::MAX` when unreachable.
pub fn hop_distances(t: &Topology) -> Vec<Vec<usize>> {
    let n = t.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in t.neighbors(u) {
            row[v] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    for row in &mut d {
        for x in row.iter_mut() {
            if *x >= inf {
                *x = usize::MAX;
            }
        }
    }
    d
}

fn top_neighbor(t: &Topology, x: NodeId) -> Option<NodeId> {
    // largest degree, then smallest id
    t.neighbors(x)
        .iter()
        .copied()
        .max_by(|&a, &b| t.degree(a).cmp(&t.degree(b)).then(b.cmp(&a)))
}

fn climb(t: &Topology, start: NodeId) -> Vec<NodeId> {
    let mut path = vec![start];
    loop {
        let x = *path.last().unwrap();
        let Some(y) = top_neighbor(t, x) else { break };
        if top_neighbor(t, y) == Some(x) {
            break;
        }
        if path.contains(&y) {
            break;
        }
        path.push(y);
    }
    path
}

/// Removes loops: find the first node that occurs again later and splice
/// out everything after it up to its last occurrence. Repeat.
fn splice_loops(mut walk: Vec<NodeId>) -> Vec<NodeId> {
    let mut i = 0;
    while i < walk.len() {
        let last = walk.iter().rposition(|&v| v == walk[i]).unwrap();
        if last > i {
            walk.drain(i + 1..=last);
        }
        i += 1;
    }
    walk
}

/// Node degree model, written directly from its prose description.
pub fn ndm_route(t: &Topology, s: NodeId, d: NodeId) -> Option<Vec<NodeId>> {
    if s == d {
        return Some(vec![s]);
    }
    let a = climb(t, s);
    let b = climb(t, d);

    for (i, x) in a.iter().enumerate() {
        if let Some(j) = b.iter().position(|y| y == x) {
            let mut route: Vec<NodeId> = a[..=i].to_vec();
            for k in (0..j).rev() {
                route.push(b[k]);
            }
            return Some(splice_loops(route));
        }
    }

    let dist = hop_distances(t);
    let from_a = |v: NodeId| a.iter().map(|&x| dist[x][v]).min().unwrap();
    let mut target: Option<NodeId> = None;
    for &y in &b {
        let dy = from_a(y);
        if dy == usize::MAX {
            continue;
        }
        target = match target {
            Some(cur) if (from_a(cur), cur) <= (dy, y) => Some(cur),
            _ => Some(y),
        };
    }
    let target = target?;

    // walk back toward the set A through smallest-id predecessors
    let mut connector = vec![target];
    let mut v = target;
    while from_a(v) > 0 {
        let want = from_a(v) - 1;
        v = *t.neighbors(v).iter().find(|&&u| from_a(u) == want).unwrap();
        connector.push(v);
    }
    connector.reverse();

    let start = connector[0];
    let end = *connector.last().unwrap();
    let ia = a.iter().position(|&x| x == start).unwrap();
    let jb = b.iter().position(|&x| x == end).unwrap();
    let mut route: Vec<NodeId> = a[..=ia].to_vec();
    route.extend(&connector[1..connector.len() - 1]);
    for k in (0..=jb).rev() {
        route.push(b[k]);
    }
    Some(splice_loops(route))
}

/// `(closed triples, connected triples)` by enumerating every centered
/// triple `a - v - b`.
pub fn triple_counts(t: &Topology) -> (u64, u64) {
    let edges: BTreeSet<(NodeId, NodeId)> = t.edges().collect();
    let linked = |a: NodeId, b: NodeId| edges.contains(&(a.min(b), a.max(b)));
    let (mut closed, mut total) = (0, 0);
    for v in 0..t.node_count() {
        let nv = t.neighbors(v);
        for i in 0..nv.len() {
            for j in i + 1..nv.len() {
                total += 1;
                if linked(nv[i], nv[j]) {
                    closed += 1;
                }
            }
        }
    }
    (closed, total)
}

/// Spearman rank correlation; tied values get average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}
