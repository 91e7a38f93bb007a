//! Seeded synthetic topologies for desk-scale runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, NodeId, Topology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid generator parameters: {0}")]
    Parameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GenSpec {
    /// Barabási–Albert preferential attachment.
    Ba { n: usize, m: usize, seed: u64 },
    /// Erdős–Rényi `G(n, p)`.
    Er { n: usize, p: f64, seed: u64 },
}

impl GenSpec {
    pub fn generate(&self) -> Result<Topology, SynthError> {
        match *self {
            GenSpec::Ba { n, m, seed } => generate_ba(n, m, seed),
            GenSpec::Er { n, p, seed } => generate_er(n, p, seed),
        }
    }
}

/// Preferential attachment: a clique on `m + 1` nodes, then every new node
/// links to `m` distinct earlier nodes chosen with probability proportional
/// to their current degree.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Topology, SynthError> {
    if m < 1 || n < m + 1 {
        return Err(SynthError::Parameter(format!(
            "BA needs n >= m + 1 >= 2, got n={n}, m={m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(m * (m + 1) / 2 + m * (n - m - 1));
    // every edge contributes both endpoints, so uniform picks from this list
    // are degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for new in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let pick = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.extend([t, new]);
        }
    }
    Ok(Topology::from_edges(&edges)?)
}

/// Every unordered pair independently with probability `p`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Topology, SynthError> {
    if n < 2 || !(0.0..=1.0).contains(&p) {
        return Err(SynthError::Parameter(format!(
            "ER needs n >= 2 and p in [0, 1], got n={n}, p={p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(Topology::with_node_count(n, &edges)?)
}
