//! Source and destination selection specs.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use routesim_core::NodeId;

/// `all`, `random:N`, or an explicit comma-separated id list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeSelection {
    All,
    Random(usize),
    Ids(Vec<NodeId>),
}

impl FromStr for NodeSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "all" {
            return Ok(NodeSelection::All);
        }
        if let Some(n) = s.strip_prefix("random:") {
            return n
                .parse()
                .map(NodeSelection::Random)
                .map_err(|_| format!("bad count in `{s}`"));
        }
        s.split(',')
            .map(|id| {
                id.trim()
                    .parse::<NodeId>()
                    .map_err(|_| format!("bad node id `{id}`"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(NodeSelection::Ids)
    }
}

impl fmt::Display for NodeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeSelection::All => f.write_str("all"),
            NodeSelection::Random(n) => write!(f, "random:{n}"),
            NodeSelection::Ids(ids) => {
                let parts: Vec<String> = ids.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl Serialize for NodeSelection {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeSelection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Resolves both selections against `node_count` nodes. Random picks are
/// drawn from a dedicated stream of `seed` and returned sorted; random
/// destinations never repeat a selected source.
pub fn resolve_pair(
    sources: &NodeSelection,
    destinations: &NodeSelection,
    node_count: usize,
    seed: u64,
) -> Result<(Vec<NodeId>, Vec<NodeId>), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let all: Vec<NodeId> = (0..node_count).collect();
    let src = resolve(sources, &all, &mut rng, "sources")?;
    let pool: Vec<NodeId> = match destinations {
        NodeSelection::Random(_) => all
            .iter()
            .copied()
            .filter(|v| src.binary_search(v).is_err())
            .collect(),
        _ => all,
    };
    let dst = resolve(destinations, &pool, &mut rng, "destinations")?;
    Ok((src, dst))
}

fn resolve(
    sel: &NodeSelection,
    pool: &[NodeId],
    rng: &mut ChaCha8Rng,
    what: &str,
) -> Result<Vec<NodeId>, String> {
    let node_limit = pool.iter().max().map_or(0, |m| m + 1);
    let mut out = match sel {
        NodeSelection::All => pool.to_vec(),
        NodeSelection::Random(n) => {
            if *n == 0 || *n > pool.len() {
                return Err(format!(
                    "cannot pick {n} {what} from {} candidates",
                    pool.len()
                ));
            }
            sample(rng, pool.len(), *n)
                .into_iter()
                .map(|i| pool[i])
                .collect()
        }
        NodeSelection::Ids(ids) => {
            if let Some(bad) = ids.iter().find(|&&v| v >= node_limit) {
                return Err(format!("{what}: node {bad} is not in the graph"));
            }
            return Ok(ids.clone());
        }
    };
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("all".parse::<NodeSelection>().unwrap(), NodeSelection::All);
        assert_eq!(
            "random:20".parse::<NodeSelection>().unwrap(),
            NodeSelection::Random(20)
        );
        assert_eq!(
            "3, 1,2".parse::<NodeSelection>().unwrap(),
            NodeSelection::Ids(vec![3, 1, 2])
        );
        assert!("random:x".parse::<NodeSelection>().is_err());
        assert!("1,a".parse::<NodeSelection>().is_err());
        for s in ["all", "random:5", "4,0,9"] {
            assert_eq!(s.parse::<NodeSelection>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn random_selection_is_seeded_and_disjoint() {
        let (s1, d1) = resolve_pair(
            &NodeSelection::Random(10),
            &NodeSelection::Random(50),
            200,
            9,
        )
        .unwrap();
        let (s2, d2) = resolve_pair(
            &NodeSelection::Random(10),
            &NodeSelection::Random(50),
            200,
            9,
        )
        .unwrap();
        assert_eq!((&s1, &d1), (&s2, &d2));
        assert_eq!((s1.len(), d1.len()), (10, 50));
        assert!(d1.iter().all(|d| !s1.contains(d)));
        let (s3, _) =
            resolve_pair(&NodeSelection::Random(10), &NodeSelection::All, 200, 10).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(resolve_pair(&NodeSelection::Ids(vec![5]), &NodeSelection::All, 5, 0).is_err());
        assert!(resolve_pair(&NodeSelection::Random(6), &NodeSelection::All, 5, 0).is_err());
        assert!(resolve_pair(&NodeSelection::All, &NodeSelection::Random(1), 5, 0).is_err());
    }
}
