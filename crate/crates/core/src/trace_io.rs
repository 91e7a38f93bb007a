//! Text formats for measured routes and edge lists.
//!
//! Trace files hold one route per line as whitespace-separated node labels,
//! source first. Edge lists hold one `u v` pair of integer ids per line.
//! Both accept `#` comment lines and blank lines.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::graph::{GraphError, NodeId, Topology};
use crate::models::{Provenance, Route};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("input contains no usable routes")]
    NoRoutes,
    #[error("no destination is shared by all {sources} sources; review the dataset")]
    NoCommonDestination { sources: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Lines skipped while reading a trace file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Routes with fewer than two nodes.
    pub too_short: usize,
    /// Routes containing an unresolved `*` hop.
    pub unresolved: usize,
}

/// Measured routes together with the graph they induce.
#[derive(Debug, Clone)]
pub struct TraceDataset {
    routes: Vec<Route>,
    topology: Topology,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    report: ParseReport,
}

impl TraceDataset {
    /// Densifies label sequences (first appearance order) and induces the
    /// topology from every consecutive hop pair.
    pub fn from_label_routes<S: AsRef<str>>(
        label_routes: impl IntoIterator<Item = Vec<S>>,
    ) -> Result<Self, TraceError> {
        let mut labels = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut routes = Vec::new();
        let mut report = ParseReport::default();
        for hops in label_routes {
            let mut nodes: Vec<NodeId> = Vec::with_capacity(hops.len());
            for label in &hops {
                let label = label.as_ref();
                let id = match index.get(label) {
                    Some(&id) => id,
                    None => {
                        let id = labels.len();
                        labels.push(label.to_owned());
                        index.insert(label.to_owned(), id);
                        id
                    }
                };
                // a hop that answers twice in a row is not a link
                if nodes.last() != Some(&id) {
                    nodes.push(id);
                }
            }
            if nodes.len() < 2 {
                report.too_short += 1;
                continue;
            }
            routes.push(Route::new(nodes, Provenance::Trace));
        }
        if routes.is_empty() {
            return Err(TraceError::NoRoutes);
        }
        // labels seen only in dropped routes must not become isolated nodes
        let (routes, labels, index) = compact(routes, &labels);
        let edges: Vec<(NodeId, NodeId)> = routes
            .iter()
            .flat_map(|r| r.nodes().windows(2).map(|p| (p[0], p[1])))
            .collect();
        let topology = Topology::from_edges(&edges)?;
        Ok(TraceDataset {
            routes,
            topology,
            labels,
            index,
            report,
        })
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id]
    }

    pub fn id_of(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn report(&self) -> ParseReport {
        self.report
    }

    pub fn sources(&self) -> BTreeSet<NodeId> {
        self.routes.iter().map(Route::source).collect()
    }

    pub fn destinations(&self) -> BTreeSet<NodeId> {
        self.routes.iter().map(Route::destination).collect()
    }

    /// Keeps only routes toward destinations reached from every source.
    ///
    /// The result is re-densified in first-appearance order of the kept
    /// routes, so applying the filter twice changes nothing.
    pub fn common_destination_filter(&self) -> Result<TraceDataset, TraceError> {
        let mut per_source: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for r in &self.routes {
            per_source
                .entry(r.source())
                .or_default()
                .insert(r.destination());
        }
        let mut sets = per_source.values();
        let mut common = sets.next().cloned().unwrap_or_default();
        for s in sets {
            common.retain(|d| s.contains(d));
        }
        if common.is_empty() {
            return Err(TraceError::NoCommonDestination {
                sources: per_source.len(),
            });
        }
        let kept = self
            .routes
            .iter()
            .filter(|r| common.contains(&r.destination()))
            .map(|r| r.nodes().iter().map(|&v| self.labels[v].as_str()).collect());
        let mut out = TraceDataset::from_label_routes::<&str>(kept)?;
        out.report = self.report;
        Ok(out)
    }

    /// Writes the routes back as labels, one per line.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.routes {
            let line: Vec<&str> = r.nodes().iter().map(|&v| self.labels[v].as_str()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

fn compact(
    routes: Vec<Route>,
    labels: &[String],
) -> (Vec<Route>, Vec<String>, HashMap<String, NodeId>) {
    let mut remap = vec![NodeId::MAX; labels.len()];
    let mut kept = Vec::new();
    let mut index = HashMap::new();
    let routes = routes
        .into_iter()
        .map(|r| {
            let nodes = r
                .nodes()
                .iter()
                .map(|&v| {
                    if remap[v] == NodeId::MAX {
                        remap[v] = kept.len();
                        index.insert(labels[v].clone(), kept.len());
                        kept.push(labels[v].clone());
                    }
                    remap[v]
                })
                .collect();
            Route::new(nodes, r.provenance())
        })
        .collect();
    (routes, kept, index)
}

fn content_lines<R: BufRead>(
    input: R,
) -> impl Iterator<Item = Result<(usize, String), TraceError>> {
    input
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(TraceError::from))
        .filter(|item| match item {
            Ok((_, l)) => {
                let l = l.trim();
                !l.is_empty() && !l.starts_with('#')
            }
            Err(_) => true,
        })
}

/// Reads a trace file. Routes with an unresolved `*` hop or fewer than two
/// distinct consecutive hops are dropped and counted in the report.
pub fn parse_traces<R: BufRead>(input: R) -> Result<TraceDataset, TraceError> {
    let mut unresolved = 0;
    let mut label_routes: Vec<Vec<String>> = Vec::new();
    for item in content_lines(input) {
        let (_, line) = item?;
        let hops: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if hops.iter().any(|h| h == "*") {
            unresolved += 1;
            continue;
        }
        label_routes.push(hops);
    }
    let mut ds = TraceDataset::from_label_routes(label_routes)?;
    ds.report.unresolved = unresolved;
    Ok(ds)
}

/// Reads an edge list of non-negative integer ids.
///
/// Ids are remapped to `0..n` in ascending numeric order, which is the
/// identity for files that already use dense ids.
pub fn parse_edge_list<R: BufRead>(input: R) -> Result<Topology, TraceError> {
    let mut raw = Vec::new();
    for item in content_lines(input) {
        let (line_no, line) = item?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(TraceError::Malformed {
                line: line_no,
                reason: format!("expected `u v`, found {} fields", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|_| TraceError::Malformed {
                line: line_no,
                reason: format!("`{s}` is not a non-negative integer id"),
            })
        };
        raw.push((parse(fields[0])?, parse(fields[1])?));
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let dense = |x: u64| ids.binary_search(&x).unwrap();
    let edges: Vec<(NodeId, NodeId)> = raw.iter().map(|&(u, v)| (dense(u), dense(v))).collect();
    Ok(Topology::from_edges(&edges)?)
}

/// Writes edges as `u v` lines sorted by `(min id, max id)`.
pub fn write_edge_list<W: Write>(t: &Topology, mut out: W) -> io::Result<()> {
    for (u, v) in t.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Writes routes as lines of numeric node ids.
pub fn write_routes<'a, W: Write>(
    routes: impl IntoIterator<Item = &'a Route>,
    mut out: W,
) -> io::Result<()> {
    for r in routes {
        let mut first = true;
        for v in r.nodes() {
            if !first {
                out.write_all(b" ")?;
            }
            write!(out, "{v}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges_of(t: &Topology) -> Vec<(NodeId, NodeId)> {
        t.edges().collect()
    }

    #[test]
    fn parses_two_routes() {
        let ds = parse_traces("a b c\na c\n".as_bytes()).unwrap();
        assert_eq!(ds.routes().len(), 2);
        assert_eq!(ds.routes()[0].nodes(), &[0, 1, 2]);
        assert_eq!(ds.routes()[1].nodes(), &[0, 2]);
        assert_eq!(edges_of(ds.topology()), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(ds.label(2), "c");
        assert_eq!(ds.id_of("b"), Some(1));
    }

    #[test]
    fn skips_comments_short_and_unresolved() {
        let ds =
            parse_traces("# comment\nx y\n\nlonely\n1.2.3.4 * 5.6.7.8\nq q\n".as_bytes()).unwrap();
        assert_eq!(ds.routes().len(), 1);
        assert_eq!(ds.topology().edge_count(), 1);
        assert_eq!(ds.topology().node_count(), 2);
        assert_eq!(
            ds.report(),
            ParseReport {
                too_short: 2,
                unresolved: 1
            }
        );
    }

    #[test]
    fn keeps_routing_loops_in_raw_routes() {
        let ds = parse_traces("a b c b d\n".as_bytes()).unwrap();
        assert_eq!(ds.routes()[0].hops(), 4);
        assert!(!ds.routes()[0].is_simple());
        assert!(ds.routes()[0].is_walk_in(ds.topology()));
    }

    #[test]
    fn collapses_repeated_consecutive_hops() {
        let ds = parse_traces("a a b b c\n".as_bytes()).unwrap();
        assert_eq!(ds.routes()[0].nodes(), &[0, 1, 2]);
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert!(matches!(
            parse_traces("".as_bytes()),
            Err(TraceError::NoRoutes)
        ));
        assert!(matches!(
            parse_traces("# x\na\n".as_bytes()),
            Err(TraceError::NoRoutes)
        ));
    }

    #[test]
    fn edge_list_examples() {
        let t = parse_edge_list("0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!(edges_of(&t), vec![(0, 1), (1, 2)]);
        let t = parse_edge_list("# header\n0 1\n1 0\n".as_bytes()).unwrap();
        assert_eq!(t.edge_count(), 1);
        let t = parse_edge_list("10 30\n30 20\n".as_bytes()).unwrap();
        assert_eq!(edges_of(&t), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = parse_edge_list("0 1\n# c\n1 x\n".as_bytes()).unwrap_err();
        assert!(
            matches!(err, TraceError::Malformed { line: 3, .. }),
            "{err}"
        );
        let err = parse_edge_list("0 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TraceError::Malformed { line: 1, .. }));
        assert!(matches!(
            parse_edge_list("# nothing\n".as_bytes()),
            Err(TraceError::Graph(GraphError::NoEdges))
        ));
    }

    #[test]
    fn common_destinations() {
        let ds = parse_traces("s1 m x\ns1 m y\ns2 n y\ns2 n z\n".as_bytes()).unwrap();
        let f = ds.common_destination_filter().unwrap();
        assert_eq!(f.routes().len(), 2);
        for r in f.routes() {
            assert_eq!(f.label(r.destination()), "y");
        }
        let again = f.common_destination_filter().unwrap();
        assert_eq!(again.routes(), f.routes());
        assert_eq!(again.topology(), f.topology());
    }

    #[test]
    fn single_source_filter_is_identity() {
        let ds = parse_traces("s a\ns b c\n".as_bytes()).unwrap();
        let f = ds.common_destination_filter().unwrap();
        assert_eq!(f.routes(), ds.routes());
    }

    #[test]
    fn disjoint_destinations_fail() {
        let ds = parse_traces("s1 x\ns2 y\n".as_bytes()).unwrap();
        assert!(matches!(
            ds.common_destination_filter(),
            Err(TraceError::NoCommonDestination { sources: 2 })
        ));
    }

    #[test]
    fn writers_round_trip() {
        let ds = parse_traces("a b c\nb d\n".as_bytes()).unwrap();
        let mut buf = Vec::new();
        ds.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a b c\nb d\n");

        let mut buf = Vec::new();
        write_routes(ds.routes(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0 1 2\n1 3\n");

        let mut el = Vec::new();
        write_edge_list(ds.topology(), &mut el).unwrap();
        assert_eq!(String::from_utf8(el.clone()).unwrap(), "0 1\n1 2\n1 3\n");
        assert_eq!(&parse_edge_list(el.as_slice()).unwrap(), ds.topology());
    }
}
