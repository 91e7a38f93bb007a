//! Route simulation over measured or synthetic Internet-like topologies.
//!
//! The crate models how traceroute-style measurements see a network:
//! routes are produced by one of four models, merged into a sampled graph,
//! and compared with measured traces through their hop-length and per-hop
//! degree statistics.
//!
//! - [`graph`]: the immutable [`Topology`], structural metrics and
//!   deterministic shortest-path trees.
//! - [`models`]: USPM, NDM, LIM and PFM routing.
//! - [`trace_io`]: trace and edge-list file formats.
//! - [`experiment`]: the evaluation pipeline and alpha sweeps.
//! - [`synth`]: seeded BA and ER generators.

pub mod experiment;
pub mod graph;
pub mod models;
pub mod synth;
pub mod trace_io;

pub use experiment::{
    alpha_sweep, distribution_distance, hop_degree_profile, length_distribution, merge_routes,
    run_experiment, ExperimentConfig, ExperimentError, ExperimentResult, Histogram,
    HopDegreeProfile, MetricsSummary, Sweep, SweepRow,
};
pub use graph::{EdgeWeights, GraphError, NodeId, Topology, TopologyMetrics};
pub use models::{ModelError, ModelKind, ModelSpec, Provenance, Route, Router};
pub use synth::{generate_ba, generate_er, GenSpec, SynthError};
pub use trace_io::{parse_edge_list, parse_traces, TraceDataset, TraceError};
