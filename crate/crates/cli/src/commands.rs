use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use routesim_core::experiment::{length_distribution, mean_intermediate_degree};
use routesim_core::trace_io::{parse_edge_list, parse_traces, write_edge_list, write_routes};
use routesim_core::{
    alpha_sweep, hop_degree_profile, run_experiment, ExperimentConfig, ExperimentError,
    ExperimentResult, GenSpec, MetricsSummary, ModelError, ModelKind, ModelSpec, SynthError,
    Topology, TopologyMetrics, TraceError,
};

use crate::args::{
    AnalyzeArgs, Command, GenArgs, GenKind, OutputArgs, ReplayArgs, RunArgs, SimulateArgs,
    SweepArgs,
};
use crate::manifest::{InputDigest, RunManifest, MANIFEST_FILE};
use crate::output::{self, Units};
use crate::select::resolve_pair;
use crate::CliError;

/// What a command wrote, plus a short human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Analyze(a) => with_threads(a.output.threads, || analyze(command, a)),
        Command::Simulate(a) => with_threads(a.output.threads, || simulate(command, a)),
        Command::Sweep(a) => with_threads(a.output.threads, || sweep(command, a)),
        Command::Gen(a) => gen(command, a),
        Command::Replay(a) => replay(a),
    }
}

fn with_threads<T: Send>(
    threads: usize,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(f)
}

fn trace_error(path: &Path, e: TraceError) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::Parameter(_) | ModelError::Overflow { .. } => CliError::Usage(e.to_string()),
        ModelError::Graph(g) => CliError::Data(g.to_string()),
    }
}

fn experiment_error(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Model(m) => model_error(m),
        other => CliError::Data(other.to_string()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Topology, CliError> {
    parse_edge_list(open(path)?).map_err(|e| trace_error(path, e))
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(args: &OutputArgs) -> Result<Self, CliError> {
        fs::create_dir_all(&args.out_dir)?;
        Ok(Outputs {
            dir: args.out_dir.clone(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn manifest(&mut self, m: &RunManifest) -> Result<(), CliError> {
        let path = self.dir.join(MANIFEST_FILE);
        m.write(&path)?;
        self.files.push(path);
        Ok(())
    }
}

#[derive(Serialize)]
struct AnalyzeSummary {
    routes: usize,
    dropped_too_short: usize,
    dropped_unresolved: usize,
    sources: usize,
    destinations: usize,
    mean_route_length: f64,
    mean_intermediate_degree: Option<f64>,
    topology: TopologyMetrics,
    entropy_units: &'static str,
}

fn analyze(command: &Command, args: &AnalyzeArgs) -> Result<Report, CliError> {
    let units = Units::from_flag(args.output.log2);
    let input = InputDigest::of(&args.traces)?;
    let mut ds = parse_traces(open(&args.traces)?).map_err(|e| trace_error(&args.traces, e))?;
    if args.common_destinations {
        ds = ds
            .common_destination_filter()
            .map_err(|e| trace_error(&args.traces, e))?;
    }
    let routes = ds.routes();
    let lengths = length_distribution(routes).expect("datasets are never empty");
    let profile = hop_degree_profile(routes, ds.topology()).expect("datasets are never empty");
    let summary = AnalyzeSummary {
        routes: routes.len(),
        dropped_too_short: ds.report().too_short,
        dropped_unresolved: ds.report().unresolved,
        sources: ds.sources().len(),
        destinations: ds.destinations().len(),
        mean_route_length: lengths.mean(),
        mean_intermediate_degree: mean_intermediate_degree(routes, ds.topology()),
        topology: TopologyMetrics::of(ds.topology()),
        entropy_units: units.name(),
    };

    let mut out = Outputs::new(&args.output)?;
    out.write("summary.json", output::json(&summary))?;
    out.write("length_distribution.csv", output::length_csv(&lengths))?;
    out.write("hop_profile.csv", output::profile_csv(&profile))?;
    out.write("hop_entropy.csv", output::entropy_csv(&profile, units))?;
    let resolved = json!({ "common_destinations": args.common_destinations });
    out.manifest(&RunManifest::new(command, resolved, vec![input]))?;

    let t = &summary.topology;
    Ok(Report {
        files: out.files,
        summary: format!(
            "{} routes, {} nodes, {} edges, mean route length {} hops",
            summary.routes, t.node_count, t.edge_count, summary.mean_route_length
        ),
    })
}

/// Model, selection and repetitions with every default applied.
fn experiment_config(
    run: &RunArgs,
    alpha: Option<f64>,
    t: &Topology,
) -> Result<ExperimentConfig, CliError> {
    let kind = ModelKind::from(run.model);
    let need_alpha =
        || alpha.ok_or_else(|| CliError::Usage(format!("--alpha is required for --model {kind}")));
    let model = match kind {
        ModelKind::Uspm => ModelSpec::Uspm,
        ModelKind::Ndm => ModelSpec::Ndm,
        ModelKind::Lim => ModelSpec::lim(need_alpha()?),
        ModelKind::Pfm => ModelSpec::Pfm {
            alpha: need_alpha()?,
            pareto_min: run.pareto_min,
            pareto_max: run.pareto_max,
        },
    }
    .resolve(t);
    model.validate().map_err(model_error)?;
    let (sources, destinations) =
        resolve_pair(&run.sources, &run.destinations, t.node_count(), run.seed)
            .map_err(CliError::Usage)?;
    let default_reps = if kind.is_stochastic() { 100 } else { 1 };
    let repetitions = run.reps.unwrap_or(default_reps);
    if repetitions == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    Ok(ExperimentConfig {
        model,
        sources,
        destinations,
        repetitions,
        base_seed: run.seed,
    })
}

fn resolved_json(cfg: &ExperimentConfig) -> serde_json::Value {
    json!({
        "model": cfg.model,
        "sources": cfg.sources,
        "destinations": cfg.destinations,
        "repetitions": cfg.effective_repetitions(),
        "seed": cfg.base_seed,
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    model: ModelSpec,
    pairs: usize,
    unreachable: usize,
    repetitions: usize,
    mean_route_length: f64,
    mean_intermediate_degree: Option<f64>,
    sampled_metrics: MetricsSummary,
    topology: TopologyMetrics,
    entropy_units: &'static str,
}

fn simulate(command: &Command, args: &SimulateArgs) -> Result<Report, CliError> {
    let units = Units::from_flag(args.output.log2);
    let input = InputDigest::of(&args.run.graph)?;
    let t = load_graph(&args.run.graph)?;
    let cfg = experiment_config(&args.run, args.alpha, &t)?;
    let result: ExperimentResult = run_experiment(&t, &cfg).map_err(experiment_error)?;

    let summary = SimulateSummary {
        model: result.model,
        pairs: result.pairs,
        unreachable: result.unreachable_count,
        repetitions: result.repetitions.len(),
        mean_route_length: result.mean_route_length,
        mean_intermediate_degree: result.mean_intermediate_degree,
        sampled_metrics: result.sampled_metrics,
        topology: TopologyMetrics::of(&t),
        entropy_units: units.name(),
    };
    let mut routes = Vec::new();
    write_routes(result.routes(), &mut routes)?;

    let mut out = Outputs::new(&args.output)?;
    out.write("routes.txt", routes)?;
    out.write("summary.json", output::json(&summary))?;
    out.write(
        "length_distribution.csv",
        output::length_csv(&result.length_distribution),
    )?;
    out.write("hop_profile.csv", output::profile_csv(&result.profile))?;
    out.write(
        "hop_entropy.csv",
        output::entropy_csv(&result.profile, units),
    )?;
    out.manifest(&RunManifest::new(command, resolved_json(&cfg), vec![input]))?;
    Ok(Report {
        files: out.files,
        summary: format!(
            "{}: {} pairs ({} unreachable) x {} repetitions, mean route length {} hops",
            result.model.kind(),
            result.pairs,
            result.unreachable_count,
            result.repetitions.len(),
            result.mean_route_length
        ),
    })
}

fn sweep(command: &Command, args: &SweepArgs) -> Result<Report, CliError> {
    let units = Units::from_flag(args.output.log2);
    let kind = ModelKind::from(args.run.model);
    if !matches!(kind, ModelKind::Lim | ModelKind::Pfm) {
        return Err(CliError::Usage(format!(
            "--model {kind} has no alpha to sweep"
        )));
    }
    let inputs = vec![
        InputDigest::of(&args.run.graph)?,
        InputDigest::of(&args.reference)?,
    ];
    let t = load_graph(&args.run.graph)?;
    let reference =
        parse_traces(open(&args.reference)?).map_err(|e| trace_error(&args.reference, e))?;
    let reference = length_distribution(reference.routes()).expect("datasets are never empty");
    let base = experiment_config(&args.run, args.alphas.first().copied(), &t)?;
    for &alpha in &args.alphas {
        base.model
            .with_alpha(alpha)
            .validate()
            .map_err(model_error)?;
    }
    let table = alpha_sweep(&t, &base, &args.alphas, &reference).map_err(experiment_error)?;
    let best = table.best().expect("alpha list is non-empty");

    let summary = json!({
        "model": kind,
        "best_alpha": table.rows[best].alpha,
        "best_distance": units.convert(table.rows[best].distance),
        "reference_mean_route_length": reference.mean(),
        "reference_routes": reference.total_count(),
        "distance_units": units.name(),
    });
    let mut resolved = resolved_json(&base);
    resolved["alphas"] = json!(args.alphas);

    let mut out = Outputs::new(&args.output)?;
    out.write("sweep.csv", output::sweep_csv(&table, units))?;
    out.write("summary.json", output::json(&summary))?;
    out.manifest(&RunManifest::new(command, resolved, inputs))?;
    Ok(Report {
        files: out.files,
        summary: format!(
            "best alpha {} (distance {} {})",
            table.rows[best].alpha,
            units.convert(table.rows[best].distance),
            units.name()
        ),
    })
}

fn gen_spec(args: &GenArgs) -> Result<GenSpec, CliError> {
    match args.kind {
        GenKind::Ba => Ok(GenSpec::Ba {
            n: args.n,
            m: args
                .m
                .ok_or_else(|| CliError::Usage("gen ba needs --m".into()))?,
            seed: args.seed,
        }),
        GenKind::Er => Ok(GenSpec::Er {
            n: args.n,
            p: args
                .p
                .ok_or_else(|| CliError::Usage("gen er needs --p".into()))?,
            seed: args.seed,
        }),
    }
}

/// Manifest path for a generated edge list: `<output>.manifest.json`.
pub fn gen_manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn gen(command: &Command, args: &GenArgs) -> Result<Report, CliError> {
    let spec = gen_spec(args)?;
    let t = spec.generate().map_err(|e| match e {
        SynthError::Parameter(_) => CliError::Usage(e.to_string()),
        SynthError::Graph(g) => CliError::Data(g.to_string()),
    })?;
    if let Some(dir) = args.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    write_edge_list(&t, &mut buf)?;
    fs::write(&args.output, buf)?;
    let manifest_path = gen_manifest_path(&args.output);
    RunManifest::new(command, json!({ "spec": spec }), Vec::new()).write(&manifest_path)?;
    Ok(Report {
        files: vec![args.output.clone(), manifest_path],
        summary: format!("{} nodes, {} edges", t.node_count(), t.edge_count()),
    })
}

fn replay(args: &ReplayArgs) -> Result<Report, CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    for input in &manifest.inputs {
        input.verify()?;
    }
    let mut command = manifest.invocation.clone();
    match &mut command {
        Command::Analyze(a) => set_output(&mut a.output, args),
        Command::Simulate(a) => set_output(&mut a.output, args),
        Command::Sweep(a) => set_output(&mut a.output, args),
        Command::Gen(a) => a.output = args.out.clone(),
        Command::Replay(_) => {
            return Err(CliError::Data("a manifest cannot record a replay".into()));
        }
    }
    run(&command)
}

fn set_output(output: &mut OutputArgs, args: &ReplayArgs) {
    output.out_dir = args.out.clone();
    output.threads = args.threads;
}
