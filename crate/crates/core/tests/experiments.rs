use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use routesim_core::graph::{bfs_path, dijkstra_path, heterogeneity};
use routesim_core::models::{lim_weights, pfm_weights, BoundedPareto};
use routesim_core::{
    alpha_sweep, generate_ba, generate_er, length_distribution, run_experiment, ExperimentConfig,
    ModelSpec, NodeId, Topology,
};

/// Disjoint random source and destination sets.
fn pick_pairs(
    n: usize,
    sources: usize,
    destinations: usize,
    seed: u64,
) -> (Vec<NodeId>, Vec<NodeId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = sample(&mut rng, n, sources + destinations).into_vec();
    let (s, d) = picked.split_at(sources);
    (s.to_vec(), d.to_vec())
}

fn mean_length(t: &Topology, model: ModelSpec, s: &[NodeId], d: &[NodeId]) -> f64 {
    let cfg = ExperimentConfig::new(model, s.to_vec(), d.to_vec());
    run_experiment(t, &cfg).unwrap().mean_route_length
}

#[test]
fn bounded_pareto_matches_closed_form_cdf() {
    let dist = BoundedPareto::new(1.0, 10.0, 1000.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut xs: Vec<f64> = (0..100_000).map(|_| dist.sample(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        // analytic CDF written out independently of the sampler
        let f = (1.0 - 10.0 / x) / (1.0 - 10.0 / 1000.0);
        sup = sup
            .max((f - i as f64 / n).abs())
            .max((f - (i + 1) as f64 / n).abs());
    }
    assert!(sup < 0.01, "sup-norm {sup}");
}

#[test]
fn pfm_weight_mean_matches_analytic_moment() {
    // 15 clique edges plus 5 per added node
    let t = generate_ba(2003, 5, 3).unwrap();
    assert_eq!(t.edge_count(), 10_000);
    let (alpha, lo, hi): (f64, f64, f64) = (2.0, 10.0, 1000.0);
    let w = pfm_weights(&t, alpha, lo, hi, 11).unwrap();
    let sample_mean = w.values().iter().sum::<f64>() / w.values().len() as f64;
    // integral of x p(x) over [L, M] for alpha != 1
    let norm = 1.0 - (lo / hi).powf(alpha);
    let analytic = lo.powf(alpha) * alpha / (alpha - 1.0)
        * (lo.powf(1.0 - alpha) - hi.powf(1.0 - alpha))
        / norm;
    let rel = (sample_mean - analytic).abs() / analytic;
    assert!(rel < 0.02, "mean {sample_mean} vs {analytic}");
}

#[test]
fn lim_zero_exponent_still_counts_node_degrees() {
    // s=0 reaches d=1 through a (degree 2) in two hops, or through the hubs
    // b and c (degree 10 each) in three. LIM(0) charges 1/k of the node being
    // left: 1/k_s + 1/2 against 1/k_s + 1/10 + 1/10, so it takes the long way.
    let (s, d, a, b, c) = (0, 1, 2, 3, 4);
    let mut edges = vec![(s, a), (a, d), (s, b), (b, c), (c, d)];
    let mut leaf = 5;
    for hub in [b, c] {
        for _ in 0..8 {
            edges.push((hub, leaf));
            leaf += 1;
        }
    }
    let t = Topology::from_edges(&edges).unwrap();
    assert_eq!(t.degree(b), 10);
    let w = lim_weights(&t, 0.0).unwrap();
    assert_eq!(bfs_path(&t, s, d).unwrap().unwrap(), vec![s, a, d]);
    assert_eq!(
        dijkstra_path(&t, &w, s, d).unwrap().unwrap(),
        vec![s, b, c, d]
    );
}

#[test]
fn route_length_grows_with_alpha() {
    let t = generate_ba(500, 3, 1).unwrap();
    let (s, d) = pick_pairs(t.node_count(), 20, 50, 2);
    let lengths: Vec<f64> = [0.0, 1.0, 2.0]
        .iter()
        .map(|&a| mean_length(&t, ModelSpec::lim(a), &s, &d))
        .collect();
    assert!(lengths.windows(2).all(|w| w[0] <= w[1]), "{lengths:?}");
}

#[test]
fn lim_avoids_hubs() {
    let t = generate_ba(1000, 3, 5).unwrap();
    let (s, d) = pick_pairs(t.node_count(), 10, 50, 6);
    let degree = |model| {
        let cfg = ExperimentConfig::new(model, s.clone(), d.clone());
        let r = run_experiment(&t, &cfg).unwrap();
        assert_eq!(r.pairs, 500);
        r.mean_intermediate_degree.unwrap()
    };
    let lim = degree(ModelSpec::lim(1.0));
    let uspm = degree(ModelSpec::Uspm);
    let ndm = degree(ModelSpec::Ndm);
    assert!(
        lim < uspm && uspm < ndm,
        "lim {lim}, uspm {uspm}, ndm {ndm}"
    );
}

#[test]
fn sweep_recovers_generating_alpha() {
    let t = generate_ba(500, 3, 8).unwrap();
    let (s, d) = pick_pairs(t.node_count(), 10, 40, 9);
    let reference_cfg = ExperimentConfig::new(ModelSpec::lim(0.5), s.clone(), d.clone());
    let reference = run_experiment(&t, &reference_cfg)
        .unwrap()
        .length_distribution;
    let base = ExperimentConfig::new(ModelSpec::lim(0.0), s, d);
    let sweep = alpha_sweep(&t, &base, &[0.0, 0.5, 1.0], &reference).unwrap();
    assert_eq!(sweep.rows[sweep.best().unwrap()].alpha, 0.5);
    assert!(sweep.rows[1].distance.abs() <= 1e-9);
}

#[test]
fn single_alpha_sweep_is_one_experiment() {
    let t = generate_ba(200, 2, 4).unwrap();
    let (s, d) = pick_pairs(t.node_count(), 5, 20, 1);
    let cfg = ExperimentConfig::new(ModelSpec::lim(0.0), s, d);
    let direct = run_experiment(&t, &cfg).unwrap();
    let sweep = alpha_sweep(&t, &cfg, &[0.0], &direct.length_distribution).unwrap();
    assert_eq!(sweep.rows.len(), 1);
    assert_eq!(sweep.rows[0].result, direct);
    assert!(sweep.rows[0].distance.abs() <= 1e-9);
}

#[test]
fn pfm_is_independent_of_pool_size() {
    let t = generate_ba(300, 2, 12).unwrap();
    let (s, d) = pick_pairs(t.node_count(), 8, 30, 13);
    let mut cfg = ExperimentConfig::new(ModelSpec::pfm(1.0), s, d);
    cfg.repetitions = 5;
    cfg.base_seed = 99;
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment(&t, &cfg).unwrap())
    };
    let one = run_with(1);
    assert_eq!(one.repetitions.len(), 5);
    assert_eq!(one, run_with(4));
    // repetitions draw fresh weights
    assert_ne!(one.repetitions[0].routes, one.repetitions[1].routes);
}

#[test]
fn sampled_graph_is_a_subgraph() {
    let t = generate_ba(400, 3, 21).unwrap();
    let (s, d) = pick_pairs(t.node_count(), 4, 25, 22);
    let r = run_experiment(&t, &ExperimentConfig::new(ModelSpec::Uspm, s, d)).unwrap();
    let m = r.repetitions[0].metrics;
    assert!(m.edge_count <= t.edge_count());
    assert!(m.node_count <= t.node_count());
    let direct = length_distribution(&r.repetitions[0].routes).unwrap();
    assert_eq!(direct, r.length_distribution);
}

#[test]
fn ba_is_more_heterogeneous_than_er() {
    for seed in 0..20 {
        let ba = generate_ba(1000, 3, seed).unwrap();
        // same expected mean degree: (n - 1) p = 2m
        let er = generate_er(1000, 6.0 / 999.0, seed).unwrap();
        assert!(heterogeneity(&ba) > heterogeneity(&er), "seed {seed}");
    }
}
