use arb_core::experiment::{train_linear_classifier, ClassifierConfig};
use arb_core::io::generate_random_graph;
use arb_core::oracle::{laplacian, solve_pinned, theta_for_alpha, OracleSystem};
use arb_core::{
    map_alpha_beta, run_arb, run_fp, run_virtual_only, ArbConfig, FeatureMatrix, Graph, KnownSet,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    graph: Graph,
    z: FeatureMatrix,
    known: KnownSet,
}

fn case(rng: &mut ChaCha8Rng, n: usize, f: usize, connected: bool) -> Case {
    let graph = if connected {
        // A spanning path keeps every node reachable from a known one.
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        for _ in 0..n {
            edges.push((rng.random_range(0..n), rng.random_range(0..n)));
        }
        Graph::new(n, &edges).unwrap()
    } else {
        generate_random_graph(n, n, rng.random()).unwrap()
    };
    let z = FeatureMatrix::from_vec(
        n,
        f,
        (0..n * f).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let known = KnownSet::new(n, order[..n / 3].iter().copied()).unwrap();
    Case { graph, z, known }
}

#[test]
fn system_matrix_is_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let n = rng.random_range(10..=100);
        let c = case(&mut rng, n, 1, false);
        let alpha = rng.random_range(0.05..0.99);
        let beta = rng.random_range(0.05..0.99);
        let (eta, theta) = map_alpha_beta(alpha, beta, n).unwrap();
        let system = OracleSystem::build(&c.graph, &c.z, &c.known, eta, theta).unwrap();
        let eig = system.system_matrix.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        assert!(min > 0.0, "min eigenvalue {min} at n={n}");
        let x = system.solve().unwrap();
        assert!(system.residual(&x) <= 1e-8);
    }
}

#[test]
fn laplacian_spectrum_in_unit_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let c = case(&mut rng, 60, 1, false);
    let eig = laplacian(&c.graph).symmetric_eigen();
    assert!(eig.eigenvalues.min() >= -1e-12);
    assert!(eig.eigenvalues.max() <= 2.0 + 1e-12);
}

#[test]
fn fp_converges_to_harmonic_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..10 {
        let n = rng.random_range(20..=120);
        let c = case(&mut rng, n, 3, true);
        let exact = solve_pinned(&c.graph, &c.z, &c.known, 0.0).unwrap();
        let fp = run_fp(&c.graph, &c.z, &c.known, 2_000_000, 1e-13).unwrap();
        assert!(fp.converged);
        let err = fp.features.max_abs_diff(&exact);
        assert!(err <= 1e-6, "n={n}: error {err}");
    }
}

#[test]
fn virtual_only_matches_pinned_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..10 {
        let n = rng.random_range(20..=150);
        let c = case(&mut rng, n, 2, false);
        let alpha = [0.3, 0.6, 0.9][rng.random_range(0..3)];
        let exact = solve_pinned(&c.graph, &c.z, &c.known, theta_for_alpha(alpha, n)).unwrap();
        let vo = run_virtual_only(&c.graph, &c.z, &c.known, alpha, 1_000_000, 1e-13).unwrap();
        let err = vo.features.max_abs_diff(&exact);
        assert!(err <= 1e-6, "n={n}, alpha={alpha}: error {err}");
    }
}

#[test]
fn isolated_unknown_node_reached_only_by_mean_term() {
    // Path 0-1-2 plus node 3 on its own; nodes 0 and 2 observed.
    let g = Graph::new(4, &[(0, 1), (1, 2)]).unwrap();
    let z = FeatureMatrix::from_rows(&[[1.0], [0.0], [3.0], [0.0]]).unwrap();
    let known = KnownSet::new(4, [0, 2]).unwrap();
    let fp = run_fp(&g, &z, &known, 40, 1e-7).unwrap();
    assert_eq!(fp.features.get(3, 0), 0.0);
    let arb = run_arb(
        &g,
        &z,
        &known,
        &ArbConfig::new(0.8, 0.5).with_iters(10_000, 1e-13),
    )
    .unwrap();
    let x3 = arb.features.get(3, 0);
    // An isolated node settles at (1 - alpha) times the global mean.
    let mean: f64 = (0..4).map(|i| arb.features.get(i, 0)).sum::<f64>() / 4.0;
    assert!(x3 > 0.0);
    assert!((x3 - 0.2 * mean).abs() < 1e-9);
}

#[test]
fn classifier_at_chance_on_shuffled_labels() {
    let n_classes = 4;
    let mut accs = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 200;
        let labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
        let rows: Vec<[f64; 6]> = labels
            .iter()
            .map(|&l| {
                std::array::from_fn(
                    |d| if d == l { 2.0 } else { 0.0 } + rng.random_range(-0.5..0.5),
                )
            })
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let mut shuffled = labels.clone();
        shuffled.shuffle(&mut rng);
        let cfg = ClassifierConfig {
            epochs: 100,
            ..Default::default()
        };
        accs.push(train_linear_classifier(&x, &shuffled, 5, seed, &cfg).unwrap());
    }
    let chance = 1.0 / n_classes as f64;
    // Binomial sigma of one accuracy measured on 200 held-out predictions.
    let sigma = (chance * (1.0 - chance) / 200.0).sqrt();
    for (seed, acc) in accs.iter().enumerate() {
        assert!(
            (acc - chance).abs() <= 3.0 * sigma,
            "seed {seed}: accuracy {acc}"
        );
    }
}
