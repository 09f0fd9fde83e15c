//! Times 20 propagation iterations of FP and the boosted engine.
//!
//! `cargo run --release -p arb-core --example throughput [nodes] [edges] [features]`

use std::time::Instant;

use arb_core::experiment::{make_split, SplitSpec};
use arb_core::io::{generate_random_graph, uniform_features};
use arb_core::{ExecPolicy, Propagator, UpdateRule};

fn main() {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    let n = args.first().copied().unwrap_or(100_000);
    let m = args.get(1).copied().unwrap_or(1_000_000);
    let f = args.get(2).copied().unwrap_or(128);

    let t = Instant::now();
    let graph = generate_random_graph(n, m, 1).unwrap();
    let z = uniform_features(n, f, 2);
    let split = make_split(n, &SplitSpec::default()).unwrap();
    println!("setup {:.2}s", t.elapsed().as_secs_f64());

    for (name, rule) in [("fp", UpdateRule::FP), ("arb", UpdateRule::arb(0.9, 0.7))] {
        for policy in [ExecPolicy::Sequential, ExecPolicy::Parallel] {
            let mut engine = Propagator::new(&graph, &z, &split.known, rule)
                .unwrap()
                .with_policy(policy);
            let t = Instant::now();
            for _ in 0..20 {
                engine.step().unwrap();
            }
            println!("{name:>3} {policy:?}: {:.3}s", t.elapsed().as_secs_f64());
        }
    }
}
