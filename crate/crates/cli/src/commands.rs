use std::path::Path;
use std::time::Instant;

use arb_core::experiment::{
    evaluate_engine, make_split, run_missing_rate_sweep, search_engine, sweep_to_csv,
    ClassifierConfig, EvalSubset, ObjectiveMetric, SearchConfig, Split, SplitSpec, SweepConfig,
};
use arb_core::io::{
    generate_longtail_graph, generate_random_graph, load_edge_list, load_feature_matrix,
    load_labels, load_node_list, save_edge_list, save_features, save_features_text, save_labels,
    save_report, synthesize_bundle, uniform_features, write_atomic, DatasetBundle, DegreeHistogram,
    LongTailParams, SynthParams,
};
use arb_core::metrics::{self, MetricRequest};
use arb_core::propagation::Reset;
use arb_core::{
    ArbConfig, EngineKind, Error, ExecPolicy, FeatureKind, FeatureMatrix, Graph, KnownSet,
    Propagator, Result,
};
use log::{info, warn};

use crate::args::{
    BenchArgs, DataArgs, EngineArgs, EvaluateArgs, FormatArg, GenArgs, KindArg, MetricName,
    ReconstructArgs, SearchArgs, SplitArgs, SweepArgs,
};

fn load_bundle(data: &DataArgs) -> Result<DatasetBundle> {
    let features = load_feature_matrix(&data.features)?;
    let edges = load_edge_list(&data.graph)?;
    let n = features.n_nodes();
    if edges.n_nodes > n {
        return Err(Error::Input(format!(
            "{} lists {} nodes but {} has {n} rows",
            data.graph.display(),
            edges.n_nodes,
            data.features.display()
        )));
    }
    let graph = Graph::new(n, &edges.edges)?;
    let labels = data.labels.as_deref().map(load_labels).transpose()?;
    let kind = FeatureKind::detect(&features);
    info!(
        "loaded {n} nodes, {} edges, {} {:?} features",
        graph.n_edges(),
        features.n_features(),
        kind
    );
    DatasetBundle::new(graph, features, labels, kind)
}

/// Engine parameters, warning about flags the engine ignores.
fn engine_config(args: &EngineArgs) -> Result<ArbConfig> {
    let engine = args.engine;
    if args.alpha.is_some() && !engine.uses_alpha() {
        warn!("--alpha has no effect on engine {engine}");
    }
    if args.beta.is_some() && !engine.uses_beta() {
        warn!("--beta has no effect on engine {engine}");
    }
    let defaults = ArbConfig::default();
    let config = ArbConfig {
        alpha: args.alpha.unwrap_or(defaults.alpha),
        beta: args.beta.unwrap_or(defaults.beta),
        max_iters: args.iters,
        tolerance: args.tol,
    };
    config.validate()?;
    Ok(config)
}

fn split_for(n: usize, args: &SplitArgs) -> Result<Split> {
    make_split(
        n,
        &SplitSpec {
            seed: args.seed,
            known_fraction: args.known_fraction,
            ..Default::default()
        },
    )
}

fn is_text_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("csv" | "tsv" | "txt")
    )
}

pub fn reconstruct(args: &ReconstructArgs, policy: ExecPolicy) -> Result<()> {
    let config = engine_config(&args.engine)?;
    let bundle = load_bundle(&args.data)?;
    let n = bundle.graph.n_nodes();
    let known = match &args.known {
        Some(path) => KnownSet::new(n, load_node_list(path)?)?,
        None => split_for(n, &args.split)?.known,
    };
    let rule = args.engine.engine.rule(config.alpha, config.beta);
    let t = Instant::now();
    let result = Propagator::new(&bundle.graph, &bundle.features, &known, rule)?
        .with_policy(policy)
        .run(config.max_iters, config.tolerance)?;
    let elapsed = t.elapsed().as_secs_f64();
    if is_text_path(&args.out) {
        save_features_text(&args.out, &result.features)?;
    } else {
        save_features(&args.out, &result.features)?;
    }
    println!("engine={}", args.engine.engine);
    let beta = match rule.reset {
        Reset::Hard => 1.0,
        Reset::Moving { beta } => beta,
    };
    println!("alpha={}", rule.alpha);
    println!("beta={beta}");
    println!("known_nodes={}", known.len());
    println!("iterations_run={}", result.iterations_run);
    println!("final_delta={:e}", result.final_delta);
    println!("converged={}", result.converged);
    println!("wall_time_s={elapsed:.6}");
    Ok(())
}

/// Drops ranking cutoffs wider than the feature dimension.
fn usable_ks(ks: &[usize], n_features: usize, kind: FeatureKind) -> Result<Vec<usize>> {
    let kept: Vec<usize> = ks.iter().copied().filter(|&k| k <= n_features).collect();
    if kind == FeatureKind::Binary && kept.len() < ks.len() {
        if kept.is_empty() {
            return Err(Error::Input(format!(
                "every cutoff in --k exceeds the {n_features} feature dimensions"
            )));
        }
        warn!("dropping cutoffs above the {n_features} feature dimensions");
    }
    Ok(kept)
}

fn metric_request(args: &EvaluateArgs, kind: FeatureKind, ks: Vec<usize>) -> MetricRequest {
    if args.metrics.is_empty() {
        return MetricRequest::for_kind(kind, &ks);
    }
    let wants = |m: MetricName| args.metrics.contains(&m);
    let mut ranking = wants(MetricName::Recall) || wants(MetricName::Ndcg);
    let mut corr = wants(MetricName::Corr);
    if ranking && kind == FeatureKind::Continuous {
        warn!("ranking metrics need binary features; omitting recall and ndcg");
        ranking = false;
    }
    if corr && kind == FeatureKind::Binary {
        warn!("CORR is reported for continuous features only; omitting it");
        corr = false;
    }
    MetricRequest {
        ks,
        ranking,
        rmse: wants(MetricName::Rmse),
        corr,
    }
}

pub fn evaluate(args: &EvaluateArgs, policy: ExecPolicy) -> Result<()> {
    let config = engine_config(&args.engine)?;
    let bundle = load_bundle(&args.data)?;
    let split = split_for(bundle.graph.n_nodes(), &args.split)?;
    let subset = if args.all_unknown {
        EvalSubset::AllUnknown
    } else {
        EvalSubset::Test
    };
    let ks = usable_ks(&args.k, bundle.features.n_features(), bundle.feature_kind)?;
    let request = metric_request(args, bundle.feature_kind, ks);
    let mut report = if args.inject_truth {
        let truth = bundle.features.select_rows(&subset.rows(&split));
        metrics::evaluate(&truth, &truth, &request)?
    } else {
        evaluate_engine(
            &bundle,
            &split,
            args.engine.engine,
            &config,
            &request,
            subset,
            policy,
        )?
        .0
    };
    if !args.metrics.is_empty() {
        if !args.metrics.contains(&MetricName::Recall) {
            report.recall_at.clear();
        }
        if !args.metrics.contains(&MetricName::Ndcg) {
            report.ndcg_at.clear();
        }
    }
    print!("{}", report.to_kv_text());
    if let Some(out) = &args.out {
        save_report(out, &report)?;
    }
    Ok(())
}

pub fn search(args: &SearchArgs) -> Result<()> {
    let base = engine_config(&args.engine)?;
    let bundle = load_bundle(&args.data)?;
    let split = split_for(bundle.graph.n_nodes(), &args.split)?;
    let search = SearchConfig {
        start: (base.alpha, base.beta),
        initial_step: args.initial_step,
        min_step: args.min_step,
        max_evals: args.max_evals,
        ..Default::default()
    };
    let metric = ObjectiveMetric::for_kind(bundle.feature_kind, bundle.features.n_features());
    let (best, outcome) =
        search_engine(&bundle, &split, args.engine.engine, &base, &search, metric);
    println!("eval\talpha\tbeta\tscore\tbest");
    for (i, (((a, b), s), best_so_far)) in outcome
        .state
        .evaluations
        .iter()
        .zip(&outcome.state.best_trace)
        .enumerate()
    {
        println!("{}\t{a:.6}\t{b:.6}\t{s:.6}\t{best_so_far:.6}", i + 1);
    }
    if !outcome.best_score.is_finite() {
        return Err(Error::Numerical(
            "every evaluated configuration failed on the validation nodes".into(),
        ));
    }
    println!(
        "best engine={} alpha={} beta={} score={:.6} metric={metric:?}",
        args.engine.engine, best.alpha, best.beta, outcome.best_score
    );
    if let Some(out) = &args.out {
        save_report(out, &best)?;
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let engine_config = ArbConfig {
        alpha: args.alpha,
        beta: args.beta,
        max_iters: args.iters,
        tolerance: args.tol,
    };
    engine_config.validate()?;
    let bundle = load_bundle(&args.data)?;
    if args.classify && bundle.labels.is_none() {
        warn!("--classify needs --labels; skipping the classifier");
    }
    let ks = usable_ks(&args.k, bundle.features.n_features(), bundle.feature_kind)?;
    let config = SweepConfig {
        rates: args.rates.clone(),
        engines: args.engines.clone(),
        seed: args.seed,
        ks: ks.clone(),
        engine_config,
        search: args.search.then(SearchConfig::default),
        subset: if args.all_unknown {
            EvalSubset::AllUnknown
        } else {
            EvalSubset::Test
        },
        classifier: args.classify.then(ClassifierConfig::default),
    };
    let rows = run_missing_rate_sweep(&bundle, &config);
    for row in &rows {
        if let Err(e) = &row.report {
            warn!("rate {} engine {}: {e}", row.rate, row.engine);
        }
    }
    let csv = sweep_to_csv(&rows, &ks);
    match &args.out {
        Some(path) => write_atomic(path, csv.as_bytes()),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

struct Timing {
    median: f64,
    min: f64,
    max: f64,
    stddev: f64,
}

fn summarize(mut samples: Vec<f64>) -> Timing {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let median = if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    };
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
    Timing {
        median,
        min: samples[0],
        max: samples[n - 1],
        stddev: var.sqrt(),
    }
}

pub fn bench(args: &BenchArgs, policy: ExecPolicy, threads: usize) -> Result<()> {
    if args.repeats == 0 || args.iters == 0 {
        return Err(Error::Input(
            "--repeats and --iters must be at least 1".into(),
        ));
    }
    ArbConfig::new(args.alpha, args.beta).validate()?;
    let loaded = args
        .features
        .as_deref()
        .map(load_feature_matrix)
        .transpose()?;
    let graph = match &args.graph {
        Some(path) => {
            let el = load_edge_list(path)?;
            let n = loaded
                .as_ref()
                .map_or(el.n_nodes, |z| z.n_nodes().max(el.n_nodes));
            Graph::new(n, &el.edges)?
        }
        None => generate_random_graph(args.nodes, args.edges, args.seed)?,
    };
    let z = loaded.unwrap_or_else(|| uniform_features(graph.n_nodes(), args.dim, args.seed));
    if z.n_nodes() != graph.n_nodes() {
        return Err(Error::Input(format!(
            "features have {} rows but the graph has {} nodes",
            z.n_nodes(),
            graph.n_nodes()
        )));
    }
    let split = make_split(
        graph.n_nodes(),
        &SplitSpec::with_known_fraction(args.seed, 0.4),
    )?;
    println!(
        "nodes={} edges={} features={} iterations={} repeats={} threads={threads}",
        graph.n_nodes(),
        graph.n_edges(),
        z.n_features(),
        args.iters,
        args.repeats
    );
    let mut medians = Vec::new();
    for &engine in &args.engines {
        let rule = engine.rule(args.alpha, args.beta);
        let mut samples = Vec::with_capacity(args.repeats);
        for _ in 0..args.repeats {
            let prop = Propagator::new(&graph, &z, &split.known, rule)?.with_policy(policy);
            let t = Instant::now();
            prop.run(args.iters, 0.0)?;
            samples.push(t.elapsed().as_secs_f64().max(f64::MIN_POSITIVE));
        }
        let t = summarize(samples);
        let edge_rate = (graph.n_edges() * args.iters) as f64 / t.median;
        println!(
            "engine={engine} median_s={:.4} min_s={:.4} max_s={:.4} stddev_s={:.4} edges_per_s={edge_rate:.4e}",
            t.median, t.min, t.max, t.stddev
        );
        medians.push((engine, t.median));
    }
    let find = |e: EngineKind| medians.iter().find(|(k, _)| *k == e).map(|(_, m)| *m);
    if let (Some(fp), Some(arb)) = (find(EngineKind::Fp), find(EngineKind::Arb)) {
        println!("arb_over_fp={:.4}", arb / fp);
    }
    Ok(())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let graph = match args.edges {
        Some(m) => generate_random_graph(args.nodes, m, args.seed)?,
        None => {
            generate_longtail_graph(&LongTailParams {
                n_nodes: args.nodes,
                mean_degree: args.mean_degree,
                exponent: args.exponent,
                isolated_fraction: args.isolated_fraction,
                seed: args.seed,
            })?
            .0
        }
    };
    let hist = DegreeHistogram::of(&graph);
    let kind = match args.kind {
        KindArg::Binary => FeatureKind::Binary,
        KindArg::Continuous => FeatureKind::Continuous,
    };
    let bundle = synthesize_bundle(
        graph,
        &SynthParams {
            n_features: args.dim,
            kind,
            n_classes: args.classes,
            seed: args.seed,
            ..Default::default()
        },
    )?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::Io {
        path: args.out_dir.clone(),
        source: e,
    })?;
    save_edge_list(&args.out_dir.join("edges.txt"), &bundle.graph)?;
    write_features(&args.out_dir, args.format, &bundle.features)?;
    if let Some(labels) = &bundle.labels {
        save_labels(&args.out_dir.join("labels.txt"), labels)?;
    }
    println!(
        "nodes={} edges={} isolated={} features={} kind={kind:?} out_dir={}",
        bundle.graph.n_nodes(),
        bundle.graph.n_edges(),
        hist.isolated(),
        bundle.features.n_features(),
        args.out_dir.display()
    );
    Ok(())
}

fn write_features(dir: &Path, format: FormatArg, m: &FeatureMatrix) -> Result<()> {
    match format {
        FormatArg::Arbf => save_features(&dir.join("features.arbf"), m),
        FormatArg::Csv => save_features_text(&dir.join("features.csv"), m),
    }
}
