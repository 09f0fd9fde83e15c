use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arb_core::io::load_feature_matrix;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn arb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arb"))
        .args(args)
        .env_remove("ARB_THREADS")
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn arb")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr:\n{}",
        out.status.code(),
        stderr(out)
    );
}

fn kv(text: &str, key: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('=').map(str::to_owned))
}

/// Generates a dataset in a fresh temp dir and returns (dir, edges, features, labels).
fn generated(extra: &[&str]) -> (TempDir, String, String, String) {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap().to_owned();
    let mut args = vec![
        "gen",
        "--nodes",
        "400",
        "--dim",
        "24",
        "--seed",
        "7",
        "--out-dir",
        &d,
    ];
    args.extend_from_slice(extra);
    assert_ok(&arb(&args));
    let feat = if extra.contains(&"csv") {
        "features.csv"
    } else {
        "features.arbf"
    };
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_owned();
    let (e, f, l) = (p("edges.txt"), p(feat), p("labels.txt"));
    (dir, e, f, l)
}

fn reconstruct_tiny(dir: &TempDir, name: &str, engine_args: &[&str]) -> arb_core::FeatureMatrix {
    let out = dir.path().join(name);
    let mut args = vec![
        "reconstruct",
        "--graph",
        fixture("tiny_edges.txt").to_str().unwrap(),
        "--features",
        fixture("tiny_features.csv").to_str().unwrap(),
        "--known",
        fixture("tiny_known.txt").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]
    .into_iter()
    .map(str::to_owned)
    .collect::<Vec<_>>();
    args.extend(engine_args.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let res = arb(&refs);
    assert_ok(&res);
    load_feature_matrix(&out).unwrap()
}

#[test]
fn reconstruct_matches_dense_golden() {
    let dir = TempDir::new().unwrap();
    let got = reconstruct_tiny(
        &dir,
        "arb.csv",
        &[
            "--engine", "arb", "--alpha", "0.8", "--beta", "0.6", "--iters", "100000", "--tol",
            "1e-14",
        ],
    );
    let want = load_feature_matrix(&fixture("tiny_expected_arb.csv")).unwrap();
    assert!(
        got.max_abs_diff(&want) <= 1e-6,
        "diff {}",
        got.max_abs_diff(&want)
    );
}

#[test]
fn arb_with_unit_weights_equals_fp() {
    let dir = TempDir::new().unwrap();
    let fp = reconstruct_tiny(
        &dir,
        "fp.arbf",
        &["--engine", "fp", "--iters", "60", "--tol", "0"],
    );
    let arb11 = reconstruct_tiny(
        &dir,
        "arb.arbf",
        &[
            "--engine", "arb", "--alpha", "1", "--beta", "1", "--iters", "60", "--tol", "0",
        ],
    );
    assert!(fp.max_abs_diff(&arb11) <= 1e-12);
}

#[test]
fn reconstruct_reports_run_summary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let res = arb(&[
        "reconstruct",
        "--graph",
        fixture("tiny_edges.txt").to_str().unwrap(),
        "--features",
        fixture("tiny_features.csv").to_str().unwrap(),
        "--known",
        fixture("tiny_known.txt").to_str().unwrap(),
        "--engine",
        "fp",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ok(&res);
    let text = stdout(&res);
    assert_eq!(kv(&text, "engine").as_deref(), Some("fp"));
    assert_eq!(kv(&text, "known_nodes").as_deref(), Some("3"));
    for key in ["iterations_run", "final_delta", "converged", "wall_time_s"] {
        assert!(kv(&text, key).is_some(), "missing {key} in\n{text}");
    }
    let x = load_feature_matrix(&out).unwrap();
    assert_eq!((x.n_nodes(), x.n_features()), (7, 3));
    // FP leaves the isolated node at zero and keeps known rows exact.
    assert!(x.row(6).iter().all(|&v| v == 0.0));
    assert_eq!(x.row(0), &[0.9, 0.1, 0.4]);
}

#[test]
fn missing_features_file_exits_2_with_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent_features.arbf");
    let res = arb(&[
        "evaluate",
        "--graph",
        fixture("tiny_edges.txt").to_str().unwrap(),
        "--features",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(
        stderr(&res).contains("absent_features.arbf"),
        "{}",
        stderr(&res)
    );
}

#[test]
fn malformed_edge_list_exits_2_with_location() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad_edges.txt");
    std::fs::write(&bad, "0 1\n1 x\n").unwrap();
    let res = arb(&[
        "evaluate",
        "--graph",
        bad.to_str().unwrap(),
        "--features",
        fixture("tiny_features.csv").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let err = stderr(&res);
    assert!(
        err.contains("bad_edges.txt") && err.contains("line 2"),
        "{err}"
    );
}

#[test]
fn unknown_flag_exits_1_and_help_lists_flags() {
    let res = arb(&["evaluate", "--no-such-flag"]);
    assert_eq!(res.status.code(), Some(1));

    let help = arb(&["evaluate", "--help"]);
    assert_ok(&help);
    let text = stdout(&help);
    for flag in [
        "--graph",
        "--features",
        "--engine",
        "--alpha",
        "--beta",
        "--k",
        "--metrics",
        "--seed",
    ] {
        assert!(text.contains(flag), "help lacks {flag}");
    }
    assert_ok(&arb(&["--version"]));
}

#[test]
fn invalid_parameters_exit_1() {
    let res = arb(&[
        "evaluate",
        "--graph",
        fixture("tiny_edges.txt").to_str().unwrap(),
        "--features",
        fixture("tiny_features.csv").to_str().unwrap(),
        "--alpha",
        "1.5",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("alpha"));
    assert_eq!(
        arb(&["--threads", "0", "gen", "--out-dir", "unused"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn injected_truth_scores_perfectly() {
    let (_dir, e, f, _) = generated(&[]);
    let res = arb(&[
        "evaluate",
        "--graph",
        &e,
        "--features",
        &f,
        "--inject-truth",
        "--k",
        "24",
        "--metrics",
        "recall,ndcg,rmse",
    ]);
    assert_ok(&res);
    let text = stdout(&res);
    assert_eq!(kv(&text, "recall@24").unwrap().parse::<f64>().unwrap(), 1.0);
    assert_eq!(kv(&text, "ndcg@24").unwrap().parse::<f64>().unwrap(), 1.0);
    assert_eq!(kv(&text, "rmse").unwrap().parse::<f64>().unwrap(), 0.0);

    let (_dir, e, f, _) = generated(&["--kind", "continuous"]);
    let res = arb(&[
        "evaluate",
        "--graph",
        &e,
        "--features",
        &f,
        "--inject-truth",
    ]);
    assert_ok(&res);
    let text = stdout(&res);
    assert_eq!(kv(&text, "rmse").unwrap().parse::<f64>().unwrap(), 0.0);
    assert!((kv(&text, "corr").unwrap().parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn same_seed_gives_identical_reports() {
    let (_dir, e, f, _) = generated(&[]);
    let run = |seed: &str| {
        let res = arb(&[
            "evaluate",
            "--graph",
            &e,
            "--features",
            &f,
            "--seed",
            seed,
            "--k",
            "5,10",
        ]);
        assert_ok(&res);
        stdout(&res)
    };
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn corr_on_binary_features_is_omitted_with_warning() {
    let (_dir, e, f, _) = generated(&[]);
    let res = arb(&[
        "evaluate",
        "--graph",
        &e,
        "--features",
        &f,
        "--metrics",
        "rmse,corr",
    ]);
    assert_ok(&res);
    assert!(kv(&stdout(&res), "corr").is_none());
    assert!(kv(&stdout(&res), "rmse").is_some());
    assert!(stderr(&res).contains("CORR"), "{}", stderr(&res));
}

#[test]
fn oversized_cutoffs_are_dropped() {
    let (_dir, e, f, _) = generated(&[]);
    let res = arb(&["evaluate", "--graph", &e, "--features", &f]);
    assert_ok(&res);
    let text = stdout(&res);
    assert!(kv(&text, "recall@10").is_some() && kv(&text, "recall@20").is_some());
    assert!(kv(&text, "recall@50").is_none());

    let res = arb(&["evaluate", "--graph", &e, "--features", &f, "--k", "30"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn csv_features_and_json_report() {
    let (dir, e, f, _) = generated(&["--format", "csv"]);
    let json = dir.path().join("report.json");
    let res = arb(&[
        "evaluate",
        "--graph",
        &e,
        "--features",
        &f,
        "--out",
        json.to_str().unwrap(),
    ]);
    assert_ok(&res);
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(
        text.contains("recall_at") && text.contains("n_eval_nodes"),
        "{text}"
    );
}

#[test]
fn search_prints_trajectory_and_best() {
    let (dir, e, f, _) = generated(&[]);
    let best = dir.path().join("best.json");
    let res = arb(&[
        "search",
        "--graph",
        &e,
        "--features",
        &f,
        "--max-evals",
        "12",
        "--out",
        best.to_str().unwrap(),
    ]);
    assert_ok(&res);
    let text = stdout(&res);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eval\talpha\tbeta\tscore\tbest"));
    let rows: Vec<&str> = lines
        .clone()
        .take_while(|l| !l.starts_with("best "))
        .collect();
    assert!(!rows.is_empty() && rows.len() <= 12);
    let bests: Vec<f64> = rows
        .iter()
        .map(|r| r.split('\t').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(bests.windows(2).all(|w| w[1] >= w[0]));
    assert!(text.lines().any(|l| l.starts_with("best engine=arb")));
    let saved = std::fs::read_to_string(&best).unwrap();
    assert!(saved.contains("\"alpha\"") && saved.contains("\"beta\""));
}

#[test]
fn sweep_emits_one_row_per_cell() {
    let (dir, e, f, l) = generated(&[]);
    let csv = dir.path().join("sweep.csv");
    let res = arb(&[
        "sweep",
        "--graph",
        &e,
        "--features",
        &f,
        "--labels",
        &l,
        "--classify",
        "--rates",
        "0.5,0.9",
        "--engines",
        "fp,arb",
        "--k",
        "5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_ok(&res);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..2], &["rate", "engine"]);
    assert!(header.contains(&"recall@5") && header.contains(&"accuracy"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let acc = header.iter().position(|h| *h == "accuracy").unwrap();
    for row in &rows {
        assert_eq!(row.len(), header.len());
        let a: f64 = row[acc].parse().unwrap();
        assert!((0.0..=1.0).contains(&a));
    }
}

#[test]
fn bench_prints_timings_and_ratio() {
    let res = arb(&[
        "--threads",
        "1",
        "bench",
        "--nodes",
        "3000",
        "--edges",
        "15000",
        "--dim",
        "8",
        "--iters",
        "3",
        "--repeats",
        "2",
    ]);
    assert_ok(&res);
    let text = stdout(&res);
    assert!(text.contains("threads=1"));
    for engine in ["fp", "arb"] {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("engine={engine} ")))
            .unwrap_or_else(|| panic!("no {engine} line in\n{text}"));
        let median: f64 = line
            .split_whitespace()
            .find_map(|t| t.strip_prefix("median_s="))
            .unwrap()
            .parse()
            .unwrap();
        assert!(median > 0.0);
    }
    let ratio: f64 = kv(&text, "arb_over_fp").unwrap().parse().unwrap();
    assert!(ratio.is_finite() && ratio > 0.0);
}

#[test]
fn gen_writes_consistent_dataset() {
    let (dir, e, f, l) = generated(&["--kind", "continuous", "--classes", "3"]);
    let edges = arb_core::io::load_edge_list(Path::new(&e)).unwrap();
    let feats = load_feature_matrix(Path::new(&f)).unwrap();
    let labels = arb_core::io::load_labels(Path::new(&l)).unwrap();
    assert_eq!(edges.n_nodes, 400);
    assert_eq!((feats.n_nodes(), feats.n_features()), (400, 24));
    assert_eq!(labels.len(), 400);
    assert!(labels.iter().all(|&c| c < 3));
    drop(dir);
}
