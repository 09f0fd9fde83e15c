use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::exec::{map_ordered, ExecPolicy};
use crate::io::DatasetBundle;
use crate::metrics::{EvalReport, MetricRequest};
use crate::propagation::{ArbConfig, EngineKind};

use super::classifier::{train_linear_classifier, ClassifierConfig};
use super::protocol::{evaluate_engine, search_engine, EvalSubset, ObjectiveMetric};
use super::search::SearchConfig;
use super::split::{make_split, SplitSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Missing-attribute rates; the known fraction is `1 - rate`.
    pub rates: Vec<f64>,
    pub engines: Vec<EngineKind>,
    pub seed: u64,
    pub ks: Vec<usize>,
    /// Parameters used as given, or as the search template.
    pub engine_config: ArbConfig,
    /// Tune each engine on the validation rows of each split when set.
    pub search: Option<SearchConfig>,
    pub subset: EvalSubset,
    /// Cross-validate a classifier on the reconstructed rows when labels exist.
    pub classifier: Option<ClassifierConfig>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            rates: vec![0.4, 0.6, 0.8, 0.9, 0.99],
            engines: vec![EngineKind::Fp, EngineKind::Arb],
            seed: 0,
            ks: crate::metrics::DEFAULT_KS.to_vec(),
            engine_config: ArbConfig::default(),
            search: None,
            subset: EvalSubset::Test,
            classifier: None,
        }
    }
}

/// One (rate, engine) cell. Errors are kept per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rate: f64,
    pub engine: EngineKind,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub report: Result<EvalReport, String>,
    pub accuracy: Option<f64>,
}

/// Split seed for a rate; every engine at that rate shares the split.
fn split_seed(seed: u64, rate_index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(rate_index as u64 + 1)
}

/// Runs every engine at every missing rate. Cells run in parallel and are
/// returned rate-major in input order.
pub fn run_missing_rate_sweep(bundle: &DatasetBundle, config: &SweepConfig) -> Vec<SweepRow> {
    let cells: Vec<(usize, f64, EngineKind)> = config
        .rates
        .iter()
        .enumerate()
        .flat_map(|(ri, &r)| config.engines.iter().map(move |&e| (ri, r, e)))
        .collect();
    let request = MetricRequest::for_kind(bundle.feature_kind, &config.ks);
    let metric = ObjectiveMetric::for_kind(bundle.feature_kind, bundle.features.n_features());

    map_ordered(ExecPolicy::default(), &cells, |&(ri, rate, engine)| {
        let failed = |msg: String, cfg: &ArbConfig| SweepRow {
            rate,
            engine,
            alpha: cfg.alpha,
            beta: cfg.beta,
            iterations: 0,
            report: Err(msg),
            accuracy: None,
        };
        let spec = SplitSpec::with_known_fraction(split_seed(config.seed, ri), 1.0 - rate);
        let split = match make_split(bundle.graph.n_nodes(), &spec) {
            Ok(s) => s,
            Err(e) => return failed(e.to_string(), &config.engine_config),
        };
        let tuned = match &config.search {
            Some(search) => {
                search_engine(
                    bundle,
                    &split,
                    engine,
                    &config.engine_config,
                    search,
                    metric,
                )
                .0
            }
            None => config.engine_config,
        };
        // Sequential inside a cell: the cells themselves are the parallel unit.
        let (report, result) = match evaluate_engine(
            bundle,
            &split,
            engine,
            &tuned,
            &request,
            config.subset,
            ExecPolicy::Sequential,
        ) {
            Ok(v) => v,
            Err(e) => return failed(e.to_string(), &tuned),
        };
        let accuracy = match (&config.classifier, &bundle.labels) {
            (Some(cc), Some(labels)) => {
                let rows = config.subset.rows(&split);
                let x = result.features.select_rows(&rows);
                let y: Vec<usize> = rows.iter().map(|&i| labels[i]).collect();
                train_linear_classifier(&x, &y, 5, config.seed, cc).ok()
            }
            _ => None,
        };
        SweepRow {
            rate,
            engine,
            alpha: tuned.alpha,
            beta: tuned.beta,
            iterations: result.iterations_run,
            report: Ok(report),
            accuracy,
        }
    })
}

/// Comma-separated table with one row per cell. Failed cells carry the error
/// text in the last column and empty metric fields.
pub fn sweep_to_csv(rows: &[SweepRow], ks: &[usize]) -> String {
    let mut s = String::from("rate,engine,alpha,beta,iterations");
    for k in ks {
        let _ = write!(s, ",recall@{k}");
    }
    for k in ks {
        let _ = write!(s, ",ndcg@{k}");
    }
    s.push_str(",rmse,corr,accuracy,error\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for row in rows {
        let _ = write!(
            s,
            "{},{},{},{},{}",
            row.rate, row.engine, row.alpha, row.beta, row.iterations
        );
        match &row.report {
            Ok(r) => {
                for k in ks {
                    let _ = write!(s, ",{}", opt(r.recall(*k)));
                }
                for k in ks {
                    let _ = write!(s, ",{}", opt(r.ndcg(*k)));
                }
                let _ = writeln!(s, ",{},{},{},", opt(r.rmse), opt(r.corr), opt(row.accuracy));
            }
            Err(e) => {
                for _ in 0..2 * ks.len() + 3 {
                    s.push(',');
                }
                let _ = writeln!(s, ",{}", e.replace([',', '\n'], ";"));
            }
        }
    }
    s
}
