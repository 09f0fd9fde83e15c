//! Shared run-and-score plumbing for the CLI, the sweep, and tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecPolicy;
use crate::io::DatasetBundle;
use crate::metrics::{self, EvalReport, FeatureKind, MetricRequest};
use crate::propagation::{run_engine, ArbConfig, EngineKind, ReconstructionResult};

use super::search::{search_hyperparams, SearchAxes, SearchConfig, SearchOutcome};
use super::split::Split;

/// Rows on which a reconstruction is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalSubset {
    Validation,
    Test,
    AllUnknown,
}

impl EvalSubset {
    pub fn rows(self, split: &Split) -> Vec<usize> {
        match self {
            EvalSubset::Validation => split.val.clone(),
            EvalSubset::Test => split.test.clone(),
            EvalSubset::AllUnknown => split.known.unknown(),
        }
    }
}

/// Score maximized by the hyperparameter search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ObjectiveMetric {
    Ndcg(usize),
    Corr,
}

impl ObjectiveMetric {
    /// nDCG@10 for binary attributes (capped at the feature count), CORR otherwise.
    pub fn for_kind(kind: FeatureKind, n_features: usize) -> Self {
        match kind {
            FeatureKind::Binary => ObjectiveMetric::Ndcg(10.min(n_features.max(1))),
            FeatureKind::Continuous => ObjectiveMetric::Corr,
        }
    }
}

/// Runs `engine` on the split and scores the chosen subset.
pub fn evaluate_engine(
    bundle: &DatasetBundle,
    split: &Split,
    engine: EngineKind,
    config: &ArbConfig,
    request: &MetricRequest,
    subset: EvalSubset,
    policy: ExecPolicy,
) -> Result<(EvalReport, ReconstructionResult)> {
    let result = run_engine(
        &bundle.graph,
        &bundle.features,
        &split.known,
        engine,
        config,
        policy,
    )?;
    let rows = subset.rows(split);
    if rows.is_empty() {
        return Err(Error::input("evaluation subset is empty"));
    }
    let pred = result.features.select_rows(&rows);
    let truth = bundle.features.select_rows(&rows);
    let report = metrics::evaluate(&pred, &truth, request)?;
    Ok((report, result))
}

/// Validation score of one `(alpha, beta)` point; failures score `-inf`.
pub fn search_objective(
    bundle: &DatasetBundle,
    split: &Split,
    engine: EngineKind,
    base: &ArbConfig,
    metric: ObjectiveMetric,
    alpha: f64,
    beta: f64,
) -> f64 {
    let config = ArbConfig {
        alpha,
        beta,
        ..*base
    };
    let Ok(result) = run_engine(
        &bundle.graph,
        &bundle.features,
        &split.known,
        engine,
        &config,
        ExecPolicy::default(),
    ) else {
        return f64::NEG_INFINITY;
    };
    let pred = result.features.select_rows(&split.val);
    let truth = bundle.features.select_rows(&split.val);
    let score = match metric {
        ObjectiveMetric::Ndcg(k) => metrics::ndcg_at_k(&pred, &truth, k),
        ObjectiveMetric::Corr => metrics::corr(&pred, &truth),
    };
    score.unwrap_or(f64::NEG_INFINITY)
}

/// Tunes the parameters `engine` actually uses on the validation rows.
/// FP has none and gets a single evaluation at its fixed point.
pub fn search_engine(
    bundle: &DatasetBundle,
    split: &Split,
    engine: EngineKind,
    base: &ArbConfig,
    search: &SearchConfig,
    metric: ObjectiveMetric,
) -> (ArbConfig, SearchOutcome) {
    let axes = match engine {
        EngineKind::Arb => Some(SearchAxes::Both),
        EngineKind::BoundaryOnly => Some(SearchAxes::BetaOnly),
        EngineKind::VirtualOnly => Some(SearchAxes::AlphaOnly),
        EngineKind::Fp => None,
    };
    let objective = |a: f64, b: f64| search_objective(bundle, split, engine, base, metric, a, b);
    let outcome = match axes {
        Some(axes) => search_hyperparams(objective, &SearchConfig { axes, ..*search }),
        None => search_hyperparams(
            objective,
            &SearchConfig {
                start: (1.0, 1.0),
                max_evals: 1,
                ..*search
            },
        ),
    };
    let (alpha, beta) = outcome.best;
    (
        ArbConfig {
            alpha,
            beta,
            ..*base
        },
        outcome,
    )
}
