//! Evaluation protocol: splits, hyperparameter search, missing-rate sweeps,
//! and a downstream classifier proxy.

mod classifier;
mod protocol;
mod search;
mod split;
mod sweep;

pub use classifier::{train_linear_classifier, ClassifierConfig};
pub use protocol::{evaluate_engine, search_engine, search_objective, EvalSubset, ObjectiveMetric};
pub use search::{
    search_hyperparams, SearchAxes, SearchConfig, SearchOutcome, SearchState, SEARCH_FLOOR,
};
pub use split::{make_split, mask_features, Split, SplitSpec};
pub use sweep::{run_missing_rate_sweep, sweep_to_csv, SweepConfig, SweepRow};
