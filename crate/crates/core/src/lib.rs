//! Reconstruction of missing node attributes by boosted feature propagation.
//!
//! The boosted engine iterates
//!
//! ```text
//! X   <- alpha·ÃX + (1 - alpha)·mean(X)      (all rows)
//! X_k <- beta·X_k + (1 - beta)·Z_k           (known rows)
//! ```
//!
//! starting from zero with known rows set to their observed values `Z_k`.
//! The mean term reaches nodes that plain propagation cannot (isolated or
//! weakly connected ones) and the moving reset lets known rows absorb
//! neighborhood information instead of being pinned. With `alpha = beta = 1`
//! the update is exactly feature propagation.
//!
//! Crate layout:
//!
//! * [`graph`], [`matrix`], [`known`]: CSR graph with the normalized
//!   adjacency, dense attribute storage, and the known/unknown partition.
//! * [`propagation`]: the engines (FP, boosted, and two ablations).
//! * [`oracle`]: dense steady-state solves and spectral radius estimates for
//!   verification.
//! * [`metrics`]: Recall@k, nDCG@k, RMSE, CORR.
//! * [`experiment`]: splits, compass search, sweeps, classifier proxy.
//! * [`io`]: file formats and synthetic data.
//!
//! Row-parallel kernels run on rayon when the `parallel` feature is enabled
//! (default). Results do not depend on the thread count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod known;
pub mod matrix;
pub mod metrics;
pub mod oracle;
pub mod propagation;
mod seeding;

pub use error::{Error, Result};
pub use exec::ExecPolicy;
pub use graph::{column_means, Graph};
pub use known::KnownSet;
pub use matrix::FeatureMatrix;
pub use metrics::{EvalReport, FeatureKind};
pub use propagation::{
    map_alpha_beta, run_arb, run_boundary_only, run_fp, run_virtual_only, ArbConfig, EngineKind,
    Propagator, ReconstructionResult, UpdateRule,
};
