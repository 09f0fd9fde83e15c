//! Iterative reconstruction engines.
//!
//! Every engine is the same two-stage sweep over all rows:
//!
//! 1. propagation, `X <- a·ÃX + (1-a)·mean(X)` (plain `ÃX` when `a = 1`);
//! 2. reset of known rows, either hard (`X_k <- Z_k`) or moving
//!    (`X_k <- b·X_k + (1-b)·Z_k`) applied to the freshly propagated rows.
//!
//! Feature propagation is `a = 1` with a hard reset. The two ablations keep
//! one of the mechanisms each. Setting `alpha` or `beta` to exactly 1 selects
//! the degenerate form of that stage, so `run_arb` with both at 1 executes the
//! FP update itself.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecPolicy};
use crate::graph::{self, Graph};
use crate::known::KnownSet;
use crate::matrix::FeatureMatrix;

pub const DEFAULT_MAX_ITERS: usize = 40;
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

/// Hyperparameters of the boosted engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbConfig {
    /// Weight of graph propagation against the global mean, in (0, 1].
    pub alpha: f64,
    /// Weight of the propagated value in the known-row reset, in (0, 1].
    pub beta: f64,
    pub max_iters: usize,
    /// Relative Frobenius change that ends iteration early; 0 disables.
    pub tolerance: f64,
}

impl Default for ArbConfig {
    fn default() -> Self {
        ArbConfig {
            alpha: 0.5,
            beta: 0.5,
            max_iters: DEFAULT_MAX_ITERS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl ArbConfig {
    pub fn new(alpha: f64, beta: f64) -> Self {
        ArbConfig {
            alpha,
            beta,
            ..Default::default()
        }
    }

    pub fn with_iters(mut self, max_iters: usize, tolerance: f64) -> Self {
        self.max_iters = max_iters;
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("alpha", self.alpha)?;
        check_unit("beta", self.beta)?;
        check_schedule(self.max_iters, self.tolerance)
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::input(format!("{name} must lie in (0, 1], got {v}")));
    }
    Ok(())
}

fn check_schedule(max_iters: usize, tolerance: f64) -> Result<()> {
    if max_iters == 0 {
        return Err(Error::input("max_iters must be at least 1"));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::input(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    Ok(())
}

/// How known rows are pulled back toward their observed values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reset {
    Hard,
    Moving { beta: f64 },
}

/// One engine's update rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRule {
    /// Propagation weight; 1 disables the mean term entirely.
    pub alpha: f64,
    pub reset: Reset,
}

impl UpdateRule {
    pub const FP: UpdateRule = UpdateRule {
        alpha: 1.0,
        reset: Reset::Hard,
    };

    /// Degenerate parameter values select the simpler stage forms.
    pub fn arb(alpha: f64, beta: f64) -> Self {
        let reset = if beta == 1.0 {
            Reset::Hard
        } else {
            Reset::Moving { beta }
        };
        UpdateRule { alpha, reset }
    }

    #[inline]
    fn uses_mean(&self) -> bool {
        self.alpha != 1.0
    }

    fn validate(&self) -> Result<()> {
        check_unit("alpha", self.alpha)?;
        if let Reset::Moving { beta } = self.reset {
            check_unit("beta", beta)?;
        }
        Ok(())
    }
}

/// Engine selector used by the experiment harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EngineKind {
    /// Feature propagation baseline.
    Fp,
    /// Mean term plus moving reset.
    Arb,
    /// Moving reset only ("without virtual edges").
    BoundaryOnly,
    /// Mean term with hard reset ("without boundary conditions").
    VirtualOnly,
}

impl EngineKind {
    pub const ALL: [EngineKind; 4] = [
        EngineKind::Fp,
        EngineKind::Arb,
        EngineKind::BoundaryOnly,
        EngineKind::VirtualOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Fp => "fp",
            EngineKind::Arb => "arb",
            EngineKind::BoundaryOnly => "arb-no-ve",
            EngineKind::VirtualOnly => "arb-no-bc",
        }
    }

    /// Update rule for this engine; parameters it does not use are ignored.
    pub fn rule(self, alpha: f64, beta: f64) -> UpdateRule {
        match self {
            EngineKind::Fp => UpdateRule::FP,
            EngineKind::Arb => UpdateRule::arb(alpha, beta),
            EngineKind::BoundaryOnly => UpdateRule::arb(1.0, beta),
            EngineKind::VirtualOnly => UpdateRule::arb(alpha, 1.0),
        }
    }

    pub fn uses_alpha(self) -> bool {
        matches!(self, EngineKind::Arb | EngineKind::VirtualOnly)
    }

    pub fn uses_beta(self) -> bool {
        matches!(self, EngineKind::Arb | EngineKind::BoundaryOnly)
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EngineKind::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown engine '{s}' (expected fp, arb, arb-no-ve or arb-no-bc)"
                ))
            })
    }
}

/// Output of an engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Final iterate, all rows.
    pub features: FeatureMatrix,
    pub iterations_run: usize,
    pub final_delta: f64,
    pub converged: bool,
}

/// Stepwise engine state. Owns the current iterate and a scratch buffer.
pub struct Propagator<'a> {
    graph: &'a Graph,
    observed: &'a FeatureMatrix,
    known: &'a KnownSet,
    rule: UpdateRule,
    policy: ExecPolicy,
    current: FeatureMatrix,
    scratch: FeatureMatrix,
    /// Column means of `current`, maintained only when the rule needs them.
    means: Vec<f64>,
    iterations: usize,
    last_delta: f64,
}

struct BlockStats {
    diff_sq: f64,
    prev_sq: f64,
    sums: Vec<f64>,
}

impl<'a> Propagator<'a> {
    /// Initializes `X` to zero with known rows set to their observed values.
    /// Rows of `observed` outside the known set are never read.
    pub fn new(
        graph: &'a Graph,
        observed: &'a FeatureMatrix,
        known: &'a KnownSet,
        rule: UpdateRule,
    ) -> Result<Self> {
        let n = graph.n_nodes();
        observed.check_shape(n, "observed features")?;
        if known.n_nodes() != n {
            return Err(Error::input(format!(
                "known set covers {} nodes but the graph has {n}",
                known.n_nodes()
            )));
        }
        if known.is_empty() {
            return Err(Error::input("known set is empty; nothing to propagate"));
        }
        rule.validate()?;
        let f = observed.n_features();
        let mut current = FeatureMatrix::zeros(n, f);
        for &i in known.known() {
            let row = observed.row(i);
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "observed row {i} has non-finite values"
                )));
            }
            current.row_mut(i).copy_from_slice(row);
        }
        let means = if rule.uses_mean() {
            graph::column_means_with(ExecPolicy::Sequential, &current)?
        } else {
            Vec::new()
        };
        Ok(Propagator {
            graph,
            observed,
            known,
            rule,
            policy: ExecPolicy::default(),
            scratch: FeatureMatrix::zeros(n, f),
            current,
            means,
            iterations: 0,
            last_delta: f64::INFINITY,
        })
    }

    pub fn with_policy(mut self, policy: ExecPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn current(&self) -> &FeatureMatrix {
        &self.current
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn rule(&self) -> UpdateRule {
        self.rule
    }

    /// Advances one iteration and returns the relative Frobenius change
    /// `||X' - X|| / max(||X||, 1)`.
    pub fn step(&mut self) -> Result<f64> {
        let f = self.current.n_features();
        let n = self.current.n_nodes();
        let graph = self.graph;
        let mask = self.known.mask();
        let observed = self.observed.as_slice();
        let src = self.current.as_slice();
        let rule = self.rule;
        let with_mean = rule.uses_mean();
        let alpha = rule.alpha;
        let mean_term: Vec<f64> = self.means.iter().map(|m| (1.0 - alpha) * m).collect();

        let stats = exec::map_row_blocks(
            self.policy,
            self.scratch.as_mut_slice(),
            f,
            |first, block| {
                let mut st = BlockStats {
                    diff_sq: 0.0,
                    prev_sq: 0.0,
                    sums: if with_mean { vec![0.0; f] } else { Vec::new() },
                };
                for (r, dst) in block.chunks_exact_mut(f).enumerate() {
                    let i = first + r;
                    graph.gather_row(src, f, i, dst);
                    if with_mean {
                        for (d, &m) in dst.iter_mut().zip(&mean_term) {
                            *d = alpha * *d + m;
                        }
                    }
                    if mask[i] {
                        let z = &observed[i * f..(i + 1) * f];
                        match rule.reset {
                            Reset::Hard => dst.copy_from_slice(z),
                            Reset::Moving { beta } => {
                                for (d, &zv) in dst.iter_mut().zip(z) {
                                    *d = beta * *d + (1.0 - beta) * zv;
                                }
                            }
                        }
                    }
                    for (&d, &p) in dst.iter().zip(&src[i * f..(i + 1) * f]) {
                        st.diff_sq += (d - p) * (d - p);
                        st.prev_sq += p * p;
                    }
                    if with_mean {
                        for (s, &d) in st.sums.iter_mut().zip(dst.iter()) {
                            *s += d;
                        }
                    }
                }
                st
            },
        );
        let diff_sq: f64 = stats.iter().map(|s| s.diff_sq).sum();
        let prev_sq: f64 = stats.iter().map(|s| s.prev_sq).sum();
        if with_mean {
            let partials: Vec<Vec<f64>> = stats.into_iter().map(|s| s.sums).collect();
            self.means = graph::reduce_means(&partials, f, n);
        }
        std::mem::swap(&mut self.current, &mut self.scratch);
        self.iterations += 1;

        let delta = diff_sq.sqrt() / prev_sq.sqrt().max(1.0);
        if !delta.is_finite() {
            return Err(Error::Numerical(format!(
                "iterate became non-finite at iteration {}",
                self.iterations
            )));
        }
        self.last_delta = delta;
        Ok(delta)
    }

    /// Iterates until `max_iters` or until the change drops to `tolerance`.
    pub fn run(mut self, max_iters: usize, tolerance: f64) -> Result<ReconstructionResult> {
        check_schedule(max_iters, tolerance)?;
        let mut converged = false;
        while self.iterations < max_iters {
            let delta = self.step()?;
            if (tolerance > 0.0 && delta <= tolerance) || delta == 0.0 {
                converged = true;
                break;
            }
        }
        Ok(ReconstructionResult {
            features: self.current,
            iterations_run: self.iterations,
            final_delta: self.last_delta,
            converged,
        })
    }
}

/// Runs any engine with the given parameters.
pub fn run_engine(
    graph: &Graph,
    z: &FeatureMatrix,
    known: &KnownSet,
    engine: EngineKind,
    config: &ArbConfig,
    policy: ExecPolicy,
) -> Result<ReconstructionResult> {
    let rule = engine.rule(config.alpha, config.beta);
    Propagator::new(graph, z, known, rule)?
        .with_policy(policy)
        .run(config.max_iters, config.tolerance)
}

/// Feature propagation: `X <- ÃX`, then known rows reset to `Z_k`.
pub fn run_fp(
    graph: &Graph,
    z: &FeatureMatrix,
    known: &KnownSet,
    max_iters: usize,
    tolerance: f64,
) -> Result<ReconstructionResult> {
    Propagator::new(graph, z, known, UpdateRule::FP)?.run(max_iters, tolerance)
}

/// Boosted propagation with the global-mean term and the moving reset.
pub fn run_arb(
    graph: &Graph,
    z: &FeatureMatrix,
    known: &KnownSet,
    config: &ArbConfig,
) -> Result<ReconstructionResult> {
    config.validate()?;
    Propagator::new(graph, z, known, UpdateRule::arb(config.alpha, config.beta))?
        .run(config.max_iters, config.tolerance)
}

/// Moving reset without the mean term.
pub fn run_boundary_only(
    graph: &Graph,
    z: &FeatureMatrix,
    known: &KnownSet,
    beta: f64,
    max_iters: usize,
    tolerance: f64,
) -> Result<ReconstructionResult> {
    Propagator::new(graph, z, known, UpdateRule::arb(1.0, beta))?.run(max_iters, tolerance)
}

/// Mean term with the hard reset.
pub fn run_virtual_only(
    graph: &Graph,
    z: &FeatureMatrix,
    known: &KnownSet,
    alpha: f64,
    max_iters: usize,
    tolerance: f64,
) -> Result<ReconstructionResult> {
    Propagator::new(graph, z, known, UpdateRule::arb(alpha, 1.0))?.run(max_iters, tolerance)
}

/// Converts `(alpha, beta)` into the boundary weight `eta` and virtual-edge
/// weight `theta` of the underlying quadratic objective:
///
/// `theta = (N-1)(1-alpha) / (alpha N)`, `eta = (1-beta) / (alpha beta)`.
///
/// Either parameter at 1 corresponds to an infinite or vanishing weight with
/// no finite pair, and is reported as [`Error::Degenerate`].
pub fn map_alpha_beta(alpha: f64, beta: f64, n_nodes: usize) -> Result<(f64, f64)> {
    if n_nodes < 2 {
        return Err(Error::input("the weight mapping needs at least two nodes"));
    }
    if alpha == 1.0 || beta == 1.0 {
        return Err(Error::Degenerate(format!(
            "alpha={alpha}, beta={beta}: no finite (eta, theta); use the pinned or FP forms"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0) {
        return Err(Error::input(format!(
            "alpha and beta must lie in (0, 1), got ({alpha}, {beta})"
        )));
    }
    let n = n_nodes as f64;
    let theta = (n - 1.0) * (1.0 - alpha) / (alpha * n);
    let eta = (1.0 - beta) / (alpha * beta);
    Ok((eta, theta))
}

/// Forward map: `alpha = (N-1)/(theta N + N - 1)`, `beta = (1/alpha)/(1/alpha + eta)`.
pub fn alpha_beta_from_weights(eta: f64, theta: f64, n_nodes: usize) -> (f64, f64) {
    let n = n_nodes as f64;
    let alpha = (n - 1.0) / (theta * n + n - 1.0);
    let beta = (1.0 / alpha) / (1.0 / alpha + eta);
    (alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn fp_one_hop_on_path() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let z = col(&[1.0, 0.0]);
        let known = KnownSet::new(2, [0]).unwrap();
        let r = run_fp(&g, &z, &known, 1, 0.0).unwrap();
        assert_eq!(r.features, col(&[1.0, 1.0]));
        assert_eq!(r.iterations_run, 1);
    }

    #[test]
    fn fp_isolated_unknown_stays_zero() {
        let g = Graph::new(4, &[(0, 1), (1, 2)]).unwrap();
        let z = col(&[1.0, 2.0, 3.0, 4.0]);
        let known = KnownSet::new(4, [0, 2]).unwrap();
        let r = run_fp(&g, &z, &known, 500, 0.0).unwrap();
        assert_eq!(r.features.get(3, 0), 0.0);
    }

    #[test]
    fn arb_two_isolated_nodes_fixed_point() {
        // m = (1-b) / (2 - (1-a)(1+b)) = 0.4; x0 = 0.25 m + 0.5, x1 = 0.5 m.
        let g = Graph::new(2, &[]).unwrap();
        let z = col(&[1.0, 0.0]);
        let known = KnownSet::new(2, [0]).unwrap();
        let cfg = ArbConfig::new(0.5, 0.5).with_iters(10_000, 1e-15);
        let r = run_arb(&g, &z, &known, &cfg).unwrap();
        assert!(r.converged);
        assert!((r.features.get(0, 0) - 0.6).abs() < 1e-12);
        assert!((r.features.get(1, 0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn boundary_only_with_hard_beta_is_fp() {
        let g = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let z = FeatureMatrix::from_rows(&[
            [1.0, 0.5],
            [0.0, 0.0],
            [2.0, -1.0],
            [0.0, 0.0],
            [0.0, 0.0],
        ])
        .unwrap();
        let known = KnownSet::new(5, [0, 2]).unwrap();
        let a = run_boundary_only(&g, &z, &known, 1.0, 30, 0.0).unwrap();
        let b = run_fp(&g, &z, &known, 30, 0.0).unwrap();
        assert_eq!(a, b);
        let c = run_virtual_only(&g, &z, &known, 1.0, 30, 0.0).unwrap();
        assert_eq!(c, b);
    }

    #[test]
    fn boundary_only_isolated_unknown_stays_zero() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        let z = col(&[1.0, 1.0, 0.0]);
        let known = KnownSet::new(3, [0]).unwrap();
        let r = run_boundary_only(&g, &z, &known, 0.5, 200, 0.0).unwrap();
        assert_eq!(r.features.get(2, 0), 0.0);
    }

    #[test]
    fn virtual_only_reaches_isolated_node() {
        // Fixed point of the isolated row: x = (1 - a) mean(X).
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        let z = col(&[1.0, 0.0, 0.0]);
        let known = KnownSet::new(3, [0]).unwrap();
        let r = run_virtual_only(&g, &z, &known, 0.9, 5000, 1e-15).unwrap();
        let x = r.features;
        let mean = (x.get(0, 0) + x.get(1, 0) + x.get(2, 0)) / 3.0;
        assert!(x.get(2, 0) > 0.0);
        assert!((x.get(2, 0) - 0.1 * mean).abs() < 1e-12);
    }

    #[test]
    fn empty_known_set_rejected() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        let z = FeatureMatrix::zeros(3, 1);
        let none = KnownSet::none(3);
        assert!(matches!(
            run_fp(&g, &z, &none, 5, 0.0),
            Err(Error::Input(_))
        ));
        assert!(run_arb(&g, &z, &none, &ArbConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ArbConfig::new(0.0, 0.5).validate().is_err());
        assert!(ArbConfig::new(0.5, 1.5).validate().is_err());
        assert!(ArbConfig::new(1.0, 1.0).validate().is_ok());
        assert!(ArbConfig::new(0.5, 0.5)
            .with_iters(0, 0.0)
            .validate()
            .is_err());
        assert!(ArbConfig::new(0.5, 0.5)
            .with_iters(3, -1.0)
            .validate()
            .is_err());
    }

    #[test]
    fn converged_flag_respects_tolerance() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let z = col(&[1.0, 0.0, 0.0, 0.0]);
        let known = KnownSet::new(4, [0]).unwrap();
        let r = run_arb(
            &g,
            &z,
            &known,
            &ArbConfig::new(0.9, 0.7).with_iters(10_000, 1e-9),
        )
        .unwrap();
        assert!(r.converged);
        assert!(r.final_delta <= 1e-9);
        let r = run_arb(
            &g,
            &z,
            &known,
            &ArbConfig::new(0.9, 0.7).with_iters(2, 1e-9),
        )
        .unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_run, 2);
    }

    #[test]
    fn weight_mapping_examples() {
        let (eta, theta) = map_alpha_beta(0.5, 0.5, 3).unwrap();
        assert!((theta - 2.0 / 3.0).abs() < 1e-15);
        assert!((eta - 2.0).abs() < 1e-15);
        let (a, b) = alpha_beta_from_weights(eta, theta, 3);
        assert!((a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);

        let (eta, theta) = map_alpha_beta(1.0 - 1e-9, 1.0 - 1e-9, 100).unwrap();
        assert!(theta < 1e-8 && eta < 1e-8);

        assert!(matches!(
            map_alpha_beta(1.0, 0.5, 10),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            map_alpha_beta(0.5, 1.0, 10),
            Err(Error::Degenerate(_))
        ));
        assert!(map_alpha_beta(0.5, 0.5, 1).is_err());
    }

    #[test]
    fn engine_names_round_trip() {
        for e in EngineKind::ALL {
            assert_eq!(e.name().parse::<EngineKind>().unwrap(), e);
        }
        assert!("pcfi".parse::<EngineKind>().is_err());
    }
}
