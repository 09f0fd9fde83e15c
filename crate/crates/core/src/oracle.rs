//! Dense ground-truth solvers for small problems.
//!
//! The steady state of the boosted iteration solves
//! `(L + eta·I_k + theta·L1) X = eta·Z~`, with `L = I - Ã`,
//! `L1 = N/(N-1)·I - 1/(N-1)·J` and `Z~` equal to `Z` on known rows and zero
//! elsewhere. The hard-reset variants pin known rows and solve only the
//! unknown block. Both go through a dense Cholesky factorization and are meant
//! for verification at a few thousand nodes at most.

use log::warn;
use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::known::KnownSet;
use crate::matrix::FeatureMatrix;
use crate::propagation::{Reset, UpdateRule};

pub const DEFAULT_DENSE_LIMIT: usize = 2000;
pub const POWER_ITERATION_CAP: usize = 10_000;
const POWER_SEED: u64 = 0x5eed_0fa7b;

/// Dense solver front end carrying the size limit.
#[derive(Debug, Clone, Copy)]
pub struct DenseOracle {
    pub limit: usize,
}

impl Default for DenseOracle {
    fn default() -> Self {
        DenseOracle {
            limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

/// Symmetric system `(L + eta I_k + theta L1) X = eta Z~`.
#[derive(Debug, Clone)]
pub struct OracleSystem {
    pub system_matrix: DMatrix<f64>,
    pub rhs: DMatrix<f64>,
}

impl OracleSystem {
    pub fn build(
        graph: &Graph,
        z: &FeatureMatrix,
        known: &KnownSet,
        eta: f64,
        theta: f64,
    ) -> Result<Self> {
        let n = graph.n_nodes();
        check_inputs(graph, z, known)?;
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::input(format!(
                "eta must be positive and finite, got {eta}"
            )));
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::input(format!(
                "theta must be non-negative, got {theta}"
            )));
        }
        if theta > 0.0 && n < 2 {
            return Err(Error::input("virtual edges need at least two nodes"));
        }
        let mut m = laplacian(graph);
        if theta > 0.0 {
            let nf = n as f64;
            let off = theta / (nf - 1.0);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] -= off;
                }
                m[(i, i)] += theta * nf / (nf - 1.0);
            }
        }
        let f = z.n_features();
        let mut rhs = DMatrix::zeros(n, f);
        for &i in known.known() {
            m[(i, i)] += eta;
            for c in 0..f {
                rhs[(i, c)] = eta * z.get(i, c);
            }
        }
        Ok(OracleSystem {
            system_matrix: m,
            rhs,
        })
    }

    pub fn solve(&self) -> Result<FeatureMatrix> {
        let x = solve_spd(&self.system_matrix, &self.rhs, "steady-state system")?;
        Ok(to_features(&x))
    }

    /// Max-abs residual of a candidate solution.
    pub fn residual(&self, x: &FeatureMatrix) -> f64 {
        let xm = to_dense(x);
        (&self.system_matrix * xm - &self.rhs).amax()
    }
}

impl DenseOracle {
    fn check_size(&self, n: usize) -> Result<()> {
        if n > self.limit {
            return Err(Error::Capability(format!(
                "dense oracle limited to {} nodes, got {n}",
                self.limit
            )));
        }
        Ok(())
    }

    /// Steady state of the boosted iteration at the given weights.
    pub fn solve_steady_state(
        &self,
        graph: &Graph,
        z: &FeatureMatrix,
        known: &KnownSet,
        eta: f64,
        theta: f64,
    ) -> Result<FeatureMatrix> {
        self.check_size(graph.n_nodes())?;
        let system = OracleSystem::build(graph, z, known, eta, theta)?;
        let x = system.solve()?;
        let res = system.residual(&x);
        if !(res <= 1e-8) {
            return Err(Error::Numerical(format!(
                "steady-state residual {res:e} above 1e-8"
            )));
        }
        Ok(x)
    }

    /// Known rows pinned to `Z_k`; unknown rows solve
    /// `(c I - Ã_uu - s J_uu) X_u = Ã_uk Z_k + s J_uk Z_k` with
    /// `c = 1 + theta N/(N-1)` and `s = theta/(N-1)`.
    ///
    /// At `theta = 0` this is the harmonic extension that feature propagation
    /// converges to. A component with no known node makes the block singular
    /// at `theta = 0`, which is reported rather than regularized.
    pub fn solve_pinned(
        &self,
        graph: &Graph,
        z: &FeatureMatrix,
        known: &KnownSet,
        theta: f64,
    ) -> Result<FeatureMatrix> {
        let n = graph.n_nodes();
        self.check_size(n)?;
        check_inputs(graph, z, known)?;
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::input(format!(
                "theta must be non-negative, got {theta}"
            )));
        }
        if theta > 0.0 && n < 2 {
            return Err(Error::input("virtual edges need at least two nodes"));
        }
        let f = z.n_features();
        let mut out = FeatureMatrix::zeros(n, f);
        for &i in known.known() {
            out.row_mut(i).copy_from_slice(z.row(i));
        }
        let unknown = known.unknown();
        if unknown.is_empty() {
            return Ok(out);
        }
        let (c, s) = if theta > 0.0 {
            let nf = n as f64;
            (1.0 + theta * nf / (nf - 1.0), theta / (nf - 1.0))
        } else {
            (1.0, 0.0)
        };

        let nu = unknown.len();
        let mut pos = vec![usize::MAX; n];
        for (p, &u) in unknown.iter().enumerate() {
            pos[u] = p;
        }
        let mut m = DMatrix::from_element(nu, nu, -s);
        for p in 0..nu {
            m[(p, p)] += c;
        }
        let mut rhs = DMatrix::zeros(nu, f);
        // Sum of known rows feeds every unknown row through the mean term.
        let mut known_sum = vec![0.0; f];
        for &k in known.known() {
            for (acc, &v) in known_sum.iter_mut().zip(z.row(k)) {
                *acc += v;
            }
        }
        for (p, &u) in unknown.iter().enumerate() {
            let (cols, vals) = graph.row(u);
            for (&j, &w) in cols.iter().zip(vals) {
                let j = j as usize;
                if known.contains(j) {
                    for col in 0..f {
                        rhs[(p, col)] += w * z.get(j, col);
                    }
                } else {
                    m[(p, pos[j])] -= w;
                }
            }
            for col in 0..f {
                rhs[(p, col)] += s * known_sum[col];
            }
        }
        let xu = solve_spd(&m, &rhs, "unknown block")?;
        for (p, &u) in unknown.iter().enumerate() {
            for col in 0..f {
                out.set(u, col, xu[(p, col)]);
            }
        }
        Ok(out)
    }
}

/// Steady state with the default size limit.
pub fn solve_steady_state(
    graph: &Graph,
    z: &FeatureMatrix,
    known: &KnownSet,
    eta: f64,
    theta: f64,
) -> Result<FeatureMatrix> {
    DenseOracle::default().solve_steady_state(graph, z, known, eta, theta)
}

/// Pinned solve with the default size limit.
pub fn solve_pinned(
    graph: &Graph,
    z: &FeatureMatrix,
    known: &KnownSet,
    theta: f64,
) -> Result<FeatureMatrix> {
    DenseOracle::default().solve_pinned(graph, z, known, theta)
}

/// `theta` that corresponds to a propagation weight `alpha` on `n` nodes.
pub fn theta_for_alpha(alpha: f64, n_nodes: usize) -> f64 {
    let n = n_nodes as f64;
    (n - 1.0) * (1.0 - alpha) / (alpha * n)
}

fn check_inputs(graph: &Graph, z: &FeatureMatrix, known: &KnownSet) -> Result<()> {
    z.check_shape(graph.n_nodes(), "observed features")?;
    if known.n_nodes() != graph.n_nodes() {
        return Err(Error::input("known set size differs from node count"));
    }
    Ok(())
}

/// Dense `I - Ã`.
pub fn laplacian(graph: &Graph) -> DMatrix<f64> {
    let n = graph.n_nodes();
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        let (cols, vals) = graph.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            m[(i, j as usize)] -= w;
        }
    }
    m
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol: Cholesky<f64, Dyn> = Cholesky::new(m.clone())
        .ok_or_else(|| Error::Numerical(format!("{what} is not positive definite")))?;
    let l = chol.l_dirty();
    let diag = l.diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| {
        (lo.min(d), hi.max(d))
    });
    // Squared pivot ratio bounds the condition number from below.
    if (lo / hi).powi(2) < 1e-13 {
        return Err(Error::Numerical(format!(
            "{what} is numerically singular (pivot ratio {:e})",
            lo / hi
        )));
    }
    let mut x = chol.solve(rhs);
    // One refinement step keeps residuals near machine precision.
    let r = rhs - m * &x;
    x += chol.solve(&r);
    Ok(x)
}

fn to_features(x: &DMatrix<f64>) -> FeatureMatrix {
    let (n, f) = x.shape();
    let mut out = FeatureMatrix::zeros(n, f);
    for i in 0..n {
        for c in 0..f {
            out.set(i, c, x[(i, c)]);
        }
    }
    out
}

fn to_dense(x: &FeatureMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(x.n_nodes(), x.n_features(), x.as_slice())
}

/// Homogeneous (linear) part of one engine update on a single feature column:
/// the iterate minus the constant contribution of `Z_k`.
pub struct HomogeneousUpdate<'a> {
    graph: &'a Graph,
    known: &'a KnownSet,
    rule: UpdateRule,
}

impl<'a> HomogeneousUpdate<'a> {
    pub fn new(graph: &'a Graph, known: &'a KnownSet, rule: UpdateRule) -> Self {
        HomogeneousUpdate { graph, known, rule }
    }

    pub fn dim(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.graph.n_nodes();
        let alpha = self.rule.alpha;
        let mean = if alpha != 1.0 {
            (1.0 - alpha) * x.iter().sum::<f64>() / n as f64
        } else {
            0.0
        };
        for i in 0..n {
            self.graph.gather_row(x, 1, i, &mut out[i..i + 1]);
            if alpha != 1.0 {
                out[i] = alpha * out[i] + mean;
            }
            if self.known.contains(i) {
                out[i] = match self.rule.reset {
                    Reset::Hard => 0.0,
                    Reset::Moving { beta } => beta * out[i],
                };
            }
        }
    }

    /// Dense matrix of the map, column `j` being the image of `e_j`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }
}

/// Power-iteration estimate of a spectral radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub radius: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before successive estimates settled.
    pub converged: bool,
}

/// Estimates the spectral radius of a linear operator on `R^n`.
///
/// Iterates the squared operator and reports `sqrt(||K^2 v||)` for unit `v`,
/// which settles even when `rho` and `-rho` are both eigenvalues (bipartite
/// graphs). The start vector is positive and seeded deterministically.
pub fn spectral_radius<F>(op: F, n: usize) -> SpectralEstimate
where
    F: Fn(&[f64], &mut [f64]),
{
    spectral_radius_with(op, n, 1e-12, POWER_ITERATION_CAP)
}

pub fn spectral_radius_with<F>(op: F, n: usize, tol: f64, max_iters: usize) -> SpectralEstimate
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return SpectralEstimate {
            radius: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    normalize(&mut v);
    let mut mid = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut prev = f64::NAN;
    for it in 1..=max_iters {
        op(&v, &mut mid);
        op(&mid, &mut w);
        let norm = norm2(&w);
        if norm == 0.0 {
            return SpectralEstimate {
                radius: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let est = norm.sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
        std::mem::swap(&mut v, &mut w);
        if (est - prev).abs() <= tol {
            return SpectralEstimate {
                radius: est,
                iterations: it,
                converged: true,
            };
        }
        prev = est;
    }
    warn!("power iteration did not settle after {max_iters} iterations; estimate {prev}");
    SpectralEstimate {
        radius: prev,
        iterations: max_iters,
        converged: false,
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    v.iter_mut().for_each(|x| *x /= n);
}
