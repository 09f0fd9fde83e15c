//! Compass search over `(alpha, beta)`.
//!
//! From the current center, the eight axis and diagonal neighbors at
//! Chebyshev distance `d` are scored. The best strictly improving neighbor
//! becomes the new center; when none improves, `d` is halved. The search ends
//! once `d` falls below `min_step` or the evaluation budget runs out.

use std::collections::HashMap;

use log::warn;
use serde::{Deserialize, Serialize};

/// Smallest coordinate the search will propose; the domain is `(0, 1]`.
pub const SEARCH_FLOOR: f64 = 0.01;

/// Which coordinates move. A frozen coordinate stays at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchAxes {
    Both,
    AlphaOnly,
    BetaOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub start: (f64, f64),
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evals: usize,
    pub axes: SearchAxes,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            start: (0.5, 0.5),
            initial_step: 0.25,
            min_step: 1.0 / 64.0,
            max_evals: 200,
            axes: SearchAxes::Both,
        }
    }
}

impl SearchConfig {
    pub fn with_axes(axes: SearchAxes) -> Self {
        SearchConfig {
            axes,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchState {
    pub center: (f64, f64),
    pub step: f64,
    pub best_score: f64,
    /// Every distinct point scored, in evaluation order.
    pub evaluations: Vec<((f64, f64), f64)>,
    /// Running maximum after each evaluation.
    pub best_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: (f64, f64),
    pub best_score: f64,
    pub state: SearchState,
}

fn clamp(v: f64) -> f64 {
    v.clamp(SEARCH_FLOOR, 1.0)
}

fn key(p: (f64, f64)) -> (i64, i64) {
    ((p.0 * 1e9).round() as i64, (p.1 * 1e9).round() as i64)
}

fn neighbors(center: (f64, f64), d: f64, axes: SearchAxes) -> Vec<(f64, f64)> {
    let offsets: &[(f64, f64)] = match axes {
        SearchAxes::Both => &[
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
        ],
        SearchAxes::AlphaOnly => &[(1.0, 0.0), (-1.0, 0.0)],
        SearchAxes::BetaOnly => &[(0.0, 1.0), (0.0, -1.0)],
    };
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(offsets.len());
    for &(da, db) in offsets {
        let p = (clamp(center.0 + da * d), clamp(center.1 + db * d));
        if key(p) != key(center) && !out.iter().any(|q| key(*q) == key(p)) {
            out.push(p);
        }
    }
    out
}

/// Maximizes `objective` over `(0, 1]^2`. Non-finite scores count as `-inf`.
/// Returns the best point ever evaluated.
pub fn search_hyperparams<F>(mut objective: F, config: &SearchConfig) -> SearchOutcome
where
    F: FnMut(f64, f64) -> f64,
{
    let start = match config.axes {
        SearchAxes::Both => (clamp(config.start.0), clamp(config.start.1)),
        SearchAxes::AlphaOnly => (clamp(config.start.0), 1.0),
        SearchAxes::BetaOnly => (1.0, clamp(config.start.1)),
    };
    let mut cache: HashMap<(i64, i64), f64> = HashMap::new();
    let mut state = SearchState {
        center: start,
        step: config.initial_step,
        best_score: f64::NEG_INFINITY,
        evaluations: Vec::new(),
        best_trace: Vec::new(),
    };
    let mut best = start;

    let mut score =
        |p: (f64, f64), state: &mut SearchState, best: &mut (f64, f64)| -> Option<f64> {
            if let Some(&s) = cache.get(&key(p)) {
                return Some(s);
            }
            if state.evaluations.len() >= config.max_evals {
                return None;
            }
            let mut s = objective(p.0, p.1);
            if !s.is_finite() {
                warn!(
                    "objective returned {s} at alpha={}, beta={}; treating as -inf",
                    p.0, p.1
                );
                s = f64::NEG_INFINITY;
            }
            cache.insert(key(p), s);
            let first = state.evaluations.is_empty();
            state.evaluations.push((p, s));
            if first || s > state.best_score {
                state.best_score = s;
                *best = p;
            }
            state.best_trace.push(state.best_score);
            Some(s)
        };

    let Some(mut center_score) = score(start, &mut state, &mut best) else {
        return SearchOutcome {
            best,
            best_score: state.best_score,
            state,
        };
    };
    while state.step >= config.min_step {
        let mut improved: Option<((f64, f64), f64)> = None;
        let mut exhausted = false;
        for p in neighbors(state.center, state.step, config.axes) {
            match score(p, &mut state, &mut best) {
                Some(s) => {
                    if s > center_score && improved.is_none_or(|(_, b)| s > b) {
                        improved = Some((p, s));
                    }
                }
                None => {
                    exhausted = true;
                    break;
                }
            }
        }
        if let Some((p, s)) = improved {
            state.center = p;
            center_score = s;
        } else if !exhausted {
            state.step /= 2.0;
        }
        if exhausted {
            break;
        }
    }
    SearchOutcome {
        best,
        best_score: state.best_score,
        state,
    }
}
