//! Reconstruction quality metrics.
//!
//! Ranking metrics treat each node's feature dimensions as a ranked list:
//! dimensions are sorted by predicted score, highest first, ties going to the
//! lower dimension index. Nodes without any positive dimension are skipped.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecPolicy};
use crate::matrix::FeatureMatrix;

pub const DEFAULT_KS: [usize; 3] = [10, 20, 50];

/// Kind of attribute being reconstructed, which decides the applicable metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Binary,
    Continuous,
}

impl FeatureKind {
    pub fn detect(z: &FeatureMatrix) -> Self {
        if z.is_binary() {
            FeatureKind::Binary
        } else {
            FeatureKind::Continuous
        }
    }
}

/// Metric values over one evaluation subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub recall_at: BTreeMap<usize, f64>,
    pub ndcg_at: BTreeMap<usize, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub corr: Option<f64>,
    pub n_eval_nodes: usize,
}

impl EvalReport {
    /// `key=value` lines in a fixed order.
    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.recall_at {
            let _ = writeln!(s, "recall@{k}={v}");
        }
        for (k, v) in &self.ndcg_at {
            let _ = writeln!(s, "ndcg@{k}={v}");
        }
        if let Some(v) = self.rmse {
            let _ = writeln!(s, "rmse={v}");
        }
        if let Some(v) = self.corr {
            let _ = writeln!(s, "corr={v}");
        }
        let _ = writeln!(s, "n_eval_nodes={}", self.n_eval_nodes);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn recall(&self, k: usize) -> Option<f64> {
        self.recall_at.get(&k).copied()
    }

    pub fn ndcg(&self, k: usize) -> Option<f64> {
        self.ndcg_at.get(&k).copied()
    }
}

/// Which metrics [`evaluate`] should compute.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRequest {
    pub ks: Vec<usize>,
    pub ranking: bool,
    pub rmse: bool,
    pub corr: bool,
}

impl MetricRequest {
    /// Ranking metrics for binary features, RMSE and CORR for continuous ones.
    pub fn for_kind(kind: FeatureKind, ks: &[usize]) -> Self {
        let binary = kind == FeatureKind::Binary;
        MetricRequest {
            ks: ks.to_vec(),
            ranking: binary,
            rmse: !binary,
            corr: !binary,
        }
    }
}

/// Computes the requested metrics for `predicted` against `truth`, both
/// restricted to the evaluation rows already.
pub fn evaluate(
    predicted: &FeatureMatrix,
    truth: &FeatureMatrix,
    request: &MetricRequest,
) -> Result<EvalReport> {
    let mut report = EvalReport {
        n_eval_nodes: truth.n_nodes(),
        ..Default::default()
    };
    if request.ranking {
        for &k in &request.ks {
            report
                .recall_at
                .insert(k, recall_at_k(predicted, truth, k)?);
            report.ndcg_at.insert(k, ndcg_at_k(predicted, truth, k)?);
        }
        report.n_eval_nodes = truth.rows().filter(|r| r.contains(&1.0)).count();
    }
    if request.rmse {
        report.rmse = Some(rmse(predicted, truth)?);
    }
    if request.corr {
        report.corr = Some(corr(predicted, truth)?);
    }
    Ok(report)
}

fn check_pair(predicted: &FeatureMatrix, truth: &FeatureMatrix) -> Result<()> {
    if predicted.shape() != truth.shape() {
        return Err(Error::input(format!(
            "prediction shape {:?} differs from truth shape {:?}",
            predicted.shape(),
            truth.shape()
        )));
    }
    if truth.n_nodes() == 0 {
        return Err(Error::input("empty evaluation set"));
    }
    Ok(())
}

fn check_ranking(predicted: &FeatureMatrix, truth: &FeatureMatrix, k: usize) -> Result<()> {
    check_pair(predicted, truth)?;
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if k > truth.n_features() {
        return Err(Error::input(format!(
            "k = {k} exceeds the {} feature dimensions",
            truth.n_features()
        )));
    }
    if !truth.is_binary() {
        return Err(Error::input("ranking metrics need binary ground truth"));
    }
    Ok(())
}

/// Dimension indices of the `k` highest scores, in rank order.
fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let by_rank =
        |&a: &usize, &b: &usize| -> Ordering { scores[b].total_cmp(&scores[a]).then(a.cmp(&b)) };
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, by_rank);
        idx.truncate(k);
    }
    idx.sort_unstable_by(by_rank);
    idx
}

/// Per-node values for nodes with at least one positive, in row order.
fn per_node_ranked<F>(
    predicted: &FeatureMatrix,
    truth: &FeatureMatrix,
    k: usize,
    f: F,
) -> Result<f64>
where
    F: Fn(&[usize], &[f64], usize) -> f64 + Sync + Send,
{
    check_ranking(predicted, truth, k)?;
    let rows: Vec<usize> = (0..truth.n_nodes()).collect();
    let values = exec::map_ordered(ExecPolicy::default(), &rows, |&i| {
        let t = truth.row(i);
        let positives = t.iter().filter(|&&v| v == 1.0).count();
        if positives == 0 {
            return None;
        }
        let top = top_k(predicted.row(i), k);
        Some(f(&top, t, positives))
    });
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values.into_iter().flatten() {
        sum += v;
        count += 1;
    }
    if count == 0 {
        return Err(Error::input(
            "no evaluable nodes: every truth row is all zero",
        ));
    }
    Ok(sum / count as f64)
}

/// Mean over nodes of `|top-k ∩ positives| / |positives|`.
pub fn recall_at_k(predicted: &FeatureMatrix, truth: &FeatureMatrix, k: usize) -> Result<f64> {
    per_node_ranked(predicted, truth, k, |top, t, positives| {
        let hits = top.iter().filter(|&&d| t[d] == 1.0).count();
        hits as f64 / positives as f64
    })
}

/// Mean over nodes of `DCG@k / IDCG@k` with binary relevance and
/// `1 / log2(rank + 1)` discounts.
pub fn ndcg_at_k(predicted: &FeatureMatrix, truth: &FeatureMatrix, k: usize) -> Result<f64> {
    per_node_ranked(predicted, truth, k, |top, t, positives| {
        let dcg: f64 = top
            .iter()
            .enumerate()
            .filter(|(_, &d)| t[d] == 1.0)
            .map(|(r, _)| 1.0 / ((r + 2) as f64).log2())
            .sum();
        let idcg: f64 = (0..positives.min(top.len()))
            .map(|r| 1.0 / ((r + 2) as f64).log2())
            .sum();
        dcg / idcg
    })
}

/// Root mean squared error over every (node, feature) cell.
pub fn rmse(predicted: &FeatureMatrix, truth: &FeatureMatrix) -> Result<f64> {
    check_pair(predicted, truth)?;
    let cells = predicted.as_slice().len();
    if cells == 0 {
        return Err(Error::input("no feature cells to compare"));
    }
    let sse: f64 = predicted
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sse / cells as f64).sqrt())
}

/// Mean over nodes of the Pearson correlation between predicted and true
/// feature vectors. A constant row on either side contributes 0.
pub fn corr(predicted: &FeatureMatrix, truth: &FeatureMatrix) -> Result<f64> {
    check_pair(predicted, truth)?;
    if truth.n_features() < 2 {
        return Err(Error::input(
            "correlation needs at least two feature dimensions",
        ));
    }
    let total: f64 = predicted
        .rows()
        .zip(truth.rows())
        .map(|(p, t)| pearson(p, t))
        .sum();
    Ok(total / truth.n_nodes() as f64)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    (cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn recall_examples() {
        let truth = m(&[&[1.0, 0.0, 1.0, 0.0]]);
        assert_eq!(
            recall_at_k(&m(&[&[0.9, 0.1, 0.8, 0.2]]), &truth, 2).unwrap(),
            1.0
        );
        assert_eq!(
            recall_at_k(&m(&[&[0.9, 0.8, 0.1, 0.2]]), &truth, 2).unwrap(),
            0.5
        );
    }

    #[test]
    fn ndcg_examples() {
        let truth = m(&[&[1.0, 0.0]]);
        let v = ndcg_at_k(&m(&[&[0.0, 1.0]]), &truth, 2).unwrap();
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((v - 0.6309).abs() < 1e-4);
        let perfect = ndcg_at_k(
            &m(&[&[0.3, 0.9, 0.8], &[0.5, 0.1, 0.2]]),
            &m(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 0.0]]),
            2,
        )
        .unwrap();
        assert_eq!(perfect, 1.0);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let truth = m(&[&[0.0, 1.0, 0.0]]);
        assert_eq!(
            recall_at_k(&m(&[&[0.5, 0.5, 0.5]]), &truth, 1).unwrap(),
            0.0
        );
        assert_eq!(
            recall_at_k(&m(&[&[0.5, 0.5, 0.5]]), &truth, 2).unwrap(),
            1.0
        );
    }

    #[test]
    fn zero_positive_rows_skipped() {
        let truth = m(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        let pred = m(&[&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]]);
        assert_eq!(recall_at_k(&pred, &truth, 1).unwrap(), 1.0);
        let report = evaluate(
            &pred,
            &truth,
            &MetricRequest::for_kind(FeatureKind::Binary, &[1, 2]),
        )
        .unwrap();
        assert_eq!(report.n_eval_nodes, 1);
    }

    #[test]
    fn ranking_errors() {
        let truth = m(&[&[1.0, 0.0]]);
        let pred = m(&[&[1.0, 0.0]]);
        assert!(recall_at_k(&pred, &truth, 3).is_err());
        assert!(recall_at_k(&pred, &truth, 0).is_err());
        let zeros = m(&[&[0.0, 0.0]]);
        assert!(ndcg_at_k(&pred, &zeros, 1).is_err());
        assert!(recall_at_k(&pred, &m(&[&[0.5, 0.0]]), 1).is_err());
    }

    #[test]
    fn rmse_examples() {
        let t = m(&[&[1.0, 2.0], &[3.0, -4.0]]);
        assert_eq!(rmse(&t, &t).unwrap(), 0.0);
        let shifted = m(&[&[2.0, 3.0], &[4.0, -3.0]]);
        assert_eq!(rmse(&shifted, &t).unwrap(), 1.0);
        let empty = FeatureMatrix::zeros(0, 2);
        assert!(rmse(&empty, &empty).is_err());
    }

    #[test]
    fn corr_examples() {
        let t = m(&[&[1.0, 2.0, 4.0], &[0.0, -1.0, 3.0]]);
        assert!((corr(&t, &t).unwrap() - 1.0).abs() < 1e-12);
        let neg = m(&[&[-1.0, -2.0, -4.0], &[0.0, 1.0, -3.0]]);
        assert!((corr(&neg, &t).unwrap() + 1.0).abs() < 1e-12);
        let flat = m(&[&[5.0, 5.0, 5.0], &[0.0, -1.0, 3.0]]);
        assert!((corr(&flat, &t).unwrap() - 0.5).abs() < 1e-12);
        assert!(corr(&m(&[&[1.0]]), &m(&[&[1.0]])).is_err());
    }

    #[test]
    fn report_text_is_ordered() {
        let truth = m(&[&[1.0, 0.0, 1.0]]);
        let pred = m(&[&[0.2, 0.1, 0.9]]);
        let mut req = MetricRequest::for_kind(FeatureKind::Binary, &[2, 1]);
        req.rmse = true;
        let r = evaluate(&pred, &truth, &req).unwrap();
        let text = r.to_kv_text();
        let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
        assert_eq!(
            keys,
            [
                "recall@1",
                "recall@2",
                "ndcg@1",
                "ndcg@2",
                "rmse",
                "n_eval_nodes"
            ]
        );
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
