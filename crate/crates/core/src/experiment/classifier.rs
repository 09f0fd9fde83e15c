//! Multinomial logistic regression under stratified k-fold cross-validation.
//!
//! Stands in for a small MLP as the downstream consumer of reconstructed
//! features; only relative comparisons between engines are meaningful.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            epochs: 300,
            learning_rate: 0.5,
            l2: 1e-4,
        }
    }
}

/// Mean held-out accuracy of softmax regression over `folds` stratified folds.
pub fn train_linear_classifier(
    features: &FeatureMatrix,
    labels: &[usize],
    folds: usize,
    seed: u64,
    config: &ClassifierConfig,
) -> Result<f64> {
    let n = features.n_nodes();
    if labels.len() != n {
        return Err(Error::input(format!(
            "{} labels for {n} samples",
            labels.len()
        )));
    }
    if folds < 2 || folds > n {
        return Err(Error::input(format!(
            "cannot split {n} samples into {folds} folds"
        )));
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let present = {
        let mut seen = vec![false; n_classes];
        labels.iter().for_each(|&l| seen[l] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if present < 2 {
        return Err(Error::Degenerate("only one class present".into()));
    }

    let mut rng = seeding::rng(seed, seeding::CLASSIFIER);
    let mut fold_of = vec![0usize; n];
    let mut offset = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for (p, &i) in members.iter().enumerate() {
            fold_of[i] = (offset + p) % folds;
        }
        offset += members.len();
    }

    let mut total = 0.0;
    let mut used = 0;
    for fold in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        if test.is_empty() {
            continue;
        }
        let model = Softmax::fit(features, labels, &train, n_classes, config);
        let correct = test
            .iter()
            .filter(|&&i| model.predict(features.row(i)) == labels[i])
            .count();
        total += correct as f64 / test.len() as f64;
        used += 1;
    }
    Ok(total / used as f64)
}

struct Softmax {
    mean: Vec<f64>,
    inv_std: Vec<f64>,
    /// `n_features x n_classes`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
    n_classes: usize,
}

impl Softmax {
    fn fit(
        x: &FeatureMatrix,
        labels: &[usize],
        rows: &[usize],
        n_classes: usize,
        config: &ClassifierConfig,
    ) -> Self {
        let f = x.n_features();
        let m = rows.len() as f64;
        let mut mean = vec![0.0; f];
        for &i in rows {
            for (acc, &v) in mean.iter_mut().zip(x.row(i)) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; f];
        for &i in rows {
            for ((acc, &v), &mu) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let inv_std: Vec<f64> = var
            .iter()
            .map(|&v| {
                let s = (v / m).sqrt();
                if s > 1e-12 {
                    1.0 / s
                } else {
                    0.0
                }
            })
            .collect();

        let standardized: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| standardize(x.row(i), &mean, &inv_std))
            .collect();
        let mut model = Softmax {
            mean,
            inv_std,
            weights: vec![0.0; f * n_classes],
            bias: vec![0.0; n_classes],
            n_classes,
        };
        let mut grad_w = vec![0.0; f * n_classes];
        let mut grad_b = vec![0.0; n_classes];
        let mut probs = vec![0.0; n_classes];
        for _ in 0..config.epochs {
            grad_w.fill(0.0);
            grad_b.fill(0.0);
            for (xs, &i) in standardized.iter().zip(rows) {
                model.probabilities(xs, &mut probs);
                probs[labels[i]] -= 1.0;
                for (k, xv) in xs.iter().enumerate() {
                    if *xv == 0.0 {
                        continue;
                    }
                    let g = &mut grad_w[k * n_classes..(k + 1) * n_classes];
                    for (gc, &p) in g.iter_mut().zip(&probs) {
                        *gc += xv * p;
                    }
                }
                for (gb, &p) in grad_b.iter_mut().zip(&probs) {
                    *gb += p;
                }
            }
            let lr = config.learning_rate;
            for (w, g) in model.weights.iter_mut().zip(&grad_w) {
                *w -= lr * (g / m + config.l2 * *w);
            }
            for (b, g) in model.bias.iter_mut().zip(&grad_b) {
                *b -= lr * g / m;
            }
        }
        model
    }

    fn probabilities(&self, xs: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (k, &xv) in xs.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let w = &self.weights[k * self.n_classes..(k + 1) * self.n_classes];
            for (o, &wc) in out.iter_mut().zip(w) {
                *o += xv * wc;
            }
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            sum += *o;
        }
        out.iter_mut().for_each(|o| *o /= sum);
    }

    fn predict(&self, row: &[f64]) -> usize {
        let xs = standardize(row, &self.mean, &self.inv_std);
        let mut probs = vec![0.0; self.n_classes];
        self.probabilities(&xs, &mut probs);
        let mut best = 0;
        for c in 1..self.n_classes {
            if probs[c] > probs[best] {
                best = c;
            }
        }
        best
    }
}

fn standardize(row: &[f64], mean: &[f64], inv_std: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(mean)
        .zip(inv_std)
        .map(|((&v, &mu), &s)| (v - mu) * s)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn separable_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let c = i % 2;
            let center = if c == 0 { -2.0 } else { 2.0 };
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            rows.push([center + 0.5 * a, center + 0.5 * b]);
            labels.push(c);
        }
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let acc = train_linear_classifier(&x, &labels, 5, 0, &ClassifierConfig::default()).unwrap();
        assert!(acc >= 0.95, "accuracy {acc}");
    }

    #[test]
    fn one_hot_label_feature() {
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let rows: Vec<[f64; 3]> = labels
            .iter()
            .map(|&l| {
                let mut r = [0.0; 3];
                r[l] = 1.0;
                r
            })
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let acc = train_linear_classifier(&x, &labels, 5, 3, &ClassifierConfig::default()).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn uninformative_features_near_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let labels: Vec<usize> = (0..400).map(|_| rng.random_range(0..4)).collect();
        let rows: Vec<[f64; 5]> = (0..400)
            .map(|_| std::array::from_fn(|_| rng.sample(StandardNormal)))
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let acc = train_linear_classifier(&x, &labels, 5, 0, &ClassifierConfig::default()).unwrap();
        assert!((acc - 0.25).abs() < 0.1, "accuracy {acc}");
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = FeatureMatrix::zeros(10, 2);
        let err =
            train_linear_classifier(&x, &[0; 10], 5, 0, &ClassifierConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }
}
