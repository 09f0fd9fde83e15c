use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `n_nodes x n_features` matrix of node attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_nodes: usize,
    n_features: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(n_nodes: usize, n_features: usize) -> Self {
        FeatureMatrix {
            n_nodes,
            n_features,
            values: vec![0.0; n_nodes * n_features],
        }
    }

    pub fn from_vec(n_nodes: usize, n_features: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_nodes * n_features {
            return Err(Error::input(format!(
                "expected {n_nodes}x{n_features} = {} values, got {}",
                n_nodes * n_features,
                values.len()
            )));
        }
        Ok(FeatureMatrix {
            n_nodes,
            n_features,
            values,
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_features = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_features {
                return Err(Error::input(format!(
                    "row {i} has {} values, expected {n_features}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(FeatureMatrix {
            n_nodes: rows.len(),
            n_features,
            values,
        })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn get(&self, i: usize, f: usize) -> f64 {
        self.values[i * self.n_features + f]
    }

    #[inline]
    pub fn set(&mut self, i: usize, f: usize, v: f64) {
        self.values[i * self.n_features + f] = v;
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_nodes).map(move |i| self.row(i))
    }

    /// New matrix made of the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_features);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        FeatureMatrix {
            n_nodes: rows.len(),
            n_features: self.n_features,
            values,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// True when every entry is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &FeatureMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_nodes, self.n_features)
    }

    pub(crate) fn check_shape(&self, n_nodes: usize, what: &str) -> Result<()> {
        if self.n_nodes != n_nodes {
            return Err(Error::input(format!(
                "{what} has {} rows but the graph has {n_nodes} nodes",
                self.n_nodes
            )));
        }
        Ok(())
    }
}
