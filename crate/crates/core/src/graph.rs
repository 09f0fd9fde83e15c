//! Undirected graph with a symmetrically normalized adjacency in CSR form.

use crate::error::{Error, Result};
use crate::exec::{self, ExecPolicy};
use crate::matrix::FeatureMatrix;

/// Immutable undirected graph.
///
/// Stores `D^{-1/2} A D^{-1/2}` in compressed rows. Isolated nodes get a zero
/// row and column; no self-loops are added.
#[derive(Debug, Clone)]
pub struct Graph {
    n_nodes: usize,
    /// Deduplicated edges with `u < v`, sorted.
    edges: Vec<(u32, u32)>,
    degree: Vec<u32>,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl Graph {
    /// Builds the graph from an undirected edge list. Duplicate edges and
    /// either orientation of the same pair collapse to one edge; self-loops
    /// are dropped.
    pub fn new(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::input("graph must have at least one node"));
        }
        if n_nodes > u32::MAX as usize {
            return Err(Error::Capability(format!(
                "{n_nodes} nodes exceeds the 32-bit index space"
            )));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            if u != v {
                canon.push((u.min(v) as u32, u.max(v) as u32));
            }
        }
        canon.sort_unstable();
        canon.dedup();

        let mut degree = vec![0u32; n_nodes];
        for &(u, v) in &canon {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n_nodes + 1);
        row_ptr.push(0usize);
        for &d in &degree {
            row_ptr.push(row_ptr.last().unwrap() + d as usize);
        }
        let nnz = *row_ptr.last().unwrap();
        let mut col_idx = vec![0u32; nnz];
        let mut cursor = row_ptr[..n_nodes].to_vec();
        for &(u, v) in &canon {
            col_idx[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
        }
        for &(u, v) in &canon {
            col_idx[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for i in 0..n_nodes {
            col_idx[row_ptr[i]..row_ptr[i + 1]].sort_unstable();
        }

        let mut values = vec![0.0; nnz];
        for i in 0..n_nodes {
            for p in row_ptr[i]..row_ptr[i + 1] {
                let j = col_idx[p] as usize;
                // Integer product commutes exactly, so (i, j) and (j, i) match bitwise.
                let dd = degree[i] as u64 * degree[j] as u64;
                values[p] = 1.0 / (dd as f64).sqrt();
            }
        }

        Ok(Graph {
            n_nodes,
            edges: canon,
            degree,
            row_ptr,
            col_idx,
            values,
        })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    /// Stored entries of row `i`: neighbor indices and their normalized weights.
    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    /// Entry `(i, j)` of the normalized adjacency; 0 when no edge.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Number of stored entries (twice the edge count).
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Writes row `i` of `Ã x` into `out`. Neighbors are visited in ascending
    /// index order so the result is reproducible.
    #[inline]
    pub(crate) fn gather_row(&self, x: &[f64], n_features: usize, i: usize, out: &mut [f64]) {
        self.gather_row_cols(x, n_features, i, 0, out);
    }

    /// Columns `first_col .. first_col + out.len()` of row `i` of `Ã x`.
    #[inline]
    pub(crate) fn gather_row_cols(
        &self,
        x: &[f64],
        n_features: usize,
        i: usize,
        first_col: usize,
        out: &mut [f64],
    ) {
        const LANES: usize = 8;
        let width = out.len();
        let (cols, vals) = self.row(i);
        let base = first_col;
        let mut c = 0;
        while c + LANES <= width {
            let mut acc = [0.0f64; LANES];
            for (&j, &w) in cols.iter().zip(vals) {
                let start = j as usize * n_features + base + c;
                let src: &[f64; LANES] = x[start..start + LANES].try_into().unwrap();
                for l in 0..LANES {
                    acc[l] += w * src[l];
                }
            }
            out[c..c + LANES].copy_from_slice(&acc);
            c += LANES;
        }
        if c < width {
            let tail = &mut out[c..];
            let rest = tail.len();
            tail.fill(0.0);
            for (&j, &w) in cols.iter().zip(vals) {
                let start = j as usize * n_features + base + c;
                for (o, &v) in tail.iter_mut().zip(&x[start..start + rest]) {
                    *o += w * v;
                }
            }
        }
    }

    /// `Ã x` with the default execution policy.
    pub fn propagate(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.propagate_with(ExecPolicy::default(), x)
    }

    pub fn propagate_with(&self, policy: ExecPolicy, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        x.check_shape(self.n_nodes, "feature matrix")?;
        let f = x.n_features();
        let mut out = FeatureMatrix::zeros(self.n_nodes, f);
        if f == 0 {
            return Ok(out);
        }
        let src = x.as_slice();
        exec::map_row_blocks(policy, out.as_mut_slice(), f, |first, block| {
            for (r, dst) in block.chunks_exact_mut(f).enumerate() {
                self.gather_row(src, f, first + r, dst);
            }
        });
        Ok(out)
    }

    /// Dense copy of the normalized adjacency, for small verification problems.
    pub fn dense_adjacency(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n_nodes]; self.n_nodes];
        for (i, row) in m.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                row[j as usize] = w;
            }
        }
        m
    }
}

/// Column sums of one block of rows, accumulated top to bottom.
#[inline]
pub(crate) fn block_column_sums(block: &[f64], n_features: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n_features];
    for row in block.chunks_exact(n_features) {
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    sums
}

/// Folds per-block column sums in block order and divides by `n`.
pub(crate) fn reduce_means(partials: &[Vec<f64>], n_features: usize, n: usize) -> Vec<f64> {
    let mut total = vec![0.0; n_features];
    for p in partials {
        for (t, &v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let inv = 1.0 / n as f64;
    total.iter_mut().for_each(|t| *t *= inv);
    total
}

/// Mean of every feature column.
pub fn column_means(x: &FeatureMatrix) -> Result<Vec<f64>> {
    column_means_with(ExecPolicy::default(), x)
}

pub fn column_means_with(policy: ExecPolicy, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.n_nodes() == 0 {
        return Err(Error::input("column means of an empty matrix"));
    }
    let f = x.n_features();
    if f == 0 {
        return Ok(Vec::new());
    }
    let partials = exec::map_row_blocks_ref(policy, x.as_slice(), f, |_, block| {
        block_column_sums(block, f)
    });
    Ok(reduce_means(&partials, f, x.n_nodes()))
}
