//! Row-blocked execution with an optional rayon backend.
//!
//! Work is always split into fixed-size row blocks and any per-block partial
//! results are combined in block order, so the sequential and parallel paths
//! produce bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per work unit. Reductions are grouped at this granularity.
pub const ROW_BLOCK: usize = 256;

/// How row-parallel kernels are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    Sequential,
    /// Rayon's current pool. Falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// True when this policy will actually fan out work.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }
}

/// Applies `f(first_row, block)` to every row block of `data`,
/// where a row holds `row_len` values, and collects the results in block order.
pub(crate) fn map_row_blocks<T, F>(
    policy: ExecPolicy,
    data: &mut [f64],
    row_len: usize,
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut [f64]) -> T + Sync + Send,
{
    let chunk = (ROW_BLOCK * row_len).max(1);
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        return data
            .par_chunks_mut(chunk)
            .enumerate()
            .map(|(b, block)| f(b * ROW_BLOCK, block))
            .collect();
    }
    let _ = policy;
    data.chunks_mut(chunk)
        .enumerate()
        .map(|(b, block)| f(b * ROW_BLOCK, block))
        .collect()
}

/// Read-only counterpart of [`map_row_blocks`].
pub(crate) fn map_row_blocks_ref<T, F>(
    policy: ExecPolicy,
    data: &[f64],
    row_len: usize,
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &[f64]) -> T + Sync + Send,
{
    let chunk = (ROW_BLOCK * row_len).max(1);
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        return data
            .par_chunks(chunk)
            .enumerate()
            .map(|(b, block)| f(b * ROW_BLOCK, block))
            .collect();
    }
    let _ = policy;
    data.chunks(chunk)
        .enumerate()
        .map(|(b, block)| f(b * ROW_BLOCK, block))
        .collect()
}

/// Maps `f` over `items`, in parallel when the policy allows, preserving order.
pub fn map_ordered<I, T, F>(policy: ExecPolicy, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = policy;
    items.iter().map(f).collect()
}
