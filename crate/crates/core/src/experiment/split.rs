use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::known::KnownSet;
use crate::matrix::FeatureMatrix;
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    /// Share of nodes whose attributes are observed.
    pub known_fraction: f64,
    /// Validation to test ratio over the unknown nodes.
    pub val_test_ratio: (usize, usize),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            seed: 0,
            known_fraction: 0.4,
            val_test_ratio: (1, 5),
        }
    }
}

impl SplitSpec {
    pub fn with_known_fraction(seed: u64, known_fraction: f64) -> Self {
        SplitSpec {
            seed,
            known_fraction,
            ..Default::default()
        }
    }
}

/// Disjoint known / validation / test cover of the node range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub known: KnownSet,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Random split: `round(known_fraction * N)` known nodes (at least one), the
/// rest divided between validation and test in the requested ratio.
/// Index lists are sorted.
pub fn make_split(n_nodes: usize, spec: &SplitSpec) -> Result<Split> {
    if n_nodes < 10 {
        return Err(Error::input(format!(
            "split needs at least 10 nodes, got {n_nodes}"
        )));
    }
    if !(spec.known_fraction > 0.0 && spec.known_fraction < 1.0) {
        return Err(Error::input(format!(
            "known fraction must lie in (0, 1), got {}",
            spec.known_fraction
        )));
    }
    let (rv, rt) = spec.val_test_ratio;
    if rv == 0 || rt == 0 {
        return Err(Error::input(
            "validation and test ratio terms must be positive",
        ));
    }
    // Tiny guard against 0.4 * 100 landing a hair under 40.
    let n_known = round_half_up(spec.known_fraction * n_nodes as f64 + 1e-9).max(1);
    let n_unknown = n_nodes.saturating_sub(n_known);
    let n_val = round_half_up(n_unknown as f64 * rv as f64 / (rv + rt) as f64 + 1e-9);
    let n_test = n_unknown.saturating_sub(n_val);
    if n_unknown == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::input(format!(
            "split of {n_nodes} nodes leaves an empty cell (known {n_known}, val {n_val}, test {n_test})"
        )));
    }
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.shuffle(&mut seeding::rng(spec.seed, seeding::SPLIT));
    let known = KnownSet::new(n_nodes, order[..n_known].iter().copied())?;
    let mut val = order[n_known..n_known + n_val].to_vec();
    let mut test = order[n_known + n_val..].to_vec();
    val.sort_unstable();
    test.sort_unstable();
    Ok(Split { known, val, test })
}

/// `z` on known rows, zero elsewhere.
pub fn mask_features(z: &FeatureMatrix, known: &KnownSet) -> FeatureMatrix {
    let mut out = FeatureMatrix::zeros(z.n_nodes(), z.n_features());
    for &i in known.known() {
        out.row_mut(i).copy_from_slice(z.row(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ratios_on_round_numbers() {
        let s = make_split(100, &SplitSpec::default()).unwrap();
        assert_eq!((s.known.len(), s.val.len(), s.test.len()), (40, 10, 50));
    }

    #[test]
    fn deterministic_and_disjoint() {
        let spec = SplitSpec::with_known_fraction(9, 0.3);
        let a = make_split(257, &spec).unwrap();
        assert_eq!(a, make_split(257, &spec).unwrap());
        let mut seen = vec![0u8; 257];
        for &i in a.known.known().iter().chain(&a.val).chain(&a.test) {
            seen[i] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_ne!(a, make_split(257, &SplitSpec { seed: 10, ..spec }).unwrap());
    }

    #[test]
    fn extreme_missing_rate() {
        let s = make_split(100, &SplitSpec::with_known_fraction(0, 0.01)).unwrap();
        assert_eq!(s.known.len(), 1);
        assert_eq!(s.val.len() + s.test.len(), 99);
    }

    #[test]
    fn degenerate_sizes_rejected() {
        assert!(make_split(9, &SplitSpec::default()).is_err());
        assert!(make_split(10, &SplitSpec::with_known_fraction(0, 0.96)).is_err());
        assert!(make_split(100, &SplitSpec::with_known_fraction(0, 1.0)).is_err());
    }

    #[test]
    fn masking() {
        let z = FeatureMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(mask_features(&z, &KnownSet::all(3)), z);
        assert_eq!(
            mask_features(&z, &KnownSet::none(3)),
            FeatureMatrix::zeros(3, 2)
        );
        let m = mask_features(&z, &KnownSet::new(3, [1]).unwrap());
        assert_eq!(m.row(0), &[0.0, 0.0]);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.row(2), &[0.0, 0.0]);
    }
}
