use crate::error::{Error, Result};

/// Partition of `[0, n_nodes)` into known and unknown nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownSet {
    known: Vec<usize>,
    mask: Vec<bool>,
}

impl KnownSet {
    /// Indices may arrive in any order; duplicates are collapsed.
    pub fn new(n_nodes: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; n_nodes];
        for i in indices {
            if i >= n_nodes {
                return Err(Error::input(format!(
                    "known index {i} out of range for {n_nodes} nodes"
                )));
            }
            mask[i] = true;
        }
        let known = (0..n_nodes).filter(|&i| mask[i]).collect();
        Ok(KnownSet { known, mask })
    }

    pub fn all(n_nodes: usize) -> Self {
        KnownSet {
            known: (0..n_nodes).collect(),
            mask: vec![true; n_nodes],
        }
    }

    pub fn none(n_nodes: usize) -> Self {
        KnownSet {
            known: Vec::new(),
            mask: vec![false; n_nodes],
        }
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.mask.len()
    }

    /// Sorted known indices.
    #[inline]
    pub fn known(&self) -> &[usize] {
        &self.known
    }

    /// Sorted unknown indices.
    pub fn unknown(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| !self.mask[i]).collect()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// Diagonal of the known-node selector.
    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_node_range() {
        let k = KnownSet::new(6, [4, 1, 4, 0]).unwrap();
        assert_eq!(k.known(), &[0, 1, 4]);
        assert_eq!(k.unknown(), vec![2, 3, 5]);
        assert!(k.contains(4) && !k.contains(5));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(KnownSet::new(3, [3]).is_err());
    }
}
