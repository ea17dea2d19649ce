//! Symmetric pairwise storage.
//!
//! All pairwise statistics in this crate (counts, co-frequencies,
//! z-scores, distances) are symmetric with an unused diagonal, so they
//! are stored as the strict upper triangle indexed by unordered pairs.

use serde::{Deserialize, Serialize};

/// A symmetric `n x n` matrix with unused diagonal, stored as the strict
/// upper triangle. `get(i, j)` and `get(j, i)` address the same cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> SymMatrix<T> {
    pub fn filled(n: usize, value: T) -> Self {
        let len = n * n.saturating_sub(1) / 2;
        SymMatrix {
            n,
            data: vec![value; len],
        }
    }
}

impl<T> SymMatrix<T> {
    /// Number of rows (= columns).
    pub fn size(&self) -> usize {
        self.n
    }

    /// Number of stored (unordered) pairs, `C(n, 2)`.
    pub fn n_pairs(&self) -> usize {
        self.data.len()
    }

    fn index(&self, i: usize, j: usize) -> usize {
        assert!(i != j, "diagonal of a SymMatrix is not stored");
        assert!(i < self.n && j < self.n, "pair index out of bounds");
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        hi * (hi - 1) / 2 + lo
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[self.index(i, j)]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        let idx = self.index(i, j);
        &mut self.data[idx]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let idx = self.index(i, j);
        self.data[idx] = value;
    }

    /// Iterate over all unordered pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let n = self.n;
        (1..n)
            .flat_map(move |j| (0..j).map(move |i| (i, j)))
            .zip(self.data.iter())
            .map(|((i, j), v)| (i, j, v))
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Build from a function of the pair `(i, j)`, `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 1..n {
            for i in 0..j {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }
}

/// Number of unordered pairs among `n` items.
pub fn n_choose_2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storage_is_symmetric() {
        let mut m = SymMatrix::filled(4, 0i32);
        m.set(2, 0, 7);
        assert_eq!(*m.get(0, 2), 7);
        assert_eq!(*m.get(2, 0), 7);
        assert_eq!(m.n_pairs(), 6);
    }

    #[test]
    fn pairs_iterates_in_index_order() {
        let m = SymMatrix::from_fn(4, |i, j| (i, j));
        let seen: Vec<_> = m.pairs().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(seen, vec![(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]);
        for (i, j, v) in m.pairs() {
            assert_eq!(*v, (i, j));
        }
    }

    #[test]
    #[should_panic(expected = "diagonal")]
    fn diagonal_access_panics() {
        let m = SymMatrix::filled(3, 0u8);
        let _ = m.get(1, 1);
    }
}
