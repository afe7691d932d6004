//! Dense symmetric edge storage.

use serde::{Deserialize, Serialize};

/// Index of the unordered pair `{i, j}`, `i != j`, in the packed lower triangle.
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    b * (b - 1) / 2 + a
}

/// Number of unordered pairs on `n` vertices.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Symmetric boolean relation on unordered vertex pairs without self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSet {
    n: usize,
    active: Vec<bool>,
    count: usize,
}

impl EdgeSet {
    pub fn empty(n: usize) -> Self {
        Self { n, active: vec![false; pair_count(n)], count: 0 }
    }

    pub fn complete(n: usize) -> Self {
        Self { n, active: vec![true; pair_count(n)], count: pair_count(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of active pairs.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn density(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.count as f64 / pair_count(self.n) as f64
        }
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i != j && self.active[pair_index(i, j)]
    }

    #[inline]
    pub fn contains_pair(&self, pair: usize) -> bool {
        self.active[pair]
    }

    /// Sets the state of `{i, j}` and reports whether it changed.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, on: bool) -> bool {
        assert!(i != j, "self-loop {i}");
        self.set_pair(pair_index(i, j), on)
    }

    #[inline]
    pub fn set_pair(&mut self, pair: usize, on: bool) -> bool {
        let slot = &mut self.active[pair];
        if *slot == on {
            return false;
        }
        *slot = on;
        if on {
            self.count += 1;
        } else {
            self.count -= 1;
        }
        true
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.contains(i, j))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbours(i).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for (i, j) in self.edges() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Active pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n).flat_map(move |b| (0..b).filter(move |&a| self.active[pair_index(a, b)]).map(move |a| (a, b)))
    }

    /// Number of pairs on which the two sets differ.
    pub fn symmetric_difference(&self, other: &EdgeSet) -> usize {
        assert_eq!(self.n, other.n, "edge sets over different vertex counts");
        self.active.iter().zip(&other.active).filter(|(a, b)| a != b).count()
    }
}
