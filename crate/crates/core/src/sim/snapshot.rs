use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::graph::EdgeSet;
use crate::model::{type_of, Opinion};

/// Frozen state of a simulation at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub opinions: Vec<Opinion>,
    pub y: Vec<f64>,
    pub y0: Vec<f64>,
    /// `y - e^{-t} y0`.
    pub types: Vec<f64>,
    /// The graph vertices interact through (the resulting graph for model 3).
    pub graph: EdgeSet,
    /// Layered copies, empty unless model 3.
    pub layers: Vec<EdgeSet>,
    /// `permutation[rank]` is the vertex placed at position `rank`.
    pub permutation: Vec<usize>,
}

impl Snapshot {
    pub fn new(t: f64, opinions: Vec<Opinion>, y: Vec<f64>, y0: Vec<f64>, graph: EdgeSet, layers: Vec<EdgeSet>) -> Self {
        let types: Vec<f64> = y.iter().zip(&y0).map(|(&y, &y0)| type_of(y, y0, t)).collect();
        let permutation = canonical_permutation(&opinions, &types);
        Self { t, opinions, y, y0, types, graph, layers, permutation }
    }

    pub fn n(&self) -> usize {
        self.opinions.len()
    }

    pub fn n_plus(&self) -> usize {
        self.opinions.iter().filter(|o| o.is_plus()).count()
    }

    pub fn frac_plus(&self) -> f64 {
        self.n_plus() as f64 / self.n() as f64
    }

    /// Writes `vertex,rank,opinion,y,y0,type` rows in vertex order.
    pub fn write_vertices_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut rank = vec![0; self.n()];
        for (r, &v) in self.permutation.iter().enumerate() {
            rank[v] = r;
        }
        writeln!(w, "vertex,rank,opinion,y,y0,type")?;
        for i in 0..self.n() {
            let o = if self.opinions[i].is_plus() { "+" } else { "-" };
            writeln!(w, "{i},{},{o},{},{},{}", rank[i], self.y[i], self.y0[i], self.types[i])?;
        }
        Ok(())
    }
}

/// Lexicographic labelling: `Plus` before `Minus`, then increasing type,
/// ties by original index. Returns the vertex at each rank.
pub fn canonical_permutation(opinions: &[Opinion], types: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..opinions.len()).collect();
    order.sort_by(|&a, &b| {
        opinions[a].cmp(&opinions[b]).then(types[a].total_cmp(&types[b])).then(a.cmp(&b))
    });
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use Opinion::{Minus, Plus};

    #[test]
    fn hand_checked_order() {
        // vertices 1, 2, 3 in one-based terms
        let p = canonical_permutation(&[Minus, Plus, Plus], &[0.1, 0.9, 0.2]);
        assert_eq!(p, vec![2, 1, 0]);
    }

    #[test]
    fn all_plus_sorts_by_type() {
        let t = [0.5, 0.1, 0.3, 0.9];
        let p = canonical_permutation(&[Plus; 4], &t);
        assert!(p.windows(2).all(|w| t[w[0]] <= t[w[1]]));
    }

    #[test]
    fn ties_break_by_index_and_inverse_composes_to_identity() {
        let o = [Plus, Minus, Plus, Minus, Plus];
        let t = [0.2, 0.2, 0.2, 0.1, 0.2];
        let p = canonical_permutation(&o, &t);
        assert_eq!(p, vec![0, 2, 4, 3, 1]);
        let mut inv = vec![0; p.len()];
        for (r, &v) in p.iter().enumerate() {
            inv[v] = r;
        }
        for i in 0..p.len() {
            assert_eq!(p[inv[i]], i);
            assert_eq!(inv[p[i]], i);
        }
    }
}
