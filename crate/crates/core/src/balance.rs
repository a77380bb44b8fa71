//! Balance predicates and the collapse operator on triple-indexed vectors and
//! matrices. Coordinates `(s, A, t)` use the product numbering
//! `(s * n + A) * d + t`. All comparisons are exact.

use num_traits::Zero;

use crate::exactmath::{RatMatrix, Rational};
use crate::product::triple_index;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BalanceError {
    #[error("input is not balanced")]
    NotBalanced,
    #[error("expected {expected} coordinates, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleVector {
    d: usize,
    n: usize,
    values: Vec<Rational>,
}

impl TripleVector {
    pub fn new(d: usize, n: usize, values: Vec<Rational>) -> Result<Self, BalanceError> {
        let expected = d * d * n;
        if values.len() != expected {
            return Err(BalanceError::ShapeMismatch { expected, got: values.len() });
        }
        Ok(TripleVector { d, n, values })
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        TripleVector { d, n, values: vec![Rational::zero(); d * d * n] }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.d, self.n)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, s: usize, a: usize, t: usize) -> &Rational {
        &self.values[triple_index(self.d, self.n, s, a, t)]
    }

    pub fn set(&mut self, s: usize, a: usize, t: usize, value: Rational) {
        self.values[triple_index(self.d, self.n, s, a, t)] = value;
    }

    /// `sum_t y[(s, A, t)]`.
    pub fn row_sum(&self, s: usize, a: usize) -> Rational {
        (0..self.d).fold(Rational::zero(), |acc, t| acc + self.get(s, a, t))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleMatrix {
    d: usize,
    n: usize,
    values: RatMatrix,
}

impl TripleMatrix {
    pub fn new(d: usize, n: usize, values: RatMatrix) -> Result<Self, BalanceError> {
        let expected = d * d * n;
        if values.rows() != expected || values.cols() != expected {
            return Err(BalanceError::ShapeMismatch { expected, got: values.rows().max(values.cols()) });
        }
        Ok(TripleMatrix { d, n, values })
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        let m = d * d * n;
        TripleMatrix { d, n, values: RatMatrix::zeros(m, m) }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.d, self.n)
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.values
    }

    pub fn get(&self, row: (usize, usize, usize), col: (usize, usize, usize)) -> &Rational {
        let i = triple_index(self.d, self.n, row.0, row.1, row.2);
        let j = triple_index(self.d, self.n, col.0, col.1, col.2);
        &self.values[(i, j)]
    }

    /// `sum_t M[(s B t), (u C v)]`.
    fn column_block_sum(&self, s: usize, b: usize, u: usize, c: usize, v: usize) -> Rational {
        (0..self.d).fold(Rational::zero(), |acc, t| acc + self.get((s, b, t), (u, c, v)))
    }

    /// `sum_{t,u} M[(s B t), (u C v)]`.
    fn block_sum(&self, s: usize, b: usize, c: usize, v: usize) -> Rational {
        (0..self.d).fold(Rational::zero(), |acc, u| acc + self.column_block_sum(s, b, u, c, v))
    }
}

pub fn is_balanced_vector(y: &TripleVector) -> bool {
    (0..y.n).all(|a| {
        let first = y.row_sum(0, a);
        (1..y.d).all(|s| y.row_sum(s, a) == first)
    })
}

pub fn is_balanced_matrix(m: &TripleMatrix) -> bool {
    let (d, n) = (m.d, m.n);
    for b in 0..n {
        for c in 0..n {
            for s in 0..d {
                for u in 0..d {
                    let first = m.column_block_sum(s, b, u, c, 0);
                    if (1..d).any(|v| m.column_block_sum(s, b, u, c, v) != first) {
                        return false;
                    }
                }
            }
            if d > 0 {
                let first = m.block_sum(0, b, c, 0);
                for s in 0..d {
                    for v in 0..d {
                        if m.block_sum(s, b, c, v) != first {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Strict: the common row sum per nonterminal. Lenient: the minimum over `s`.
pub fn collapse_vector(y: &TripleVector, strict: bool) -> Result<Vec<Rational>, BalanceError> {
    if strict && !is_balanced_vector(y) {
        return Err(BalanceError::NotBalanced);
    }
    Ok((0..y.n)
        .map(|a| (0..y.d).map(|s| y.row_sum(s, a)).min().unwrap_or_else(Rational::zero))
        .collect())
}

pub fn collapse_matrix(m: &TripleMatrix) -> Result<RatMatrix, BalanceError> {
    if !is_balanced_matrix(m) {
        return Err(BalanceError::NotBalanced);
    }
    let mut out = RatMatrix::zeros(m.n, m.n);
    if m.d > 0 {
        for b in 0..m.n {
            for c in 0..m.n {
                out[(b, c)] = m.block_sum(0, b, c, 0);
            }
        }
    }
    Ok(out)
}

/// `max_A (max_s - min_s) sum_t y[(s A t)]`; zero exactly when balanced.
pub fn balance_defect(y: &TripleVector) -> Rational {
    (0..y.n)
        .map(|a| {
            let sums: Vec<Rational> = (0..y.d).map(|s| y.row_sum(s, a)).collect();
            match (sums.iter().max(), sums.iter().min()) {
                (Some(hi), Some(lo)) => hi - lo,
                _ => Rational::zero(),
            }
        })
        .max()
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{int, rat};

    #[test]
    fn zero_vector() {
        let y = TripleVector::zeros(3, 2);
        assert!(is_balanced_vector(&y));
        assert_eq!(collapse_vector(&y, true).unwrap(), vec![int(0), int(0)]);
        assert_eq!(balance_defect(&y), int(0));
    }

    #[test]
    fn unbalanced_vector() {
        let mut y = TripleVector::zeros(2, 1);
        y.set(0, 0, 0, int(1));
        assert!(!is_balanced_vector(&y));
        assert_eq!(collapse_vector(&y, true), Err(BalanceError::NotBalanced));
        assert_eq!(balance_defect(&y), int(1));
    }

    #[test]
    fn lenient_takes_minimum() {
        let mut y = TripleVector::zeros(2, 1);
        y.set(0, 0, 0, int(1));
        y.set(1, 0, 0, int(1));
        y.set(1, 0, 1, int(1));
        assert_eq!(collapse_vector(&y, false).unwrap(), vec![int(1)]);
    }

    #[test]
    fn balanced_vector_collapses() {
        let mut y = TripleVector::zeros(2, 1);
        y.set(0, 0, 1, rat(1, 2));
        y.set(1, 0, 0, rat(1, 4));
        y.set(1, 0, 1, rat(1, 4));
        assert_eq!(collapse_vector(&y, true).unwrap(), vec![rat(1, 2)]);
    }

    #[test]
    fn shape_checked() {
        assert_eq!(TripleVector::new(2, 1, vec![int(0)]), Err(BalanceError::ShapeMismatch { expected: 4, got: 1 }));
    }

    #[test]
    fn zero_matrix() {
        let m = TripleMatrix::zeros(2, 2);
        assert!(is_balanced_matrix(&m));
        assert_eq!(collapse_matrix(&m).unwrap(), RatMatrix::zeros(2, 2));
    }

    #[test]
    fn single_entry_matrix() {
        let mut raw = RatMatrix::zeros(4, 4);
        raw[(0, 1)] = int(1);
        let m = TripleMatrix::new(2, 1, raw).unwrap();
        assert!(!is_balanced_matrix(&m));
        assert_eq!(collapse_matrix(&m), Err(BalanceError::NotBalanced));
    }

    #[test]
    fn identity_collapses_to_identity() {
        let m = TripleMatrix::new(2, 1, RatMatrix::identity(4)).unwrap();
        assert!(is_balanced_matrix(&m));
        // Per (s, v) exactly one (t, u) = (v, s) term is on the diagonal.
        assert_eq!(collapse_matrix(&m).unwrap(), RatMatrix::identity(1));
    }

    #[test]
    fn all_ones_block() {
        // M[(sAt),(uAv)] = 1 for every pair: each (s, v) block sums d^2 entries.
        let mut raw = RatMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                raw[(i, j)] = int(1);
            }
        }
        let m = TripleMatrix::new(2, 1, raw).unwrap();
        assert_eq!(collapse_matrix(&m).unwrap()[(0, 0)], int(4));
    }
}
