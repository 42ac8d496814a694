//! Sparse rational matrices for tensor-product slot operators.
//!
//! Operators acting in one slot of a large tensor product are extremely
//! sparse (a Kronecker product of a small dense matrix with identities),
//! so products and commutators are far cheaper in a row-map representation
//! than dense. Rows are `BTreeMap<col, value>` so iteration order — and
//! therefore every downstream computation — is deterministic.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::rat::{QMat, Q};

/// Sparse matrix over the rationals; one ordered column map per row.
#[derive(Clone, PartialEq, Eq)]
pub struct SpMat {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, Q>>,
}

impl std::fmt::Debug for SpMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SpMat {}x{} ({} nnz)", self.rows, self.cols, self.nnz())
    }
}

impl SpMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SpMat {
            rows,
            cols,
            data: vec![BTreeMap::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i].insert(i, Q::from_integer(1.into()));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        assert!(r < self.rows && c < self.cols);
        if v.is_zero() {
            self.data[r].remove(&c);
        } else {
            self.data[r].insert(c, v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Q) {
        if v.is_zero() {
            return;
        }
        let entry = self.data[r].entry(c).or_insert_with(Q::zero);
        *entry += v;
        if entry.is_zero() {
            self.data[r].remove(&c);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.data[r].get(&c).cloned().unwrap_or_else(Q::zero)
    }

    pub fn row(&self, r: usize) -> &BTreeMap<usize, Q> {
        &self.data[r]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn from_dense(m: &QMat) -> Self {
        let mut out = Self::zeros(m.rows(), m.cols());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let v = m.at(r, c);
                if !v.is_zero() {
                    out.data[r].insert(c, v.clone());
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> QMat {
        let mut out = QMat::zeros(self.rows, self.cols);
        for (r, row) in self.data.iter().enumerate() {
            for (&c, v) in row {
                out.set(r, c, v.clone());
            }
        }
        out
    }

    pub fn transpose(&self) -> SpMat {
        let mut out = Self::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for (&c, v) in row {
                out.data[c].insert(r, v.clone());
            }
        }
        out
    }

    pub fn add(&self, other: &SpMat) -> SpMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (r, row) in other.data.iter().enumerate() {
            for (&c, v) in row {
                out.add_to(r, c, v);
            }
        }
        out
    }

    pub fn sub(&self, other: &SpMat) -> SpMat {
        self.add(&other.scale(&-Q::from_integer(1.into())))
    }

    pub fn scale(&self, s: &Q) -> SpMat {
        if s.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        for row in &mut out.data {
            for v in row.values_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn mul(&self, other: &SpMat) -> SpMat {
        assert_eq!(
            self.cols, other.rows,
            "mul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for (r, row) in self.data.iter().enumerate() {
            for (&k, x) in row {
                for (&c, y) in &other.data[k] {
                    out.add_to(r, c, &(x * y));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        self.data
            .iter()
            .map(|row| row.iter().map(|(&c, x)| x * &v[c]).sum::<Q>())
            .collect()
    }

    pub fn commutator(&self, other: &SpMat) -> SpMat {
        self.mul(other).sub(&other.mul(self))
    }

    /// Kronecker product, same index convention as `QMat::kron`.
    pub fn kron(&self, other: &SpMat) -> SpMat {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for (i, row_a) in self.data.iter().enumerate() {
            for (&j, x) in row_a {
                for (k, row_b) in other.data.iter().enumerate() {
                    for (&l, y) in row_b {
                        out.data[i * other.rows + k].insert(j * other.cols + l, x * y);
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Q {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qi;

    fn dense2(a: i64, b: i64, c: i64, d: i64) -> QMat {
        QMat::from_rows(vec![vec![qi(a), qi(b)], vec![qi(c), qi(d)]])
    }

    #[test]
    fn roundtrip_dense() {
        let m = dense2(1, 0, -3, 2);
        let s = SpMat::from_dense(&m);
        assert_eq!(s.nnz(), 3);
        assert_eq!(s.to_dense(), m);
    }

    #[test]
    fn mul_matches_dense() {
        let a = dense2(1, 2, 3, 4);
        let b = dense2(0, 1, -1, 2);
        let sa = SpMat::from_dense(&a);
        let sb = SpMat::from_dense(&b);
        assert_eq!(sa.mul(&sb).to_dense(), a.mul(&b));
    }

    #[test]
    fn kron_matches_dense() {
        let a = dense2(1, 2, 0, 1);
        let b = dense2(3, 0, 1, 1);
        let sa = SpMat::from_dense(&a);
        let sb = SpMat::from_dense(&b);
        assert_eq!(sa.kron(&sb).to_dense(), a.kron(&b));
    }

    #[test]
    fn add_cancels_to_zero() {
        let a = dense2(1, 2, 3, 4);
        let sa = SpMat::from_dense(&a);
        let diff = sa.sub(&sa);
        assert!(diff.is_zero());
        assert_eq!(diff.nnz(), 0);
    }

    #[test]
    fn commutator_of_commuting_is_zero() {
        let a = SpMat::from_dense(&dense2(1, 0, 0, 2));
        let b = SpMat::from_dense(&dense2(5, 0, 0, 7));
        assert!(a.commutator(&b).is_zero());
    }
}
