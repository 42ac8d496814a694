//! Exact rational scalars, dense matrices, and small polynomial helpers.
//!
//! Everything here is arbitrary-precision rational arithmetic: row
//! reduction, nullspaces, linear solves, inverses, characteristic
//! polynomials (Faddeev–LeVerrier), and rational root extraction. These
//! are the workhorses behind invariant subspaces, Shapovalov radicals,
//! residue-matrix spectra, and Frobenius recursions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::Result;

/// Exact rational scalar.
pub type Q = BigRational;

/// Rational from an integer.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational from numerator and denominator.
pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Dense matrix over the rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct QMat {
    rows: usize,
    cols: usize,
    a: Vec<Q>,
}

impl std::fmt::Debug for QMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.at(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            a: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        QMat {
            rows: r,
            cols: c,
            a: rows.into_iter().flatten().collect(),
        }
    }

    /// Build from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Q {
        &self.a[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        self.a[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn trace(&self) -> Q {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.at(i, i).clone()).sum()
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            a: self
                .a
                .iter()
                .zip(&other.a)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            a: self
                .a
                .iter()
                .zip(&other.a)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }

    pub fn neg(&self) -> QMat {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, s: &Q) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(
            self.cols, other.rows,
            "mul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = QMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let x = self.at(r, k);
                if x.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let y = other.at(k, c);
                    if y.is_zero() {
                        continue;
                    }
                    let v = out.at(r, c) + x * y;
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.at(r, c) * &v[c])
                    .sum::<Q>()
            })
            .collect()
    }

    /// Commutator `self * other - other * self`.
    pub fn commutator(&self, other: &QMat) -> QMat {
        self.mul(other).sub(&other.mul(self))
    }

    /// Kronecker product, row-major convention: `(A (x) B)[(i*p+k),(j*q+l)] = A[i,j] B[k,l]`.
    pub fn kron(&self, other: &QMat) -> QMat {
        let mut out = QMat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.at(i, j);
                if x.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let y = other.at(k, l);
                        if y.is_zero() {
                            continue;
                        }
                        out.set(i * other.rows + k, j * other.cols + l, x * y);
                    }
                }
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &QMat) -> QMat {
        assert_eq!(self.rows, other.rows);
        QMat::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.at(r, c).clone()
            } else {
                other.at(r, c - self.cols).clone()
            }
        })
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.cols);
        QMat::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self.at(r, c).clone()
            } else {
                other.at(r - self.rows, c).clone()
            }
        })
    }

    pub fn column(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn from_columns(cols: &[Vec<Q>]) -> QMat {
        let n = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        QMat::from_fn(r, n, |i, j| cols[j][i].clone())
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            // Find a pivot in this column at or below `row`.
            let mut piv = None;
            for r in row..self.rows {
                if !self.at(r, col).is_zero() {
                    piv = Some(r);
                    break;
                }
            }
            let Some(p) = piv else { continue };
            // Swap into place.
            if p != row {
                for c in 0..self.cols {
                    self.a.swap(row * self.cols + c, p * self.cols + c);
                }
            }
            // Normalize pivot row.
            let inv = {
                let pv = self.at(row, col).clone();
                Q::one() / pv
            };
            for c in col..self.cols {
                let v = self.at(row, c) * &inv;
                self.set(row, c, v);
            }
            // Eliminate everywhere else.
            for r in 0..self.rows {
                if r == row || self.at(r, col).is_zero() {
                    continue;
                }
                let f = self.at(r, col).clone();
                for c in col..self.cols {
                    let v = self.at(r, c) - &f * self.at(row, c);
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace, as columns of the returned matrix.
    ///
    /// Free variables are set to 1 one at a time in ascending column
    /// order, so the basis is deterministic.
    pub fn nullspace(&self) -> QMat {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut cols: Vec<Vec<Q>> = Vec::new();
        for &f in &free {
            let mut v = vec![Q::zero(); self.cols];
            v[f] = Q::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.at(ri, f).clone();
            }
            cols.push(v);
        }
        if cols.is_empty() {
            QMat::zeros(self.cols, 0)
        } else {
            QMat::from_columns(&cols)
        }
    }

    /// Solve `self * X = rhs` exactly.
    ///
    /// Returns the unique solution with free variables set to zero, or an
    /// error if the system is inconsistent. (For invertible `self` this is
    /// the exact solution.)
    pub fn solve(&self, rhs: &QMat) -> Result<QMat> {
        if self.rows != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "solve: {}x{} vs rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut aug = self.hstack(rhs);
        let pivots = aug.rref();
        // Any pivot in the rhs block means inconsistency.
        if pivots.iter().any(|&c| c >= self.cols) {
            return Err(Error::Singular("inconsistent linear system".into()));
        }
        let mut x = QMat::zeros(self.cols, rhs.cols);
        for (ri, &pc) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x.set(pc, c, aug.at(ri, self.cols + c).clone());
            }
        }
        Ok(x)
    }

    /// Exact inverse; errors if singular.
    pub fn inverse(&self) -> Result<QMat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = self.hstack(&QMat::identity(n));
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().take(n).enumerate().any(|(i, &c)| c != i) {
            return Err(Error::Singular(format!("{}x{} matrix not invertible", n, n)));
        }
        Ok(QMat::from_fn(n, n, |r, c| aug.at(r, n + c).clone()))
    }

    /// Characteristic polynomial by the Faddeev–LeVerrier recursion.
    ///
    /// Returns coefficients ascending in degree; the polynomial is monic of
    /// degree `n`: `p(x) = x^n + c_{n-1} x^{n-1} + ... + c_0`.
    pub fn charpoly(&self) -> Vec<Q> {
        assert!(self.is_square());
        let n = self.rows;
        // M_0 = I, c_n = 1; M_{m} = A M_{m-1} + c_{n-m+1} I ... use the
        // standard recursion: M1 = A, c_{n-1} = -tr(M1);
        // M_{m} = A (M_{m-1} + c_{n-m+1} I), c_{n-m} = -tr(M_m)/m.
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m_prev = QMat::identity(n);
        let mut c_prev = Q::one();
        for m in 1..=n {
            // M_m = A * (M_{m-1} + c_{n-m+1} I)
            let shifted = m_prev.add(&QMat::identity(n).scale(&c_prev)).clone();
            let mm = if m == 1 { self.clone() } else { self.mul(&shifted) };
            let c = -mm.trace() / qi(m as i64);
            coeffs[n - m] = c.clone();
            m_prev = mm;
            c_prev = c;
        }
        coeffs
    }

    /// Kernel of `self - lambda * I`, as columns.
    pub fn eigenspace(&self, lambda: &Q) -> QMat {
        assert!(self.is_square());
        let shifted = self.sub(&QMat::identity(self.rows).scale(lambda));
        shifted.nullspace()
    }

    /// Express each column of `vectors` in terms of the columns of `basis`
    /// (which must be independent): returns `X` with `basis * X = vectors`.
    pub fn express_in_basis(basis: &QMat, vectors: &QMat) -> Result<QMat> {
        basis.solve(vectors)
    }
}

/// Full rational eigendecomposition of a square matrix.
///
/// Returns `(eigenvalue, eigenspace-columns)` sorted by eigenvalue, and
/// errors with `NotDiagonalizable` if the characteristic polynomial has
/// irrational roots or the matrix is defective — downstream consumers
/// need a genuine eigenbasis, so a partial answer would be wrong.
pub fn rational_eigen(m: &QMat) -> Result<Vec<(Q, QMat)>> {
    assert!(m.is_square());
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let p = m.charpoly();
    let roots = rational_roots(&p);
    let algebraic: usize = roots.iter().map(|(_, m)| m).sum();
    if algebraic != n {
        return Err(Error::NotDiagonalizable(format!(
            "characteristic polynomial has only {} rational roots of {} required",
            algebraic, n
        )));
    }
    let mut out = Vec::new();
    let mut geometric = 0usize;
    for (root, _) in roots {
        let space = m.eigenspace(&root);
        geometric += space.cols();
        out.push((root, space));
    }
    if geometric != n {
        return Err(Error::NotDiagonalizable(format!(
            "matrix is defective: eigenspaces span {} of {} dimensions",
            geometric, n
        )));
    }
    Ok(out)
}

/// Simultaneous eigendecomposition of a commuting family.
///
/// Returns `(eigenvalue tuple, basis columns)` for each joint eigenspace,
/// ordered lexicographically by tuple. Errors if any operator fails to be
/// rationally diagonalizable on a subspace, or does not actually preserve
/// a joint eigenspace of its predecessors (i.e. the family does not
/// commute).
pub fn joint_eigenbasis(dim: usize, ops: &[QMat]) -> Result<Vec<(Vec<Q>, QMat)>> {
    let mut spaces: Vec<(Vec<Q>, QMat)> = vec![(Vec::new(), QMat::identity(dim))];
    for op in ops {
        let mut next = Vec::new();
        for (tuple, basis) in &spaces {
            // Restrict op to the subspace: basis * r = op * basis.
            let image = op.mul(basis);
            let r = basis.solve(&image).map_err(|_| {
                Error::NotDiagonalizable(
                    "operator does not preserve a joint eigenspace; family does not commute"
                        .into(),
                )
            })?;
            for (val, vecs) in rational_eigen(&r)? {
                let mut t = tuple.clone();
                t.push(val);
                next.push((t, basis.mul(&vecs)));
            }
        }
        spaces = next;
    }
    spaces.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(spaces)
}

/// Evaluate a polynomial (ascending coefficients) at a rational point.
pub fn poly_eval(p: &[Q], x: &Q) -> Q {
    let mut acc = Q::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Divide polynomial `p` by `(x - root)`, assuming `root` is a root.
/// Returns the quotient (ascending coefficients).
pub fn poly_deflate(p: &[Q], root: &Q) -> Result<Vec<Q>> {
    let n = p.len();
    if n < 2 {
        return Err(Error::Internal("cannot deflate constant polynomial".into()));
    }
    // Synthetic division.
    let mut q = vec![Q::zero(); n - 1];
    let mut carry = Q::zero();
    for i in (0..n).rev() {
        let v = &p[i] + &carry;
        if i == 0 {
            if !v.is_zero() {
                return Err(Error::Internal(format!(
                    "poly_deflate: {} is not a root (remainder {})",
                    root, v
                )));
            }
        } else {
            q[i - 1] = v.clone();
            carry = v * root;
        }
    }
    Ok(q)
}

/// All rational roots of a rational-coefficient polynomial, with
/// multiplicity, found by the rational root theorem after clearing
/// denominators. Returns pairs `(root, multiplicity)` sorted ascending.
///
/// Intended for small characteristic polynomials; divisor enumeration is
/// exhaustive.
pub fn rational_roots(p: &[Q]) -> Vec<(Q, usize)> {
    // Strip leading zero coefficients (highest degrees).
    let mut poly: Vec<Q> = p.to_vec();
    while poly.last().is_some_and(|c| c.is_zero()) {
        poly.pop();
    }
    if poly.len() <= 1 {
        return Vec::new();
    }
    let mut roots: Vec<(Q, usize)> = Vec::new();
    // Factor out x^m first.
    let mut zero_mult = 0usize;
    while poly.first().is_some_and(|c| c.is_zero()) {
        poly.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Q::zero(), zero_mult));
    }
    loop {
        if poly.len() <= 1 {
            break;
        }
        // Clear denominators to get integer coefficients.
        let lcm = poly
            .iter()
            .fold(BigInt::one(), |acc, c| num_integer::lcm(acc, c.denom().clone()));
        let ints: Vec<BigInt> = poly.iter().map(|c| (c * Q::from_integer(lcm.clone())).to_integer()).collect();
        let a0 = ints[0].clone();
        let an = ints.last().unwrap().clone();
        debug_assert!(!a0.is_zero() && !an.is_zero());
        let mut found = None;
        'outer: for p_div in divisors(&a0.abs()) {
            for q_div in divisors(&an.abs()) {
                for sign in [1i64, -1] {
                    let cand = Q::new(p_div.clone() * BigInt::from(sign), q_div.clone());
                    if poly_eval(&poly, &cand).is_zero() {
                        found = Some(cand);
                        break 'outer;
                    }
                }
            }
        }
        match found {
            Some(root) => {
                let mut mult = 0usize;
                while poly.len() > 1 && poly_eval(&poly, &root).is_zero() {
                    poly = poly_deflate(&poly, &root).expect("verified root");
                    mult += 1;
                }
                roots.push((root, mult));
            }
            None => break,
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    roots
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    // Exhaustive trial division; fine for the small integers that occur in
    // desk-scale characteristic polynomials.
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut d = BigInt::one();
    loop {
        if (&d * &d) > *n {
            break;
        }
        if (n % &d).is_zero() {
            out.push(d.clone());
            let other = n / &d;
            if other != d {
                out.push(other);
            }
        }
        d += 1;
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_rank() {
        let m = QMat::from_rows(vec![
            vec![qi(1), qi(2), qi(3)],
            vec![qi(2), qi(4), qi(6)],
            vec![qi(1), qi(0), qi(1)],
        ]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn nullspace_is_kernel() {
        let m = QMat::from_rows(vec![vec![qi(1), qi(2), qi(3)], vec![qi(0), qi(1), qi(1)]]);
        let ns = m.nullspace();
        assert_eq!(ns.cols(), 1);
        let prod = m.mul(&ns);
        assert!(prod.is_zero());
    }

    #[test]
    fn solve_exact() {
        let a = QMat::from_rows(vec![vec![qi(2), qi(1)], vec![qi(1), qi(3)]]);
        let b = QMat::from_rows(vec![vec![qi(5)], vec![qi(10)]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = QMat::from_rows(vec![vec![qi(2), qi(1)], vec![qi(1), qi(3)]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), QMat::identity(2));
    }

    #[test]
    fn singular_inverse_errors() {
        let a = QMat::from_rows(vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]]);
        assert!(a.inverse().is_err());
    }

    #[test]
    fn charpoly_companion() {
        // Matrix [[0, -6], [1, 5]] has charpoly x^2 - 5x + 6 = (x-2)(x-3).
        let a = QMat::from_rows(vec![vec![qi(0), qi(-6)], vec![qi(1), qi(5)]]);
        let p = a.charpoly();
        assert_eq!(p, vec![qi(6), qi(-5), qi(1)]);
        let roots = rational_roots(&p);
        assert_eq!(roots, vec![(qi(2), 1), (qi(3), 1)]);
    }

    #[test]
    fn rational_roots_with_fractions_and_multiplicity() {
        // (2x - 1)^2 (x + 3) = 4x^3 + 8x^2 - 11x + 3
        let p = vec![qi(3), qi(-11), qi(8), qi(4)];
        let roots = rational_roots(&p);
        assert_eq!(roots, vec![(qi(-3), 1), (qr(1, 2), 2)]);
    }

    #[test]
    fn kron_mixed_product() {
        let a = QMat::from_rows(vec![vec![qi(1), qi(2)], vec![qi(0), qi(1)]]);
        let b = QMat::from_rows(vec![vec![qi(3), qi(0)], vec![qi(1), qi(1)]]);
        let c = QMat::from_rows(vec![vec![qi(1), qi(1)], vec![qi(2), qi(0)]]);
        let d = QMat::from_rows(vec![vec![qi(0), qi(2)], vec![qi(1), qi(1)]]);
        // (A (x) B)(C (x) D) = AC (x) BD
        let lhs = a.kron(&b).mul(&c.kron(&d));
        let rhs = a.mul(&c).kron(&b.mul(&d));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eigenspace_dimensions() {
        let a = QMat::from_rows(vec![vec![qi(2), qi(0)], vec![qi(0), qi(3)]]);
        assert_eq!(a.eigenspace(&qi(2)).cols(), 1);
        assert_eq!(a.eigenspace(&qi(3)).cols(), 1);
        assert_eq!(a.eigenspace(&qi(5)).cols(), 0);
    }

    #[test]
    fn rational_eigen_diagonalizable() {
        let a = QMat::from_rows(vec![
            vec![qi(2), qi(1), qi(0)],
            vec![qi(0), qi(2), qi(0)],
            vec![qi(0), qi(0), qi(3)],
        ]);
        // Defective (Jordan block at 2).
        assert!(rational_eigen(&a).is_err());
        let b = QMat::from_rows(vec![
            vec![qi(2), qi(0), qi(0)],
            vec![qi(0), qi(2), qi(0)],
            vec![qi(0), qi(0), qi(3)],
        ]);
        let eig = rational_eigen(&b).unwrap();
        assert_eq!(eig.len(), 2);
        assert_eq!(eig[0].0, qi(2));
        assert_eq!(eig[0].1.cols(), 2);
        assert_eq!(eig[1].0, qi(3));
        // Rotation has no rational (or real) eigenvalues.
        let rot = QMat::from_rows(vec![vec![qi(0), qi(-1)], vec![qi(1), qi(0)]]);
        assert!(rational_eigen(&rot).is_err());
    }

    #[test]
    fn joint_eigenbasis_refines() {
        // Two commuting diagonal operators with partially shared spectra.
        let a = QMat::from_rows(vec![
            vec![qi(1), qi(0), qi(0)],
            vec![qi(0), qi(1), qi(0)],
            vec![qi(0), qi(0), qi(2)],
        ]);
        let b = QMat::from_rows(vec![
            vec![qi(5), qi(0), qi(0)],
            vec![qi(0), qi(7), qi(0)],
            vec![qi(0), qi(0), qi(7)],
        ]);
        let joint = joint_eigenbasis(3, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(joint.len(), 3);
        let tuples: Vec<Vec<Q>> = joint.iter().map(|(t, _)| t.clone()).collect();
        assert_eq!(
            tuples,
            vec![vec![qi(1), qi(5)], vec![qi(1), qi(7)], vec![qi(2), qi(7)]]
        );
        // Each basis column is a joint eigenvector.
        for (t, basis) in &joint {
            for c in 0..basis.cols() {
                let v = basis.column(c);
                let av = a.mul_vec(&v);
                let bv = b.mul_vec(&v);
                for i in 0..3 {
                    assert_eq!(av[i], &t[0] * &v[i]);
                    assert_eq!(bv[i], &t[1] * &v[i]);
                }
            }
        }
        // Non-commuting family errors: the swap does not preserve the
        // one-dimensional eigenspaces of diag(1, 2, 3).
        let d = QMat::from_rows(vec![
            vec![qi(1), qi(0), qi(0)],
            vec![qi(0), qi(2), qi(0)],
            vec![qi(0), qi(0), qi(3)],
        ]);
        let c = QMat::from_rows(vec![
            vec![qi(0), qi(1), qi(0)],
            vec![qi(1), qi(0), qi(0)],
            vec![qi(0), qi(0), qi(1)],
        ]);
        assert!(joint_eigenbasis(3, &[d, c]).is_err());
    }
}
