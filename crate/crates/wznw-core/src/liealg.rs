//! Simple Lie algebras of type A in their defining matrix realization.
//!
//! Provides:
//! - root-system combinatorics in Dynkin-label coordinates (Cartan matrix,
//!   fundamental-weight inner products, positive roots by the root-string
//!   algorithm, highest root, dual Coxeter number);
//! - classical closed-form oracles: the Weyl dimension formula and
//!   Freudenthal's weight-multiplicity recursion;
//! - an explicit basis of `sl(n)` (elementary matrices plus the standard
//!   Cartan elements) with structure constants, the trace form, its inverse
//!   (for dual-basis contractions), the transpose involution, and a
//!   construction tree expressing every basis element as an iterated
//!   bracket of Chevalley generators.
//!
//! Conventions: weights are row vectors of Dynkin labels (coefficients on
//! the fundamental weights); roots are stored in simple-root coordinates.
//! The invariant form is normalized so that long roots have squared length
//! 2, which for type A coincides with the trace form of the defining
//! representation.
//!
//! Casimir contractions downstream always use the dual-basis pairing
//! `sum_i g^i (x) g_i` with `g^i = sum_j (K^{-1})_{ij} g_j`; this keeps
//! every matrix entry rational. (An orthonormal basis would be an
//! equivalent view but needs irrational per-vector scales, so it is not
//! materialized.)

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::rat::{qi, QMat, Q};
use crate::Result;

/// Root-system data for a simple type-A algebra, in Dynkin coordinates.
#[derive(Clone, Debug)]
pub struct RootSystem {
    rank: usize,
    /// `cartan[i][j] = <alpha_j, alpha_i^vee>`.
    cartan: QMat,
    cartan_inv: QMat,
    /// `weight_form[i][j] = (omega_i, omega_j)`.
    weight_form: QMat,
    /// Half squared lengths `d_i = (alpha_i, alpha_i)/2` (all 1 in type A).
    half_lengths: Vec<Q>,
    /// Positive roots in simple-root coordinates, sorted by (height, lex).
    positive_roots: Vec<Vec<i64>>,
    /// Highest root, simple-root coordinates.
    theta: Vec<i64>,
    dual_coxeter: i64,
}

impl RootSystem {
    /// The root system of `sl(rank+1)`.
    pub fn type_a(rank: usize) -> Result<RootSystem> {
        if rank == 0 {
            return Err(Error::InvalidCartan("rank must be at least 1".into()));
        }
        let cartan = QMat::from_fn(rank, rank, |i, j| {
            if i == j {
                qi(2)
            } else if i.abs_diff(j) == 1 {
                qi(-1)
            } else {
                qi(0)
            }
        });
        Self::from_cartan(cartan)
    }

    /// Build from a Cartan matrix (simply-laced normalization d_i = 1).
    fn from_cartan(cartan: QMat) -> Result<RootSystem> {
        let rank = cartan.rows();
        let cartan_inv = cartan
            .inverse()
            .map_err(|_| Error::InvalidCartan("Cartan matrix is singular".into()))?;
        let half_lengths = vec![Q::one(); rank];
        // (omega_i, omega_j): G solves G * A = D, i.e. G = D * A^{-1}.
        let d = QMat::from_fn(rank, rank, |i, j| {
            if i == j {
                half_lengths[i].clone()
            } else {
                Q::zero()
            }
        });
        let weight_form = d.mul(&cartan_inv);
        if weight_form != weight_form.transpose() {
            return Err(Error::InvalidCartan(
                "weight-space form is not symmetric".into(),
            ));
        }
        let positive_roots = positive_roots_by_strings(&cartan);
        let theta = positive_roots
            .last()
            .expect("at least one positive root")
            .clone();
        let mut rs = RootSystem {
            rank,
            cartan,
            cartan_inv,
            weight_form,
            half_lengths,
            positive_roots,
            theta: theta.clone(),
            dual_coxeter: 0,
        };
        // h^vee = 1 + <rho, theta^vee> = 1 + 2 (rho, theta) / (theta, theta).
        let rho = rs.rho();
        let two = qi(2);
        let hv = Q::one()
            + two.clone() * rs.inner_weight_root(&rho, &theta) / rs.inner_root_root(&theta, &theta);
        if !hv.is_integer() {
            return Err(Error::InvalidCartan(
                "dual Coxeter number is not an integer".into(),
            ));
        }
        rs.dual_coxeter = i64::try_from(hv.to_integer())
            .map_err(|_| Error::InvalidCartan("dual Coxeter number overflow".into()))?;
        Ok(rs)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cartan(&self) -> &QMat {
        &self.cartan
    }

    pub fn weight_form(&self) -> &QMat {
        &self.weight_form
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    /// Highest root in simple-root coordinates.
    pub fn theta(&self) -> &[i64] {
        &self.theta
    }

    /// Highest root in Dynkin labels.
    pub fn theta_dynkin(&self) -> Vec<i64> {
        self.root_dynkin(&self.theta)
    }

    pub fn dual_coxeter(&self) -> i64 {
        self.dual_coxeter
    }

    /// Weyl vector: all Dynkin labels 1.
    pub fn rho(&self) -> Vec<i64> {
        vec![1; self.rank]
    }

    pub fn is_dominant(&self, lam: &[i64]) -> bool {
        lam.len() == self.rank && lam.iter().all(|&x| x >= 0)
    }

    /// Dynkin labels of a root given in simple-root coordinates.
    pub fn root_dynkin(&self, coords: &[i64]) -> Vec<i64> {
        (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| {
                        let a = self.cartan.at(i, j);
                        a.to_integer() * coords[j]
                    })
                    .sum::<num_bigint::BigInt>()
                    .try_into()
                    .expect("small root labels")
            })
            .collect()
    }

    /// Simple-root coordinates of a weight given by Dynkin labels
    /// (rational in general).
    pub fn root_coords(&self, labels: &[i64]) -> Vec<Q> {
        (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| self.cartan_inv.at(i, j) * qi(labels[j]))
                    .sum()
            })
            .collect()
    }

    /// Invariant form on two weights given by Dynkin labels.
    pub fn inner(&self, x: &[i64], y: &[i64]) -> Q {
        let mut acc = Q::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += qi(x[i]) * self.weight_form.at(i, j) * qi(y[j]);
            }
        }
        acc
    }

    /// Invariant form of a weight (Dynkin labels) with a root
    /// (simple-root coordinates): `sum_j x_j c_j d_j`.
    pub fn inner_weight_root(&self, x: &[i64], root: &[i64]) -> Q {
        (0..self.rank)
            .map(|j| qi(x[j]) * qi(root[j]) * &self.half_lengths[j])
            .sum()
    }

    /// Invariant form of two roots in simple-root coordinates.
    pub fn inner_root_root(&self, a: &[i64], b: &[i64]) -> Q {
        let mut acc = Q::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                // (alpha_i, alpha_j) = a_{ij} d_i
                acc += qi(a[i]) * qi(b[j]) * self.cartan.at(i, j) * &self.half_lengths[i];
            }
        }
        acc
    }

    /// Quadratic Casimir scalar `(lam, lam + 2 rho)` on the irreducible
    /// module with highest weight `lam`.
    pub fn casimir_scalar(&self, lam: &[i64]) -> Q {
        let rho = self.rho();
        let shifted: Vec<i64> = lam.iter().zip(&rho).map(|(&a, &b)| a + 2 * b).collect();
        self.inner(lam, &shifted)
    }

    /// `<lam, theta^vee>` — the pairing that bounds admissible levels.
    pub fn level_pairing(&self, lam: &[i64]) -> Q {
        qi(2) * self.inner_weight_root(lam, &self.theta) / self.inner_root_root(&self.theta, &self.theta)
    }

    /// Weyl dimension formula: `prod_{alpha > 0} (lam+rho, alpha) / (rho, alpha)`.
    pub fn weyl_dimension(&self, lam: &[i64]) -> Result<u64> {
        if !self.is_dominant(lam) {
            return Err(Error::NotDominant(lam.to_vec()));
        }
        let rho = self.rho();
        let shifted: Vec<i64> = lam.iter().zip(&rho).map(|(&a, &b)| a + b).collect();
        let mut dim = Q::one();
        for alpha in &self.positive_roots {
            dim *= self.inner_weight_root(&shifted, alpha) / self.inner_weight_root(&rho, alpha);
        }
        debug_assert!(dim.is_integer());
        u64::try_from(dim.to_integer()).map_err(|_| {
            Error::Internal(format!("dimension of weight {:?} exceeds u64", lam))
        })
    }

    /// Weight multiplicities of the irreducible module with highest weight
    /// `lam`, by Freudenthal's recursion. Keys are Dynkin labels; weights
    /// with multiplicity zero are omitted.
    pub fn weight_multiplicities(&self, lam: &[i64]) -> Result<BTreeMap<Vec<i64>, u64>> {
        if !self.is_dominant(lam) {
            return Err(Error::NotDominant(lam.to_vec()));
        }
        // Lowest weight of the module is w0(lam); for type A_r the longest
        // Weyl element acts on labels by reversal and negation.
        let lowest: Vec<i64> = lam.iter().rev().map(|&x| -x).collect();
        let span: Vec<i64> = lam.iter().zip(&lowest).map(|(&a, &b)| a - b).collect();
        let cmax_q = self.root_coords(&span);
        let cmax: Vec<i64> = cmax_q
            .iter()
            .map(|c| {
                debug_assert!(c.is_integer());
                i64::try_from(c.to_integer()).expect("small box bound")
            })
            .collect();

        // Enumerate the coordinate box, ordered by height of lam - mu.
        let mut boxes: Vec<Vec<i64>> = vec![vec![]];
        for &m in &cmax {
            let mut next = Vec::new();
            for b in &boxes {
                for v in 0..=m {
                    let mut b2 = b.clone();
                    b2.push(v);
                    next.push(b2);
                }
            }
            boxes = next;
        }
        boxes.sort_by_key(|c| (c.iter().sum::<i64>(), c.clone()));

        let lam_c2 = self.casimir_scalar(lam);
        let rho = self.rho();
        let mut mults: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        for coords in &boxes {
            let drop = self.root_dynkin(coords);
            let mu: Vec<i64> = lam.iter().zip(&drop).map(|(&a, &b)| a - b).collect();
            if coords.iter().all(|&c| c == 0) {
                mults.insert(mu, 1);
                continue;
            }
            // Denominator (lam+rho)^2 - (mu+rho)^2 = c2(lam) - c2(mu).
            let mu_shift: Vec<i64> = mu.iter().zip(&rho).map(|(&a, &b)| a + 2 * b).collect();
            let mu_c2 = self.inner(&mu, &mu_shift);
            let denom = &lam_c2 - &mu_c2;
            if denom.is_zero() {
                // |mu+rho| = |lam+rho| with mu < lam: not a weight.
                continue;
            }
            let mut numer = Q::zero();
            for alpha in &self.positive_roots {
                // Largest k keeping mu + k*alpha inside the box.
                let mut kmax = i64::MAX;
                for (c, a) in coords.iter().zip(alpha) {
                    if *a > 0 {
                        kmax = kmax.min(c / a);
                    }
                }
                let alpha_dyn = self.root_dynkin(alpha);
                for k in 1..=kmax {
                    let nu: Vec<i64> = mu
                        .iter()
                        .zip(&alpha_dyn)
                        .map(|(&m, &a)| m + k * a)
                        .collect();
                    let m_nu = mults.get(&nu).copied().unwrap_or(0);
                    if m_nu == 0 {
                        continue;
                    }
                    numer += qi(m_nu as i64) * self.inner_weight_root(&nu, alpha);
                }
            }
            let mult = qi(2) * numer / denom;
            debug_assert!(mult.is_integer());
            let m = u64::try_from(mult.to_integer())
                .map_err(|_| Error::Internal("negative weight multiplicity".into()))?;
            if m > 0 {
                mults.insert(mu, m);
            }
        }
        Ok(mults)
    }
}

/// Positive roots by the root-string algorithm: grow height by height,
/// adding `beta + alpha_i` whenever the string length allows
/// (`q = p - <beta, alpha_i^vee> > 0`).
fn positive_roots_by_strings(cartan: &QMat) -> Vec<Vec<i64>> {
    let rank = cartan.rows();
    let mut known: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut frontier: Vec<Vec<i64>> = Vec::new();
    for i in 0..rank {
        let mut unit = vec![0i64; rank];
        unit[i] = 1;
        known.insert(unit.clone());
        frontier.push(unit);
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for beta in &frontier {
            for i in 0..rank {
                // p = steps down the alpha_i-string from beta.
                let mut p = 0i64;
                let mut cur = beta.clone();
                loop {
                    cur[i] -= 1;
                    if cur.iter().all(|&c| c >= 0) && known.contains(&cur) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let label: i64 = (0..rank)
                    .map(|j| {
                        i64::try_from(cartan.at(i, j).to_integer()).unwrap() * beta[j]
                    })
                    .sum();
                let q = p - label;
                if q > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if known.insert(up.clone()) {
                        next.push(up);
                    }
                }
            }
        }
        frontier = next;
    }
    let mut roots: Vec<Vec<i64>> = known.into_iter().collect();
    roots.sort_by_key(|c| (c.iter().sum::<i64>(), c.clone()));
    roots
}

/// How a basis element is assembled from Chevalley generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Raising generator `e_i`.
    ChevalleyE(usize),
    /// Lowering generator `f_i`.
    ChevalleyF(usize),
    /// Cartan generator `h_i`.
    CartanH(usize),
    /// Exact bracket `[basis[left], basis[right]]` of earlier elements.
    Bracket { left: usize, right: usize },
}

/// `sl(n)` with an explicit ordered basis, structure constants, and the
/// trace form.
///
/// Basis order: raising elements `E(i,j)` (i<j) by height then start row,
/// then lowering elements `E(j,i)` in the same order, then Cartan elements
/// `h_k = E(k,k) - E(k+1,k+1)`.
#[derive(Clone)]
pub struct LieAlgebra {
    roots: RootSystem,
    n: usize,
    dim: usize,
    basis_mats: Vec<QMat>,
    names: Vec<String>,
    /// Ad-weight in simple-root coordinates; `None` for Cartan elements.
    root_of: Vec<Option<Vec<i64>>>,
    construction: Vec<Construction>,
    e_idx: Vec<usize>,
    f_idx: Vec<usize>,
    h_idx: Vec<usize>,
    /// Index permutation realizing the transpose involution.
    tau: Vec<usize>,
    gram: QMat,
    gram_inv: QMat,
    brackets: Vec<Vec<Vec<(usize, Q)>>>,
}

impl std::fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LieAlgebra sl({}) (dim {})", self.n, self.dim)
    }
}

impl LieAlgebra {
    pub fn sl(n: usize) -> Result<LieAlgebra> {
        if n < 2 {
            return Err(Error::InvalidCartan(format!("sl({}) is not simple", n)));
        }
        let rank = n - 1;
        let roots = RootSystem::type_a(rank)?;
        let dim = n * n - 1;

        let unit = |i: usize, j: usize| {
            QMat::from_fn(n, n, |r, c| if (r, c) == (i, j) { Q::one() } else { Q::zero() })
        };

        let mut basis_mats = Vec::with_capacity(dim);
        let mut names = Vec::with_capacity(dim);
        let mut root_of = Vec::with_capacity(dim);
        let mut construction = Vec::with_capacity(dim);
        let mut pos: BTreeMap<(usize, usize), usize> = BTreeMap::new();

        // Raising elements by height.
        for h in 1..n {
            for i in 0..n - h {
                let j = i + h;
                let idx = basis_mats.len();
                pos.insert((i, j), idx);
                basis_mats.push(unit(i, j));
                names.push(format!("E({},{})", i + 1, j + 1));
                let mut coords = vec![0i64; rank];
                for (slot, c) in coords.iter_mut().enumerate().take(j).skip(i) {
                    let _ = slot;
                    *c = 1;
                }
                root_of.push(Some(coords));
                construction.push(if h == 1 {
                    Construction::ChevalleyE(i)
                } else {
                    Construction::Bracket {
                        left: pos[&(i, i + 1)],
                        right: pos[&(i + 1, j)],
                    }
                });
            }
        }
        // Lowering elements by height.
        for h in 1..n {
            for i in 0..n - h {
                let j = i + h;
                let idx = basis_mats.len();
                pos.insert((j, i), idx);
                basis_mats.push(unit(j, i));
                names.push(format!("E({},{})", j + 1, i + 1));
                let mut coords = vec![0i64; rank];
                for c in coords.iter_mut().take(j).skip(i) {
                    *c = -1;
                }
                root_of.push(Some(coords));
                construction.push(if h == 1 {
                    Construction::ChevalleyF(i)
                } else {
                    Construction::Bracket {
                        left: pos[&(j, i + 1)],
                        right: pos[&(i + 1, i)],
                    }
                });
            }
        }
        // Cartan elements.
        let mut h_idx = Vec::with_capacity(rank);
        for k in 0..rank {
            let idx = basis_mats.len();
            h_idx.push(idx);
            let m = unit(k, k).sub(&unit(k + 1, k + 1));
            basis_mats.push(m);
            names.push(format!("H({})", k + 1));
            root_of.push(None);
            construction.push(Construction::CartanH(k));
        }

        let e_idx: Vec<usize> = (0..rank).map(|i| pos[&(i, i + 1)]).collect();
        let f_idx: Vec<usize> = (0..rank).map(|i| pos[&(i + 1, i)]).collect();
        let tau: Vec<usize> = (0..dim)
            .map(|idx| {
                let t = basis_mats[idx].transpose();
                // Transpose maps E(i,j) -> E(j,i) and fixes Cartan elements.
                basis_mats
                    .iter()
                    .position(|b| *b == t)
                    .expect("transpose permutes the basis")
            })
            .collect();

        let gram = QMat::from_fn(dim, dim, |i, j| basis_mats[i].mul(&basis_mats[j]).trace());
        let gram_inv = gram
            .inverse()
            .map_err(|_| Error::InvalidCartan("trace form is degenerate".into()))?;

        let mut alg = LieAlgebra {
            roots,
            n,
            dim,
            basis_mats,
            names,
            root_of,
            construction,
            e_idx,
            f_idx,
            h_idx,
            tau,
            gram,
            gram_inv,
            brackets: Vec::new(),
        };
        let mut brackets = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut row = Vec::with_capacity(dim);
            for j in 0..dim {
                let comm = alg.basis_mats[i].commutator(&alg.basis_mats[j]);
                row.push(alg.expand_in_basis(&comm)?);
            }
            brackets.push(row);
        }
        alg.brackets = brackets;
        Ok(alg)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.roots
    }

    pub fn basis_matrix(&self, i: usize) -> &QMat {
        &self.basis_mats[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Ad-weight of a basis element in simple-root coordinates (`None`
    /// for Cartan elements).
    pub fn root_of(&self, i: usize) -> Option<&Vec<i64>> {
        self.root_of[i].as_ref()
    }

    pub fn construction(&self, i: usize) -> &Construction {
        &self.construction[i]
    }

    pub fn e_index(&self, i: usize) -> usize {
        self.e_idx[i]
    }

    pub fn f_index(&self, i: usize) -> usize {
        self.f_idx[i]
    }

    pub fn h_index(&self, i: usize) -> usize {
        self.h_idx[i]
    }

    /// Transpose involution as a basis permutation.
    pub fn tau(&self, i: usize) -> usize {
        self.tau[i]
    }

    /// Trace form `K(b_i, b_j)`.
    pub fn gram(&self) -> &QMat {
        &self.gram
    }

    /// Inverse trace form; `g^i = sum_j gram_inv[i][j] b_j` is the basis
    /// dual to `b_i`.
    pub fn gram_inv(&self) -> &QMat {
        &self.gram_inv
    }

    /// Structure constants: `[b_i, b_j] = sum coeff * b_k` as `(k, coeff)`.
    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Q)] {
        &self.brackets[i][j]
    }

    /// Expand a traceless matrix over the basis.
    pub fn expand_in_basis(&self, m: &QMat) -> Result<Vec<(usize, Q)>> {
        if m.rows() != self.n || m.cols() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "expected {0}x{0} matrix",
                self.n
            )));
        }
        if !m.trace().is_zero() {
            return Err(Error::ShapeMismatch("matrix is not traceless".into()));
        }
        let mut out = Vec::new();
        // Off-diagonal entries map straight onto elementary matrices.
        for (idx, mat) in self.basis_mats.iter().enumerate() {
            if self.root_of[idx].is_none() {
                continue;
            }
            // Elementary matrix: find its (i, j).
            let mut entry = None;
            for r in 0..self.n {
                for c in 0..self.n {
                    if !mat.at(r, c).is_zero() {
                        entry = Some((r, c));
                    }
                }
            }
            let (r, c) = entry.expect("elementary matrix");
            let v = m.at(r, c);
            if !v.is_zero() {
                out.push((idx, v.clone()));
            }
        }
        // Diagonal part: prefix sums give the Cartan coefficients.
        let mut prefix = Q::zero();
        for k in 0..self.n - 1 {
            prefix += m.at(k, k);
            if !prefix.is_zero() {
                out.push((self.h_idx[k], prefix.clone()));
            }
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out)
    }

    /// Dynkin labels of the ad-weight of basis element `i` (zero vector
    /// for Cartan elements).
    pub fn weight_of_basis(&self, i: usize) -> Vec<i64> {
        match &self.root_of[i] {
            Some(coords) => self.roots.root_dynkin(coords),
            None => vec![0; self.roots.rank()],
        }
    }
}
