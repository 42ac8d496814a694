//! Depth-truncated highest-weight modules over an untwisted affine Lie
//! algebra, together with vertex-operator modes and the Sugawara Virasoro
//! action.
//!
//! A module is induced from a finite-dimensional irreducible base
//! representation: negative-mode letters `a(-n)` act freely modulo the
//! affine commutation relations, the result is graded by total depth
//! (the sum of the mode depths), and everything is truncated at a fixed
//! depth bound.  All matrices are exact over the rationals.  Any operator
//! application that would leave the truncation window is a hard
//! [`Error::DepthOverflow`], never a silent truncation: within the stored
//! windows every identity holds exactly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::liealg::LieAlgebra;
use crate::rat::{qi, qr, QMat, Q};
use crate::repn::Irrep;
use crate::{Error, Result};

/// One creation letter `a(-n)`: algebra basis index `a`, mode depth `n >= 1`.
pub type Letter = (usize, u32);

/// Sort key placing deeper modes first, ties broken by basis index.
fn letter_key(l: &Letter) -> (u32, usize) {
    (l.1, l.0)
}

/// A basis monomial `a_1(-n_1) ... a_m(-n_m) v_b`: creation letters applied
/// to the `b`-th basis vector of the base representation.  Canonical basis
/// monomials keep their letters sorted with non-increasing [`letter_key`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Monomial {
    letters: Vec<Letter>,
    base: usize,
}

impl Monomial {
    fn split(&self) -> (Letter, Monomial) {
        (
            self.letters[0],
            Monomial {
                letters: self.letters[1..].to_vec(),
                base: self.base,
            },
        )
    }
}

/// A rational linear combination of monomials.
type Combo = BTreeMap<Monomial, Q>;

fn add_term(acc: &mut Combo, mono: Monomial, coeff: Q) {
    if coeff.is_zero() {
        return;
    }
    *acc.entry(mono).or_insert_with(Q::zero) += coeff;
}

/// Integer binomial coefficient as a rational.
fn binom(top: i64, k: i64) -> Q {
    Q::from_integer(num_integer::binomial(BigInt::from(top), BigInt::from(k)))
}

/// All multisets of creation letters with total depth `total`, letters
/// listed with non-increasing [`letter_key`].
fn letter_multisets(alg_dim: usize, total: usize) -> Vec<Vec<Letter>> {
    fn rec(
        alg_dim: usize,
        remaining: usize,
        max_key: Option<(u32, usize)>,
        cur: &mut Vec<Letter>,
        out: &mut Vec<Vec<Letter>>,
    ) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        for n in (1..=remaining).rev() {
            for a in (0..alg_dim).rev() {
                let key = (n as u32, a);
                if let Some(mk) = max_key {
                    if key > mk {
                        continue;
                    }
                }
                cur.push((a, n as u32));
                rec(alg_dim, remaining - n, Some(key), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(alg_dim, total, None, &mut Vec::new(), &mut out);
    out
}

/// The induced module before truncation bookkeeping: the graded basis and
/// the recursive straightening rules for applying a mode to a monomial.
struct Induced<'a> {
    alg: &'a LieAlgebra,
    level: Q,
    base: Irrep,
    depth: usize,
    basis: Vec<Vec<Monomial>>,
    index: Vec<BTreeMap<Monomial, usize>>,
}

impl<'a> Induced<'a> {
    fn new(alg: &'a LieAlgebra, level: &Q, lambda: &[i64], depth: usize) -> Result<Induced<'a>> {
        let kappa = level.clone() + qi(alg.root_system().dual_coxeter());
        if kappa.is_zero() {
            return Err(Error::CriticalLevel(level.to_string()));
        }
        let base = Irrep::new(alg, lambda)?;
        let mut basis = Vec::with_capacity(depth + 1);
        let mut index = Vec::with_capacity(depth + 1);
        for d in 0..=depth {
            let mut monos = Vec::new();
            for letters in letter_multisets(alg.dim(), d) {
                for b in 0..base.dim() {
                    monos.push(Monomial {
                        letters: letters.clone(),
                        base: b,
                    });
                }
            }
            monos.sort();
            let map: BTreeMap<Monomial, usize> = monos
                .iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), i))
                .collect();
            basis.push(monos);
            index.push(map);
        }
        Ok(Induced {
            alg,
            level: level.clone(),
            base,
            depth,
            basis,
            index,
        })
    }

    /// Left multiplication by `a(-n)`, straightened into canonical monomials.
    fn left_mul(&self, a: usize, n: u32, m: &Monomial) -> Combo {
        let mut out = Combo::new();
        if m.letters.is_empty() || (n, a) >= letter_key(&m.letters[0]) {
            let mut letters = Vec::with_capacity(m.letters.len() + 1);
            letters.push((a, n));
            letters.extend_from_slice(&m.letters);
            add_term(
                &mut out,
                Monomial {
                    letters,
                    base: m.base,
                },
                Q::one(),
            );
            return out;
        }
        let (head, tail) = m.split();
        for (m2, c2) in self.left_mul(a, n, &tail) {
            for (m3, c3) in self.prepend(head, &m2) {
                add_term(&mut out, m3, &c2 * c3);
            }
        }
        for (b, cb) in self.alg.bracket(a, head.0) {
            for (m2, c2) in self.left_mul(*b, n + head.1, &tail) {
                add_term(&mut out, m2, cb * c2);
            }
        }
        out
    }

    /// Re-attach a letter on the left, straightening when it is out of order.
    fn prepend(&self, l: Letter, m: &Monomial) -> Combo {
        if m.letters.is_empty() || letter_key(&l) >= letter_key(&m.letters[0]) {
            let mut letters = Vec::with_capacity(m.letters.len() + 1);
            letters.push(l);
            letters.extend_from_slice(&m.letters);
            let mut out = Combo::new();
            add_term(
                &mut out,
                Monomial {
                    letters,
                    base: m.base,
                },
                Q::one(),
            );
            out
        } else {
            self.left_mul(l.0, l.1, m)
        }
    }

    /// Action of the zero mode `a(0)`.
    fn zero_mode(&self, a: usize, m: &Monomial) -> Combo {
        let mut out = Combo::new();
        if m.letters.is_empty() {
            let act = self.base.action(a);
            for r in 0..act.rows() {
                let c = act.at(r, m.base);
                if !c.is_zero() {
                    add_term(
                        &mut out,
                        Monomial {
                            letters: Vec::new(),
                            base: r,
                        },
                        c.clone(),
                    );
                }
            }
            return out;
        }
        let (head, tail) = m.split();
        for (b, cb) in self.alg.bracket(a, head.0) {
            for (m2, c2) in self.left_mul(*b, head.1, &tail) {
                add_term(&mut out, m2, cb * c2);
            }
        }
        for (m2, c2) in self.zero_mode(a, &tail) {
            for (m3, c3) in self.prepend(head, &m2) {
                add_term(&mut out, m3, &c2 * c3);
            }
        }
        out
    }

    /// Action of an annihilation mode `a(n)` with `n >= 1`.
    fn annihilate(&self, a: usize, n: u32, m: &Monomial) -> Combo {
        let mut out = Combo::new();
        if m.letters.is_empty() {
            return out;
        }
        let (head, tail) = m.split();
        let shift = n as i64 - head.1 as i64;
        for (b, cb) in self.alg.bracket(a, head.0) {
            for (m2, c2) in self.mode_combo(*b, shift, &tail) {
                add_term(&mut out, m2, cb * c2);
            }
        }
        if n == head.1 {
            let coeff = self.alg.gram().at(a, head.0) * qi(n as i64) * &self.level;
            add_term(&mut out, tail.clone(), coeff);
        }
        for (m2, c2) in self.annihilate(a, n, &tail) {
            for (m3, c3) in self.prepend(head, &m2) {
                add_term(&mut out, m3, &c2 * c3);
            }
        }
        out
    }

    fn mode_combo(&self, a: usize, mode: i64, m: &Monomial) -> Combo {
        match mode.cmp(&0) {
            std::cmp::Ordering::Less => self.left_mul(a, (-mode) as u32, m),
            std::cmp::Ordering::Equal => self.zero_mode(a, m),
            std::cmp::Ordering::Greater => self.annihilate(a, mode as u32, m),
        }
    }

    /// Matrix of `a(mode)` from depth `d` to depth `d - mode`, both of which
    /// must lie inside the truncation window.
    fn mode_matrix(&self, a: usize, mode: i64, d: usize) -> QMat {
        let t = (d as i64 - mode) as usize;
        let mut mat = QMat::zeros(self.basis[t].len(), self.basis[d].len());
        for (j, mono) in self.basis[d].iter().enumerate() {
            for (m2, c) in self.mode_combo(a, mode, mono) {
                if c.is_zero() {
                    continue;
                }
                let i = *self.index[t]
                    .get(&m2)
                    .expect("mode image lies in the graded basis");
                mat.set(i, j, c);
            }
        }
        mat
    }

    /// Per-depth Gram matrices of the contravariant form, built from the
    /// annihilation matrices: pairing a monomial with head `a(-n)` peels the
    /// head off as `tau(a)(n)` acting on the other argument, and depth zero
    /// carries the contravariant form of the base representation.
    fn grams(&self, modes: &BTreeMap<(usize, i64, usize), QMat>) -> Vec<QMat> {
        let mut gs: Vec<QMat> = Vec::with_capacity(self.depth + 1);
        gs.push(self.base.gram().clone());
        for d in 1..=self.depth {
            let dim = self.basis[d].len();
            let mut g = QMat::zeros(dim, dim);
            for (i, mono) in self.basis[d].iter().enumerate() {
                let (head, tail) = mono.split();
                let dprev = d - head.1 as usize;
                let ri = self.index[dprev][&tail];
                let ann = &modes[&(self.alg.tau(head.0), head.1 as i64, d)];
                for j in 0..dim {
                    let mut acc = Q::zero();
                    for t in 0..self.basis[dprev].len() {
                        let av = ann.at(t, j);
                        if !av.is_zero() {
                            acc += gs[dprev].at(ri, t) * av;
                        }
                    }
                    g.set(i, j, acc);
                }
            }
            gs.push(g);
        }
        gs
    }
}

/// A depth-truncated graded module with exact rational mode matrices.
///
/// Either the full induced module (negative modes act freely) or its
/// quotient by the radical of the contravariant form.
#[derive(Clone)]
pub struct TruncatedModule {
    level: Q,
    lambda: Vec<i64>,
    depth: usize,
    dims: Vec<usize>,
    h: Q,
    kappa: Q,
    irreducible: bool,
    alg_dim: usize,
    modes: BTreeMap<(usize, i64, usize), QMat>,
}

impl std::fmt::Debug for TruncatedModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TruncatedModule")
            .field("level", &self.level)
            .field("lambda", &self.lambda)
            .field("depth", &self.depth)
            .field("dims", &self.dims)
            .field("irreducible", &self.irreducible)
            .finish()
    }
}

impl TruncatedModule {
    pub fn level(&self) -> &Q {
        &self.level
    }

    pub fn highest_weight(&self) -> &[i64] {
        &self.lambda
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Dimensions of the graded layers, indexed by depth.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// `level + dual Coxeter number`, the Sugawara denominator.
    pub fn kappa(&self) -> &Q {
        &self.kappa
    }

    /// Conformal weight of the depth-zero layer: Casimir / (2 kappa).
    pub fn conformal_weight(&self) -> &Q {
        &self.h
    }

    /// Matrix of `a(mode)` mapping depth `d` to depth `d - mode`.  Both
    /// depths must lie in `0..=depth()`; anything else is a hard error.
    pub fn mode_action(&self, elem: usize, mode: i64, d: usize) -> Result<&QMat> {
        if elem >= self.alg_dim {
            return Err(Error::ShapeMismatch(format!(
                "algebra basis index {} out of range (dimension {})",
                elem, self.alg_dim
            )));
        }
        let to = d as i64 - mode;
        if d > self.depth || to < 0 || to > self.depth as i64 {
            return Err(Error::DepthOverflow {
                from: d as i64,
                to,
                max: self.depth as i64,
            });
        }
        Ok(&self.modes[&(elem, mode, d)])
    }
}

/// Build the induced module at the given level over the irreducible base
/// representation with the given highest weight, truncated at `depth`.
pub fn build_truncated_module(
    alg: &LieAlgebra,
    level: &Q,
    lambda: &[i64],
    depth: usize,
) -> Result<TruncatedModule> {
    let eng = Induced::new(alg, level, lambda, depth)?;
    let mut modes = BTreeMap::new();
    for a in 0..alg.dim() {
        for mode in -(depth as i64)..=(depth as i64) {
            for d in 0..=depth {
                let t = d as i64 - mode;
                if (0..=depth as i64).contains(&t) {
                    modes.insert((a, mode, d), eng.mode_matrix(a, mode, d));
                }
            }
        }
    }
    let kappa = level.clone() + qi(alg.root_system().dual_coxeter());
    let h = eng.base.casimir_scalar() / (qi(2) * &kappa);
    Ok(TruncatedModule {
        level: level.clone(),
        lambda: lambda.to_vec(),
        depth,
        dims: eng.basis.iter().map(|b| b.len()).collect(),
        h,
        kappa,
        irreducible: false,
        alg_dim: alg.dim(),
        modes,
    })
}

/// Per-depth Gram matrices of the contravariant form on the induced module.
pub fn contravariant_grams(
    alg: &LieAlgebra,
    level: &Q,
    lambda: &[i64],
    depth: usize,
) -> Result<Vec<QMat>> {
    let eng = Induced::new(alg, level, lambda, depth)?;
    let mut modes = BTreeMap::new();
    for a in 0..alg.dim() {
        for n in 1..=depth {
            for d in n..=depth {
                modes.insert((a, n as i64, d), eng.mode_matrix(a, n as i64, d));
            }
        }
    }
    Ok(eng.grams(&modes))
}

/// Quotient of an induced module by the per-depth radical of the
/// contravariant form.  The kept basis at each depth is the first maximal
/// independent set of Gram columns; actions are transported by solving
/// against the kept Gram block, which is exact because the radical pairs
/// to zero with everything.
pub fn irreducible_quotient(alg: &LieAlgebra, tm: &TruncatedModule) -> Result<TruncatedModule> {
    if tm.irreducible {
        return Ok(tm.clone());
    }
    if alg.dim() != tm.alg_dim {
        return Err(Error::ShapeMismatch(
            "module was built over a different algebra".into(),
        ));
    }
    let eng = Induced::new(alg, &tm.level, &tm.lambda, tm.depth)?;
    let gs = eng.grams(&tm.modes);
    let kept: Vec<Vec<usize>> = gs.iter().map(|g| g.clone().rref()).collect();
    let kept_gram: Vec<QMat> = (0..=tm.depth)
        .map(|d| {
            QMat::from_fn(kept[d].len(), kept[d].len(), |i, j| {
                gs[d].at(kept[d][i], kept[d][j]).clone()
            })
        })
        .collect();
    let mut modes = BTreeMap::new();
    for ((a, mode, d), mat) in &tm.modes {
        let t = (*d as i64 - mode) as usize;
        let rows = kept[t].len();
        let cols = kept[*d].len();
        let mut rhs = QMat::zeros(rows, cols);
        for (ri, &gi) in kept[t].iter().enumerate() {
            for (cj, &bj) in kept[*d].iter().enumerate() {
                let mut acc = Q::zero();
                for s in 0..mat.rows() {
                    let mv = mat.at(s, bj);
                    if !mv.is_zero() {
                        acc += gs[t].at(gi, s) * mv;
                    }
                }
                rhs.set(ri, cj, acc);
            }
        }
        let proj = if rows == 0 {
            QMat::zeros(0, cols)
        } else {
            kept_gram[t].solve(&rhs)?
        };
        modes.insert((*a, *mode, *d), proj);
    }
    Ok(TruncatedModule {
        level: tm.level.clone(),
        lambda: tm.lambda.clone(),
        depth: tm.depth,
        dims: kept.iter().map(|k| k.len()).collect(),
        h: tm.h.clone(),
        kappa: tm.kappa.clone(),
        irreducible: true,
        alg_dim: tm.alg_dim,
        modes,
    })
}

/// Vertex-operator modes on a truncated module.
///
/// A vector of the vacuum module is presented as a word of creation
/// letters `[(a_0, n_0), (a_1, n_1), ...]`, standing for
/// `a_0(-n_0) a_1(-n_1) ... 1`; its weight is the sum of the `n_i`.  The
/// mode `word_n` maps depth `d` to depth `d + weight - n - 1`.  Modes are
/// computed by peeling the first letter:
///
/// `(a(-n0) u)_n = sum_{i>=0} C(n0+i-1, i) *`
/// `[ a(-n0-i) u_{n+i}  -  (-1)^{n0} u_{n-n0-i} a(i) ]`,
///
/// whose two sums are finite on every valid depth window and whose
/// intermediate depths never exceed the larger of source and target.
pub struct VertexOps<'a> {
    module: &'a TruncatedModule,
    memo: std::cell::RefCell<ModeMatrixCache>,
}

/// Memoized mode matrices, keyed by `(state letters, mode index, depth)`.
type ModeMatrixCache = BTreeMap<(Vec<Letter>, i64, usize), QMat>;

impl<'a> VertexOps<'a> {
    pub fn new(module: &'a TruncatedModule) -> VertexOps<'a> {
        VertexOps {
            module,
            memo: std::cell::RefCell::new(BTreeMap::new()),
        }
    }

    pub fn weight(word: &[Letter]) -> i64 {
        word.iter().map(|l| l.1 as i64).sum()
    }

    /// Matrix of the `n`-th mode of `word` from depth `d` to depth
    /// `d + weight(word) - n - 1`.  A target above the truncation depth is
    /// a hard error; a negative target is the zero map (returned with zero
    /// rows).
    pub fn mode_matrix(&self, word: &[Letter], n: i64, d: usize) -> Result<QMat> {
        for l in word {
            if l.1 == 0 {
                return Err(Error::ShapeMismatch(
                    "creation letters require positive mode depth".into(),
                ));
            }
            if l.0 >= self.module.alg_dim {
                return Err(Error::ShapeMismatch(format!(
                    "algebra basis index {} out of range (dimension {})",
                    l.0, self.module.alg_dim
                )));
            }
        }
        let depth = self.module.depth;
        let target = d as i64 + Self::weight(word) - n - 1;
        if d > depth || target > depth as i64 {
            return Err(Error::DepthOverflow {
                from: d as i64,
                to: target,
                max: depth as i64,
            });
        }
        let key = (word.to_vec(), n, d);
        if let Some(m) = self.memo.borrow().get(&key) {
            return Ok(m.clone());
        }
        let dims = &self.module.dims;
        let cols = dims[d];
        let result = if target < 0 {
            QMat::zeros(0, cols)
        } else if word.is_empty() {
            if n == -1 {
                QMat::identity(cols)
            } else {
                QMat::zeros(dims[target as usize], cols)
            }
        } else {
            let (a, n0) = word[0];
            let rest = &word[1..];
            let mut acc = QMat::zeros(dims[target as usize], cols);
            let mut i: i64 = 0;
            loop {
                let d1 = target - n0 as i64 - i;
                if d1 < 0 {
                    break;
                }
                let u = self.mode_matrix(rest, n + i, d)?;
                if u.rows() > 0 && !u.is_zero() {
                    let amat = self.module.mode_action(a, -(n0 as i64 + i), d1 as usize)?;
                    acc = acc.add(&amat.mul(&u).scale(&binom(n0 as i64 + i - 1, i)));
                }
                i += 1;
            }
            let sign = if n0 % 2 == 0 { qi(-1) } else { qi(1) };
            for i in 0..=(d as i64) {
                let amat = self.module.mode_action(a, i, d)?;
                if amat.is_zero() {
                    continue;
                }
                let u = self.mode_matrix(rest, n - n0 as i64 - i, (d as i64 - i) as usize)?;
                if !u.is_zero() {
                    let coeff = binom(n0 as i64 + i - 1, i) * &sign;
                    acc = acc.add(&u.mul(amat).scale(&coeff));
                }
            }
            acc
        };
        self.memo.borrow_mut().insert(key, result.clone());
        Ok(result)
    }
}

/// The Virasoro family obtained from the invariant-form contraction of
/// paired algebra modes, scaled by `1/(2 kappa)`, with modes at equal
/// depth symmetrized.  `L(n)` is stored for every window `d -> d - n`
/// inside the truncation.
pub struct VirasoroModes {
    depth: usize,
    kappa: Q,
    c: Q,
    h: Q,
    dims: Vec<usize>,
    ls: BTreeMap<(i64, usize), QMat>,
}

impl VirasoroModes {
    pub fn central_charge(&self) -> &Q {
        &self.c
    }

    pub fn conformal_weight(&self) -> &Q {
        &self.h
    }

    pub fn kappa(&self) -> &Q {
        &self.kappa
    }

    /// Matrix of `L(n)` mapping depth `d` to depth `d - n`; both depths
    /// must lie inside the truncation window.
    pub fn l(&self, n: i64, d: usize) -> Result<&QMat> {
        let to = d as i64 - n;
        if d > self.depth || to < 0 || to > self.depth as i64 {
            return Err(Error::DepthOverflow {
                from: d as i64,
                to,
                max: self.depth as i64,
            });
        }
        Ok(&self.ls[&(n, d)])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Depth of the underlying truncation window.
    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Checks `[L(m), L(n)] = (m - n) L(m+n) + delta_{m+n,0} (m^3 - m)/12 c`
/// exactly on the depth-`d` graded piece, whenever every mode involved
/// stays inside the truncation window (windows that fall outside carry no
/// content and count as satisfied).
pub fn virasoro_bracket_holds(vm: &VirasoroModes, m: i64, n: i64, d: usize) -> bool {
    let depth = vm.depth as i64;
    let t = d as i64 - m - n;
    if d as i64 > depth || !(0..=depth).contains(&t) {
        return true;
    }
    if d as i64 - n > depth || d as i64 - m > depth {
        return true;
    }
    let lcompose = |m1: i64, n1: i64| -> QMat {
        let mid = d as i64 - n1;
        if mid < 0 {
            return QMat::zeros(vm.dims[t as usize], vm.dims[d]);
        }
        vm.l(m1, mid as usize)
            .expect("window checked")
            .mul(vm.l(n1, d).expect("window checked"))
    };
    let lhs = lcompose(m, n).sub(&lcompose(n, m));
    let mut rhs = vm.l(m + n, d).expect("window checked").scale(&qi(m - n));
    if m + n == 0 {
        let central = qr(m * m * m - m, 12) * vm.central_charge();
        rhs = rhs.add(&QMat::identity(vm.dims[d]).scale(&central));
    }
    lhs == rhs
}

/// Assemble the Virasoro modes on a truncated module of depth at least 2
/// (the central charge is read off the depth-two window).
pub fn virasoro_modes(alg: &LieAlgebra, tm: &TruncatedModule) -> Result<VirasoroModes> {
    if alg.dim() != tm.alg_dim {
        return Err(Error::ShapeMismatch(
            "module was built over a different algebra".into(),
        ));
    }
    if tm.depth < 2 {
        return Err(Error::DepthOverflow {
            from: 0,
            to: 2,
            max: tm.depth as i64,
        });
    }
    let kappa = tm.kappa.clone();
    let half = Q::one() / (qi(2) * &kappa);
    let kinv = alg.gram_inv();
    let depth = tm.depth;
    let mut ls = BTreeMap::new();
    for n in -(depth as i64)..=(depth as i64) {
        for d in 0..=depth {
            let t = d as i64 - n;
            if !(0..=depth as i64).contains(&t) {
                continue;
            }
            let mut acc = QMat::zeros(tm.dims[t as usize], tm.dims[d]);
            // Normal ordering puts the smaller mode number on the left, so
            // each unordered pair {ml, mr} with ml <= mr contributes
            // left-factor ml after right-factor mr; for ml < mr the two
            // assignments of the contraction indices coincide after using
            // the symmetry of the inverse form, giving a factor of two.
            let lo = (n + 1).div_euclid(2);
            for mr in lo..=(d as i64) {
                let ml = n - mr;
                let factor = if ml == mr { qi(1) } else { qi(2) };
                let mid = (d as i64 - mr) as usize;
                for i in 0..alg.dim() {
                    for j in 0..alg.dim() {
                        let kv = kinv.at(i, j);
                        if kv.is_zero() {
                            continue;
                        }
                        let right = tm.mode_action(j, mr, d)?;
                        if right.is_zero() {
                            continue;
                        }
                        let left = tm.mode_action(i, ml, mid)?;
                        acc = acc.add(&left.mul(right).scale(&(kv * &factor)));
                    }
                }
            }
            ls.insert((n, d), acc.scale(&half));
        }
    }
    // Central charge from the depth-two window: the commutator of L(2)
    // with L(-2) on the depth-zero layer equals 4 L(0) + c/2.
    let p = ls[&(2, 2)].mul(&ls[&(-2, 0)]);
    let c = if tm.dims[0] == 0 {
        Q::zero()
    } else {
        qi(2) * (p.at(0, 0) - qi(4) * &tm.h)
    };
    Ok(VirasoroModes {
        depth,
        kappa,
        c,
        h: tm.h.clone(),
        dims: tm.dims.clone(),
        ls,
    })
}

/// Check the translation-generator identity on a depth-zero vector `w`:
/// `kappa * L(-1) w` must equal the invariant-form contraction
/// `sum K^{ij} b_i(-1) (b_j(0) w)`, exactly.
pub fn check_l_minus1(
    alg: &LieAlgebra,
    tm: &TruncatedModule,
    vm: &VirasoroModes,
    w: &[Q],
) -> Result<bool> {
    if w.len() != tm.dims[0] {
        return Err(Error::ShapeMismatch(format!(
            "expected a depth-zero vector of length {}",
            tm.dims[0]
        )));
    }
    let lhs: Vec<Q> = vm
        .l(-1, 0)?
        .mul_vec(w)
        .into_iter()
        .map(|x| x * &tm.kappa)
        .collect();
    let kinv = alg.gram_inv();
    let mut rhs = vec![Q::zero(); tm.dims[1]];
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            let kv = kinv.at(i, j);
            if kv.is_zero() {
                continue;
            }
            let zw = tm.mode_action(j, 0, 0)?.mul_vec(w);
            let up = tm.mode_action(i, -1, 0)?.mul_vec(&zw);
            for (r, v) in up.into_iter().enumerate() {
                rhs[r] += kv * v;
            }
        }
    }
    Ok(lhs == rhs)
}

/// Checks, exactly, the normal-ordered product identity for vertex modes on
/// one state.  Let `u = a(-k) vacuum` be the single-creation-letter state
/// for `letter = (a, k)`, so that `u_{-1} word` is the concatenated word
/// `(a, k) ++ word`.  Its `n`-th mode applied to `v` at depth `d` must equal
///
/// `sum_{m<0} u_m (word_{n-1-m} v) + sum_{m>=0} word_{n-1-m} (u_m v)`,
///
/// where `u_m` is the mode matrix of the single-letter word `[(a, k)]` and
/// both sums are finite on the truncation window.  The left side peels
/// `a(-k)` through the general binomial recursion while the right side
/// contracts the derivative modes of the field of `u`, so for `k >= 2` the
/// two sides follow genuinely different evaluation orders and the equality
/// is a nontrivial binomial rearrangement.
///
/// Requires `d` and the target depth `d + k + weight(word) - n - 1` to lie
/// inside the truncation window, and `v` to be a coordinate vector at
/// depth `d`.
pub fn normal_order_identity_holds(
    tm: &TruncatedModule,
    ops: &VertexOps,
    word: &[Letter],
    letter: Letter,
    n: i64,
    d: usize,
    v: &[Q],
) -> Result<bool> {
    let (a, k) = letter;
    if k == 0 {
        return Err(Error::ShapeMismatch(
            "creation letters require positive mode depth".into(),
        ));
    }
    let depth = tm.depth() as i64;
    let kk = k as i64;
    let t = d as i64 + kk + VertexOps::weight(word) - n - 1;
    if d > tm.depth() || !(0..=depth).contains(&t) {
        return Err(Error::DepthOverflow {
            from: d as i64,
            to: t,
            max: depth,
        });
    }
    if v.len() != tm.dims[d] {
        return Err(Error::ShapeMismatch(format!(
            "expected a depth-{} vector of length {}",
            d, tm.dims[d]
        )));
    }
    let u_word: [Letter; 1] = [(a, k)];
    let mut combined: Vec<Letter> = vec![(a, k)];
    combined.extend_from_slice(word);
    let lhs = ops.mode_matrix(&combined, n, d)?.mul_vec(v);

    let mut rhs = vec![Q::zero(); tm.dims[t as usize]];
    // m < 0: u_m applied after the word mode; the word mode lands at
    // depth t + m - k + 1, which must be inside the module.
    for m in (kk - 1 - t).min(0)..0 {
        let mid = t + m - kk + 1;
        if mid < 0 {
            continue;
        }
        let wmat = ops.mode_matrix(word, n - 1 - m, d)?;
        if wmat.rows() == 0 || wmat.is_zero() {
            continue;
        }
        let umat = ops.mode_matrix(&u_word, m, mid as usize)?;
        let step = umat.mul_vec(&wmat.mul_vec(v));
        for (r, x) in step.into_iter().enumerate() {
            rhs[r] += x;
        }
    }
    // m >= 0: u_m vanishes for m < k - 1 (the field of u is a derivative
    // field); beyond that it lowers depth, staying inside the module.
    for m in (kk - 1).max(0)..=(d as i64 + kk - 1) {
        let dm = d as i64 + kk - m - 1;
        if dm < 0 {
            continue;
        }
        let umat = ops.mode_matrix(&u_word, m, d)?;
        if umat.rows() == 0 || umat.is_zero() {
            continue;
        }
        let wmat = ops.mode_matrix(word, n - 1 - m, dm as usize)?;
        if wmat.rows() == 0 {
            continue;
        }
        let step = wmat.mul_vec(&umat.mul_vec(v));
        for (r, x) in step.into_iter().enumerate() {
            rhs[r] += x;
        }
    }
    Ok(lhs == rhs)
}
