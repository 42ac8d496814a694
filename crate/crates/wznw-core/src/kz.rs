//! Pairwise Casimir operators on tensor products and the ordinary /
//! partial differential systems they generate for correlation functions.
//!
//! Contents:
//! - `omega`: the two-slot Casimir contraction built from the dual-basis
//!   pairing, plus restriction of operators to an invariant carrier;
//! - `assemble_kz` / `reduce_four_point`: the first-order system
//!   `kappa F'(z) = (B0/z + B1/(z-1)) F` satisfied by four-slot invariants
//!   after the standard reduction to the cross-ratio-like coordinate
//!   `z = x2/x1`, with the scalar consistency identity
//!   `B0 + B1 + Omega13 = S I` verified exactly on the carrier;
//! - `frobenius_system`: exact (rational) fundamental series solutions at
//!   the singular points 0 and 1, with a bordered solve at resonant
//!   offsets and a hard error when a logarithmic term would be needed;
//! - level-truncated fusion rules for sl(2) by two routes: the interval
//!   closed form and the spectrum of the pairwise Casimir plus the
//!   decoupling inequality;
//! - `extension_report`: exact exponent bookkeeping showing that products
//!   of two intertwining maps truncate below an integer power;
//! - `NPointSystem`: the multi-variable series in ratio coordinates
//!   `u_j = x_j / x_{j-1}` for products of several intertwining maps, with
//!   commuting cluster operators prescribing the leading exponents.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::liealg::LieAlgebra;
use crate::rat::{joint_eigenbasis, qi, rational_eigen, QMat, Q};
use crate::repn::{sp_mul_dense, Irrep, RepActions, TensorSpace};
use crate::sparse::SpMat;
use crate::Result;

/// Two-slot Casimir operator `sum_{ij} (K^{-1})_{ij} b_i^{(l)} b_j^{(p)}`
/// on a tensor space, using the dual-basis pairing.
pub fn omega(ts: &TensorSpace, alg: &LieAlgebra, l: usize, p: usize) -> SpMat {
    assert_ne!(l, p, "omega needs two distinct slots");
    let acts_l: Vec<SpMat> = (0..alg.dim()).map(|i| ts.slot_action(l, i)).collect();
    let acts_p: Vec<SpMat> = (0..alg.dim()).map(|i| ts.slot_action(p, i)).collect();
    let mut acc = SpMat::zeros(ts.dim(), ts.dim());
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            let g = alg.gram_inv().at(i, j);
            if g.is_zero() {
                continue;
            }
            acc = acc.add(&acts_l[i].mul(&acts_p[j]).scale(g));
        }
    }
    acc
}

/// Same contraction on a standalone list of slot representations (used by
/// the braid-relation checks without building invariants).
pub fn omega_on(alg: &LieAlgebra, reps: &[RepActions], l: usize, p: usize) -> SpMat {
    let ts = TensorSpace::new(reps.to_vec());
    omega(&ts, alg, l, p)
}

/// Express `op` in the coordinates of an invariant column basis:
/// returns `R` with `basis * R = op * basis`.
pub fn restrict_operator(op: &SpMat, basis: &QMat) -> Result<QMat> {
    let image = sp_mul_dense(op, basis);
    basis.solve(&image).map_err(|_| {
        Error::Singular("operator does not preserve the invariant subspace".into())
    })
}

/// The reduced first-order system on the invariant carrier of a tensor
/// product `L(w0)* (x) L(w1) (x) ... (x) L(wn)`, slot 0 dualized.
pub struct KzSystem {
    level: i64,
    kappa: Q,
    weights: Vec<Vec<i64>>,
    ts: TensorSpace,
    carrier: QMat,
    /// Restricted pairwise Casimirs for 1 <= l < p <= n (slot 0 excluded:
    /// its contributions are fixed by invariance).
    omegas: BTreeMap<(usize, usize), QMat>,
    casimirs: Vec<Q>,
    s_scalar: Q,
}

impl std::fmt::Debug for KzSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "KzSystem(level={}, weights={:?}, carrier_dim={})",
            self.level,
            self.weights,
            self.carrier.cols()
        )
    }
}

/// Build the reduced system for slot weights `[w0, w1, ..., wn]`, where
/// `w0` is the outgoing weight (slot 0 acts by the dual), `w1..w_{n-1}`
/// are insertions, and `wn` is the incoming weight.
pub fn assemble_kz(alg: &LieAlgebra, level: i64, weights: &[Vec<i64>]) -> Result<KzSystem> {
    if weights.len() < 3 {
        return Err(Error::BadSlots(format!(
            "need at least 3 slot weights (out, insertion, in), got {}",
            weights.len()
        )));
    }
    if level < 1 {
        return Err(Error::NotAdmissible {
            weight: vec![],
            level: level.to_string(),
            pairing: "positive integral level required".into(),
        });
    }
    let rs = alg.root_system();
    for w in weights {
        if !rs.is_dominant(w) {
            return Err(Error::NotDominant(w.clone()));
        }
        let pairing = rs.level_pairing(w);
        if pairing > qi(level) {
            return Err(Error::NotAdmissible {
                weight: w.clone(),
                level: level.to_string(),
                pairing: pairing.to_string(),
            });
        }
    }
    let kappa = qi(level + rs.dual_coxeter());
    if kappa.is_zero() {
        return Err(Error::CriticalLevel(level.to_string()));
    }

    let mut cache: BTreeMap<Vec<i64>, Irrep> = BTreeMap::new();
    for w in weights {
        if !cache.contains_key(w) {
            cache.insert(w.clone(), Irrep::new(alg, w)?);
        }
    }
    let mut factors: Vec<RepActions> = Vec::with_capacity(weights.len());
    factors.push(cache[&weights[0]].dual_actions());
    for w in &weights[1..] {
        factors.push(cache[w].rep_actions());
    }
    let ts = TensorSpace::new(factors);
    let carrier = ts.invariant_subspace(alg);

    let n = weights.len() - 1;
    let mut omegas = BTreeMap::new();
    for l in 1..=n {
        for p in (l + 1)..=n {
            let full = omega(&ts, alg, l, p);
            let restricted = restrict_operator(&full, &carrier)?;
            omegas.insert((l, p), restricted);
        }
    }
    let casimirs: Vec<Q> = weights.iter().map(|w| rs.casimir_scalar(w)).collect();

    // On the carrier the sum of all pairwise Casimirs among slots 1..n is
    // the scalar (c0 - c1 - ... - cn)/2; verify exactly.
    let s_scalar = (&casimirs[0]
        - casimirs[1..].iter().fold(Q::zero(), |a, b| a + b))
        / qi(2);
    let d = carrier.cols();
    if d > 0 {
        let mut total = QMat::zeros(d, d);
        for r in omegas.values() {
            total = total.add(r);
        }
        if total != QMat::identity(d).scale(&s_scalar) {
            return Err(Error::Internal(
                "pairwise Casimir sum is not the expected scalar on the carrier".into(),
            ));
        }
    }

    Ok(KzSystem {
        level,
        kappa,
        weights: weights.to_vec(),
        ts,
        carrier,
        omegas,
        casimirs,
        s_scalar,
    })
}

impl KzSystem {
    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn kappa(&self) -> &Q {
        &self.kappa
    }

    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn tensor_space(&self) -> &TensorSpace {
        &self.ts
    }

    pub fn carrier(&self) -> &QMat {
        &self.carrier
    }

    pub fn carrier_dim(&self) -> usize {
        self.carrier.cols()
    }

    /// Restricted pairwise Casimir for slots `1 <= l < p <= n`.
    pub fn omega_restricted(&self, l: usize, p: usize) -> Result<&QMat> {
        self.omegas
            .get(&(l.min(p), l.max(p)))
            .ok_or_else(|| Error::BadSlots(format!("no restricted operator for ({}, {})", l, p)))
    }

    /// Cluster operator `S_{>=j} = sum_{j <= l < p <= n} Omega_lp`.
    pub fn cluster_sum(&self, j: usize) -> QMat {
        let d = self.carrier.cols();
        let mut acc = QMat::zeros(d, d);
        for (&(l, _p), m) in &self.omegas {
            if l >= j {
                acc = acc.add(m);
            }
        }
        acc
    }

    /// The scalar value of the full pairwise sum on the carrier.
    pub fn s_scalar(&self) -> &Q {
        &self.s_scalar
    }

    pub fn casimir(&self, slot: usize) -> &Q {
        &self.casimirs[slot]
    }

    /// Conformal weight `h = c / (2 kappa)` of a slot.
    pub fn conformal_weight(&self, slot: usize) -> Q {
        &self.casimirs[slot] / (qi(2) * &self.kappa)
    }
}

/// The two-insertion case: `kappa F'(z) = (B0/z + B1/(z-1)) F` on the
/// carrier, `z = x2/x1`.
pub struct FourPointSystem {
    sys: KzSystem,
    b0: QMat,
    b1: QMat,
}

impl std::fmt::Debug for FourPointSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "FourPointSystem(weights={:?}, dim={})",
            self.sys.weights(),
            self.dim()
        )
    }
}

pub fn reduce_four_point(
    alg: &LieAlgebra,
    level: i64,
    weights: &[Vec<i64>; 4],
) -> Result<FourPointSystem> {
    let sys = assemble_kz(alg, level, weights)?;
    let b0 = sys.omega_restricted(2, 3)?.clone();
    let b1 = sys.omega_restricted(1, 2)?.clone();
    Ok(FourPointSystem { sys, b0, b1 })
}

impl FourPointSystem {
    pub fn system(&self) -> &KzSystem {
        &self.sys
    }

    pub fn dim(&self) -> usize {
        self.sys.carrier_dim()
    }

    pub fn kappa(&self) -> &Q {
        self.sys.kappa()
    }

    /// Residue matrix at z = 0 (pair of slots 2 and 3).
    pub fn b0(&self) -> &QMat {
        &self.b0
    }

    /// Residue matrix at z = 1 (pair of slots 1 and 2).
    pub fn b1(&self) -> &QMat {
        &self.b1
    }

    /// Residue matrix at infinity: `-(B0 + B1)`.
    pub fn b_inf(&self) -> QMat {
        self.b0.add(&self.b1).neg()
    }
}

/// Which regular singular point a local expansion is anchored at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularPoint {
    /// `z = 0`, local coordinate `z`.
    Zero,
    /// `z = 1`, local coordinate `t = 1 - z`.
    One,
}

/// One exact series solution `F = zeta^r sum_m c_m zeta^m` in the local
/// coordinate of a singular point.
#[derive(Clone, Debug)]
pub struct FrobeniusSolution {
    pub exponent: Q,
    /// `coeffs[m]` is the vector coefficient of `zeta^(r+m)` in carrier
    /// coordinates.
    pub coeffs: Vec<Vec<Q>>,
}

/// Full fundamental system of exact series solutions at a singular point.
///
/// In the local coordinate the system reads
/// `kappa F' = (R/zeta + T/(zeta-1)) F` with `R` the local residue, and
/// the coefficients obey the two-term recursion
/// `(R - kappa (r+m)) c_m = (R + T - kappa (r+m-1)) c_{m-1}` with
/// `c_0 in ker(R - kappa r)`.
///
/// Resonant offsets (`kappa (r+m)` again an eigenvalue of `R`) are handled
/// by one bordered solve over the whole resonant window, so a free choice
/// made at an early resonance never causes a spurious failure at a later
/// one; free variables are pinned to zero afterwards, which makes the
/// result deterministic. If the window system is inconsistent the true
/// solution needs a logarithm and `LogObstruction` is returned with the
/// first offset at which no consistent choice exists.
pub fn frobenius_system(
    fp: &FourPointSystem,
    at: SingularPoint,
    order: usize,
) -> Result<Vec<FrobeniusSolution>> {
    let mut out = Vec::new();
    for (val, _) in rational_eigen(local_residue(fp, at))? {
        out.extend(frobenius_family(fp, at, &val, order)?);
    }
    Ok(out)
}

fn local_residue(fp: &FourPointSystem, at: SingularPoint) -> &QMat {
    match at {
        SingularPoint::Zero => fp.b0(),
        SingularPoint::One => fp.b1(),
    }
}

/// The series solutions whose leading coefficients span the eigenspace of
/// the local residue matrix for one `eigenvalue` (exponent = eigenvalue /
/// kappa). Lets callers work with a well-behaved family even when another
/// family of the same system is log-obstructed.
pub fn frobenius_family(
    fp: &FourPointSystem,
    at: SingularPoint,
    eigenvalue: &Q,
    order: usize,
) -> Result<Vec<FrobeniusSolution>> {
    let r_mat = local_residue(fp, at);
    let t_mat = match at {
        SingularPoint::Zero => fp.b1(),
        SingularPoint::One => fp.b0(),
    };
    let kappa = fp.kappa();
    let d = fp.dim();
    let s_mat = r_mat.add(t_mat);
    let eigen = rational_eigen(r_mat)?;
    let eigvals: Vec<Q> = eigen.iter().map(|(v, _)| v.clone()).collect();
    let space = eigen
        .iter()
        .find(|(v, _)| v == eigenvalue)
        .map(|(_, s)| s.clone())
        .ok_or_else(|| {
            Error::Singular(format!("{} is not an eigenvalue of the residue", eigenvalue))
        })?;
    let r = eigenvalue / kappa;
    // Offsets m >= 1 where kappa (r + m) is again an eigenvalue.
    let resonant: Vec<usize> = (1..=order)
        .filter(|&m| eigvals.contains(&(eigenvalue + kappa * qi(m as i64))))
        .collect();
    let window = resonant.last().copied().unwrap_or(0);

    // Step matrices: lhs_m c_m = rhs_m c_{m-1}.
    let lhs_at = |m: usize| {
        let shift = kappa * (&r + qi(m as i64));
        r_mat.sub(&QMat::identity(d).scale(&shift))
    };
    let rhs_at = |m: usize| {
        let shift = kappa * (&r + qi(m as i64 - 1));
        s_mat.sub(&QMat::identity(d).scale(&shift))
    };
    // Block system for (c_1 .. c_t) given c_0: bidiagonal with lhs blocks
    // on the diagonal and -rhs blocks below it.
    let window_solve = |t: usize, c0: &[Q]| -> Result<Vec<Vec<Q>>> {
        let mut big = QMat::zeros(t * d, t * d);
        for m in 1..=t {
            let lhs = lhs_at(m);
            for i in 0..d {
                for j in 0..d {
                    big.set((m - 1) * d + i, (m - 1) * d + j, lhs.at(i, j).clone());
                }
            }
            if m >= 2 {
                let rhs = rhs_at(m);
                for i in 0..d {
                    for j in 0..d {
                        big.set((m - 1) * d + i, (m - 2) * d + j, -rhs.at(i, j));
                    }
                }
            }
        }
        let mut rhs_vec = rhs_at(1).mul_vec(c0);
        rhs_vec.resize(t * d, Q::zero());
        let sol = big.solve(&QMat::from_columns(&[rhs_vec]))?;
        let flat = sol.column(0);
        Ok((0..t).map(|m| flat[m * d..(m + 1) * d].to_vec()).collect())
    };

    let mut out = Vec::new();
    for col in 0..space.cols() {
        let c0 = space.column(col);
        let mut coeffs = vec![c0.clone()];
        if window > 0 {
            match window_solve(window, &c0) {
                Ok(cs) => coeffs.extend(cs),
                Err(_) => {
                    // Find the first resonant prefix with no solution.
                    let mut offset = window;
                    for &t in &resonant {
                        if window_solve(t, &c0).is_err() {
                            offset = t;
                            break;
                        }
                    }
                    return Err(Error::LogObstruction {
                        exponent: r.to_string(),
                        offset: offset as u32,
                    });
                }
            }
        }
        for m in (window + 1)..=order {
            let rhs_vec = rhs_at(m).mul_vec(&coeffs[m - 1]);
            let cm = lhs_at(m)
                .solve(&QMat::from_columns(&[rhs_vec]))
                .map_err(|_| Error::LogObstruction {
                    exponent: r.to_string(),
                    offset: m as u32,
                })?;
            coeffs.push(cm.column(0));
        }
        out.push(FrobeniusSolution {
            exponent: r.clone(),
            coeffs,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Level-truncated fusion for sl(2)
// ---------------------------------------------------------------------

/// A binary fusion rule at a positive integral level; sl(2) labels are
/// Dynkin labels (twice the spin).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionRule {
    pub level: i64,
    pub left: i64,
    pub right: i64,
    pub channels: Vec<i64>,
}

fn check_sl2_label(level: i64, m: i64) -> Result<()> {
    if m < 0 {
        return Err(Error::NotDominant(vec![m]));
    }
    if m > level {
        return Err(Error::NotAdmissible {
            weight: vec![m],
            level: level.to_string(),
            pairing: m.to_string(),
        });
    }
    Ok(())
}

/// Interval closed form: channels run from `|m1 - m2|` to
/// `min(m1 + m2, 2 level - m1 - m2)` in steps of 2.
pub fn fusion_sl2_closed(level: i64, m1: i64, m2: i64) -> Result<FusionRule> {
    check_sl2_label(level, m1)?;
    check_sl2_label(level, m2)?;
    let lo = (m1 - m2).abs();
    let hi = (m1 + m2).min(2 * level - m1 - m2);
    let mut channels = Vec::new();
    let mut m = lo;
    while m <= hi {
        channels.push(m);
        m += 2;
    }
    Ok(FusionRule {
        level,
        left: m1,
        right: m2,
        channels,
    })
}

/// Recover an sl(2) Dynkin label from its Casimir scalar
/// `c = m (m + 2) / 2`, if one exists.
pub fn sl2_label_from_casimir(c: &Q) -> Option<i64> {
    // m = -1 + sqrt(1 + 2c); need 1 + 2c a perfect square of an integer.
    let x = Q::one() + qi(2) * c;
    if x < Q::zero() || !x.is_integer() {
        return None;
    }
    let n = x.to_integer();
    let s = n.sqrt();
    if &s * &s != n {
        return None;
    }
    let m = s - 1;
    i64::try_from(m).ok().filter(|&m| m >= 0)
}

/// Spectral route: decompose the tensor product by the eigenvalues of the
/// pairwise Casimir (computed from the dual-basis contraction), recover
/// each channel label from its Casimir scalar, then keep the channels
/// obeying the level-truncation inequality `m1 + m2 + mu <= 2 level`.
pub fn fusion_sl2_spectral(
    alg: &LieAlgebra,
    level: i64,
    m1: i64,
    m2: i64,
) -> Result<FusionRule> {
    if alg.n() != 2 {
        return Err(Error::BadSlots("sl(2) fusion labels need sl(2)".into()));
    }
    check_sl2_label(level, m1)?;
    check_sl2_label(level, m2)?;
    let rs = alg.root_system();
    let r1 = Irrep::new(alg, &[m1])?;
    let r2 = Irrep::new(alg, &[m2])?;
    let ts = TensorSpace::new(vec![r1.rep_actions(), r2.rep_actions()]);
    let om = omega(&ts, alg, 0, 1).to_dense();
    let c1 = rs.casimir_scalar(&[m1]);
    let c2 = rs.casimir_scalar(&[m2]);
    let mut channels = Vec::new();
    for (val, space) in rational_eigen(&om)? {
        let c_mu = qi(2) * &val + &c1 + &c2;
        let mu = sl2_label_from_casimir(&c_mu).ok_or_else(|| {
            Error::Internal(format!("eigenvalue {} matches no sl(2) channel", val))
        })?;
        // The isotypic block of channel mu must have its full classical
        // dimension mu + 1.
        if space.cols() as i64 != mu + 1 {
            return Err(Error::Internal(format!(
                "channel {} eigenspace has dimension {}, expected {}",
                mu,
                space.cols(),
                mu + 1
            )));
        }
        if m1 + m2 + mu <= 2 * level {
            channels.push(mu);
        }
    }
    channels.sort_unstable();
    Ok(FusionRule {
        level,
        left: m1,
        right: m2,
        channels,
    })
}

/// One local fusion channel of a four-slot system at a singular point.
#[derive(Clone, Debug)]
pub struct Channel {
    /// sl(2) Dynkin label of the intermediate weight.
    pub label: i64,
    /// Eigenvalue of the local residue matrix.
    pub eigenvalue: Q,
    /// Local exponent `eigenvalue / kappa`.
    pub exponent: Q,
    /// Dimension of the eigenspace on the carrier.
    pub multiplicity: usize,
    /// Whether the channel survives level truncation on both sides.
    pub physical: bool,
}

/// Channel decomposition of the local residue matrix at a singular point,
/// for sl(2) weights.
///
/// At `z = 0` the intermediate weight couples the pairs `(w2, w3)` and
/// `(w0, w1)`; at `z = 1` it couples `(w1, w2)` and `(w0, w3)`. A channel
/// is physical when the truncation inequality holds for both pairs.
pub fn sl2_channels(fp: &FourPointSystem, at: SingularPoint) -> Result<Vec<Channel>> {
    let w = fp.system().weights();
    if w.iter().any(|x| x.len() != 1) {
        return Err(Error::BadSlots(
            "channel labels are defined for sl(2) weights only".into(),
        ));
    }
    let level = fp.system().level();
    let labels: Vec<i64> = w.iter().map(|x| x[0]).collect();
    let (pair_in, pair_out, r_mat) = match at {
        SingularPoint::Zero => ((labels[2], labels[3]), (labels[0], labels[1]), fp.b0()),
        SingularPoint::One => ((labels[1], labels[2]), (labels[0], labels[3]), fp.b1()),
    };
    let rs_c = |m: i64| qi(m) * qi(m + 2) / qi(2);
    let kappa = fp.kappa();
    let mut out = Vec::new();
    for (val, space) in rational_eigen(r_mat)? {
        let c_mu = qi(2) * &val + rs_c(pair_in.0) + rs_c(pair_in.1);
        let mu = sl2_label_from_casimir(&c_mu).ok_or_else(|| {
            Error::Internal(format!("eigenvalue {} matches no sl(2) channel", val))
        })?;
        let physical =
            pair_in.0 + pair_in.1 + mu <= 2 * level && pair_out.0 + pair_out.1 + mu <= 2 * level;
        out.push(Channel {
            label: mu,
            eigenvalue: val.clone(),
            exponent: &val / kappa,
            multiplicity: space.cols(),
            physical,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Extension bookkeeping
// ---------------------------------------------------------------------

/// Exact exponent data exhibiting the lower truncation of the composition
/// of two intertwining maps.
#[derive(Clone, Debug)]
pub struct ExtensionReport {
    /// Local exponents `s_i` at z = 1 (iterate side), ascending, deduped.
    pub exponents: Vec<Q>,
    /// Exponent pairs `(S/kappa - s_i, s_i)` for the two-variable
    /// expansion `x1^(r_i) (x1 - x2)^(s_i)`-type terms.
    pub pairs: Vec<(Q, Q)>,
    /// Integer `N` with `h1 + h2 + s_i > N` for every i.
    pub lower_bound: i64,
    /// `min_i (h1 + h2 + s_i) - N`, in (0, 1].
    pub margin: Q,
    /// Both singular points admit full logarithm-free fundamental systems
    /// through the requested order.
    pub no_log: bool,
}

pub fn extension_report(fp: &FourPointSystem, order: usize) -> Result<ExtensionReport> {
    let kappa = fp.kappa();
    let eig = rational_eigen(fp.b1())?;
    let mut exponents: Vec<Q> = eig.iter().map(|(v, _)| v / kappa).collect();
    exponents.dedup();
    let s_over_kappa = fp.system().s_scalar() / kappa;
    let pairs: Vec<(Q, Q)> = exponents
        .iter()
        .map(|s| (&s_over_kappa - s, s.clone()))
        .collect();
    let h1 = fp.system().conformal_weight(1);
    let h2 = fp.system().conformal_weight(2);
    let shifted: Vec<Q> = exponents.iter().map(|s| &h1 + &h2 + s).collect();
    let min = shifted.iter().min().cloned().expect("nonempty spectrum");
    // Largest integer strictly below min.
    let floor = min.floor().to_integer();
    let floor_i64 = i64::try_from(floor.clone()).map_err(|_| {
        Error::Internal("extension exponent out of range".into())
    })?;
    let n = if min.is_integer() { floor_i64 - 1 } else { floor_i64 };
    let margin = &min - qi(n);
    let mut no_log = true;
    for at in [SingularPoint::Zero, SingularPoint::One] {
        match frobenius_system(fp, at, order) {
            Ok(_) => {}
            Err(Error::LogObstruction { .. }) => no_log = false,
            Err(e) => return Err(e),
        }
    }
    Ok(ExtensionReport {
        exponents,
        pairs,
        lower_bound: n,
        margin,
        no_log,
    })
}

// ---------------------------------------------------------------------
// Multi-variable series for products of several intertwining maps
// ---------------------------------------------------------------------

/// The cluster-coordinate expansion of a product of `q` intertwining maps
/// evaluated at `x1 > x2 > ... > xq > 0`: with `u_j = x_j / x_{j-1}`, the
/// invariant-valued function is `x1^(S/kappa) G(u_2, ..., u_q)` and `G`
/// satisfies for each j in 2..=q
///
/// `kappa D_j G = [ S_{>=j} - sum_{a < j <= b <= q} Omega_ab
///                  sum_{mu >= 1} (u_{a+1} ... u_b)^mu ] G`,
///
/// where `D_j = u_j d/du_j` and `S_{>=j}` sums the restricted pairwise
/// Casimirs over `j <= l < p <= n` (the incoming slot is index `n = q+1`).
/// The `S_{>=j}` commute pairwise; their joint eigenvalues give the
/// leading exponents.
pub struct NPointSystem {
    sys: KzSystem,
    q: usize,
    clusters: Vec<QMat>,
}

impl std::fmt::Debug for NPointSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "NPointSystem(q={}, weights={:?}, dim={})",
            self.q,
            self.sys.weights(),
            self.sys.carrier_dim()
        )
    }
}

/// One joint-exponent series solution `G = prod_j u_j^(rho_j) sum c_m u^m`.
#[derive(Clone, Debug)]
pub struct NPointSolution {
    /// Leading exponents `(rho_2, ..., rho_q)`.
    pub rho: Vec<Q>,
    /// Multi-index (m_2, ..., m_q) -> vector coefficient, complete for all
    /// `|m| <= order`.
    pub coeffs: BTreeMap<Vec<usize>, Vec<Q>>,
    pub order: usize,
}

pub fn assemble_n_point(
    alg: &LieAlgebra,
    level: i64,
    weights: &[Vec<i64>],
) -> Result<NPointSystem> {
    let sys = assemble_kz(alg, level, weights)?;
    let q = weights.len() - 2;
    if q < 1 {
        return Err(Error::BadSlots("need at least one insertion".into()));
    }
    let clusters: Vec<QMat> = (2..=q).map(|j| sys.cluster_sum(j)).collect();
    Ok(NPointSystem { sys, q, clusters })
}

impl NPointSystem {
    pub fn system(&self) -> &KzSystem {
        &self.sys
    }

    pub fn insertions(&self) -> usize {
        self.q
    }

    /// Cluster operator `S_{>=j}` for `2 <= j <= q`.
    pub fn cluster(&self, j: usize) -> &QMat {
        &self.clusters[j - 2]
    }

    /// Verify the cluster operators commute pairwise (exact check).
    pub fn clusters_commute(&self) -> bool {
        for a in 0..self.clusters.len() {
            for b in (a + 1)..self.clusters.len() {
                if !self.clusters[a].commutator(&self.clusters[b]).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Compute the complete family of joint-exponent series solutions with
    /// all coefficients of total degree `<= order`.
    pub fn series(&self, order: usize) -> Result<Vec<NPointSolution>> {
        let d = self.sys.carrier_dim();
        let kappa = self.sys.kappa();
        let nvars = self.q.saturating_sub(1);
        if nvars == 0 {
            // A single insertion: G is constant; one solution per carrier
            // basis vector.
            let mut out = Vec::new();
            for c in 0..d {
                let mut unit = vec![Q::zero(); d];
                unit[c] = Q::one();
                let mut coeffs = BTreeMap::new();
                coeffs.insert(Vec::new(), unit);
                out.push(NPointSolution {
                    rho: Vec::new(),
                    coeffs,
                    order,
                });
            }
            return Ok(out);
        }

        let joint = joint_eigenbasis(d, &self.clusters)?;
        let tuple_set: Vec<Vec<Q>> = joint.iter().map(|(t, _)| t.clone()).collect();
        // Enumerate multi-indices by (total degree, lex) so every
        // coefficient a recursion step needs is already computed.
        let mut indices: Vec<Vec<usize>> = Vec::new();
        for total in 0..=order {
            let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
            for pos in 0..nvars {
                let mut next = Vec::new();
                for partial in &stack {
                    let used: usize = partial.iter().sum();
                    if pos == nvars - 1 {
                        let mut p2 = partial.clone();
                        p2.push(total - used);
                        next.push(p2);
                    } else {
                        for v in 0..=(total - used) {
                            let mut p2 = partial.clone();
                            p2.push(v);
                            next.push(p2);
                        }
                    }
                }
                stack = next;
            }
            indices.extend(stack);
        }

        let mut out = Vec::new();
        for (tuple, space) in &joint {
            let rho: Vec<Q> = tuple.iter().map(|v| v / kappa).collect();
            // Resonant multi-indices: the shifted tuple is again a joint
            // eigenvalue tuple, so some stacked step is singular. All of
            // them are absorbed into one window solve, exactly as in the
            // one-variable case.
            let resonant_totals: Vec<usize> = {
                let mut totals: Vec<usize> = indices
                    .iter()
                    .filter(|m| m.iter().any(|&x| x > 0))
                    .filter(|m| {
                        let shifted: Vec<Q> = tuple
                            .iter()
                            .zip(m.iter())
                            .map(|(v, &mj)| v + kappa * qi(mj as i64))
                            .collect();
                        tuple_set.contains(&shifted)
                    })
                    .map(|m| m.iter().sum())
                    .collect();
                totals.sort_unstable();
                totals.dedup();
                totals
            };
            let window = resonant_totals.last().copied().unwrap_or(0);

            for col in 0..space.cols() {
                let c0 = space.column(col);
                let mut coeffs: BTreeMap<Vec<usize>, Vec<Q>> = BTreeMap::new();
                coeffs.insert(vec![0; nvars], c0.clone());
                if window > 0 {
                    match self.window_solve(&indices, window, &rho, &c0) {
                        Ok(solved) => coeffs.extend(solved),
                        Err(_) => {
                            let mut offset = window;
                            for &t in &resonant_totals {
                                if self.window_solve(&indices, t, &rho, &c0).is_err() {
                                    offset = t;
                                    break;
                                }
                            }
                            return Err(Error::LogObstruction {
                                exponent: format!("{:?}", rho),
                                offset: offset as u32,
                            });
                        }
                    }
                }
                for m in &indices {
                    let total: usize = m.iter().sum();
                    if total <= window {
                        continue;
                    }
                    let (stacked, rhs_vec) = self.stacked_step(m, &rho, &coeffs)?;
                    let rhs = QMat::from_columns(&[rhs_vec]);
                    let cm = stacked.solve(&rhs).map_err(|_| Error::LogObstruction {
                        exponent: format!("{:?}", rho),
                        offset: total as u32,
                    })?;
                    coeffs.insert(m.clone(), cm.column(0));
                }
                out.push(NPointSolution {
                    rho: rho.clone(),
                    coeffs,
                    order,
                });
            }
        }
        Ok(out)
    }

    /// Every straddle monomial `u_{a+1} ... u_b` (for `a < j <= b <= q`)
    /// and the operator it carries, with the variable positions it shifts.
    fn straddles(&self, j: usize) -> Result<Vec<(&QMat, Vec<usize>)>> {
        let mut out = Vec::new();
        for a in 1..j {
            for b in j..=self.q {
                let om = self.sys.omega_restricted(a, b)?;
                let positions: Vec<usize> = ((a + 1)..=b).map(|i| i - 2).collect();
                out.push((om, positions));
            }
        }
        Ok(out)
    }

    /// The stacked linear step for one multi-index: all variable equations
    /// (those with `m_j = 0` contribute homogeneous rows that double as
    /// integrability constraints), with every straddle contribution from
    /// lower multi-indices moved to the right-hand side.
    fn stacked_step(
        &self,
        m: &[usize],
        rho: &[Q],
        coeffs: &BTreeMap<Vec<usize>, Vec<Q>>,
    ) -> Result<(QMat, Vec<Q>)> {
        let d = self.sys.carrier_dim();
        let kappa = self.sys.kappa();
        let mut stacked: Option<QMat> = None;
        let mut rhs_vec: Vec<Q> = Vec::new();
        for (pos, &mj) in m.iter().enumerate() {
            let j = pos + 2;
            let shift = kappa * (&rho[pos] + qi(mj as i64));
            let lhs = QMat::identity(d).scale(&shift).sub(&self.clusters[pos]);
            let mut rhs = vec![Q::zero(); d];
            for (om, positions) in self.straddles(j)? {
                let mu_max = positions.iter().map(|&p| m[p]).min().unwrap_or(0);
                for mu in 1..=mu_max {
                    let mut prev = m.to_vec();
                    for &p in &positions {
                        prev[p] -= mu;
                    }
                    let term = om.mul_vec(&coeffs[&prev]);
                    for (slot, t) in term.into_iter().enumerate() {
                        rhs[slot] -= t;
                    }
                }
            }
            stacked = Some(match stacked {
                None => lhs,
                Some(top) => top.vstack(&lhs),
            });
            rhs_vec.extend(rhs);
        }
        Ok((stacked.expect("at least one variable"), rhs_vec))
    }

    /// One bordered solve for every coefficient of total degree 1..=t,
    /// coupling all their stacked equations, so resonant steps can use the
    /// freedom of earlier resonant steps. Free variables are pinned to
    /// zero, giving the canonical representative of the solution set.
    fn window_solve(
        &self,
        indices: &[Vec<usize>],
        t: usize,
        rho: &[Q],
        c0: &[Q],
    ) -> Result<BTreeMap<Vec<usize>, Vec<Q>>> {
        let d = self.sys.carrier_dim();
        let kappa = self.sys.kappa();
        let nvars = rho.len();
        let active: Vec<&Vec<usize>> = indices
            .iter()
            .filter(|m| {
                let s: usize = m.iter().sum();
                s >= 1 && s <= t
            })
            .collect();
        let col_of: BTreeMap<&Vec<usize>, usize> = active
            .iter()
            .enumerate()
            .map(|(i, m)| (*m, i * d))
            .collect();
        let rows = active.len() * nvars * d;
        let cols = active.len() * d;
        let mut big = QMat::zeros(rows, cols);
        let mut rhs_vec = vec![Q::zero(); rows];
        for (mi, m) in active.iter().enumerate() {
            for pos in 0..nvars {
                let j = pos + 2;
                let row0 = (mi * nvars + pos) * d;
                let shift = kappa * (&rho[pos] + qi(m[pos] as i64));
                let diag = QMat::identity(d).scale(&shift).sub(&self.clusters[pos]);
                let col0 = mi * d;
                for i in 0..d {
                    for jj in 0..d {
                        big.set(row0 + i, col0 + jj, diag.at(i, jj).clone());
                    }
                }
                for (om, positions) in self.straddles(j)? {
                    let mu_max = positions.iter().map(|&p| m[p]).min().unwrap_or(0);
                    for mu in 1..=mu_max {
                        let mut prev = (*m).clone();
                        for &p in &positions {
                            prev[p] -= mu;
                        }
                        if prev.iter().all(|&x| x == 0) {
                            let term = om.mul_vec(c0);
                            for (slot, v) in term.into_iter().enumerate() {
                                rhs_vec[row0 + slot] -= v;
                            }
                        } else {
                            let pcol = col_of[&prev];
                            for i in 0..d {
                                for jj in 0..d {
                                    let acc = big.at(row0 + i, pcol + jj) + om.at(i, jj);
                                    big.set(row0 + i, pcol + jj, acc);
                                }
                            }
                        }
                    }
                }
            }
        }
        let sol = big.solve(&QMat::from_columns(&[rhs_vec]))?;
        let flat = sol.column(0);
        Ok(active
            .into_iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), flat[i * d..(i + 1) * d].to_vec()))
            .collect())
    }
}

impl NPointSolution {
    /// Exact partial sum of the analytic factor `sum c_m u^m` at rational
    /// arguments (the `u^rho` prefactor is not included).
    pub fn eval_rational(&self, u: &[Q]) -> Vec<Q> {
        let d = self
            .coeffs
            .values()
            .next()
            .map(|v| v.len())
            .unwrap_or(0);
        let mut acc = vec![Q::zero(); d];
        for (m, c) in &self.coeffs {
            let mut mono = Q::one();
            for (pos, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    mono *= &u[pos];
                }
            }
            for (slot, v) in c.iter().enumerate() {
                acc[slot] += v * &mono;
            }
        }
        acc
    }

    /// 1-norms of the degree shells `sum_{|m| = s} |c_m| u^m` at positive
    /// rational arguments; exact, used for tail-ratio diagnostics.
    pub fn shell_norms(&self, u: &[Q]) -> Vec<Q> {
        let mut shells = vec![Q::zero(); self.order + 1];
        for (m, c) in &self.coeffs {
            let total: usize = m.iter().sum();
            let mut mono = Q::one();
            for (pos, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    mono *= &u[pos];
                }
            }
            let norm: Q = c.iter().map(|v| v.abs()).sum();
            shells[total] += norm * mono;
        }
        shells
    }

    /// Geometric tail-ratio estimate at positive rational arguments: the
    /// largest consecutive shell-norm ratio over the trailing `window`
    /// shells. `None` when a trailing shell vanishes (the series
    /// truncates, so there is no geometric tail to estimate).
    pub fn tail_ratio(&self, u: &[Q], window: usize) -> Option<Q> {
        let shells = self.shell_norms(u);
        let lo = (self.order + 1).saturating_sub(window).max(1);
        let mut worst: Option<Q> = None;
        for s in lo..=self.order {
            if shells[s - 1].is_zero() {
                return None;
            }
            let r = &shells[s] / &shells[s - 1];
            if worst.as_ref().is_none_or(|w| &r > w) {
                worst = Some(r);
            }
        }
        worst
    }
}

/// Combines local solution blocks of independent factor systems into the
/// block of the product system: a correlation block of a tensor product of
/// vertex algebras factors as the product of the factor blocks, so the
/// leading exponents add and the coefficient series multiply (Cauchy
/// product), with component vectors combined by Kronecker product.
///
/// All factors must be truncated at the same order; anything else would
/// silently degrade the product's accuracy, so it is rejected.
pub fn factor_blocks(factors: &[FrobeniusSolution]) -> Result<FrobeniusSolution> {
    let first = factors
        .first()
        .ok_or_else(|| Error::ShapeMismatch("factor product needs at least one factor".into()))?;
    let mut acc = first.clone();
    for f in &factors[1..] {
        if f.coeffs.len() != acc.coeffs.len() {
            return Err(Error::ShapeMismatch(format!(
                "factor truncation orders differ: {} vs {}",
                acc.coeffs.len() - 1,
                f.coeffs.len() - 1
            )));
        }
        let order = acc.coeffs.len() - 1;
        let da = acc.coeffs[0].len();
        let db = f.coeffs[0].len();
        let mut coeffs = vec![vec![Q::zero(); da * db]; order + 1];
        for (m, out) in coeffs.iter_mut().enumerate() {
            for i in 0..=m {
                let a = &acc.coeffs[i];
                let b = &f.coeffs[m - i];
                for (ai, av) in a.iter().enumerate() {
                    if av.is_zero() {
                        continue;
                    }
                    for (bi, bv) in b.iter().enumerate() {
                        if !bv.is_zero() {
                            out[ai * db + bi] += av * bv;
                        }
                    }
                }
            }
        }
        acc = FrobeniusSolution { exponent: &acc.exponent + &f.exponent, coeffs };
    }
    Ok(acc)
}

// ---------------------------------------------------------------------
// Scalar series utilities
// ---------------------------------------------------------------------

/// Generalized binomial coefficient `alpha (alpha-1) ... (alpha-m+1) / m!`.
pub fn binomial_q(alpha: &Q, m: usize) -> Q {
    let mut num = Q::one();
    for i in 0..m {
        num *= alpha - qi(i as i64);
        num /= qi(i as i64 + 1);
    }
    num
}

/// Taylor coefficients of `(1 - z)^alpha` through the given order.
pub fn binomial_series(alpha: &Q, order: usize) -> Vec<Q> {
    (0..=order)
        .map(|m| {
            let b = binomial_q(alpha, m);
            if m % 2 == 0 {
                b
            } else {
                -b
            }
        })
        .collect()
}

/// Cauchy product truncated to the shorter input length.
pub fn cauchy_product(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|m| (0..=m).map(|i| &a[i] * &b[m - i]).sum())
        .collect()
}
