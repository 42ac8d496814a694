//! Numerical analytic continuation of the reduced correlation systems.
//!
//! Everything here runs on top of the exact rational data produced by
//! [`crate::kz`]: local series solutions are evaluated with certified
//! geometric tail bounds, transported along polygonal paths in the
//! twice-punctured plane by an adaptive Taylor integrator, and compared
//! across overlapping expansion regions. The module produces connection
//! matrices between the local solution bases at the two finite singular
//! points, monodromy and braiding data for loops around them, and the
//! verification reports consumed by the command-line driver:
//!
//! - [`connection_matrix`]: the change of basis between the solution
//!   frames at 0 and 1, anchored where both series converge comfortably,
//!   cross-checked by continuing one frame into the overlap and comparing
//!   against the other frame composed with the matrix;
//! - [`monodromy_suite`]: loop transports around 0, around 1, and around
//!   both points at once, with residuals for the defining relations
//!   (contractible loops act trivially, the three loop matrices compose
//!   to the identity, each local loop acts by unit phases determined by
//!   the local exponents, and the square of the half-turn braiding
//!   transport is the full loop);
//! - [`verify_extension`] / [`verify_associativity`] /
//!   [`verify_n_point`]: the report types behind the corresponding
//!   driver tasks.
//!
//! Branch conventions: fractional powers use the principal branch of the
//! logarithm in the local coordinate (`z` at the origin, `1 - z` at the
//! other finite singular point). On the real interval (0, 1) both local
//! coordinates are positive, so all fractional powers there are real and
//! positive, which is what makes frames at the two points directly
//! comparable on the overlap.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use astro_float::BigFloat;

use crate::bigcx::{Ctx, Cx, CxMat};
use crate::error::Error;
use crate::kz::{
    extension_report, frobenius_system, sl2_channels, ExtensionReport, FourPointSystem,
    FrobeniusSolution, NPointSystem, SingularPoint,
};
use crate::rat::{qr, Q};
use crate::Result;

/// Number of trailing coefficient shells inspected by the geometric tail
/// estimator.
const TAIL_WINDOW: usize = 8;

/// Hard cap on integration steps along a single straight segment.
const MAX_STEPS: usize = 10_000;

fn q_pow10(k: u32) -> Q {
    Q::new(BigInt::from(1), BigInt::from(10u32).pow(k))
}

// ---------------------------------------------------------------------
// Series evaluation with certified tails
// ---------------------------------------------------------------------

/// Evaluates a local series solution at a point `zeta` of the local
/// coordinate disk, including the fractional-power prefactor
/// `zeta^exponent` (principal branch).
///
/// The truncation error is bounded by fitting a geometric ratio to the
/// trailing [`TAIL_WINDOW`] coefficient shells (gap-adjusted, so series
/// supported on a sublattice are handled); the result is returned only if
/// that bound, scaled by the prefactor modulus, stays below `tol`.
/// Arguments outside the open unit disk are rejected outright, because
/// the series has a singular point at distance one and no decay estimate
/// from finitely many shells could be trusted there.
pub fn evaluate_series(ctx: &Ctx, sol: &FrobeniusSolution, zeta: &Cx, tol: &Q) -> Result<Vec<Cx>> {
    let order = sol.coeffs.len().saturating_sub(1);
    let dim = sol.coeffs.first().map_or(0, |c| c.len());
    let one = ctx.from_i64(1);
    let azeta2 = zeta.abs2(ctx);
    if !ctx.lt(&azeta2, &one) {
        return Err(Error::PrecisionNotMet(
            "series argument lies outside the open unit disk of convergence".into(),
        ));
    }
    let azeta = ctx.sqrt(&azeta2);

    let mut acc = vec![Cx::zero(ctx); dim];
    let mut pow = Cx::one(ctx);
    let mut apow = ctx.from_i64(1);
    let mut shells: Vec<BigFloat> = Vec::with_capacity(order + 1);
    for c in &sol.coeffs {
        let mut peak = Q::zero();
        for (i, v) in c.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let term = Cx::from_q(ctx, v).mul(&pow, ctx);
            acc[i] = acc[i].add(&term, ctx);
            let av = v.abs();
            if av > peak {
                peak = av;
            }
        }
        shells.push(if peak.is_zero() {
            ctx.zero()
        } else {
            ctx.mul(&ctx.from_q(&peak), &apow)
        });
        pow = pow.mul(zeta, ctx);
        apow = ctx.mul(&apow, &azeta);
    }

    let prefactor = zeta.pow_q(&sol.exponent, ctx)?;
    let apref = prefactor.abs(ctx);
    let tol_bf = ctx.from_q(tol);
    match estimate_tail(ctx, &shells) {
        Some(tail) => {
            let scaled = ctx.mul(&tail, &apref);
            if !ctx.lt(&scaled, &tol_bf) {
                return Err(Error::SeriesTail {
                    estimate: ctx.format_real(&scaled),
                    tolerance: ctx.format_real(&tol_bf),
                    order,
                });
            }
        }
        None => {
            return Err(Error::SeriesTail {
                estimate: "no certified geometric decay in the trailing shells".into(),
                tolerance: ctx.format_real(&tol_bf),
                order,
            });
        }
    }
    Ok(acc.iter().map(|a| a.mul(&prefactor, ctx)).collect())
}

/// Geometric tail bound from the trailing window of shell magnitudes
/// `max_i |c_{m,i}| |zeta|^m`, or `None` when the window does not certify
/// decay. Two or more vanishing trailing shells are read as a truncating
/// (polynomial) series, whose tail is exactly zero.
fn estimate_tail(ctx: &Ctx, shells: &[BigFloat]) -> Option<BigFloat> {
    let order = shells.len() - 1;
    let lo = (order + 1).saturating_sub(TAIL_WINDOW);
    let nz: Vec<usize> = (lo..=order).filter(|&m| !shells[m].is_zero()).collect();
    let last = match nz.last() {
        None => return Some(ctx.zero()),
        Some(&last) => last,
    };
    if order - last >= 2 {
        return Some(ctx.zero());
    }
    if nz.len() < 2 {
        return None;
    }
    // Gap-adjusted per-step ratio between consecutive nonzero shells; the
    // worst (largest) one is used as the geometric rate for the tail.
    let one = ctx.from_i64(1);
    let mut rate: Option<BigFloat> = None;
    for pair in nz.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let quotient = ctx.div(&shells[j], &shells[i]);
        let log = ctx.ln(&quotient);
        let r = ctx.exp(&ctx.div(&log, &ctx.from_i64((j - i) as i64)));
        if rate.as_ref().is_none_or(|w| ctx.lt(w, &r)) {
            rate = Some(r);
        }
    }
    let rate = rate?;
    if !ctx.lt(&rate, &one) {
        return None;
    }
    // Extrapolate past a possible single vanishing trailing shell, then
    // sum the geometric series.
    let mut head = shells[last].clone();
    for _ in last..order {
        head = ctx.mul(&head, &rate);
    }
    let tail = ctx.div(&ctx.mul(&head, &rate), &ctx.sub(&one, &rate));
    Some(tail)
}

/// The local coordinate of a point `z` on the real axis: `z` at the
/// origin, `1 - z` at the other finite singular point.
fn local_coordinate(at: SingularPoint, z: &Q) -> Q {
    match at {
        SingularPoint::Zero => z.clone(),
        SingularPoint::One => Q::one() - z,
    }
}

/// Evaluates a full local frame at a real point: the matrix whose columns
/// are the local solutions, in the order produced by the series solver
/// (ascending exponents).
pub fn frame_matrix(
    ctx: &Ctx,
    sols: &[FrobeniusSolution],
    at: SingularPoint,
    z: &Q,
    tol: &Q,
) -> Result<CxMat> {
    let dim = sols
        .first()
        .and_then(|s| s.coeffs.first())
        .map_or(0, |c| c.len());
    let zeta = Cx::from_q(ctx, &local_coordinate(at, z));
    let mut frame = CxMat::zeros(ctx, dim, sols.len());
    for (j, sol) in sols.iter().enumerate() {
        let col = evaluate_series(ctx, sol, &zeta, tol)?;
        if col.len() != dim {
            return Err(Error::Internal(
                "local solutions have inconsistent component counts".into(),
            ));
        }
        for (i, v) in col.into_iter().enumerate() {
            frame.set(i, j, v);
        }
    }
    Ok(frame)
}

// ---------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------

/// A piecewise-linear path in the complex plane, stored as its waypoints.
///
/// Only the homotopy class in the twice-punctured plane matters to the
/// transport, so loops "around" a point are polygons; [`Path::check_margin`]
/// guarantees a quantitative distance from both finite singular points
/// before any integration starts.
#[derive(Clone, Debug)]
pub struct Path {
    points: Vec<Cx>,
}

impl Path {
    /// A path through the given waypoints (at least two).
    pub fn from_waypoints(points: Vec<Cx>) -> Result<Path> {
        if points.len() < 2 {
            return Err(Error::Config {
                field: "path".into(),
                message: "a path needs at least two waypoints".into(),
            });
        }
        Ok(Path { points })
    }

    /// The straight segment between two points.
    pub fn segment(from: Cx, to: Cx) -> Path {
        Path {
            points: vec![from, to],
        }
    }

    /// A polyline through exact rational waypoints `(re, im)`.
    pub fn polyline_q(ctx: &Ctx, pts: &[(Q, Q)]) -> Result<Path> {
        Path::from_waypoints(
            pts.iter()
                .map(|(re, im)| Cx::new(ctx.from_q(re), ctx.from_q(im)))
                .collect(),
        )
    }

    /// A polygonal circular arc around `center`, starting at `start` and
    /// sweeping `turns` full revolutions (positive = counterclockwise),
    /// sampled at `segments` equal angular increments. For a whole number
    /// of turns the final waypoint is the exact starting point, so the
    /// path is a genuine loop.
    pub fn circle_from(
        ctx: &Ctx,
        center: &Cx,
        start: &Cx,
        turns: &Q,
        segments: usize,
    ) -> Result<Path> {
        if segments < 2 {
            return Err(Error::Config {
                field: "path".into(),
                message: "an arc needs at least two segments".into(),
            });
        }
        if turns.is_zero() {
            return Err(Error::Config {
                field: "path".into(),
                message: "an arc must sweep a nonzero angle".into(),
            });
        }
        let radial = start.sub(center, ctx);
        let mut points = Vec::with_capacity(segments + 1);
        points.push(start.clone());
        for k in 1..=segments {
            if k == segments && turns.is_integer() {
                points.push(start.clone());
            } else {
                let t = turns * qr(k as i64, segments as i64);
                let phase = Cx::unit_phase(&t, ctx);
                points.push(center.add(&radial.mul(&phase, ctx), ctx));
            }
        }
        Path::from_waypoints(points)
    }

    /// Replaces the final waypoint (used to pin the endpoint of a
    /// composite arc to an exactly represented target).
    pub fn with_endpoint(mut self, end: Cx) -> Path {
        *self.points.last_mut().expect("paths are nonempty") = end;
        self
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> Path {
        Path {
            points: self.points.iter().rev().cloned().collect(),
        }
    }

    /// First waypoint.
    pub fn start(&self) -> &Cx {
        self.points.first().expect("paths are nonempty")
    }

    /// Last waypoint.
    pub fn end(&self) -> &Cx {
        self.points.last().expect("paths are nonempty")
    }

    /// The waypoints.
    pub fn waypoints(&self) -> &[Cx] {
        &self.points
    }

    /// Minimum distance from the path to a point, over all segments.
    pub fn min_distance_to(&self, ctx: &Ctx, point: &Cx) -> BigFloat {
        let mut best: Option<BigFloat> = None;
        for w in self.points.windows(2) {
            let d = segment_distance(ctx, &w[0], &w[1], point);
            if best.as_ref().is_none_or(|b| ctx.lt(&d, b)) {
                best = Some(d);
            }
        }
        best.expect("paths have at least one segment")
    }

    /// Fails with a path-placement error unless every segment keeps at
    /// least `margin` away from both finite singular points 0 and 1.
    pub fn check_margin(&self, ctx: &Ctx, margin: &Q) -> Result<()> {
        let m = ctx.from_q(margin);
        for (name, s) in [("0", Cx::zero(ctx)), ("1", Cx::one(ctx))] {
            let d = self.min_distance_to(ctx, &s);
            if !ctx.lt(&m, &d) {
                return Err(Error::PathNearSingularity {
                    singularity: name.into(),
                    distance: ctx.format_real(&d),
                });
            }
        }
        Ok(())
    }
}

/// Distance from point `p` to the segment `[a, b]`.
fn segment_distance(ctx: &Ctx, a: &Cx, b: &Cx, p: &Cx) -> BigFloat {
    let v = b.sub(a, ctx);
    let w = p.sub(a, ctx);
    let vv = v.abs2(ctx);
    if vv.is_zero() {
        return w.abs(ctx);
    }
    // Projection parameter of p on the segment's line, clamped to [0, 1].
    let dot = ctx.add(&ctx.mul(&w.re, &v.re), &ctx.mul(&w.im, &v.im));
    let mut t = ctx.div(&dot, &vv);
    let zero = ctx.zero();
    let one = ctx.from_i64(1);
    if ctx.lt(&t, &zero) {
        t = zero;
    } else if ctx.lt(&one, &t) {
        t = one;
    }
    let closest = a.add(&v.scale(&t, ctx), ctx);
    p.sub(&closest, ctx).abs(ctx)
}

// ---------------------------------------------------------------------
// Taylor transport
// ---------------------------------------------------------------------

/// Adaptive Taylor integrator for the first-order system
/// `kappa F'(z) = (B0 / z + B1 / (z - 1)) F(z)`.
///
/// At each step the Taylor coefficients of the solution about the current
/// point are generated by the recursion the equation induces; the step
/// size is a fixed fraction of the distance to the nearest singular
/// point, halved (reusing the computed coefficients, which do not depend
/// on the step) whenever the series fails to meet the per-step truncation
/// target within the order cap. Transport is linear in the initial data,
/// so integrating a matrix of column vectors continues a whole frame at
/// once.
pub struct Integrator<'a> {
    ctx: &'a Ctx,
    b0: CxMat,
    b1: CxMat,
    inv_kappa: BigFloat,
    step_fraction: BigFloat,
    tol: BigFloat,
    margin: Q,
    max_order: usize,
    max_halvings: usize,
}

impl<'a> Integrator<'a> {
    /// An integrator for the given system at the context's precision. The
    /// per-step truncation target scales with the precision (about half
    /// the working digits), and paths must keep a margin of 1/20 from the
    /// singular points unless [`Integrator::with_margin`] loosens it.
    pub fn new(ctx: &'a Ctx, fp: &FourPointSystem) -> Integrator<'a> {
        let b0 = CxMat::from_qmat(ctx, fp.b0());
        let b1 = CxMat::from_qmat(ctx, fp.b1());
        let kappa = ctx.from_q(fp.kappa());
        let inv_kappa = ctx.div(&ctx.from_i64(1), &kappa);
        let tol = ctx.from_q(&q_pow10((ctx.digits() / 2 + 5) as u32));
        Integrator {
            ctx,
            b0,
            b1,
            inv_kappa,
            step_fraction: ctx.from_q(&qr(2, 5)),
            tol,
            margin: qr(1, 20),
            max_order: 128,
            max_halvings: 24,
        }
    }

    /// Overrides the minimum distance paths must keep from the singular
    /// points.
    pub fn with_margin(mut self, margin: Q) -> Integrator<'a> {
        self.margin = margin;
        self
    }

    /// Continues the matrix `start` of initial data along the path, after
    /// checking the path's margin.
    pub fn transport(&self, path: &Path, start: &CxMat) -> Result<CxMat> {
        path.check_margin(self.ctx, &self.margin)?;
        let mut val = start.clone();
        for w in path.points.windows(2) {
            val = self.segment(&w[0], &w[1], val)?;
        }
        Ok(val)
    }

    /// Transports a frame around a closed path and expresses the result in
    /// the starting frame: the loop's matrix `M` with `frame_after =
    /// frame * M` in the column convention (so following one loop by
    /// another multiplies in path order on the left of the earlier
    /// matrix).
    pub fn loop_matrix(&self, loop_path: &Path, frame: &CxMat) -> Result<CxMat> {
        let transported = self.transport(loop_path, frame)?;
        frame.solve(&transported, self.ctx)
    }

    fn segment(&self, from: &Cx, to: &Cx, mut val: CxMat) -> Result<CxMat> {
        let ctx = self.ctx;
        let mut cur = from.clone();
        for _ in 0..MAX_STEPS {
            let rem = to.sub(&cur, ctx);
            let arem2 = rem.abs2(ctx);
            if arem2.is_zero() {
                return Ok(val);
            }
            let arem = ctx.sqrt(&arem2);
            let dist0 = cur.abs(ctx);
            let dist1 = cur.sub(&Cx::one(ctx), ctx).abs(ctx);
            let radius = if ctx.lt(&dist0, &dist1) { dist0 } else { dist1 };
            let hmax = ctx.mul(&self.step_fraction, &radius);
            // The remaining distance fits in one step when |rem| <= hmax.
            let (mut h, mut reaches_end) = if ctx.lt(&hmax, &arem) {
                (rem.scale(&ctx.div(&hmax, &arem), ctx), false)
            } else {
                (rem.clone(), true)
            };
            let mut site = TaylorSite::new(self, &cur, &val);
            let scale = {
                let n = val.max_abs(ctx);
                let one = ctx.from_i64(1);
                if ctx.lt(&one, &n) {
                    n
                } else {
                    one
                }
            };
            let eps = ctx.mul(&ctx.mul(&self.tol, &scale), &ctx.from_q(&qr(3, 20)));
            let mut halvings = 0;
            loop {
                match site.converged_order(&h, &eps)? {
                    Some(m) => {
                        val = site.sum(&h, m);
                        cur = if reaches_end {
                            to.clone()
                        } else {
                            cur.add(&h, ctx)
                        };
                        break;
                    }
                    None => {
                        halvings += 1;
                        if halvings > self.max_halvings {
                            return Err(Error::StepCollapse {
                                near: format!(
                                    "({}, {})",
                                    ctx.format_real(&cur.re),
                                    ctx.format_real(&cur.im)
                                ),
                            });
                        }
                        h = h.scale(&ctx.from_q(&qr(1, 2)), ctx);
                        reaches_end = false;
                    }
                }
            }
        }
        Err(Error::Internal(
            "step limit exceeded while transporting along a segment".into(),
        ))
    }
}

/// Taylor data of the solution about a fixed expansion point. The
/// coefficient matrices do not depend on the step, so shrinking the step
/// reuses everything already computed.
struct TaylorSite<'a, 'b> {
    ig: &'b Integrator<'a>,
    ts: Vec<CxMat>,
    alphas: Vec<Cx>,
    betas: Vec<Cx>,
    neg_inv_p: Cx,
    neg_inv_p1: Cx,
}

impl<'a, 'b> TaylorSite<'a, 'b> {
    fn new(ig: &'b Integrator<'a>, p: &Cx, t0: &CxMat) -> TaylorSite<'a, 'b> {
        let ctx = ig.ctx;
        let one = Cx::one(ctx);
        let inv_p = one.div(p, ctx);
        let inv_p1 = one.div(&p.sub(&one, ctx), ctx);
        TaylorSite {
            ig,
            ts: vec![t0.clone()],
            alphas: vec![inv_p.clone()],
            betas: vec![inv_p1.clone()],
            neg_inv_p: inv_p.neg(),
            neg_inv_p1: inv_p1.neg(),
        }
    }

    /// Computes Taylor coefficients up to index `upto`. The coefficient
    /// recursion integrates the partial-fraction expansion of the system:
    /// `T_k = (1 / (kappa k)) (B0 sum_j alpha_j T_{k-1-j}
    ///                        + B1 sum_j beta_j T_{k-1-j})`
    /// with `alpha_j = (-1)^j / p^(j+1)` and `beta_j = (-1)^j / (p-1)^(j+1)`
    /// the expansion coefficients of `1/z` and `1/(z-1)` about `p`.
    fn ensure(&mut self, upto: usize) {
        let ctx = self.ig.ctx;
        while self.ts.len() <= upto {
            let k = self.ts.len();
            while self.alphas.len() < k {
                let a = self.alphas.last().expect("nonempty").mul(&self.neg_inv_p, ctx);
                self.alphas.push(a);
                let b = self.betas.last().expect("nonempty").mul(&self.neg_inv_p1, ctx);
                self.betas.push(b);
            }
            let rows = self.ts[0].rows();
            let cols = self.ts[0].cols();
            let mut u = CxMat::zeros(ctx, rows, cols);
            let mut v = CxMat::zeros(ctx, rows, cols);
            for j in 0..k {
                let t = &self.ts[k - 1 - j];
                u = u.add(&t.scale(&self.alphas[j], ctx), ctx);
                v = v.add(&t.scale(&self.betas[j], ctx), ctx);
            }
            let w = self
                .ig
                .b0
                .mul(&u, ctx)
                .add(&self.ig.b1.mul(&v, ctx), ctx);
            let factor = ctx.div(&self.ig.inv_kappa, &ctx.from_i64(k as i64));
            self.ts.push(w.scale_real(&factor, ctx));
        }
    }

    /// Smallest order whose Taylor remainder is certified below `eps` for
    /// step `h` (two consecutive term norms under the target), or `None`
    /// when the order cap is hit first and the step must shrink.
    fn converged_order(&mut self, h: &Cx, eps: &BigFloat) -> Result<Option<usize>> {
        let ctx = self.ig.ctx;
        let habs = h.abs(ctx);
        let mut hpow = habs.clone();
        let mut prev_small = false;
        for m in 1..=self.ig.max_order {
            self.ensure(m);
            let norm = ctx.mul(&self.ts[m].max_abs(ctx), &hpow);
            ctx.ensure_finite(&norm, "Taylor term")?;
            let small = ctx.lt(&norm, eps);
            if small && prev_small {
                return Ok(Some(m));
            }
            prev_small = small;
            hpow = ctx.mul(&hpow, &habs);
        }
        Ok(None)
    }

    /// Evaluates the truncated Taylor polynomial at step `h` (Horner).
    fn sum(&self, h: &Cx, upto: usize) -> CxMat {
        let ctx = self.ig.ctx;
        let mut s = self.ts[upto].clone();
        for m in (0..upto).rev() {
            s = s.scale(h, ctx).add(&self.ts[m], ctx);
        }
        s
    }
}

// ---------------------------------------------------------------------
// Connection matrices
// ---------------------------------------------------------------------

/// Change of basis between the local solution frames at the two finite
/// singular points, with an independent cross-check: the frame at 0 is
/// continued numerically into the overlap and compared against the frame
/// at 1 composed with the matrix.
#[derive(Clone, Debug)]
pub struct Connection {
    /// Real anchor point where the matrix was solved from both frames.
    pub anchor: Q,
    /// Series truncation order used for the frames.
    pub order: usize,
    /// Working precision, in decimal digits.
    pub digits: usize,
    /// Local exponents at 0, in frame column order.
    pub exponents0: Vec<Q>,
    /// Local exponents at 1, in frame column order.
    pub exponents1: Vec<Q>,
    /// Which columns at 0 are physical channels (rank-one systems only).
    pub physical0: Option<Vec<bool>>,
    /// Which columns at 1 are physical channels (rank-one systems only).
    pub physical1: Option<Vec<bool>>,
    /// The connection matrix `C` with `frame0(z) = frame1(z) C` on the
    /// overlap.
    pub matrix: CxMat,
    /// Its determinant (nonzero iff the matrix genuinely changes basis).
    pub determinant: Cx,
    /// Max-norm condition estimate `max|C| max|C^-1|`.
    pub condition: BigFloat,
    /// Independent residuals `max|continued frame0 - frame1 C|` at the
    /// requested sample points.
    pub samples: Vec<(Q, BigFloat)>,
}

struct Overlap {
    sols0: Vec<FrobeniusSolution>,
    sols1: Vec<FrobeniusSolution>,
    matrix: CxMat,
    anchor: Q,
}

/// Solves for the connection matrix at the midpoint anchor, where both
/// local series converge at geometric rate 1/2.
fn overlap_connection(ctx: &Ctx, fp: &FourPointSystem, order: usize, ftol: &Q) -> Result<Overlap> {
    let dim = fp.dim();
    if dim == 0 {
        return Err(Error::Singular("the system has an empty carrier".into()));
    }
    let sols0 = frobenius_system(fp, SingularPoint::Zero, order)?;
    let sols1 = frobenius_system(fp, SingularPoint::One, order)?;
    if sols0.len() != dim || sols1.len() != dim {
        return Err(Error::Internal(
            "local solution count differs from the system dimension".into(),
        ));
    }
    let anchor = qr(1, 2);
    let f0 = frame_matrix(ctx, &sols0, SingularPoint::Zero, &anchor, ftol)?;
    let f1 = frame_matrix(ctx, &sols1, SingularPoint::One, &anchor, ftol)?;
    let matrix = f1.solve(&f0, ctx)?;
    Ok(Overlap {
        sols0,
        sols1,
        matrix,
        anchor,
    })
}

fn channel_flags(fp: &FourPointSystem, at: SingularPoint, exps: &[Q]) -> Option<Vec<bool>> {
    let channels = sl2_channels(fp, at).ok()?;
    exps.iter()
        .map(|e| {
            channels
                .iter()
                .find(|c| &c.exponent == e)
                .map(|c| c.physical)
        })
        .collect()
}

/// Computes the connection matrix between the frames at 0 and 1 and
/// cross-checks it at the given real sample points: the frame at 0 is
/// continued by integration from a base point deep inside its disk and
/// compared entrywise with `frame1(z) C`. Sample points must lie strictly
/// between the singular points.
pub fn connection_matrix(
    ctx: &Ctx,
    fp: &FourPointSystem,
    order: usize,
    samples: &[Q],
    tol: &Q,
) -> Result<Connection> {
    for s in samples {
        if !(s > &Q::zero() && s < &Q::one()) {
            return Err(Error::Config {
                field: "samples".into(),
                message: format!("sample point {} is not strictly between 0 and 1", s),
            });
        }
    }
    let ftol = tol * qr(1, 4);
    let overlap = overlap_connection(ctx, fp, order, &ftol)?;
    let exponents0: Vec<Q> = overlap.sols0.iter().map(|s| s.exponent.clone()).collect();
    let exponents1: Vec<Q> = overlap.sols1.iter().map(|s| s.exponent.clone()).collect();
    let determinant = overlap.matrix.det(ctx)?;
    let condition = overlap.matrix.condition(ctx)?;

    let integrator = Integrator::new(ctx, fp);
    let base = qr(1, 10);
    let f0_base = frame_matrix(ctx, &overlap.sols0, SingularPoint::Zero, &base, &ftol)?;
    let base_cx = Cx::from_q(ctx, &base);
    let mut sampled = Vec::with_capacity(samples.len());
    for s in samples {
        let target = Cx::from_q(ctx, s);
        let continued =
            integrator.transport(&Path::segment(base_cx.clone(), target), &f0_base)?;
        let f1s = frame_matrix(ctx, &overlap.sols1, SingularPoint::One, s, &ftol)?;
        let predicted = f1s.mul(&overlap.matrix, ctx);
        sampled.push((s.clone(), continued.diff_norm(&predicted, ctx)));
    }

    let physical0 = channel_flags(fp, SingularPoint::Zero, &exponents0);
    let physical1 = channel_flags(fp, SingularPoint::One, &exponents1);
    Ok(Connection {
        anchor: overlap.anchor,
        order,
        digits: ctx.digits(),
        exponents0,
        exponents1,
        physical0,
        physical1,
        matrix: overlap.matrix,
        determinant,
        condition,
        samples: sampled,
    })
}

// ---------------------------------------------------------------------
// Monodromy
// ---------------------------------------------------------------------

/// Loop transports around the finite singular points and the residuals of
/// the relations they must satisfy.
///
/// All loops are based at the same real point and expressed in the frame
/// of the local solutions at 0 evaluated there (except the second
/// eigenphase check, which uses the frame at 1 based on its own side).
/// With the column convention `frame_after = frame * M`, traversing one
/// loop and then another composes as `M_second * M_first`; the loop around
/// both points with the base point entered from below is homotopic to the
/// loop around 1 followed by the loop around 0, so its matrix is
/// `M0 * M1`, and the matrix around infinity is defined as its inverse.
#[derive(Clone, Debug)]
pub struct MonodromySuite {
    /// Common base point of the loops, on the real axis.
    pub base: Q,
    /// Series truncation order used for the frames.
    pub order: usize,
    /// Local exponents at 0, in frame column order.
    pub exponents0: Vec<Q>,
    /// Local exponents at 1, in frame column order.
    pub exponents1: Vec<Q>,
    /// Counterclockwise loop around 0, in the frame at 0.
    pub m0: CxMat,
    /// Counterclockwise loop around 1, in the frame at 0.
    pub m1: CxMat,
    /// Loop around infinity, defined so the three compose to the identity.
    pub m_inf: CxMat,
    /// `max|M0 M1 Minf - I|`.
    pub triple_residual: BigFloat,
    /// `max|M0 - diag(exp(2 pi i r_j))|` over the exponents at 0.
    pub eigenphase0_residual: BigFloat,
    /// Same around 1, computed in that point's own frame and base.
    pub eigenphase1_residual: BigFloat,
    /// `max|M - I|` for a contractible loop.
    pub contractible_residual: BigFloat,
    /// Round-trip residual of transporting out and back along a detour.
    pub reverse_residual: BigFloat,
    /// `max|B^2 - M1|` where `B^2` is the composite of the two half-turn
    /// transports around 1 (below, then above).
    pub braid_residual: BigFloat,
}

/// Runs the loop-transport checks for a system at the given series order.
/// The frames need the order to be large enough that the series tails at
/// the base points (2/5 and 3/5) fall below an internal 1e-12 target;
/// order 40 is comfortable for every system with singular exponents of
/// magnitude below one.
pub fn monodromy_suite(ctx: &Ctx, fp: &FourPointSystem, order: usize) -> Result<MonodromySuite> {
    let dim = fp.dim();
    if dim == 0 {
        return Err(Error::Singular("the system has an empty carrier".into()));
    }
    let frame_tol = q_pow10(12);
    let sols0 = frobenius_system(fp, SingularPoint::Zero, order)?;
    let sols1 = frobenius_system(fp, SingularPoint::One, order)?;
    let exponents0: Vec<Q> = sols0.iter().map(|s| s.exponent.clone()).collect();
    let exponents1: Vec<Q> = sols1.iter().map(|s| s.exponent.clone()).collect();

    let base = qr(2, 5);
    let f0 = frame_matrix(ctx, &sols0, SingularPoint::Zero, &base, &frame_tol)?;
    let base_cx = Cx::from_q(ctx, &base);
    let zero_pt = Cx::zero(ctx);
    let one_pt = Cx::one(ctx);
    let integrator = Integrator::new(ctx, fp);
    let identity = CxMat::identity(ctx, dim);

    let loop0 = Path::circle_from(ctx, &zero_pt, &base_cx, &Q::one(), 16)?;
    let m0 = integrator.loop_matrix(&loop0, &f0)?;
    let loop1 = Path::circle_from(ctx, &one_pt, &base_cx, &Q::one(), 16)?;
    let m1 = integrator.loop_matrix(&loop1, &f0)?;

    // A rectangle around both finite singular points, entered from the
    // base point through the lower half plane and traversed
    // counterclockwise; it is homotopic to the loop around 1 followed by
    // the loop around 0.
    let z = Q::zero;
    let rect = Path::polyline_q(
        ctx,
        &[
            (qr(2, 5), z()),
            (qr(2, 5), qr(-4, 5)),
            (qr(9, 5), qr(-4, 5)),
            (qr(9, 5), qr(4, 5)),
            (qr(-4, 5), qr(4, 5)),
            (qr(-4, 5), qr(-4, 5)),
            (qr(2, 5), qr(-4, 5)),
            (qr(2, 5), z()),
        ],
    )?;
    let m_both = integrator.loop_matrix(&rect, &f0)?;
    let m_inf = m_both.inverse(ctx)?;
    let triple_residual = m0
        .mul(&m1, ctx)
        .mul(&m_inf, ctx)
        .diff_norm(&identity, ctx);

    // Each local loop acts on its own frame by the unit phases of the
    // local exponents (diagonally: the series solver refuses logarithmic
    // solutions, and continuing zeta^r times an analytic function around
    // the puncture multiplies it by exactly exp(2 pi i r)).
    let phases0 = diagonal_phases(ctx, &exponents0);
    let eigenphase0_residual = m0.diff_norm(&phases0, ctx);
    let base1 = qr(3, 5);
    let f1 = frame_matrix(ctx, &sols1, SingularPoint::One, &base1, &frame_tol)?;
    let base1_cx = Cx::from_q(ctx, &base1);
    let loop1_own = Path::circle_from(ctx, &one_pt, &base1_cx, &Q::one(), 16)?;
    let m1_own = integrator.loop_matrix(&loop1_own, &f1)?;
    let phases1 = diagonal_phases(ctx, &exponents1);
    let eigenphase1_residual = m1_own.diff_norm(&phases1, ctx);

    // A contractible diamond between the singular points.
    let diamond = Path::polyline_q(
        ctx,
        &[
            (qr(2, 5), z()),
            (qr(1, 2), qr(-3, 20)),
            (qr(3, 5), z()),
            (qr(1, 2), qr(3, 20)),
            (qr(2, 5), z()),
        ],
    )?;
    let contractible_residual = integrator
        .loop_matrix(&diamond, &f0)?
        .diff_norm(&identity, ctx);

    // Out and back along an off-axis detour.
    let detour = Path::polyline_q(ctx, &[(qr(2, 5), z()), (qr(1, 2), qr(1, 5)), (qr(7, 10), z())])?;
    let forward = integrator.transport(&detour, &f0)?;
    let back = integrator.transport(&detour.reversed(), &forward)?;
    let reverse_residual = back.diff_norm(&f0, ctx);

    // The half-turn transport around 1 passing below the point, squared
    // (below then above), is the full counterclockwise loop.
    let lower = Path::circle_from(ctx, &one_pt, &base_cx, &qr(1, 2), 8)?;
    let mid = integrator.transport(&lower, &f0)?;
    let upper = Path::circle_from(ctx, &one_pt, lower.end(), &qr(1, 2), 8)?
        .with_endpoint(base_cx.clone());
    let full = integrator.transport(&upper, &mid)?;
    let braid_squared = f0.solve(&full, ctx)?;
    let braid_residual = braid_squared.diff_norm(&m1, ctx);

    Ok(MonodromySuite {
        base,
        order,
        exponents0,
        exponents1,
        m0,
        m1,
        m_inf,
        triple_residual,
        eigenphase0_residual,
        eigenphase1_residual,
        contractible_residual,
        reverse_residual,
        braid_residual,
    })
}

fn diagonal_phases(ctx: &Ctx, exponents: &[Q]) -> CxMat {
    let n = exponents.len();
    CxMat::from_fn(ctx, n, n, |i, j| {
        if i == j {
            Cx::unit_phase(&exponents[i], ctx)
        } else {
            Cx::zero(ctx)
        }
    })
}

// ---------------------------------------------------------------------
// Verification reports
// ---------------------------------------------------------------------

/// Exact exponent bookkeeping for the product of two intertwining maps,
/// paired with the numeric overlap check that the two local expansions
/// describe one function.
#[derive(Clone, Debug)]
pub struct ExtensionCheck {
    /// Exact exponent data: pair sums bounded below by an integer, no
    /// logarithmic solutions.
    pub report: ExtensionReport,
    /// The connection data used for the numeric overlap comparison.
    pub connection: Connection,
    /// Largest sampled overlap residual.
    pub max_residual: BigFloat,
}

/// Runs [`extension_report`] and [`connection_matrix`] together.
pub fn verify_extension(
    ctx: &Ctx,
    fp: &FourPointSystem,
    order: usize,
    samples: &[Q],
    tol: &Q,
) -> Result<ExtensionCheck> {
    let report = extension_report(fp, order)?;
    let connection = connection_matrix(ctx, fp, order, samples, tol)?;
    let max_residual = connection
        .samples
        .iter()
        .fold(ctx.zero(), |acc, (_, r)| if ctx.lt(&acc, r) { r.clone() } else { acc });
    Ok(ExtensionCheck {
        report,
        connection,
        max_residual,
    })
}

/// Agreement between the two composition orders of a product of two
/// intertwining maps, checked on the real slice of the region where both
/// expansions converge.
#[derive(Clone, Debug)]
pub struct AssociativityCheck {
    /// Outer insertion point.
    pub z1: Q,
    /// Inner insertion point.
    pub z2: Q,
    /// The reduced coordinate `z2 / z1` the comparison runs at.
    pub ratio: Q,
    /// Residual per frame column at the comparison point.
    pub column_residuals: Vec<BigFloat>,
    /// Largest of the column residuals.
    pub max_residual: BigFloat,
    /// Condition estimate of the connection matrix used for the iterate
    /// side.
    pub connection_condition: BigFloat,
}

/// Compares the product expansion (continued from the origin frame) with
/// the iterate expansion (the frame at 1 composed with the connection
/// matrix) at the reduced point `z2 / z1`.
///
/// The insertion points must satisfy `z1 > z2 > z1 - z2 > 0`, the real
/// slice of the region where both composition orders converge; anything
/// else is a configuration error.
pub fn verify_associativity(
    ctx: &Ctx,
    fp: &FourPointSystem,
    z1: &Q,
    z2: &Q,
    order: usize,
    tol: &Q,
) -> Result<AssociativityCheck> {
    let diff = z1 - z2;
    if !(z1 > &Q::zero() && z2 > &Q::zero() && z1 > z2 && z2 > &diff && diff > Q::zero()) {
        return Err(Error::Config {
            field: "region".into(),
            message: format!(
                "insertion points ({}, {}) violate the required ordering z1 > z2 > z1 - z2 > 0",
                z1, z2
            ),
        });
    }
    let ratio = z2 / z1;
    let ftol = tol * qr(1, 4);
    let overlap = overlap_connection(ctx, fp, order, &ftol)?;
    let connection_condition = overlap.matrix.condition(ctx)?;

    let integrator = Integrator::new(ctx, fp);
    let base = qr(1, 10);
    let f0_base = frame_matrix(ctx, &overlap.sols0, SingularPoint::Zero, &base, &ftol)?;
    let product_side = integrator.transport(
        &Path::segment(Cx::from_q(ctx, &base), Cx::from_q(ctx, &ratio)),
        &f0_base,
    )?;
    let f1 = frame_matrix(ctx, &overlap.sols1, SingularPoint::One, &ratio, &ftol)?;
    let iterate_side = f1.mul(&overlap.matrix, ctx);

    let mut column_residuals = Vec::with_capacity(product_side.cols());
    let mut max_residual = ctx.zero();
    for j in 0..product_side.cols() {
        let mut worst = ctx.zero();
        for i in 0..product_side.rows() {
            let d = product_side
                .at(i, j)
                .sub(iterate_side.at(i, j), ctx)
                .abs(ctx);
            if ctx.lt(&worst, &d) {
                worst = d;
            }
        }
        if ctx.lt(&max_residual, &worst) {
            max_residual = worst.clone();
        }
        column_residuals.push(worst);
    }
    Ok(AssociativityCheck {
        z1: z1.clone(),
        z2: z2.clone(),
        ratio,
        column_residuals,
        max_residual,
        connection_condition,
    })
}

/// Convergence evidence for one leading-exponent family of a product of
/// several intertwining maps.
#[derive(Clone, Debug)]
pub struct NPointFamilyReport {
    /// Leading exponents in the ratio coordinates.
    pub rho: Vec<Q>,
    /// Worst trailing shell-norm ratio at the evaluation point (`None`
    /// when the series truncates, which converges trivially).
    pub tail_ratio: Option<Q>,
    /// Partial sum of the analytic factor at the evaluation point, at the
    /// base truncation order (exact).
    pub value: Vec<Q>,
    /// Largest componentwise change when the truncation order doubles.
    pub drift: Q,
}

/// Exact convergence report for a product of several intertwining maps at
/// a point with strictly decreasing positive insertion coordinates.
#[derive(Clone, Debug)]
pub struct NPointReport {
    /// Insertion coordinates, outermost first.
    pub points: Vec<Q>,
    /// Ratio coordinates `u_j = points[j] / points[j-1]`.
    pub ratios: Vec<Q>,
    /// Base truncation order.
    pub order: usize,
    /// Refined truncation order used for the stability comparison.
    pub refined_order: usize,
    /// Trailing window width used for the tail ratios.
    pub window: usize,
    /// Per-family evidence.
    pub families: Vec<NPointFamilyReport>,
    /// Worst tail ratio over the families that have one.
    pub max_tail_ratio: Option<Q>,
    /// Worst drift over all families.
    pub max_drift: Q,
    /// True when every family's trailing shells decay (ratio below one).
    pub converged: bool,
}

/// Evaluates every solution family of the multi-variable series at the
/// given insertion points, entirely in rational arithmetic: geometric
/// decay of the trailing shells certifies convergence, and doubling the
/// truncation order bounds the drift of the partial sums.
pub fn verify_n_point(
    np: &NPointSystem,
    points: &[Q],
    order: usize,
    window: usize,
) -> Result<NPointReport> {
    let q = np.insertions();
    if points.len() != q {
        return Err(Error::Config {
            field: "points".into(),
            message: format!("expected {} insertion points, got {}", q, points.len()),
        });
    }
    for (j, p) in points.iter().enumerate() {
        if p <= &Q::zero() {
            return Err(Error::Config {
                field: "points".into(),
                message: format!("insertion point {} is not positive", p),
            });
        }
        if j > 0 && p >= &points[j - 1] {
            return Err(Error::Config {
                field: "points".into(),
                message: "insertion points must be strictly decreasing".into(),
            });
        }
    }
    let ratios: Vec<Q> = (1..q).map(|j| &points[j] / &points[j - 1]).collect();
    let refined_order = 2 * order;
    let base_sols = np.series(order)?;
    let refined_sols = np.series(refined_order)?;
    if base_sols.len() != refined_sols.len() {
        return Err(Error::Internal(
            "family count changed under refinement".into(),
        ));
    }
    let mut families = Vec::with_capacity(base_sols.len());
    let mut max_tail: Option<Q> = None;
    let mut max_drift = Q::zero();
    let mut converged = true;
    for (base, refined) in base_sols.iter().zip(&refined_sols) {
        if base.rho != refined.rho {
            return Err(Error::Internal(
                "family order changed under refinement".into(),
            ));
        }
        let value = base.eval_rational(&ratios);
        let refined_value = refined.eval_rational(&ratios);
        let drift = value
            .iter()
            .zip(&refined_value)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or_else(Q::zero);
        let tail_ratio = refined.tail_ratio(&ratios, window);
        match &tail_ratio {
            Some(r) => {
                if r >= &Q::one() {
                    converged = false;
                }
                if max_tail.as_ref().is_none_or(|m| r > m) {
                    max_tail = Some(r.clone());
                }
            }
            None => {
                // A vanishing trailing shell: the series truncates at this
                // point, so the partial sums are eventually constant.
            }
        }
        if drift > max_drift {
            max_drift = drift.clone();
        }
        families.push(NPointFamilyReport {
            rho: base.rho.clone(),
            tail_ratio,
            value,
            drift,
        });
    }
    Ok(NPointReport {
        points: points.to_vec(),
        ratios,
        order,
        refined_order,
        window,
        families,
        max_tail_ratio: max_tail,
        max_drift,
        converged,
    })
}

/// Checks that inserting the vacuum as the innermost moving point changes
/// nothing: the larger system's families must carry exponent zero in the
/// final ratio variable, have coefficient support only at degree zero
/// there, and reduce — coefficient by coefficient, exactly — to the
/// families of the system with that insertion removed.
pub fn vacuum_reduction_consistent(
    big: &NPointSystem,
    small: &NPointSystem,
    order: usize,
) -> Result<bool> {
    if big.insertions() != small.insertions() + 1 {
        return Err(Error::ShapeMismatch(
            "the larger system must have exactly one more insertion".into(),
        ));
    }
    if big.system().carrier_dim() != small.system().carrier_dim() {
        return Ok(false);
    }
    let big_sols = big.series(order)?;
    let small_sols = small.series(order)?;
    if big_sols.len() != small_sols.len() {
        return Ok(false);
    }
    let nv = big.insertions() - 1;
    let mut used = vec![false; small_sols.len()];
    for sol in &big_sols {
        if !sol.rho[nv - 1].is_zero() {
            return Ok(false);
        }
        let mut reduced: std::collections::BTreeMap<Vec<usize>, &Vec<Q>> = Default::default();
        for (m, c) in &sol.coeffs {
            if m[nv - 1] != 0 {
                if c.iter().any(|v| !v.is_zero()) {
                    return Ok(false);
                }
                continue;
            }
            reduced.insert(m[..nv - 1].to_vec(), c);
        }
        let rho = &sol.rho[..nv - 1];
        let mut found = false;
        for (i, cand) in small_sols.iter().enumerate() {
            if used[i] || cand.rho != rho {
                continue;
            }
            let mut equal = true;
            for (m, c) in &reduced {
                match cand.coeffs.get(m) {
                    Some(w) => {
                        if *c != w {
                            equal = false;
                            break;
                        }
                    }
                    None => {
                        if c.iter().any(|v| !v.is_zero()) {
                            equal = false;
                            break;
                        }
                    }
                }
            }
            if equal {
                for (m, w) in &cand.coeffs {
                    if !reduced.contains_key(m) && w.iter().any(|v| !v.is_zero()) {
                        equal = false;
                        break;
                    }
                }
            }
            if equal {
                used[i] = true;
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}
