//! Arbitrary-precision complex scalars and dense complex matrices.
//!
//! This is the numeric substrate for analytic continuation: everything runs
//! at a fixed binary precision chosen from a requested number of decimal
//! digits, with round-to-even throughout, so results are deterministic and
//! independent of evaluation order or thread scheduling.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::rat::{Q, QMat};
use crate::Result;

const RM: RoundingMode = RoundingMode::ToEven;

/// Shared numeric context: working precision and cached transcendental
/// constants.
///
/// All scalar and matrix operations round to this context's precision with
/// round-to-even, so a computation is a pure function of its inputs and the
/// context settings. A context is cheap enough to create per thread; it is
/// deliberately not `Sync`.
pub struct Ctx {
    digits: usize,
    bits: usize,
    cc: RefCell<Consts>,
}

impl Ctx {
    /// Creates a context carrying at least `digits` significant decimal
    /// digits (plus binary guard bits).
    pub fn new(digits: usize) -> Ctx {
        let digits = digits.max(8);
        // Binary digits per decimal digit; add guard bits so decimal-level tolerances
        // sit far above the working rounding error.
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 96;
        Ctx {
            digits,
            bits,
            cc: RefCell::new(Consts::new().expect("constants cache allocation")),
        }
    }

    /// Requested number of significant decimal digits.
    pub fn digits(&self) -> usize {
        self.digits
    }

    /// Working binary precision in bits.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Additive zero at working precision.
    pub fn zero(&self) -> BigFloat {
        BigFloat::new(self.bits)
    }

    pub fn from_i64(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.bits)
    }

    pub fn from_f64(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.bits)
    }

    /// Exact conversion of a big integer (no rounding: the mantissa is taken
    /// verbatim).
    pub fn from_bigint(&self, v: &BigInt) -> BigFloat {
        if v.is_zero() {
            return self.zero();
        }
        let (_, words) = v.to_u64_digits();
        let sign = if v.is_negative() { Sign::Neg } else { Sign::Pos };
        // Value semantics: 0.<mantissa words> * 2^(64 * word count).
        BigFloat::from_words(&words, sign, (words.len() * 64) as i32)
    }

    /// Rounds a rational to working precision.
    pub fn from_q(&self, q: &Q) -> BigFloat {
        let num = self.from_bigint(q.numer());
        let den = self.from_bigint(q.denom());
        num.div(&den, self.bits, RM)
    }

    pub fn pi(&self) -> BigFloat {
        self.cc.borrow_mut().pi(self.bits, RM)
    }

    pub fn two_pi(&self) -> BigFloat {
        self.pi().mul(&self.from_i64(2), self.bits, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.bits, RM)
    }

    pub fn exp(&self, a: &BigFloat) -> BigFloat {
        a.exp(self.bits, RM, &mut self.cc.borrow_mut())
    }

    pub fn ln(&self, a: &BigFloat) -> BigFloat {
        a.ln(self.bits, RM, &mut self.cc.borrow_mut())
    }

    pub fn sin(&self, a: &BigFloat) -> BigFloat {
        a.sin(self.bits, RM, &mut self.cc.borrow_mut())
    }

    pub fn cos(&self, a: &BigFloat) -> BigFloat {
        a.cos(self.bits, RM, &mut self.cc.borrow_mut())
    }

    pub fn atan(&self, a: &BigFloat) -> BigFloat {
        a.atan(self.bits, RM, &mut self.cc.borrow_mut())
    }

    /// Two-argument arctangent with the standard quadrant conventions;
    /// `atan2(0, 0) = 0`.
    pub fn atan2(&self, y: &BigFloat, x: &BigFloat) -> BigFloat {
        let pi = self.pi();
        if x.is_zero() {
            return if y.is_zero() {
                self.zero()
            } else if y.is_positive() {
                self.div(&pi, &self.from_i64(2))
            } else {
                self.div(&pi, &self.from_i64(-2))
            };
        }
        let base = self.atan(&self.div(y, x));
        if x.is_positive() {
            base
        } else if y.is_negative() {
            self.sub(&base, &pi)
        } else {
            self.add(&base, &pi)
        }
    }

    /// `true` when `a < b`; non-finite operands compare false.
    pub fn lt(&self, a: &BigFloat, b: &BigFloat) -> bool {
        matches!(a.cmp(b), Some(c) if c < 0)
    }

    /// `true` when `|a| < |b|`; non-finite operands compare false.
    pub fn abs_lt(&self, a: &BigFloat, b: &BigFloat) -> bool {
        matches!(a.abs_cmp(b), Some(c) if c < 0)
    }

    /// Rejects NaN and infinities, which only arise from internal misuse
    /// (division by an exact zero, overflow of the huge exponent range).
    pub fn ensure_finite(&self, a: &BigFloat, what: &str) -> Result<()> {
        if a.is_nan() || a.is_inf() {
            return Err(Error::PrecisionNotMet(format!(
                "non-finite value encountered in {what}"
            )));
        }
        Ok(())
    }

    /// Best-effort `f64` image of a high-precision value (for reports and
    /// tolerance summaries, never for further computation).
    pub fn to_f64(&self, a: &BigFloat) -> f64 {
        if a.is_nan() {
            return f64::NAN;
        }
        if a.is_inf_pos() {
            return f64::INFINITY;
        }
        if a.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let s = a
            .format(Radix::Dec, RM, &mut self.cc.borrow_mut())
            .unwrap_or_else(|_| "0.0".to_string());
        s.parse::<f64>().unwrap_or(f64::NAN)
    }

    /// Canonical decimal rendering with exactly `self.digits()` significant
    /// digits: `-d.dd...de±N`, and plain `0` for an exact zero. The output
    /// is a pure function of the value and the context, which is what makes
    /// emitted files byte-identical across runs.
    pub fn format_real(&self, a: &BigFloat) -> String {
        self.format_real_digits(a, self.digits)
    }

    /// Same canonical rendering as [`format_real`](Ctx::format_real) but with
    /// an explicit significant-digit count, for short human-facing summaries.
    pub fn format_real_digits(&self, a: &BigFloat, want: usize) -> String {
        let want = want.clamp(1, self.digits);
        if a.is_nan() {
            return "NaN".to_string();
        }
        if a.is_inf_pos() {
            return "Inf".to_string();
        }
        if a.is_inf_neg() {
            return "-Inf".to_string();
        }
        if a.is_zero() {
            return "0".to_string();
        }
        let s = a
            .format(Radix::Dec, RM, &mut self.cc.borrow_mut())
            .expect("finite value formats");
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s.as_str()),
        };
        let (mant, exp) = match rest.split_once('e') {
            Some((m, e)) => (m, e.parse::<i64>().expect("decimal exponent")),
            None => (rest, 0),
        };
        let mut digits: Vec<u8> = mant
            .bytes()
            .filter(|&b| b != b'.')
            .map(|b| b - b'0')
            .collect();
        // The first digit of the source string is the units digit of the
        // scientific form, so `exp` is already the significand exponent.
        let mut e10 = exp;
        if digits.len() > want {
            let round_up = digits[want] >= 5;
            digits.truncate(want);
            if round_up {
                let mut i = want;
                loop {
                    if i == 0 {
                        digits.insert(0, 1);
                        digits.truncate(want);
                        e10 += 1;
                        break;
                    }
                    i -= 1;
                    if digits[i] == 9 {
                        digits[i] = 0;
                    } else {
                        digits[i] += 1;
                        break;
                    }
                }
            }
        } else {
            digits.resize(want, 0);
        }
        let mut out = String::with_capacity(want + 8);
        if neg {
            out.push('-');
        }
        out.push((b'0' + digits[0]) as char);
        out.push('.');
        for &d in &digits[1..] {
            out.push((b'0' + d) as char);
        }
        out.push('e');
        if e10 >= 0 {
            out.push('+');
        }
        out.push_str(&e10.to_string());
        out
    }
}

/// Complex number at the context's working precision.
#[derive(Clone, Debug)]
pub struct Cx {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Cx {
    pub fn new(re: BigFloat, im: BigFloat) -> Cx {
        Cx { re, im }
    }

    pub fn zero(ctx: &Ctx) -> Cx {
        Cx::new(ctx.zero(), ctx.zero())
    }

    pub fn one(ctx: &Ctx) -> Cx {
        Cx::new(ctx.from_i64(1), ctx.zero())
    }

    pub fn from_i64(ctx: &Ctx, re: i64) -> Cx {
        Cx::new(ctx.from_i64(re), ctx.zero())
    }

    pub fn from_f64(ctx: &Ctx, re: f64, im: f64) -> Cx {
        Cx::new(ctx.from_f64(re), ctx.from_f64(im))
    }

    pub fn from_q(ctx: &Ctx, q: &Q) -> Cx {
        Cx::new(ctx.from_q(q), ctx.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Cx {
        Cx::new(self.re.clone(), self.im.neg())
    }

    pub fn neg(&self) -> Cx {
        Cx::new(self.re.neg(), self.im.neg())
    }

    pub fn add(&self, o: &Cx, ctx: &Ctx) -> Cx {
        Cx::new(ctx.add(&self.re, &o.re), ctx.add(&self.im, &o.im))
    }

    pub fn sub(&self, o: &Cx, ctx: &Ctx) -> Cx {
        Cx::new(ctx.sub(&self.re, &o.re), ctx.sub(&self.im, &o.im))
    }

    pub fn mul(&self, o: &Cx, ctx: &Ctx) -> Cx {
        let re = ctx.sub(&ctx.mul(&self.re, &o.re), &ctx.mul(&self.im, &o.im));
        let im = ctx.add(&ctx.mul(&self.re, &o.im), &ctx.mul(&self.im, &o.re));
        Cx::new(re, im)
    }

    /// Multiplication by a real scalar.
    pub fn scale(&self, s: &BigFloat, ctx: &Ctx) -> Cx {
        Cx::new(ctx.mul(&self.re, s), ctx.mul(&self.im, s))
    }

    pub fn div(&self, o: &Cx, ctx: &Ctx) -> Cx {
        let den = o.abs2(ctx);
        let re = ctx.add(&ctx.mul(&self.re, &o.re), &ctx.mul(&self.im, &o.im));
        let im = ctx.sub(&ctx.mul(&self.im, &o.re), &ctx.mul(&self.re, &o.im));
        Cx::new(ctx.div(&re, &den), ctx.div(&im, &den))
    }

    /// Squared modulus.
    pub fn abs2(&self, ctx: &Ctx) -> BigFloat {
        ctx.add(
            &ctx.mul(&self.re, &self.re),
            &ctx.mul(&self.im, &self.im),
        )
    }

    /// Modulus.
    pub fn abs(&self, ctx: &Ctx) -> BigFloat {
        ctx.sqrt(&self.abs2(ctx))
    }

    /// Principal argument in (-pi, pi].
    pub fn arg(&self, ctx: &Ctx) -> BigFloat {
        ctx.atan2(&self.im, &self.re)
    }

    pub fn exp(&self, ctx: &Ctx) -> Cx {
        let r = ctx.exp(&self.re);
        Cx::new(
            ctx.mul(&r, &ctx.cos(&self.im)),
            ctx.mul(&r, &ctx.sin(&self.im)),
        )
    }

    /// Principal branch of the logarithm (imaginary part in (-pi, pi]).
    pub fn ln(&self, ctx: &Ctx) -> Result<Cx> {
        if self.is_zero() {
            return Err(Error::Singular("logarithm of zero".to_string()));
        }
        let half = ctx.from_q(&crate::rat::qr(1, 2));
        let re = ctx.mul(&ctx.ln(&self.abs2(ctx)), &half);
        Ok(Cx::new(re, self.arg(ctx)))
    }

    /// Principal power with a real exponent: `exp(s * ln self)`.
    pub fn pow_real(&self, s: &BigFloat, ctx: &Ctx) -> Result<Cx> {
        if self.is_zero() {
            if s.is_zero() {
                return Ok(Cx::one(ctx));
            }
            if s.is_positive() {
                return Ok(Cx::zero(ctx));
            }
            return Err(Error::Singular(
                "zero raised to a negative power".to_string(),
            ));
        }
        let l = self.ln(ctx)?;
        Ok(Cx::new(ctx.mul(&l.re, s), ctx.mul(&l.im, s)).exp(ctx))
    }

    /// Principal power with a rational exponent.
    pub fn pow_q(&self, q: &Q, ctx: &Ctx) -> Result<Cx> {
        self.pow_real(&ctx.from_q(q), ctx)
    }

    /// Unit phase `exp(2 pi i r)` for rational `r`.
    pub fn unit_phase(r: &Q, ctx: &Ctx) -> Cx {
        let angle = ctx.mul(&ctx.two_pi(), &ctx.from_q(r));
        Cx::new(ctx.cos(&angle), ctx.sin(&angle))
    }
}

/// Dense complex matrix at working precision (row-major storage).
#[derive(Clone, Debug)]
pub struct CxMat {
    rows: usize,
    cols: usize,
    a: Vec<Cx>,
}

impl CxMat {
    pub fn zeros(ctx: &Ctx, rows: usize, cols: usize) -> CxMat {
        CxMat {
            rows,
            cols,
            a: vec![Cx::zero(ctx); rows * cols],
        }
    }

    pub fn identity(ctx: &Ctx, n: usize) -> CxMat {
        let mut m = CxMat::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, Cx::one(ctx));
        }
        m
    }

    pub fn from_fn(
        ctx: &Ctx,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Cx,
    ) -> CxMat {
        let _ = ctx;
        let mut a = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                a.push(f(i, j));
            }
        }
        CxMat { rows, cols, a }
    }

    /// Rounds an exact rational matrix into the working precision.
    pub fn from_qmat(ctx: &Ctx, m: &QMat) -> CxMat {
        CxMat::from_fn(ctx, m.rows(), m.cols(), |i, j| Cx::from_q(ctx, m.at(i, j)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Cx {
        &self.a[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Cx) {
        self.a[r * self.cols + c] = v;
    }

    pub fn add(&self, o: &CxMat, ctx: &Ctx) -> CxMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        CxMat::from_fn(ctx, self.rows, self.cols, |i, j| {
            self.at(i, j).add(o.at(i, j), ctx)
        })
    }

    pub fn sub(&self, o: &CxMat, ctx: &Ctx) -> CxMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        CxMat::from_fn(ctx, self.rows, self.cols, |i, j| {
            self.at(i, j).sub(o.at(i, j), ctx)
        })
    }

    pub fn scale(&self, s: &Cx, ctx: &Ctx) -> CxMat {
        CxMat::from_fn(ctx, self.rows, self.cols, |i, j| self.at(i, j).mul(s, ctx))
    }

    pub fn scale_real(&self, s: &BigFloat, ctx: &Ctx) -> CxMat {
        CxMat::from_fn(ctx, self.rows, self.cols, |i, j| self.at(i, j).scale(s, ctx))
    }

    pub fn mul(&self, o: &CxMat, ctx: &Ctx) -> CxMat {
        assert_eq!(self.cols, o.rows, "matrix product shape");
        let mut out = CxMat::zeros(ctx, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let lik = self.at(i, k);
                if lik.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let t = lik.mul(o.at(k, j), ctx);
                    let cur = out.at(i, j).add(&t, ctx);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Cx> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn mul_vec(&self, v: &[Cx], ctx: &Ctx) -> Vec<Cx> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = Cx::zero(ctx);
                for j in 0..self.cols {
                    acc = acc.add(&self.at(i, j).mul(&v[j], ctx), ctx);
                }
                acc
            })
            .collect()
    }

    /// Largest entry modulus (the max-norm used in all tolerance reports).
    pub fn max_abs(&self, ctx: &Ctx) -> BigFloat {
        let mut best = ctx.zero();
        for z in &self.a {
            let m = z.abs2(ctx);
            if ctx.lt(&best, &m) {
                best = m;
            }
        }
        ctx.sqrt(&best)
    }

    /// Max-norm of the difference.
    pub fn diff_norm(&self, o: &CxMat, ctx: &Ctx) -> BigFloat {
        self.sub(o, ctx).max_abs(ctx)
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial
    /// (largest-modulus) pivoting.
    pub fn solve(&self, rhs: &CxMat, ctx: &Ctx) -> Result<CxMat> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "solve requires a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if rhs.rows != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "solve: rhs has {} rows, matrix has {}",
                rhs.rows, self.rows
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let mut piv = col;
            let mut best = a.at(col, col).abs2(ctx);
            for r in col + 1..n {
                let m = a.at(r, col).abs2(ctx);
                if ctx.lt(&best, &m) {
                    best = m;
                    piv = r;
                }
            }
            if a.at(piv, col).is_zero() {
                return Err(Error::Singular(format!(
                    "zero pivot in column {col} of a {n}x{n} system"
                )));
            }
            if piv != col {
                for j in 0..n {
                    a.a.swap(piv * n + j, col * n + j);
                }
                for j in 0..b.cols {
                    b.a.swap(piv * b.cols + j, col * b.cols + j);
                }
            }
            let d = a.at(col, col).clone();
            for r in 0..n {
                if r == col || a.at(r, col).is_zero() {
                    continue;
                }
                let f = a.at(r, col).div(&d, ctx);
                for j in col..n {
                    let t = f.mul(a.at(col, j), ctx);
                    let v = a.at(r, j).sub(&t, ctx);
                    a.set(r, j, v);
                }
                a.set(r, col, Cx::zero(ctx));
                for j in 0..b.cols {
                    let t = f.mul(b.at(col, j), ctx);
                    let v = b.at(r, j).sub(&t, ctx);
                    b.set(r, j, v);
                }
            }
        }
        let mut x = CxMat::zeros(ctx, n, rhs.cols);
        for i in 0..n {
            let d = a.at(i, i).clone();
            for j in 0..rhs.cols {
                let v = b.at(i, j).div(&d, ctx);
                ctx.ensure_finite(&v.re, "linear solve")?;
                ctx.ensure_finite(&v.im, "linear solve")?;
                x.set(i, j, v);
            }
        }
        Ok(x)
    }

    pub fn inverse(&self, ctx: &Ctx) -> Result<CxMat> {
        self.solve(&CxMat::identity(ctx, self.rows), ctx)
    }

    /// Determinant via elimination with row-swap sign tracking.
    pub fn det(&self, ctx: &Ctx) -> Result<Cx> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(
                "determinant of a non-square matrix".to_string(),
            ));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Cx::one(ctx);
        for col in 0..n {
            let mut piv = col;
            let mut best = a.at(col, col).abs2(ctx);
            for r in col + 1..n {
                let m = a.at(r, col).abs2(ctx);
                if ctx.lt(&best, &m) {
                    best = m;
                    piv = r;
                }
            }
            if a.at(piv, col).is_zero() {
                return Ok(Cx::zero(ctx));
            }
            if piv != col {
                for j in 0..n {
                    a.a.swap(piv * n + j, col * n + j);
                }
                det = det.neg();
            }
            let d = a.at(col, col).clone();
            det = det.mul(&d, ctx);
            for r in col + 1..n {
                if a.at(r, col).is_zero() {
                    continue;
                }
                let f = a.at(r, col).div(&d, ctx);
                for j in col..n {
                    let t = f.mul(a.at(col, j), ctx);
                    let v = a.at(r, j).sub(&t, ctx);
                    a.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Max-norm condition estimate `|M| * |M^-1|`; reported alongside every
    /// basis-change matrix.
    pub fn condition(&self, ctx: &Ctx) -> Result<BigFloat> {
        let inv = self.inverse(ctx)?;
        Ok(ctx.mul(&self.max_abs(ctx), &inv.max_abs(ctx)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{qi, qr};
    use num_traits::One;

    fn ctx() -> Ctx {
        Ctx::new(50)
    }

    fn assert_close(ctx: &Ctx, a: &BigFloat, b: &BigFloat, scale_bits: i32) {
        let diff = ctx.sub(a, b).abs();
        // Tolerance 2^(scale_bits - bits): a few ulps at working precision.
        let mut tol = ctx.from_i64(1);
        tol.set_exponent(scale_bits - ctx.bits() as i32);
        assert!(
            ctx.lt(&diff, &tol) || diff.is_zero(),
            "difference {} exceeds tolerance {}",
            ctx.format_real(&diff),
            ctx.format_real(&tol)
        );
    }

    fn assert_cx_close(ctx: &Ctx, a: &Cx, b: &Cx, scale_bits: i32) {
        assert_close(ctx, &a.re, &b.re, scale_bits);
        assert_close(ctx, &a.im, &b.im, scale_bits);
    }

    #[test]
    fn big_integer_conversion_is_exact() {
        let c = ctx();
        // 2^100 + 7 spans two 64-bit words with a high-word gap.
        let big = (BigInt::one() << 100u32) + BigInt::from(7);
        let via_words = c.from_bigint(&big);
        let two_pow = c.from_i64(2).powi(100, c.bits(), RM);
        let direct = c.add(&two_pow, &c.from_i64(7));
        assert_eq!(via_words.cmp(&direct), Some(0));
        let neg = c.from_bigint(&-big);
        assert_eq!(neg.cmp(&direct.neg()), Some(0));
        assert!(c.from_bigint(&BigInt::from(0)).is_zero());
    }

    #[test]
    fn rational_conversion_matches_division() {
        let c = ctx();
        let q = qr(-355, 113);
        let f = c.from_q(&q);
        let direct = c.div(&c.from_i64(-355), &c.from_i64(113));
        assert_eq!(f.cmp(&direct), Some(0));
        let third = c.from_q(&qr(1, 3));
        let one = c.mul(&third, &c.from_i64(3));
        assert_close(&c, &one, &c.from_i64(1), 4);
    }

    #[test]
    fn complex_field_operations_roundtrip() {
        let c = ctx();
        let z = Cx::new(c.from_i64(3), c.from_i64(4));
        let w = Cx::new(c.from_i64(1), c.from_i64(-2));
        let q = z.div(&w, &c);
        let back = q.mul(&w, &c);
        assert_cx_close(&c, &back, &z, 8);
        // (3+4i)(1-2i) = 11 - 2i exactly.
        let p = z.mul(&w, &c);
        assert_eq!(p.re.cmp(&c.from_i64(11)), Some(0));
        assert_eq!(p.im.cmp(&c.from_i64(-2)), Some(0));
        let m = z.abs(&c);
        assert_close(&c, &m, &c.from_i64(5), 8);
    }

    #[test]
    fn exp_and_ln_are_mutually_inverse_on_principal_domain() {
        let c = ctx();
        let z = Cx::from_f64(&c, 0.3, 0.7);
        let back = z.exp(&c).ln(&c).unwrap();
        assert_cx_close(&c, &back, &z, 8);
        // Left half-plane: ln picks the principal argument.
        let w = Cx::from_f64(&c, -2.0, 1.0);
        let again = w.ln(&c).unwrap().exp(&c);
        assert_cx_close(&c, &again, &w, 8);
        assert!(Cx::zero(&c).ln(&c).is_err());
    }

    #[test]
    fn atan2_covers_all_quadrants() {
        let c = ctx();
        let pi = c.pi();
        let quarter = c.div(&pi, &c.from_i64(4));
        let cases: [(i64, i64, i64); 4] = [(1, 1, 1), (-1, 1, 3), (-1, -1, -3), (1, -1, -1)];
        for (x, y, mult) in cases {
            let got = c.atan2(&c.from_i64(y), &c.from_i64(x));
            let want = c.mul(&quarter, &c.from_i64(mult));
            assert_close(&c, &got, &want, 8);
        }
        let half = c.div(&pi, &c.from_i64(2));
        assert_close(&c, &c.atan2(&c.from_i64(2), &c.zero()), &half, 8);
        assert_close(
            &c,
            &c.atan2(&c.from_i64(-2), &c.zero()),
            &half.neg(),
            8,
        );
        assert!(c.atan2(&c.zero(), &c.zero()).is_zero());
    }

    #[test]
    fn principal_powers_choose_the_standard_branch() {
        let c = ctx();
        let half = qr(1, 2);
        // sqrt(4) = 2, sqrt(-1) = i, sqrt(-4) = 2i.
        let r = Cx::from_i64(&c, 4).pow_q(&half, &c).unwrap();
        assert_cx_close(&c, &r, &Cx::from_i64(&c, 2), 8);
        let i = Cx::from_i64(&c, -1).pow_q(&half, &c).unwrap();
        assert_cx_close(&c, &i, &Cx::new(c.zero(), c.from_i64(1)), 8);
        let ti = Cx::from_i64(&c, -4).pow_q(&half, &c).unwrap();
        assert_cx_close(&c, &ti, &Cx::new(c.zero(), c.from_i64(2)), 8);
        // z^(1/2) squared returns z.
        let z = Cx::from_f64(&c, 0.25, -1.5);
        let s = z.pow_q(&half, &c).unwrap();
        assert_cx_close(&c, &s.mul(&s, &c), &z, 8);
        // Exponent 0 and zero bases.
        assert_cx_close(
            &c,
            &z.pow_q(&qi(0), &c).unwrap(),
            &Cx::one(&c),
            4,
        );
        assert!(Cx::zero(&c).pow_q(&qr(3, 2), &c).unwrap().is_zero());
        assert!(Cx::zero(&c).pow_q(&qr(-1, 2), &c).is_err());
    }

    #[test]
    fn unit_phases_hit_the_roots_of_unity() {
        let c = ctx();
        let m1 = Cx::unit_phase(&qr(1, 2), &c);
        assert_cx_close(&c, &m1, &Cx::from_i64(&c, -1), 8);
        let i = Cx::unit_phase(&qr(1, 4), &c);
        assert_cx_close(&c, &i, &Cx::new(c.zero(), c.from_i64(1)), 8);
        let one = Cx::unit_phase(&qi(1), &c);
        assert_cx_close(&c, &one, &Cx::one(&c), 8);
    }

    #[test]
    fn linear_solve_and_inverse_agree() {
        let c = ctx();
        // A = [[2, 1+i], [1-i, 3]], Hermitian positive definite.
        let mut a = CxMat::zeros(&c, 2, 2);
        a.set(0, 0, Cx::from_i64(&c, 2));
        a.set(0, 1, Cx::new(c.from_i64(1), c.from_i64(1)));
        a.set(1, 0, Cx::new(c.from_i64(1), c.from_i64(-1)));
        a.set(1, 1, Cx::from_i64(&c, 3));
        let mut b = CxMat::zeros(&c, 2, 2);
        b.set(0, 0, Cx::from_i64(&c, 5));
        b.set(0, 1, Cx::new(c.from_i64(0), c.from_i64(2)));
        b.set(1, 0, Cx::from_i64(&c, -1));
        b.set(1, 1, Cx::from_i64(&c, 7));
        let x = a.solve(&b, &c).unwrap();
        let residual = a.mul(&x, &c).diff_norm(&b, &c);
        let mut tol = c.from_i64(1);
        tol.set_exponent(16 - c.bits() as i32);
        assert!(c.lt(&residual, &tol) || residual.is_zero());
        let inv = a.inverse(&c).unwrap();
        let eye = a.mul(&inv, &c);
        let err = eye.diff_norm(&CxMat::identity(&c, 2), &c);
        assert!(c.lt(&err, &tol) || err.is_zero());
        let cond = a.condition(&c).unwrap();
        assert!(c.lt(&c.zero(), &cond));
    }

    #[test]
    fn determinant_matches_the_closed_form() {
        let c = ctx();
        let mut a = CxMat::zeros(&c, 2, 2);
        a.set(0, 0, Cx::from_i64(&c, 3));
        a.set(0, 1, Cx::new(c.from_i64(1), c.from_i64(2)));
        a.set(1, 0, Cx::new(c.from_i64(1), c.from_i64(-2)));
        a.set(1, 1, Cx::from_i64(&c, 4));
        // det = 12 - (1+2i)(1-2i) = 12 - 5 = 7.
        let d = a.det(&c).unwrap();
        assert_cx_close(&c, &d, &Cx::from_i64(&c, 7), 8);
        // Row swap flips the sign.
        let mut sw = CxMat::zeros(&c, 2, 2);
        for j in 0..2 {
            sw.set(0, j, a.at(1, j).clone());
            sw.set(1, j, a.at(0, j).clone());
        }
        let ds = sw.det(&c).unwrap();
        assert_cx_close(&c, &ds, &Cx::from_i64(&c, -7), 8);
    }

    #[test]
    fn singular_systems_are_rejected() {
        let c = ctx();
        let mut a = CxMat::zeros(&c, 2, 2);
        a.set(0, 0, Cx::from_i64(&c, 1));
        a.set(0, 1, Cx::from_i64(&c, 1));
        a.set(1, 0, Cx::from_i64(&c, 1));
        a.set(1, 1, Cx::from_i64(&c, 1));
        assert!(matches!(
            a.solve(&CxMat::identity(&c, 2), &c),
            Err(Error::Singular(_))
        ));
        assert!(a.det(&c).unwrap().is_zero());
    }

    #[test]
    fn matrix_vector_products_match_matrix_products() {
        let c = ctx();
        let a = CxMat::from_fn(&c, 2, 2, |i, j| Cx::from_i64(&c, (2 * i + j + 1) as i64));
        let v = vec![Cx::from_i64(&c, 1), Cx::from_i64(&c, -2)];
        let got = a.mul_vec(&v, &c);
        assert_eq!(got[0].re.cmp(&c.from_i64(-3)), Some(0));
        assert_eq!(got[1].re.cmp(&c.from_i64(-5)), Some(0));
    }

    #[test]
    fn formatting_is_canonical_and_rounds_correctly() {
        let c = Ctx::new(12);
        assert_eq!(c.format_real(&c.zero()), "0");
        assert_eq!(c.format_real(&c.from_i64(1)), "1.00000000000e+0");
        assert_eq!(c.format_real(&c.from_i64(-250)), "-2.50000000000e+2");
        assert_eq!(c.format_real(&c.from_q(&qr(1, 3))), "3.33333333333e-1");
        assert_eq!(c.format_real(&c.from_q(&qr(2, 3))), "6.66666666667e-1");
        // Shortened renderings round at the requested digit count.
        assert_eq!(c.format_real_digits(&c.from_q(&qr(2, 3)), 3), "6.67e-1");
        assert_eq!(c.format_real_digits(&c.from_i64(-250), 2), "-2.5e+2");
        assert_eq!(c.format_real_digits(&c.zero(), 3), "0");
        // Carry propagation across all digits.
        assert_eq!(
            c.format_real(&c.from_q(&qr(9_999_999_999_999, 10_000_000_000_000))),
            "1.00000000000e+0"
        );
        assert_eq!(c.format_real(&c.from_q(&qr(1, 1_000_000))), "1.00000000000e-6");
        // The rendering is stable under reformatting.
        let x = c.from_q(&qr(-7, 11));
        assert_eq!(c.format_real(&x), c.format_real(&x));
    }

    #[test]
    fn f64_images_are_usable_for_reporting() {
        let c = ctx();
        let x = c.from_q(&qr(355, 113));
        assert!((c.to_f64(&x) - 355.0 / 113.0).abs() < 1e-14);
        let tiny = c.from_f64(1e-40);
        assert!((c.to_f64(&tiny) - 1e-40).abs() < 1e-52);
    }
}
