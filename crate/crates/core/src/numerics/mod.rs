//! Emulated finite-precision scalar arithmetic and the error-contracted dense
//! complex linear algebra primitives every other module runs on.
//!
//! A computation is parameterized by an [`FpContext`]: either `Exact` (host
//! doubles, effective unit roundoff `2^-53`) or `Emulated(p)` with `p`
//! significand bits, so every elementary result `r` satisfies
//! `|fl(r) - r| <= 2^-p * |r|` (round to nearest, ties to even). Rounding is
//! applied per real component of each complex elementary operation: a complex
//! multiply performs 4 real multiplies and 2 real adds, each rounded.
//!
//! The context is a value passed explicitly; there is no global rounding
//! state, and all types here are immutable after construction.

mod linalg;

pub use linalg::{inner_product, mat_inv, mat_mul, operator_norm_est, CMatrix, CVector};
pub(crate) use linalg::mat_inv_with_pivot_tol;

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Significand width of an IEEE-754 double, counting the implicit bit.
pub const HOST_BITS: u32 = 53;

/// Rounding behaviour of a context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpMode {
    /// Host double-precision arithmetic.
    Exact,
    /// Round every elementary real result to `p` significand bits.
    Emulated(u32),
}

/// Floating-point context: rounding mode plus an optional operation counter.
///
/// The counter counts elementary complex operations (add, sub, mul, div,
/// sqrt, cbrt) and is shared across clones of the context, so a single
/// instrumented context can be threaded through a whole pipeline.
#[derive(Clone, Debug)]
pub struct FpContext {
    mode: FpMode,
    counter: Option<Arc<AtomicU64>>,
}

impl FpContext {
    /// Host double-precision context.
    pub fn exact() -> Self {
        FpContext { mode: FpMode::Exact, counter: None }
    }

    /// Emulated context with `bits` significand bits, `2 <= bits <= 53`.
    pub fn emulated(bits: u32) -> Result<Self> {
        if !(2..=HOST_BITS).contains(&bits) {
            return Err(Error::InvalidParams(format!(
                "mantissa bits must lie in [2, {HOST_BITS}], got {bits}"
            )));
        }
        Ok(FpContext { mode: FpMode::Emulated(bits), counter: None })
    }

    /// Same mode, with a fresh operation counter attached.
    pub fn with_counter(&self) -> Self {
        FpContext { mode: self.mode, counter: Some(Arc::new(AtomicU64::new(0))) }
    }

    pub fn mode(&self) -> FpMode {
        self.mode
    }

    /// Elementary complex operations performed so far (0 if not instrumented).
    pub fn op_count(&self) -> u64 {
        self.counter.as_ref().map_or(0, |c| c.load(Ordering::Relaxed))
    }

    /// Significand bits in effect: `p` when emulated, 53 otherwise.
    pub fn precision_bits(&self) -> u32 {
        match self.mode {
            FpMode::Exact => HOST_BITS,
            FpMode::Emulated(p) => p,
        }
    }

    /// Unit roundoff `u = 2^-p`.
    pub fn unit_roundoff(&self) -> f64 {
        (2.0f64).powi(-(self.precision_bits() as i32))
    }

    #[inline]
    fn bump(&self) {
        if let Some(c) = &self.counter {
            c.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// Round a real to the context's significand width.
    #[inline]
    pub fn round(&self, x: f64) -> f64 {
        match self.mode {
            FpMode::Exact => x,
            FpMode::Emulated(p) => round_to_bits(x, p),
        }
    }

    #[inline]
    fn round_c(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.round(z.re), self.round(z.im))
    }

    /// Complex addition, each real component rounded.
    #[inline]
    pub fn add(&self, a: Complex64, b: Complex64) -> Complex64 {
        self.bump();
        self.round_c(a + b)
    }

    /// Complex subtraction, each real component rounded.
    #[inline]
    pub fn sub(&self, a: Complex64, b: Complex64) -> Complex64 {
        self.bump();
        self.round_c(a - b)
    }

    /// Complex multiplication as 4 real multiplies and 2 real adds, each rounded.
    #[inline]
    pub fn mul(&self, a: Complex64, b: Complex64) -> Complex64 {
        self.bump();
        let rr = self.round(a.re * b.re);
        let ii = self.round(a.im * b.im);
        let ri = self.round(a.re * b.im);
        let ir = self.round(a.im * b.re);
        Complex64::new(self.round(rr - ii), self.round(ri + ir))
    }

    /// Multiply a complex by a real scalar (2 rounded real multiplies).
    #[inline]
    pub fn mul_real(&self, s: f64, a: Complex64) -> Complex64 {
        self.bump();
        Complex64::new(self.round(s * a.re), self.round(s * a.im))
    }

    /// Complex division; exact quotient with each real component rounded.
    pub fn div(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        if b == Complex64::ZERO {
            return Err(Error::DivByZero);
        }
        self.bump();
        Ok(self.round_c(a / b))
    }

    /// Divide a complex by a real scalar (2 rounded real divides).
    pub fn div_real(&self, a: Complex64, s: f64) -> Result<Complex64> {
        if s == 0.0 {
            return Err(Error::DivByZero);
        }
        self.bump();
        Ok(Complex64::new(self.round(a.re / s), self.round(a.im / s)))
    }

    /// Principal square root, components rounded.
    pub fn sqrt(&self, a: Complex64) -> Complex64 {
        self.bump();
        self.round_c(a.sqrt())
    }

    /// Principal cube root (argument in `(-pi/3, pi/3]`), components rounded.
    pub fn cbrt(&self, a: Complex64) -> Complex64 {
        self.bump();
        self.round_c(a.cbrt())
    }
}

/// Round `x` to the nearest value with `p` significand bits, ties to even.
///
/// Works directly on the IEEE-754 encoding: clearing the low `53 - p` mantissa
/// bits and letting the round-up carry propagate into the exponent handles
/// the `1.11..1 -> 10.0` case for free. `p >= 53` and non-finite inputs pass
/// through unchanged.
pub fn round_to_bits(x: f64, p: u32) -> f64 {
    if p >= HOST_BITS || x == 0.0 || !x.is_finite() {
        return x;
    }
    let shift = HOST_BITS - p; // mantissa bits to drop
    let bits = x.to_bits();
    let mask = (1u64 << shift) - 1;
    let frac = bits & mask;
    let half = 1u64 << (shift - 1);
    let mut out = bits & !mask;
    if frac > half || (frac == half && (bits >> shift) & 1 == 1) {
        out = out.wrapping_add(1u64 << shift);
    }
    let r = f64::from_bits(out);
    debug_assert!(r.is_finite(), "emulated rounding overflowed the host exponent range");
    r
}

/// Round `x` under `ctx` (identity in `Exact` mode).
pub fn round_to_context(x: f64, ctx: &FpContext) -> f64 {
    ctx.round(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn round_identity_cases() {
        // p = 53 is host rounding: nearest double is the double itself.
        assert_eq!(round_to_bits(0.1, 53), 0.1);
        let ctx = FpContext::exact();
        assert_eq!(round_to_context(0.1, &ctx), 0.1);
        assert_eq!(round_to_context(-3.75e17, &ctx), -3.75e17);
    }

    #[test]
    fn round_two_bit_significand() {
        // Two significand bits represent {1.0, 1.5} in [1, 2); 1.375 is nearer
        // 1.5 and 1.125 is nearer 1.0 (both tie-free).
        assert_eq!(round_to_bits(1.375, 2), 1.5);
        assert_eq!(round_to_bits(1.125, 2), 1.0);
        assert_eq!(round_to_bits(-1.375, 2), -1.5);
        // Carry across a power of two: 1.75 is a tie between 1.5 and 2.0,
        // resolved to the even significand 1.0 * 2^1.
        assert_eq!(round_to_bits(1.75, 2), 2.0);
    }

    #[test]
    fn fp_add_two_bits() {
        let ctx = FpContext::emulated(2).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let eighth = Complex64::new(0.125, 0.0);
        assert_eq!(ctx.add(one, eighth), one);
    }

    #[test]
    fn scalar_op_identities() {
        let ctx = FpContext::exact();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(ctx.mul(one, one), one);
        assert_eq!(ctx.cbrt(Complex64::new(8.0, 0.0)), Complex64::new(2.0, 0.0));
        assert_eq!(ctx.sqrt(Complex64::new(4.0, 0.0)), Complex64::new(2.0, 0.0));
        assert!(ctx.div(one, Complex64::ZERO).is_err());
        assert!(ctx.div_real(one, 0.0).is_err());
    }

    #[test]
    fn cbrt_principal_branch() {
        let ctx = FpContext::exact();
        for &z in &[
            Complex64::new(-8.0, 0.0),
            Complex64::new(0.0, 27.0),
            Complex64::new(-1.0, -1.0),
        ] {
            let r = ctx.cbrt(z);
            let arg = r.arg();
            assert!(arg > -std::f64::consts::FRAC_PI_3 - 1e-12);
            assert!(arg <= std::f64::consts::FRAC_PI_3 + 1e-12);
            let back = r * r * r;
            assert!((back - z).norm() <= 1e-12 * z.norm());
        }
    }

    #[test]
    fn counter_counts_complex_ops() {
        let ctx = FpContext::exact().with_counter();
        let a = Complex64::new(1.0, 2.0);
        ctx.mul(a, a);
        ctx.add(a, a);
        assert_eq!(ctx.op_count(), 2);
        // clones share the counter
        let c2 = ctx.clone();
        c2.sub(a, a);
        assert_eq!(ctx.op_count(), 3);
    }

    #[test]
    fn single_op_matches_host_within_unit_roundoff() {
        // Relative componentwise error of one elementary op is <= 2^-p,
        // comparing against the same op evaluated at p = 53.
        let mut rng = StdRng::seed_from_u64(7);
        for p in [8u32, 16, 24, 40] {
            let ctx = FpContext::emulated(p).unwrap();
            let u = ctx.unit_roundoff();
            for _ in 0..200 {
                let x: f64 = rng.random_range(-10.0..10.0);
                let y: f64 = rng.random_range(-10.0..10.0);
                let exact = x * y;
                let got = ctx.round(exact);
                assert!((got - exact).abs() <= u * exact.abs());
            }
        }
    }

    proptest! {
        #[test]
        fn rounding_is_idempotent_and_bounded(x in -1e12f64..1e12, p in 2u32..=53) {
            let r = round_to_bits(x, p);
            prop_assert_eq!(round_to_bits(r, p), r);
            let u = (2.0f64).powi(-(p as i32));
            prop_assert!((r - x).abs() <= u * x.abs());
        }

        #[test]
        fn rounding_is_monotone(a in -1e6f64..1e6, b in -1e6f64..1e6, p in 2u32..=12) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(round_to_bits(lo, p) <= round_to_bits(hi, p));
        }
    }
}
