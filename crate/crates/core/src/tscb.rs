//! Traces of the slices of `(V (x) V (x) V).T` in O(n^3) operations, without
//! ever forming the transformed tensor.
//!
//! The four steps: the Gram product; `x_{m,k} = (W T_m)_{k,k}` as the inner
//! product of row `k` of `W` with column `k` of `T_m` (the product `W T_m` is
//! never formed); `x_m = sum_k x_{m,k}`; `s_i = sum_m v_{m,i} x_m`. In
//! emulated mode the result satisfies
//! `|s_i - Tr(S_i)| <= 14 n^(3/2) u ||V||_F^3 ||T||_F`.
//!
//! The m-loop ranges over independent slices and could run in parallel; this
//! implementation is single-threaded and deterministic.

use crate::error::{Error, Result};
use crate::fptensor::SymTensor3;
use crate::numerics::{mat_mul, CMatrix, FpContext};
use num_complex::Complex64;

/// Machine precision must satisfy `u < 1/(10 n)` for the error bound to hold.
fn check_precision(n: usize, ctx: &FpContext) -> Result<()> {
    let u = ctx.unit_roundoff();
    if u >= 1.0 / (10.0 * n as f64) {
        let required = (10.0 * n as f64).log2().ceil() as u32;
        return Err(Error::PrecisionTooLow { required, available: ctx.precision_bits() });
    }
    Ok(())
}

/// Trace of the slices after a change of basis.
pub fn tscb(t: &SymTensor3, v: &CMatrix, ctx: &FpContext) -> Result<Vec<Complex64>> {
    let n = t.dim();
    if v.rows() != n || v.cols() != n {
        return Err(Error::Dim(format!("tscb with {}x{} basis on dimension {n}", v.rows(), v.cols())));
    }
    check_precision(n, ctx)?;

    // Step 1: the Gram matrix W = V V^T by conventional multiplication.
    // With slices S_k = V^T D_k V, the cyclic property gives
    // Tr(S_k) = Tr(V V^T D_k), so this is the product the traces need.
    let w = mat_mul(v, &v.transpose(), ctx)?;

    // Steps 2-3: x_m = sum_k <W_k, (T_m)_{_,k}>, accumulated sequentially.
    let slices = t.slices();
    let mut x = vec![Complex64::ZERO; n];
    for (m, xm_slot) in x.iter_mut().enumerate() {
        let tm = slices.get(m);
        let mut xms = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = Complex64::ZERO;
            for l in 0..n {
                let term = ctx.mul(w[(k, l)], tm[(l, k)]);
                acc = ctx.add(acc, term);
            }
            xms.push(acc);
        }
        let mut xm = Complex64::ZERO;
        for &xmk in &xms {
            xm = ctx.add(xm, xmk);
        }
        *xm_slot = xm;
    }

    // Step 4: s_i = sum_m v_{m,i} x_m.
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Complex64::ZERO;
        for m in 0..n {
            let term = ctx.mul(v[(m, i)], x[m]);
            acc = ctx.add(acc, term);
        }
        s.push(acc);
    }
    Ok(s)
}

/// Elementary complex operations performed by [`tscb`] at dimension `n`,
/// measured with an instrumented context on a deterministic instance.
pub fn tscb_op_count(n: usize) -> u64 {
    let t = SymTensor3::from_canonical(n, |i, j, k| {
        Complex64::new(((i + 2 * j + 3 * k) as f64).sin(), ((i * j + k) as f64).cos())
    });
    let v = CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(1.0 + ((i * n + j) as f64).cos(), ((i + j) as f64).sin())
    });
    let ctx = FpContext::exact().with_counter();
    tscb(&t, &v, &ctx).expect("tscb on a well-formed instance");
    ctx.op_count()
}
