//! The decomposition pipelines: exact-arithmetic Jennrich for symmetric
//! tensors, and the finite-precision variant driven by the full parameter
//! schedule, plus the scaling-factor recovery `alpha_i = k_i^3`.

use crate::error::{Error, Result};
use crate::fptensor::{residual, SymTensor3};
use crate::numerics::{inner_product, mat_inv, CMatrix, CVector, FpContext};
use crate::randlab::sample_grid;
use crate::spectral::{eig_backend, eig_fwd, gap};
use crate::stream::{stream, StreamKind};
use crate::tscb::tscb;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

/// Retries on a singular combination or a collapsed gap; disabled by `strict`.
pub const DEFAULT_RETRIES: u32 = 3;

/// Default `c` in the minimum-precision gate
/// `p >= ceil(c * log2(nB/eps)^4 * log2(n))`, calibrated so that n = 8,
/// B = 100, eps = 1e-3 fits in hardware doubles (p <= 53).
pub const DEFAULT_PRECISION_GATE_C: f64 = 9e-5;

/// The full parameter schedule for the finite-precision pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct DecompParams {
    pub n: usize,
    /// Estimate with `B >= kappa(T)`.
    pub b: f64,
    pub eps: f64,
    /// `k_gap = 1 / (C_gap n^6 B^3)`.
    pub k_gap: f64,
    /// `k_F = c_F n^5 B^3`.
    pub k_f: f64,
    /// Grid step `eta = 1 / (C_eta n^(17/2) B^4)`, snapped so `1/eta` is an integer.
    pub eta: f64,
    /// Backend accuracy `delta = eps^3 / (C n^12 B^(9/2))`.
    pub delta: f64,
    /// `K_eig = 3 n B / k_gap` passed to the eigenvector wrapper.
    pub k_eig: f64,
    /// `K_norm = 2 B^(3/2) sqrt(n k_F)` passed to the eigenvector wrapper.
    pub k_norm: f64,
    pub c_cw: f64,
    pub c_gap: f64,
    pub c_f: f64,
    pub c_eta: f64,
    /// `C = 28 * 12^3 * 30^3`.
    pub c_delta: f64,
    /// Minimum mantissa bits demanded of the context.
    pub min_precision_bits: u32,
    pub retries: u32,
}

/// Overridable knobs; the defaults follow the algorithm box.
#[derive(Clone, Copy, Debug)]
pub struct ParamOverrides {
    /// Carbery-Wright absolute constant; affects schedules and probability
    /// floors, not the correctness of a successful run.
    pub c_cw: f64,
    pub c_eta: f64,
    /// Grid exponent on n (the algorithm box says 17/2; 15/2 also appears).
    pub eta_n_exponent: f64,
    /// Override `delta` outright (the delta exponents are inconsistent in the
    /// source analysis; the box's n^12 B^(9/2) is the default).
    pub delta_override: Option<f64>,
    pub eta_override: Option<f64>,
    /// Gate constant `c`.
    pub precision_gate_c: f64,
    pub retries: u32,
}

impl Default for ParamOverrides {
    fn default() -> Self {
        ParamOverrides {
            c_cw: 1.0,
            c_eta: 1.0,
            eta_n_exponent: 17.0 / 2.0,
            delta_override: None,
            eta_override: None,
            precision_gate_c: DEFAULT_PRECISION_GATE_C,
            retries: DEFAULT_RETRIES,
        }
    }
}

/// Minimum mantissa bits for dimension `n`, estimate `b`, accuracy `eps`.
pub fn min_precision_bits(n: usize, b: f64, eps: f64, gate_c: f64) -> u32 {
    let x = (n as f64 * b / eps).log2().max(1.0);
    let ln = (n.max(2) as f64).log2();
    (gate_c * x.powi(4) * ln).ceil() as u32
}

impl DecompParams {
    pub fn new(n: usize, b: f64, eps: f64) -> Result<Self> {
        Self::with_overrides(n, b, eps, ParamOverrides::default())
    }

    pub fn with_overrides(n: usize, b: f64, eps: f64, ov: ParamOverrides) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("dimension must be at least 2, got {n}")));
        }
        if eps.is_nan() || eps <= 0.0 || eps >= 1.0 {
            return Err(Error::InvalidParams(format!("eps must lie in (0,1), got {eps}")));
        }
        if b.is_nan() || b < 1.0 {
            return Err(Error::InvalidParams(format!("B must be at least 1, got {b}")));
        }
        let nf = n as f64;
        let c_gap = 1.0 / (48.0 * 2.0f64.sqrt() * ov.c_cw * ov.c_cw);
        let c_f = 96.0 * ov.c_cw * ov.c_cw + 1.0;
        let c_delta = 28.0 * 12.0f64.powi(3) * 30.0f64.powi(3);

        let k_gap = 1.0 / (c_gap * nf.powi(6) * b.powi(3));
        let k_f = c_f * nf.powi(5) * b.powi(3);
        if k_gap >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "schedule requires k_gap < 1; got {k_gap:.3e} (B too small for n = {n})"
            )));
        }

        let eta_raw = ov
            .eta_override
            .unwrap_or(1.0 / (ov.c_eta * nf.powf(ov.eta_n_exponent) * b.powi(4)));
        if !(eta_raw > 0.0 && eta_raw < 1.0) {
            return Err(Error::InvalidParams(format!("eta must lie in (0,1), got {eta_raw:.3e}")));
        }
        // snap so the number of grid points per unit, 1/eta, is an integer
        let eta = 1.0 / (1.0 / eta_raw).ceil();

        let delta = ov
            .delta_override
            .unwrap_or(eps.powi(3) / (c_delta * nf.powi(12) * b.powf(4.5)))
            .max(f64::MIN_POSITIVE);
        let delta_cap = (k_gap / (48.0 * nf * b)).min(1.0 / (240.0 * nf.powf(3.5) * b));
        if delta.is_nan() || delta >= delta_cap {
            return Err(Error::InvalidParams(format!(
                "delta {delta:.3e} must stay below {delta_cap:.3e}; eps = {eps} is too large \
                 for this (n, B)"
            )));
        }

        let k_eig = 3.0 * nf * b / k_gap;
        let k_norm = 2.0 * b.powf(1.5) * (nf * k_f).sqrt();
        Ok(DecompParams {
            n,
            b,
            eps,
            k_gap,
            k_f,
            eta,
            delta,
            k_eig,
            k_norm,
            c_cw: ov.c_cw,
            c_gap,
            c_f,
            c_eta: ov.c_eta,
            c_delta,
            min_precision_bits: min_precision_bits(n, b, eps, ov.precision_gate_c),
            retries: ov.retries,
        })
    }

    /// Success-probability floor `(1 - 1/n - 12/n^2)(1 - 1/sqrt(2n) - 1/n)`,
    /// clamped at 0.
    pub fn success_floor(&self) -> f64 {
        let nf = self.n as f64;
        let a = 1.0 - 1.0 / nf - 12.0 / (nf * nf);
        let b = 1.0 - 1.0 / (2.0 * nf).sqrt() - 1.0 / nf;
        (a * b).max(0.0)
    }
}

/// Post-hoc advisory attached to an otherwise successful run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Advisory {
    /// Residual exceeded `eps * ||T||_F`; the supplied `B` likely
    /// underestimates `kappa(T)`.
    WrongConditionEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    /// Relative reconstruction residual `||T - sum l_i^(x)3||_F / ||T||_F`.
    pub residual: f64,
    /// Gap of the computed eigenvalues of `(T^(a))^-1 T^(b)`.
    pub measured_gap: f64,
    /// `kappa_F` of the computed slice combination `S^(a)`.
    pub measured_kappa_f_ta: f64,
    /// Recovered scaling factors.
    pub alpha: Vec<(f64, f64)>,
    /// Draws consumed beyond the first.
    pub retries: u32,
    pub precision_bits: u32,
    pub advisory: Option<Advisory>,
}

#[derive(Clone, Debug)]
pub struct DecompResult {
    /// Recovered factors `l_i` with `T ~= sum l_i^(x)3`.
    pub vectors: Vec<CVector>,
    pub diagnostics: Diagnostics,
}

/// Exact-arithmetic pipeline: coefficients drawn from a finite set of more
/// than `n^3` values, all linear algebra at host precision.
pub fn decompose_exact(t: &SymTensor3, seed: u64) -> Result<DecompResult> {
    decompose_exact_with(t, seed, DEFAULT_RETRIES, 1e-8)
}

pub fn decompose_exact_with(
    t: &SymTensor3,
    seed: u64,
    retries: u32,
    residual_tol: f64,
) -> Result<DecompResult> {
    let n = t.dim();
    if n < 2 {
        return Err(Error::InvalidParams("decomposition needs dimension >= 2".into()));
    }
    let ctx = FpContext::exact();
    let mut grid_rng = stream(seed, StreamKind::GridSampling);
    let mut eig_rng = stream(seed, StreamKind::EigPerturbation);

    // |S| > n^3 values in (0, 1]
    let set_size = n * n * n + 1;
    let mut last_err = Error::SingularMatrix;
    for attempt in 0..=retries {
        let draw = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|_| (r.random_range(1..=set_size) as f64) / set_size as f64)
                .collect()
        };
        let a = draw(&mut grid_rng);
        let b = draw(&mut grid_rng);
        match decompose_once(t, &a, &b, None, &ctx, &mut eig_rng, residual_tol, attempt) {
            Ok(res) => return Ok(res),
            Err(e @ (Error::SingularMatrix | Error::RepeatedEigenvalues { .. })) => {
                last_err = e;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Finite-precision pipeline with the full parameter schedule. All seven
/// steps run under `ctx`; the grid draw and backend accuracy follow the
/// schedule computed by [`DecompParams`].
pub fn decompose_fp(
    t: &SymTensor3,
    b: f64,
    eps: f64,
    ctx: &FpContext,
    seed: u64,
) -> Result<DecompResult> {
    let params = DecompParams::new(t.dim(), b, eps)?;
    decompose_fp_with(t, &params, ctx, seed)
}

pub fn decompose_fp_with(
    t: &SymTensor3,
    params: &DecompParams,
    ctx: &FpContext,
    seed: u64,
) -> Result<DecompResult> {
    let n = t.dim();
    if n != params.n {
        return Err(Error::Dim(format!(
            "parameter schedule for n = {} applied to tensor of dimension {n}",
            params.n
        )));
    }
    if ctx.precision_bits() < params.min_precision_bits {
        return Err(Error::PrecisionTooLow {
            required: params.min_precision_bits,
            available: ctx.precision_bits(),
        });
    }
    let mut grid_rng = stream(seed, StreamKind::GridSampling);
    let mut eig_rng = stream(seed, StreamKind::EigPerturbation);

    let mut last_err = Error::SingularMatrix;
    for attempt in 0..=params.retries {
        let (a, b) = sample_grid(params.eta, n, &mut grid_rng)?;
        match decompose_once(
            t,
            &a,
            &b,
            Some(params),
            ctx,
            &mut eig_rng,
            params.eps,
            attempt,
        ) {
            Ok(res) => return Ok(res),
            Err(e @ (Error::SingularMatrix | Error::RepeatedEigenvalues { .. })) => {
                last_err = e;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// One draw of the seven-step pipeline.
#[allow(clippy::too_many_arguments)]
fn decompose_once(
    t: &SymTensor3,
    a: &[f64],
    b: &[f64],
    params: Option<&DecompParams>,
    ctx: &FpContext,
    eig_rng: &mut impl Rng,
    residual_tol: f64,
    attempt: u32,
) -> Result<DecompResult> {
    let n = t.dim();
    let exact = FpContext::exact();

    // Step 1: slice combinations
    let s_a = t.linear_combo_slices(a, ctx)?;
    let s_b = t.linear_combo_slices(b, ctx)?;

    // Step 2: invert S^(a)
    let s_a_inv = mat_inv(&s_a, ctx)?;
    let measured_kappa_f_ta = {
        let inv_host = mat_inv(&s_a, &exact)?;
        s_a.frobenius_norm().powi(2) + inv_host.frobenius_norm().powi(2)
    };

    // Step 3: D = S^(a)' S^(b)
    let d = crate::numerics::mat_mul(&s_a_inv, &s_b, ctx)?;

    // Step 4: eigenvectors of D
    let (v0_cols, measured_gap) = match params {
        Some(p) => {
            let cols = eig_fwd(&d, p.delta, p.k_norm, p.k_eig, ctx, eig_rng)?;
            let v0 = CMatrix::from_columns(&cols)?;
            let g = measured_eigens_gap(&d, &v0)?;
            if g < p.k_gap {
                return Err(Error::RepeatedEigenvalues { gap: g, threshold: p.k_gap });
            }
            (cols, g)
        }
        None => {
            // exact pipeline: scale so the backend contract ||A|| <= 1 holds
            let scale = d.frobenius_norm().max(1.0);
            let scaled = d.scale_host(Complex64::new(1.0 / (2.0 * scale), 0.0));
            let res = eig_backend(&scaled, 1e-11, eig_rng)?;
            let g = gap(&res.d)? * 2.0 * scale;
            let threshold = 1e-10 * res.d.iter().map(|z| z.norm()).fold(0.0, f64::max) * 2.0 * scale;
            if g <= threshold {
                return Err(Error::RepeatedEigenvalues { gap: g, threshold });
            }
            ((0..n).map(|j| res.v.column(j)).collect(), g)
        }
    };
    let v0 = CMatrix::from_columns(&v0_cols)?;

    // Step 5: rows of V0^-1 carry the unscaled factors
    let c = mat_inv(&v0, ctx)?;

    // Step 6: scaling factors as traces of the transformed slices
    let alpha = tscb(t, &v0, ctx)?;

    // Step 7: l_i = alpha_i^(1/3) u'_i
    let mut vectors = Vec::with_capacity(n);
    for (i, &al) in alpha.iter().enumerate() {
        let cbrt = ctx.cbrt(al);
        let row = c.row(i);
        let mut l = CVector::zeros(n);
        for j in 0..n {
            l[j] = ctx.mul(cbrt, row[j]);
        }
        vectors.push(l);
    }

    // success path: factors must be linearly independent at working precision
    let lmat = CMatrix::from_rows(&vectors)?;
    if mat_inv(&lmat, ctx).is_err() {
        let r = residual(t, &vectors)?;
        return Err(Error::NotDiagonalisable { residual: r.value });
    }

    let r = residual(t, &vectors)?;
    let advisory = if params.is_some() && r.value > residual_tol {
        Some(Advisory::WrongConditionEstimate)
    } else {
        None
    };
    if params.is_none() && r.value > residual_tol {
        return Err(Error::NotDiagonalisable { residual: r.value });
    }

    Ok(DecompResult {
        vectors,
        diagnostics: Diagnostics {
            residual: r.value,
            measured_gap,
            measured_kappa_f_ta,
            alpha: alpha.iter().map(|z| (z.re, z.im)).collect(),
            retries: attempt,
            precision_bits: ctx.precision_bits(),
            advisory,
        },
    })
}

/// Gap of the eigenvalues implied by the computed eigenvector matrix:
/// Rayleigh quotients `lambda_i = (V^-1 D V)_{ii}` at host precision.
fn measured_eigens_gap(d: &CMatrix, v0: &CMatrix) -> Result<f64> {
    let exact = FpContext::exact();
    let vinv = mat_inv(v0, &exact)?;
    let m = vinv.mul_host(d).mul_host(v0);
    let eigs: Vec<Complex64> = (0..d.rows()).map(|i| m[(i, i)]).collect();
    gap(&eigs)
}

/// Test oracle: the eigenvalues of `(T^(a))^-1 T^(b)` are the ratios
/// `<b, u_i> / <a, u_i>` over the rows `u_i` of `U`.
pub fn eigenvalue_ratio_oracle(u: &CMatrix, a: &[f64], b: &[f64]) -> Result<Vec<Complex64>> {
    let n = u.rows();
    if a.len() != n || b.len() != n {
        return Err(Error::Dim("coefficient length must match the factor count".into()));
    }
    let ctx = FpContext::exact();
    let a_c = CVector::new(a.iter().map(|&x| Complex64::new(x, 0.0)).collect());
    let b_c = CVector::new(b.iter().map(|&x| Complex64::new(x, 0.0)).collect());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let row = u.row(i);
        let denom = inner_product(&a_c, &row, &ctx)?;
        if denom.norm() == 0.0 {
            return Err(Error::ZeroDenominator { index: i });
        }
        let num = inner_product(&b_c, &row, &ctx)?;
        out.push(num / denom);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchverify::{generate_instance, match_factors};
    use crate::numerics::operator_norm_est;
    use crate::spectral::eigenvalues;

    #[test]
    fn params_schedule_values() {
        let p = DecompParams::new(8, 20.0, 1e-3).unwrap();
        let c_gap = 1.0 / (48.0 * 2.0f64.sqrt());
        assert!((p.k_gap - 1.0 / (c_gap * 8.0f64.powi(6) * 8000.0)).abs() <= 1e-18);
        assert!((p.k_f - 97.0 * 8.0f64.powi(5) * 8000.0).abs() < 1e-3);
        assert!(p.k_gap < 1.0 && p.k_f >= 1.0);
        assert!(p.eta > 0.0 && p.eta < 1.0);
        let inv_eta = 1.0 / p.eta;
        assert!((inv_eta - inv_eta.round()).abs() < 1e-6);
        let cap = (p.k_gap / (48.0 * 8.0 * 20.0)).min(1.0 / (240.0 * 8.0f64.powf(3.5) * 20.0));
        assert!(p.delta < cap);
        assert!(p.min_precision_bits <= 53);
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(DecompParams::new(1, 10.0, 1e-3).is_err());
        assert!(DecompParams::new(4, 10.0, 1.5).is_err());
        // B = 1 at n = 2 pushes k_gap above 1
        assert!(DecompParams::new(2, 1.0, 1e-3).is_err());
    }

    #[test]
    fn diagonal_tensor_exact() {
        let basis: Vec<_> = (0..3).map(|i| CVector::basis(3, i)).collect();
        let t = SymTensor3::from_rank_ones(&basis).unwrap();
        let res = decompose_exact(&t, 11).unwrap();
        let m = match_factors(&res.vectors, &basis).unwrap();
        assert!(m.max_error <= 1e-8, "max error {}", m.max_error);
    }

    #[test]
    fn random_instance_exact_round_trip() {
        let inst = generate_instance(8, 40.0, 123).unwrap();
        let res = decompose_exact(&inst.t, 5).unwrap();
        assert!(res.diagnostics.residual <= 1e-8);
        let m = match_factors(&res.vectors, &inst.u_rows()).unwrap();
        assert!(m.max_error <= 1e-6, "max error {}", m.max_error);
    }

    #[test]
    fn alpha_recovery_is_cubed_scaling() {
        // with P = U^-1 D, D = diag(k_i), the recovered alpha_i equal k_i^3
        let mut r = stream(77, StreamKind::InstanceGeneration);
        for _ in 0..20 {
            let inst = generate_instance(5, 25.0, r.random::<u64>()).unwrap();
            let u = inst.u_true.clone();
            let uinv = mat_inv(&u, &FpContext::exact()).unwrap();
            let ks: Vec<Complex64> = (0..5)
                .map(|_| Complex64::new(r.random_range(0.3..2.0), r.random_range(-1.0..1.0)))
                .collect();
            let p = uinv.mul_host(&CMatrix::diagonal(&ks));
            let alpha = tscb(&inst.t, &p, &FpContext::exact()).unwrap();
            for i in 0..5 {
                let want = ks[i] * ks[i] * ks[i];
                assert!(
                    (alpha[i] - want).norm() <= 1e-8 * want.norm().max(1e-12),
                    "alpha {} vs k^3 {}",
                    alpha[i],
                    want
                );
            }
        }
    }

    #[test]
    fn ratio_oracle_identity_and_swap() {
        let u = CMatrix::identity(4);
        let a = [0.5, 0.25, 1.0, 0.75];
        let b = [1.0, 0.5, 0.5, 1.5];
        let r = eigenvalue_ratio_oracle(&u, &a, &b).unwrap();
        for i in 0..4 {
            assert!((r[i] - Complex64::new(b[i] / a[i], 0.0)).norm() < 1e-14);
        }
        let swapped = eigenvalue_ratio_oracle(&u, &b, &a).unwrap();
        for i in 0..4 {
            assert!((r[i] * swapped[i] - Complex64::ONE).norm() < 1e-14);
        }
        assert!(matches!(
            eigenvalue_ratio_oracle(&u, &[0.0, 1.0, 1.0, 1.0], &b),
            Err(Error::ZeroDenominator { index: 0 })
        ));
    }

    #[test]
    fn ratio_oracle_matches_dense_eigenvalues() {
        let mut r = stream(78, StreamKind::InstanceGeneration);
        let ctx = FpContext::exact();
        for _ in 0..10 {
            let inst = generate_instance(6, 30.0, r.random::<u64>()).unwrap();
            let a: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
            let Ok(want) = eigenvalue_ratio_oracle(&inst.u_true, &a, &b) else { continue };
            let ta = inst.t.linear_combo_slices(&a, &ctx).unwrap();
            let tb = inst.t.linear_combo_slices(&b, &ctx).unwrap();
            let Ok(ta_inv) = mat_inv(&ta, &ctx) else { continue };
            let m = ta_inv.mul_host(&tb);
            let got = eigenvalues(&m).unwrap();
            // greedy match is enough at this tolerance
            for w in &want {
                let best = got.iter().map(|g| (g - w).norm()).fold(f64::INFINITY, f64::min);
                assert!(best <= 1e-8, "eigenvalue mismatch {best}");
            }
        }
    }

    #[test]
    fn slice_diagonalization_structure() {
        // T^(a) = U^T D^(a) U with D^(a) = diag(<a, u_i>)
        let mut r = stream(79, StreamKind::InstanceGeneration);
        let ctx = FpContext::exact();
        let inst = generate_instance(5, 20.0, 4242).unwrap();
        let a: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let ta = inst.t.linear_combo_slices(&a, &ctx).unwrap();
        let a_c = CVector::new(a.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        let diag: Vec<Complex64> = (0..5)
            .map(|i| inner_product(&a_c, &inst.u_true.row(i), &ctx).unwrap())
            .collect();
        let want = inst
            .u_true
            .transpose()
            .mul_host(&CMatrix::diagonal(&diag))
            .mul_host(&inst.u_true);
        assert!(ta.sub_host(&want).frobenius_norm() <= 1e-10 * want.frobenius_norm());
    }

    #[test]
    fn norm_bound_on_slice_combinations() {
        // ||T^(a)|| <= sqrt(n B^3) for a in [-1,1]^n when kappa(T) <= B
        let mut r = stream(80, StreamKind::InstanceGeneration);
        let ctx = FpContext::exact();
        let inst = generate_instance(6, 30.0, 999).unwrap();
        let bbound = inst.kappa * 1.0001;
        for _ in 0..50 {
            let a: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
            let ta = inst.t.linear_combo_slices(&a, &ctx).unwrap();
            assert!(operator_norm_est(&ta) <= (6.0 * bbound.powi(3)).sqrt() + 1e-9);
        }
    }

    #[test]
    fn uniqueness_two_runs_agree() {
        let inst = generate_instance(6, 25.0, 31415).unwrap();
        let r1 = decompose_exact(&inst.t, 1).unwrap();
        let r2 = decompose_exact(&inst.t, 2).unwrap();
        let m = match_factors(&r1.vectors, &r2.vectors).unwrap();
        assert!(m.max_error <= 1e-8, "runs disagree by {}", m.max_error);
    }

    #[test]
    fn kappa_well_defined_across_recoveries() {
        let inst = generate_instance(6, 25.0, 2718).unwrap();
        let res = decompose_exact(&inst.t, 3).unwrap();
        let recovered = CMatrix::from_rows(&res.vectors).unwrap();
        let k_true = kappa_f_of(&inst.u_true);
        let k_rec = kappa_f_of(&recovered);
        assert!((k_true - k_rec).abs() <= 1e-6 * k_true);
    }

    fn kappa_f_of(m: &CMatrix) -> f64 {
        let inv = mat_inv(m, &FpContext::exact()).unwrap();
        m.frobenius_norm().powi(2) + inv.frobenius_norm().powi(2)
    }

    #[test]
    fn fp_pipeline_on_diagonal_tensor() {
        let basis: Vec<_> = (0..4).map(|i| CVector::basis(4, i)).collect();
        let t = SymTensor3::from_rank_ones(&basis).unwrap();
        let ctx = FpContext::exact();
        let res = decompose_fp(&t, 2.0 * 4.0 + 0.1, 1e-3, &ctx, 7).unwrap();
        assert!(res.diagnostics.advisory.is_none());
        let m = match_factors(&res.vectors, &basis).unwrap();
        assert!(m.max_error <= 1e-3, "matched error {}", m.max_error);
    }

    #[test]
    fn fp_pipeline_precision_gate() {
        let basis: Vec<_> = (0..8).map(|i| CVector::basis(8, i)).collect();
        let t = SymTensor3::from_rank_ones(&basis).unwrap();
        let ctx = FpContext::emulated(8).unwrap();
        assert!(matches!(
            decompose_fp(&t, 10.0, 1e-3, &ctx, 7),
            Err(Error::PrecisionTooLow { .. })
        ));
    }

    #[test]
    fn generic_tensor_is_flagged_not_diagonalisable() {
        // A generic symmetric tensor has symmetric rank above n, so the
        // recovery cannot reproduce it: the exact pipeline must refuse, and
        // the schedule pipeline must at least attach the advisory.
        let mut r = stream(81, StreamKind::InstanceGeneration);
        let t = SymTensor3::from_canonical(4, |_, _, _| {
            Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
        });
        match decompose_exact(&t, 17) {
            Err(Error::NotDiagonalisable { residual }) => assert!(residual > 1e-6),
            Err(other) => panic!("expected NotDiagonalisable, got {other}"),
            Ok(_) => panic!("generic tensor decomposed cleanly"),
        }
        // a per-draw error is also an acceptable refusal here
        if let Ok(res) = decompose_fp(&t, 50.0, 1e-3, &FpContext::exact(), 17) {
            assert_eq!(
                res.diagnostics.advisory,
                Some(Advisory::WrongConditionEstimate),
                "large residual must carry an advisory"
            );
        }
    }
}
