//! Condition numbers of the eigenproblem, the randomized diagonalisation
//! backend consumed as a backward-approximation contract, and the
//! forward-approximation wrapper that scales its input.
//!
//! The backend is not a re-implementation of the shattering/bisection
//! algorithm the contract originates from: it is a complex shifted-QR
//! eigensolver plus inverse iteration, preceded by a random Gaussian
//! perturbation that splits clustered eigenvalues, with the contract's
//! postconditions (backward residual, distinct eigenvalues, normalized
//! columns) measured directly and up to 3 re-randomizations.

mod eig;

pub use eig::eigenvalues;
pub(crate) use eig::inverse_iteration;

use crate::error::{Error, Result};
use crate::numerics::{mat_inv, operator_norm_est, CMatrix, CVector, FpContext};
use num_complex::Complex64;
use rand::Rng;

/// Residuals below `RESIDUAL_FLOOR_CONST * n^2 * eps_host * ||A||_F` are not
/// certifiable in host doubles; the backend clamps the requested residual
/// there and reports both figures.
const RESIDUAL_FLOOR_CONST: f64 = 64.0;

const BACKEND_RETRIES: u32 = 3;

/// Output of the diagonalisation backend.
#[derive(Clone, Debug)]
pub struct EigResult {
    /// Columns are the unit-norm eigenvectors.
    pub v: CMatrix,
    /// Eigenvalues, in the column order of `v`.
    pub d: Vec<Complex64>,
    /// Measured `||A - V D V^-1||` (operator norm estimate).
    pub backward_residual: f64,
    /// The caller's requested residual.
    pub requested_delta: f64,
    /// Residual actually enforced after the host-precision clamp.
    pub effective_delta: f64,
    /// Measured `||V|| ||V^-1||`; reported, not certified.
    pub kappa_v_measured: f64,
    /// Re-randomizations consumed.
    pub retries: u32,
}

/// Condition diagnostics of a diagonalisable matrix. `kappa_eig` uses the
/// certified upper bound `kappa_V <= kappa_V^F / 2`, so it is an estimate
/// from above, never below.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    /// `kappa_F` of the optimally scaled eigenvector matrix (`= kappa_V^F(A)`).
    pub kappa_f_of_v: f64,
    /// Minimum eigenvalue gap.
    pub gap: f64,
    /// `kappa_V(A) / gap(A)` with `kappa_V` replaced by its upper bound.
    pub kappa_eig: f64,
    /// Per-eigenvalue condition numbers `kappa(lambda_i) = ||v_i|| ||u_i||`.
    pub per_eigen: Vec<f64>,
    /// The `kappa_V` upper bound used (`kappa_V^F / 2`).
    pub kappa_v_upper_bound: f64,
}

/// `kappa_F(V) = ||V||_F^2 + ||V^-1||_F^2`.
pub fn kappa_f(v: &CMatrix) -> Result<f64> {
    let inv = mat_inv(v, &FpContext::exact())?;
    Ok(v.frobenius_norm().powi(2) + inv.frobenius_norm().powi(2))
}

/// Minimum pairwise distance between eigenvalues, O(n^2).
pub fn gap(eigenvalues: &[Complex64]) -> Result<f64> {
    if eigenvalues.len() < 2 {
        return Err(Error::Dim("gap needs at least two eigenvalues".into()));
    }
    let mut g = f64::INFINITY;
    for i in 0..eigenvalues.len() {
        for j in i + 1..eigenvalues.len() {
            g = g.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    Ok(g)
}

/// `kappa(lambda_i) = ||v_i|| ||u_i||` from the columns of `V` and rows of `V^-1`.
pub fn eigen_condition_numbers(v: &CMatrix) -> Result<Vec<f64>> {
    let inv = mat_inv(v, &FpContext::exact())?;
    Ok((0..v.cols())
        .map(|i| v.column(i).norm() * inv.row(i).norm())
        .collect())
}

/// Rescale the columns of `W` by `sqrt(||u_i|| / ||v_i||)`, reaching the
/// infimum of `kappa_F` over column rescalings: `kappa_F(V) = 2 sum ||u_i|| ||v_i||`.
pub fn optimal_scaling(w: &CMatrix) -> Result<CMatrix> {
    let inv = mat_inv(w, &FpContext::exact())?;
    let mut out = w.clone();
    for j in 0..w.cols() {
        let vn = w.column(j).norm();
        let un = inv.row(j).norm();
        if vn == 0.0 {
            return Err(Error::SingularMatrix);
        }
        let s = (un / vn).sqrt();
        for i in 0..w.rows() {
            out[(i, j)] *= s;
        }
    }
    Ok(out)
}

/// Frobenius eigenvector condition number of the matrix diagonalised by `W`
/// (columns = eigenvectors): `kappa_V^F = 2 sum ||u_i|| ||v_i||`, which is
/// invariant under column rescaling of `W`.
pub fn kappa_v_f_of_eigvecs(w: &CMatrix) -> Result<f64> {
    Ok(2.0 * eigen_condition_numbers(w)?.iter().sum::<f64>())
}

/// Randomized diagonalisation with a backward-residual contract.
///
/// Intended for `||A|| <= 1` and `delta` in `(0, 1)`; the requested residual
/// is clamped from below at the host-precision floor. On success the output
/// satisfies `||A - V D V^-1|| <= effective_delta` with distinct eigenvalues
/// and unit-norm eigenvector columns.
pub fn eig_backend(a: &CMatrix, delta: f64, rng: &mut impl Rng) -> Result<EigResult> {
    if !a.is_square() {
        return Err(Error::Dim(format!("eig of {}x{}", a.rows(), a.cols())));
    }
    if delta.is_nan() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidParams(format!("delta must lie in (0,1), got {delta}")));
    }
    let n = a.rows();
    let fro = a.frobenius_norm();
    let floor = RESIDUAL_FLOOR_CONST * (n as f64).powi(2) * f64::EPSILON * fro.max(f64::MIN_POSITIVE);
    let delta_eff = delta.max(floor);
    let exact = FpContext::exact();

    let mut best_residual = f64::INFINITY;
    for attempt in 0..=BACKEND_RETRIES {
        // split clustered eigenvalues with a Gaussian perturbation of
        // operator norm (delta/4) * ||A||_F
        let a_pert = if fro > 0.0 {
            let g = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(standard_normal(rng), standard_normal(rng))
            });
            let gn = operator_norm_est(&g).max(f64::MIN_POSITIVE);
            a.add_host(&g.scale_host(Complex64::new(delta * fro / (4.0 * gn), 0.0)))
        } else {
            a.clone()
        };

        let Ok(eigs) = eigenvalues(&a_pert) else { continue };
        if n >= 2 && gap(&eigs)? == 0.0 {
            continue;
        }
        let mut cols = Vec::with_capacity(n);
        for &l in &eigs {
            let mut v = inverse_iteration(&a_pert, l);
            let nv = v.norm();
            if nv == 0.0 || !nv.is_finite() {
                cols.clear();
                break;
            }
            for z in v.as_mut_slice() {
                *z /= nv;
            }
            cols.push(v);
        }
        if cols.len() != n {
            continue;
        }
        let v = CMatrix::from_columns(&cols)?;
        let Ok(vinv) = mat_inv(&v, &exact) else { continue };
        let d = CMatrix::diagonal(&eigs);
        let recon = v.mul_host(&d).mul_host(&vinv);
        let residual = operator_norm_est(&a.sub_host(&recon));
        best_residual = best_residual.min(residual);
        if residual <= delta_eff {
            let kappa_v_measured = operator_norm_est(&v) * operator_norm_est(&vinv);
            return Ok(EigResult {
                v,
                d: eigs,
                backward_residual: residual,
                requested_delta: delta,
                effective_delta: delta_eff,
                kappa_v_measured,
                retries: attempt,
            });
        }
    }
    Err(Error::EigFailure { requested: delta, achieved: best_residual })
}

/// Forward approximation of the eigenvectors of a diagonalisable matrix:
/// scale by `1 / (2 K_norm)` under the context, run the backend at
/// `delta' = delta / (64 n K_norm K_eig)`, and return the columns.
pub fn eig_fwd(
    a: &CMatrix,
    delta: f64,
    k_norm: f64,
    k_eig: f64,
    ctx: &FpContext,
    rng: &mut impl Rng,
) -> Result<Vec<CVector>> {
    if !a.is_square() {
        return Err(Error::Dim(format!("eig_fwd of {}x{}", a.rows(), a.cols())));
    }
    if delta.is_nan() || delta <= 0.0 || delta >= 0.5 {
        return Err(Error::InvalidParams(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if k_norm.is_nan() || k_norm < 1.0 || k_eig.is_nan() || k_eig <= 0.0 {
        return Err(Error::InvalidParams(
            "K_norm must exceed max(||A||_F, 1) and K_eig must be positive".into(),
        ));
    }
    let n = a.rows();
    let scale = 2.0 * k_norm;
    let mut b = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = ctx.div_real(a[(i, j)], scale)?;
        }
    }
    // the parameter computation itself carries no roundoff
    let delta_prime = (delta / (64.0 * n as f64 * k_norm * k_eig)).max(f64::MIN_POSITIVE);
    let res = eig_backend(&b, delta_prime, rng)?;
    Ok((0..n).map(|j| res.v.column(j)).collect())
}

/// `kappa_eig(A) = kappa_V(A) / gap(A)` with `kappa_V` replaced by the
/// certified upper bound `kappa_V^F / 2` computed from the eigendecomposition.
pub fn kappa_eig(a: &CMatrix, rng: &mut impl Rng) -> Result<f64> {
    Ok(condition_report(a, rng)?.kappa_eig)
}

/// Deterministic host-precision eigenpairs (values plus unit-norm eigenvector
/// columns) with no splitting perturbation; a measurement tool for matrices
/// already known to have distinct eigenvalues.
pub fn eigenpairs(a: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let eigs = eigenvalues(a)?;
    let n = a.rows();
    let mut cols = Vec::with_capacity(n);
    for &l in &eigs {
        let mut v = inverse_iteration(a, l);
        let nv = v.norm();
        if nv == 0.0 || !nv.is_finite() {
            return Err(Error::EigFailure { requested: 0.0, achieved: f64::INFINITY });
        }
        for z in v.as_mut_slice() {
            *z /= nv;
        }
        cols.push(v);
    }
    Ok((eigs, CMatrix::from_columns(&cols)?))
}

/// Full condition diagnostics via one backend run at a tight residual.
pub fn condition_report(a: &CMatrix, rng: &mut impl Rng) -> Result<ConditionReport> {
    let fro = a.frobenius_norm().max(1.0);
    let scaled = a.scale_host(Complex64::new(1.0 / (2.0 * fro), 0.0));
    let res = eig_backend(&scaled, 1e-9, rng)?;
    let g = gap(&res.d)? * 2.0 * fro; // gap scales back with the matrix
    if g == 0.0 {
        return Err(Error::RepeatedEigenvalues { gap: 0.0, threshold: 0.0 });
    }
    let per_eigen = eigen_condition_numbers(&res.v)?;
    let kappa_v_f = 2.0 * per_eigen.iter().sum::<f64>();
    let v_opt = optimal_scaling(&res.v)?;
    let kappa_f_of_v = kappa_f(&v_opt)?;
    let upper = kappa_v_f / 2.0;
    Ok(ConditionReport {
        kappa_f_of_v,
        gap: g,
        kappa_eig: upper / g,
        per_eigen,
        kappa_v_upper_bound: upper,
    })
}

/// Standard normal via Box-Muller.
pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u1: f64 = rng.random::<f64>();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.random::<f64>();
        return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_mat(n: usize, r: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn kappa_f_hand_values() {
        assert!((kappa_f(&CMatrix::identity(2)).unwrap() - 4.0).abs() < 1e-12);

        let mut v = CMatrix::identity(2);
        v[(1, 0)] = Complex64::ONE;
        assert!((kappa_f(&v).unwrap() - 6.0).abs() < 1e-12);

        let d = CMatrix::diagonal(&[Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)]);
        assert!((kappa_f(&d).unwrap() - 8.5).abs() < 1e-12);
    }

    #[test]
    fn kappa_f_at_least_2n() {
        let mut r = rng(50);
        for _ in 0..200 {
            let n = r.random_range(2..=8);
            let m = random_mat(n, &mut r);
            if let Ok(k) = kappa_f(&m) {
                assert!(k >= 2.0 * n as f64 - 1e-9);
            }
        }
    }

    #[test]
    fn gap_hand_values() {
        let eigs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(4.0, 0.0),
        ];
        assert!((gap(&eigs).unwrap() - 1.0).abs() < 1e-15);
        let pm = [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        assert!((gap(&pm).unwrap() - 2.0).abs() < 1e-15);
        let dup = [Complex64::ONE, Complex64::ONE];
        assert_eq!(gap(&dup).unwrap(), 0.0);
        assert!(gap(&[Complex64::ONE]).is_err());
    }

    #[test]
    fn eigen_condition_identity_and_rescale_invariance() {
        let ks = eigen_condition_numbers(&CMatrix::identity(4)).unwrap();
        for k in ks {
            assert!((k - 1.0).abs() < 1e-12);
        }
        assert_eq!(optimal_scaling(&CMatrix::identity(4)).unwrap(), CMatrix::identity(4));

        // kappa(lambda_i) is independent of column rescaling
        let mut r = rng(51);
        for _ in 0..100 {
            let w = random_mat(5, &mut r);
            let Ok(base) = eigen_condition_numbers(&w) else { continue };
            let scales: Vec<Complex64> = (0..5)
                .map(|_| {
                    Complex64::new(r.random_range(0.2..3.0), r.random_range(-1.0..1.0))
                })
                .collect();
            let mut ws = w.clone();
            for j in 0..5 {
                for i in 0..5 {
                    ws[(i, j)] *= scales[j];
                }
            }
            let Ok(scaled) = eigen_condition_numbers(&ws) else { continue };
            for (a, b) in base.iter().zip(&scaled) {
                assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }
        }
    }

    #[test]
    fn optimal_scaling_minimizes_over_diagonals() {
        let mut r = rng(52);
        for _ in 0..20 {
            let w = random_mat(5, &mut r);
            let Ok(opt) = optimal_scaling(&w) else { continue };
            let best = kappa_f(&opt).unwrap();
            for _ in 0..50 {
                let mut wd = w.clone();
                for j in 0..5 {
                    let s = Complex64::new(r.random_range(0.1..4.0), 0.0);
                    for i in 0..5 {
                        wd[(i, j)] *= s;
                    }
                }
                if let Ok(k) = kappa_f(&wd) {
                    assert!(best <= k * (1.0 + 1e-9));
                }
            }
            // the optimum value is 2 sum ||u_i|| ||v_i||
            let optimum = kappa_v_f_of_eigvecs(&w).unwrap();
            assert!((best - optimum).abs() <= 1e-9 * optimum);
        }
    }

    #[test]
    fn backend_diagonal_input() {
        let a = CMatrix::diagonal(&[Complex64::new(0.1, 0.0), Complex64::new(0.5, 0.0)]);
        let res = eig_backend(&a, 1e-8, &mut rng(53)).unwrap();
        assert!(res.backward_residual <= res.effective_delta);
        let mut eigs = res.d.clone();
        eigs.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((eigs[0] - Complex64::new(0.1, 0.0)).norm() < 1e-6);
        assert!((eigs[1] - Complex64::new(0.5, 0.0)).norm() < 1e-6);
        for j in 0..2 {
            assert!((res.v.column(j).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn backend_residual_on_random_diagonalisable() {
        let mut r = rng(54);
        for _ in 0..10 {
            let a = random_mat(8, &mut r);
            let a = a.scale_host(Complex64::new(0.5 / operator_norm_est(&a).max(1e-30), 0.0));
            let res = eig_backend(&a, 1e-8, &mut r).unwrap();
            assert!(res.backward_residual <= 1e-8);
        }
    }

    #[test]
    fn backend_eigenvalues_within_kappa_v_delta() {
        // A = V D V^-1 with well-conditioned V: output eigenvalues match D
        // within kappa_V(A) * delta after assignment.
        let mut r = rng(58);
        let n = 6;
        for _ in 0..10 {
            // eigenvectors near the identity keep kappa_V moderate
            let mut w = CMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    w[(i, j)] += Complex64::new(
                        0.2 * r.random_range(-1.0..1.0),
                        0.2 * r.random_range(-1.0..1.0),
                    );
                }
            }
            let eigs: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(0.05 + 0.08 * k as f64, 0.04 * r.random_range(-1.0..1.0)))
                .collect();
            let winv = mat_inv(&w, &FpContext::exact()).unwrap();
            let a = w.mul_host(&CMatrix::diagonal(&eigs)).mul_host(&winv);
            let delta = 1e-8;
            let res = eig_backend(&a, delta, &mut r).unwrap();
            let kappa_v = kappa_v_f_of_eigvecs(&w).unwrap() / 2.0;
            for &l in &eigs {
                let best = res.d.iter().map(|d| (d - l).norm()).fold(f64::INFINITY, f64::min);
                assert!(
                    best <= kappa_v * delta,
                    "eigenvalue error {best:.3e} above kappa_V delta {:.3e}",
                    kappa_v * delta
                );
            }
        }
    }

    #[test]
    fn eig_fwd_forward_error_on_synthetic_ground_truth() {
        // A = W Lambda W^-1 with known unit eigenvectors: matched forward
        // error below the requested delta.
        let mut r = rng(59);
        let n = 6;
        let mut w = CMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] +=
                    Complex64::new(0.25 * r.random_range(-1.0..1.0), 0.25 * r.random_range(-1.0..1.0));
            }
        }
        for j in 0..n {
            let nv = w.column(j).norm();
            for i in 0..n {
                w[(i, j)] /= nv;
            }
        }
        let eigs: Vec<Complex64> =
            (0..n).map(|k| Complex64::new(0.1 + 0.15 * k as f64, 0.05 * (k as f64).sin())).collect();
        let winv = mat_inv(&w, &FpContext::exact()).unwrap();
        let a = w.mul_host(&CMatrix::diagonal(&eigs)).mul_host(&winv);

        let delta = 1e-6;
        let k_norm = a.frobenius_norm().max(1.0) * 2.0;
        let kappa_v = kappa_v_f_of_eigvecs(&w).unwrap() / 2.0;
        let k_eig = 2.0 * kappa_v / gap(&eigs).unwrap();
        let cols = eig_fwd(&a, delta, k_norm, k_eig, &FpContext::exact(), &mut r).unwrap();
        for j in 0..n {
            let truth = w.column(j);
            let best = cols
                .iter()
                .map(|c| {
                    let ov = truth.dot_h(c).norm().min(1.0);
                    (2.0 - 2.0 * ov).max(0.0).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < delta, "forward error {best:.3e} above delta {delta:.1e}");
        }
    }

    #[test]
    fn condition_report_on_diagonal_matrix() {
        let a = CMatrix::diagonal(&[
            Complex64::new(0.1, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.9, 0.0),
        ]);
        let rep = condition_report(&a, &mut rng(60)).unwrap();
        assert!((rep.gap - 0.4).abs() < 1e-4);
        // unitary eigenvector basis: kappa_F at its 2n minimum, kappa(lambda_i) = 1
        assert!((rep.kappa_f_of_v - 6.0).abs() < 1e-3);
        for k in &rep.per_eigen {
            assert!((k - 1.0).abs() < 1e-4);
        }
        assert!((rep.kappa_v_upper_bound - 3.0).abs() < 1e-3);
        assert!((rep.kappa_eig - 3.0 / 0.4).abs() < 0.1);
    }

    #[test]
    fn eig_fwd_diagonal_and_scale_invariance() {
        let a = CMatrix::diagonal(&[Complex64::new(0.25, 0.0), Complex64::new(0.75, 0.0)]);
        let ctx = FpContext::exact();
        let vs = eig_fwd(&a, 1e-6, 2.0, 1e6, &ctx, &mut rng(55)).unwrap();
        for v in &vs {
            // up to phase, columns are standard basis vectors
            let big = if v[0].norm() > v[1].norm() { v[0] } else { v[1] };
            assert!((big.norm() - 1.0).abs() < 1e-6);
        }

        // scaling the matrix and K_norm together leaves the eigenvectors unchanged
        let mut r = rng(56);
        let m = random_mat(5, &mut r);
        let k_norm = m.frobenius_norm() + 1.0;
        let v1 = eig_fwd(&m, 1e-6, k_norm, 1e8, &ctx, &mut rng(57)).unwrap();
        let c = 3.5;
        let v2 = eig_fwd(
            &m.scale_host(Complex64::new(c, 0.0)),
            1e-6,
            c * k_norm,
            1e8,
            &ctx,
            &mut rng(57),
        )
        .unwrap();
        // match columns by best Hermitian overlap
        for a_col in &v1 {
            let best = v2
                .iter()
                .map(|b_col| {
                    let ov = a_col.dot_h(b_col).norm();
                    1.0 - ov.min(1.0)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "no matching eigenvector after scaling: {best}");
        }
    }
}
