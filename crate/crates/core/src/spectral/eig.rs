//! Host-precision complex eigensolver: Householder reduction to Hessenberg
//! form, explicit single-shift QR with deflation for the eigenvalues, and
//! inverse iteration for the eigenvectors.

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use num_complex::Complex64;

const QR_MAX_SWEEPS_PER_EIG: usize = 60;

/// Reduce a square matrix to upper Hessenberg form by Householder reflectors.
pub(crate) fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        // column below the subdiagonal
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0] == Complex64::ZERO { Complex64::ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        x[0] -= alpha;
        let vnorm_sq = x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        // rows k+1..n: H <- H - beta v (v^H H)
        for j in 0..n {
            let mut dot = Complex64::ZERO;
            for (t, vi) in x.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + t, j)];
            }
            let dot = dot * beta;
            for (t, vi) in x.iter().enumerate() {
                let delta = vi * dot;
                h[(k + 1 + t, j)] -= delta;
            }
        }
        // cols k+1..n: H <- H - beta (H v) v^H
        for i in 0..n {
            let mut dot = Complex64::ZERO;
            for (t, vi) in x.iter().enumerate() {
                dot += h[(i, k + 1 + t)] * vi;
            }
            let dot = dot * beta;
            for (t, vi) in x.iter().enumerate() {
                let delta = dot * vi.conj();
                h[(i, k + 1 + t)] -= delta;
            }
        }
        // zero out the eliminated entries explicitly
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::ZERO;
        }
    }
    h
}

/// Complex Givens rotation `[c, s; -conj(s), c]` (c real) zeroing `g` in `(f, g)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == Complex64::ZERO {
        return (1.0, Complex64::ZERO);
    }
    if f == Complex64::ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / d;
    let s = (f / f.norm()) * g.conj() / d;
    (c, s)
}

fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

/// Eigenvalues of a square complex matrix via shifted QR with deflation.
/// Fails only if the iteration stalls past its sweep budget.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let mut h = hessenberg(a);
    let hnorm = h.frobenius_norm();
    let eps = f64::EPSILON;
    let mut eigs = vec![Complex64::ZERO; n];
    let mut hi = n - 1;

    let neglect = |h: &CMatrix, k: usize| -> bool {
        let sum = h[(k, k)].norm() + h[(k + 1, k + 1)].norm();
        let tol = if sum > 0.0 { eps * sum } else { eps * hnorm.max(1.0) };
        h[(k + 1, k)].norm() <= tol
    };
    let mut sweeps_here = 0usize;

    loop {
        // deflate converged trailing eigenvalues
        while hi > 0 && neglect(&h, hi - 1) {
            h[(hi, hi - 1)] = Complex64::ZERO;
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            sweeps_here = 0;
        }
        if hi == 0 {
            eigs[0] = h[(0, 0)];
            return Ok(eigs);
        }
        // active irreducible window [lo, hi]; its size is at least 2 here
        let mut lo = hi;
        while lo > 0 && !neglect(&h, lo - 1) {
            lo -= 1;
        }
        if hi - lo == 1 {
            let (l1, l2) = eig_2x2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs[hi] = l1;
            eigs[lo] = l2;
            if lo == 0 {
                return Ok(eigs);
            }
            hi = lo - 1;
            sweeps_here = 0;
            continue;
        }

        sweeps_here += 1;
        if sweeps_here > QR_MAX_SWEEPS_PER_EIG {
            return Err(Error::EigFailure { requested: 0.0, achieved: f64::INFINITY });
        }
        let sigma = if sweeps_here.is_multiple_of(12) {
            // exceptional shift to break symmetry-induced stalls
            let r = h[(hi, hi - 1)].norm();
            h[(hi, hi)] + Complex64::new(0.75 * r, 0.4375 * r)
        } else {
            let (m1, m2) =
                eig_2x2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            if (m1 - h[(hi, hi)]).norm() <= (m2 - h[(hi, hi)]).norm() {
                m1
            } else {
                m2
            }
        };

        for i in lo..=hi {
            h[(i, i)] -= sigma;
        }
        // QR by Givens on the Hessenberg window, then RQ
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            for j in k..=hi {
                let a0 = h[(k, j)];
                let b0 = h[(k + 1, j)];
                h[(k, j)] = c * a0 + s * b0;
                h[(k + 1, j)] = -s.conj() * a0 + c * b0;
            }
            h[(k + 1, k)] = Complex64::ZERO;
        }
        for (k, &(c, s)) in rots.iter().enumerate() {
            let k = lo + k;
            for i in lo..=(k + 1).min(hi) {
                let a0 = h[(i, k)];
                let b0 = h[(i, k + 1)];
                h[(i, k)] = c * a0 + s.conj() * b0;
                h[(i, k + 1)] = -s * a0 + c * b0;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += sigma;
        }
    }
}

/// LU with partial pivoting at host precision; pivots below `floor` are
/// replaced by `floor` (standard practice for inverse iteration, where the
/// shifted matrix is nearly singular by design).
pub(crate) struct Lu {
    lu: CMatrix,
    piv: Vec<usize>,
}

pub(crate) fn lu_factor_perturbed(a: &CMatrix, floor: f64) -> Lu {
    let n = a.rows();
    let mut lu = a.clone();
    let mut piv = Vec::with_capacity(n);
    for col in 0..n {
        let (mut p, mut pm) = (col, lu[(col, col)].norm());
        for r in col + 1..n {
            let m = lu[(r, col)].norm();
            if m > pm {
                p = r;
                pm = m;
            }
        }
        piv.push(p);
        if p != col {
            for j in 0..n {
                let t = lu[(col, j)];
                lu[(col, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
        }
        if lu[(col, col)].norm() < floor {
            lu[(col, col)] = Complex64::new(floor, 0.0);
        }
        let d = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / d;
            lu[(r, col)] = f;
            if f == Complex64::ZERO {
                continue;
            }
            for j in col + 1..n {
                let delta = f * lu[(col, j)];
                lu[(r, j)] -= delta;
            }
        }
    }
    Lu { lu, piv }
}

pub(crate) fn lu_solve(f: &Lu, b: &CVector) -> CVector {
    let n = b.dim();
    let mut x: Vec<Complex64> = b.as_slice().to_vec();
    for (col, &p) in f.piv.iter().enumerate() {
        x.swap(col, p);
    }
    // forward: L y = P b (unit lower triangular)
    for i in 0..n {
        for j in 0..i {
            let delta = f.lu[(i, j)] * x[j];
            x[i] -= delta;
        }
    }
    // backward: U x = y
    for i in (0..n).rev() {
        for j in i + 1..n {
            let delta = f.lu[(i, j)] * x[j];
            x[i] -= delta;
        }
        x[i] /= f.lu[(i, i)];
    }
    CVector::new(x)
}

/// Unit-norm eigenvector for `lambda` by inverse iteration on `a`.
pub(crate) fn inverse_iteration(a: &CMatrix, lambda: Complex64) -> CVector {
    let n = a.rows();
    // thresholds are relative to the matrix scale, which may be far below 1
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let shifted = {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] -= lambda;
        }
        m
    };
    let lu = lu_factor_perturbed(&shifted, f64::EPSILON * scale);
    // deterministic start vector; randomness stays confined to the backend's
    // initial perturbation
    let mut v = CVector::new(
        (0..n)
            .map(|i| {
                let t = 0.911 * (i as f64 + 1.0);
                Complex64::new(t.sin() + 0.3, t.cos() - 0.2)
            })
            .collect(),
    );
    let nv = v.norm();
    for z in v.as_mut_slice() {
        *z /= nv;
    }
    let mut best = v.clone();
    let mut best_res = f64::INFINITY;
    for _ in 0..4 {
        let mut w = lu_solve(&lu, &v);
        let nw = w.norm();
        if !nw.is_finite() || nw == 0.0 {
            break;
        }
        for z in w.as_mut_slice() {
            *z /= nw;
        }
        let res = a.mul_vec_host(&w).sub(&w.scale(lambda)).norm();
        if res < best_res {
            best_res = res;
            best = w.clone();
        }
        if res <= 1e2 * f64::EPSILON * scale {
            break;
        }
        v = w;
    }
    best
}
