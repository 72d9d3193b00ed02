//! Dense complex vectors and matrices with context-threaded arithmetic.
//!
//! `inner_product` is the bilinear (transpose) product `x^T y`, which is what
//! the slice and trace computations need; norms are always Hermitian.

use super::FpContext;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    entries: Vec<Complex64>,
}

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        CVector { entries }
    }

    pub fn zeros(n: usize) -> Self {
        CVector { entries: vec![Complex64::ZERO; n] }
    }

    /// Standard basis vector `e_i` in dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.entries[i] = Complex64::ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// Hermitian l2 norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> CVector {
        CVector { entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Hermitian inner product `<self, other> = sum conj(self_i) other_i`,
    /// host precision. Used for normalization and phase alignment only.
    pub fn dot_h(&self, other: &CVector) -> Complex64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl std::ops::Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl std::ops::IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[CVector]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Dim("matrix needs at least one row".into()));
        }
        let c = rows[0].dim();
        if rows.iter().any(|v| v.dim() != c) {
            return Err(Error::Dim("rows of unequal length".into()));
        }
        let mut m = Self::zeros(r, c);
        for (i, v) in rows.iter().enumerate() {
            for j in 0..c {
                m[(i, j)] = v[j];
            }
        }
        Ok(m)
    }

    pub fn from_columns(cols: &[CVector]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i];
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> CVector {
        CVector::new(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj_transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Host-precision sum, for oracles and diagnostics.
    pub fn add_host(&self, other: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub_host(&self, other: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale_host(&self, s: Complex64) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    /// Host-precision matrix product, for oracles and diagnostics.
    pub fn mul_host(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must match");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec_host(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim());
        CVector::new(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
                .collect(),
        )
    }

    /// Frobenius norm, host precision.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Round every entry into the context's representable set.
    pub fn rounded(&self, ctx: &FpContext) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex64::new(ctx.round(z.re), ctx.round(z.im)))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Bilinear product `x^T y` with sequential left-to-right accumulation under
/// the context. In `Emulated(p)` mode the error is bounded by
/// `gamma_n ||x|| ||y||` with `gamma_n = n u / (1 - n u)` (valid while `n u < 1`).
pub fn inner_product(x: &CVector, y: &CVector, ctx: &FpContext) -> Result<Complex64> {
    if x.dim() != y.dim() {
        return Err(Error::Dim(format!(
            "inner product of length {} with length {}",
            x.dim(),
            y.dim()
        )));
    }
    let mut acc = Complex64::ZERO;
    for k in 0..x.dim() {
        let t = ctx.mul(x[k], y[k]);
        acc = ctx.add(acc, t);
    }
    Ok(acc)
}

/// Conventional O(n^3) triple-loop product under the context; in emulated
/// mode it satisfies `||C - AB|| <= 2 n u ||A||_F ||B||_F`.
pub fn mat_mul(a: &CMatrix, b: &CMatrix, ctx: &FpContext) -> Result<CMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::Dim(format!(
            "product of {}x{} with {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut out = CMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        let arow = &a.data[i * a.cols..(i + 1) * a.cols];
        for j in 0..b.cols() {
            let mut acc = Complex64::ZERO;
            for k in 0..a.cols() {
                let t = ctx.mul(arow[k], b[(k, j)]);
                acc = ctx.add(acc, t);
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Partial-pivoted Gaussian elimination under the context.
///
/// A pivot of modulus below `2^(-p/2) ||A||_F` flags the matrix singular at
/// the working precision `p` (53 for the exact context).
pub fn mat_inv(a: &CMatrix, ctx: &FpContext) -> Result<CMatrix> {
    let tol = (2.0f64).powf(-(ctx.precision_bits() as f64) / 2.0) * a.frobenius_norm();
    mat_inv_with_pivot_tol(a, ctx, tol)
}

/// Same elimination with an explicit pivot tolerance; measurement code uses
/// a tolerance far below the contracted default.
pub(crate) fn mat_inv_with_pivot_tol(a: &CMatrix, ctx: &FpContext, tol: f64) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dim(format!("inverse of {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();

    // Augmented [A | I] elimination; all arithmetic through ctx, pivot
    // selection by modulus at host precision.
    let mut lhs = a.clone();
    let mut rhs = CMatrix::identity(n);
    for col in 0..n {
        let (mut piv, mut pmag) = (col, lhs[(col, col)].norm());
        for r in col + 1..n {
            let m = lhs[(r, col)].norm();
            if m > pmag {
                piv = r;
                pmag = m;
            }
        }
        if pmag < tol {
            return Err(Error::SingularMatrix);
        }
        if piv != col {
            for j in 0..n {
                lhs.data.swap(col * n + j, piv * n + j);
                rhs.data.swap(col * n + j, piv * n + j);
            }
        }
        let d = lhs[(col, col)];
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = ctx.div(lhs[(r, col)], d)?;
            if factor == Complex64::ZERO {
                continue;
            }
            for j in col..n {
                let t = ctx.mul(factor, lhs[(col, j)]);
                lhs[(r, j)] = ctx.sub(lhs[(r, j)], t);
            }
            for j in 0..n {
                let t = ctx.mul(factor, rhs[(col, j)]);
                rhs[(r, j)] = ctx.sub(rhs[(r, j)], t);
            }
        }
    }
    for i in 0..n {
        let d = lhs[(i, i)];
        for j in 0..n {
            rhs[(i, j)] = ctx.div(rhs[(i, j)], d)?;
        }
    }
    Ok(rhs)
}

/// Power-iteration estimate of the operator (spectral) norm, relative
/// tolerance 1e-6, clamped by `||A||_F` which always dominates it. Two fixed
/// pseudo-random starts guard against one landing orthogonal to the top
/// singular subspace.
pub fn operator_norm_est(a: &CMatrix) -> f64 {
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return 0.0;
    }
    let est = power_iterate(a, 0.7390851332151607).max(power_iterate(a, 1.3063778838630806));
    est.min(fro)
}

fn power_iterate(a: &CMatrix, stride: f64) -> f64 {
    let n = a.cols();
    let mut v = CVector::new(
        (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * stride;
                Complex64::new(t.sin(), t.cos())
            })
            .collect(),
    );
    let nv = v.norm();
    for z in v.as_mut_slice() {
        *z /= nv;
    }
    let ah = a.conj_transpose();
    let mut est = 0.0f64;
    for _ in 0..200 {
        let w = ah.mul_vec_host(&a.mul_vec_host(&v));
        let lambda = w.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        let next = lambda.sqrt();
        let done = (next - est).abs() <= 1e-6 * next;
        est = next;
        v = w.scale(Complex64::new(1.0 / lambda, 0.0));
        if done {
            break;
        }
    }
    est
}
