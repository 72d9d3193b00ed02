//! The symmetric order-3 tensor type: construction, slicing, norms, rank-one
//! sums, and the full (oracle) change of basis.
//!
//! Storage is a dense `n^3` array with no symmetry compression; entries are
//! written per canonical triple `i <= j <= k` and mirrored to the full orbit,
//! so constructed tensors are symmetric bit-for-bit.

pub mod io;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector, FpContext};
use num_complex::Complex64;

/// Dense symmetric order-3 complex tensor of dimension `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor3 {
    dim: usize,
    entries: Vec<Complex64>, // row-major (i, j, k)
}

/// The `n` slices `T_k = (T_{ijk})_{i,j}`; each is symmetric (not Hermitian).
#[derive(Clone, Debug)]
pub struct SliceSet {
    slices: Vec<CMatrix>,
}

/// Relative residual of a candidate decomposition; `absolute` is set when the
/// reference tensor has zero norm and the raw error is reported instead.
#[derive(Clone, Copy, Debug)]
pub struct Residual {
    pub value: f64,
    pub absolute: bool,
}

#[inline]
fn idx(n: usize, i: usize, j: usize, k: usize) -> usize {
    (i * n + j) * n + k
}

fn orbit(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
}

impl SymTensor3 {
    pub fn zeros(n: usize) -> Self {
        SymTensor3 { dim: n, entries: vec![Complex64::ZERO; n * n * n] }
    }

    /// Build from a value per canonical triple `i <= j <= k`, mirroring the
    /// value to the whole permutation orbit.
    pub fn from_canonical(n: usize, mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let v = f(i, j, k);
                    for (a, b, c) in orbit(i, j, k) {
                        t.entries[idx(n, a, b, c)] = v;
                    }
                }
            }
        }
        t
    }

    /// `T = sum_t u_t (x) u_t (x) u_t`, computed at host precision.
    pub fn from_rank_ones(vectors: &[CVector]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Dim("rank-one sum needs at least one vector".into()));
        }
        let n = vectors[0].dim();
        if vectors.iter().any(|v| v.dim() != n) {
            return Err(Error::Dim("rank-one vectors of unequal dimension".into()));
        }
        Ok(Self::from_canonical(n, |i, j, k| {
            vectors.iter().map(|u| u[i] * u[j] * u[k]).sum()
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.entries[idx(self.dim, i, j, k)]
    }

    #[inline]
    pub fn set_orbit(&mut self, i: usize, j: usize, k: usize, v: Complex64) {
        for (a, b, c) in orbit(i, j, k) {
            self.entries[idx(self.dim, a, b, c)] = v;
        }
    }

    /// Write one entry without mirroring; used by the binary loader, which
    /// checks symmetry afterwards.
    #[inline]
    pub(crate) fn raw_set(&mut self, i: usize, j: usize, k: usize, v: Complex64) {
        self.entries[idx(self.dim, i, j, k)] = v;
    }

    /// Maximum symmetry defect relative to the largest entry magnitude.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let scale = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let vals = orbit(i, j, k).map(|(a, b, c)| self.entries[idx(n, a, b, c)]);
                    for w in 1..6 {
                        worst = worst.max((vals[w] - vals[0]).norm());
                    }
                }
            }
        }
        worst / scale
    }

    pub fn is_symmetric_exact(&self) -> bool {
        let n = self.dim;
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let v = self.entries[idx(n, i, j, k)];
                    if orbit(i, j, k)
                        .iter()
                        .any(|&(a, b, c)| self.entries[idx(n, a, b, c)] != v)
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Average each permutation orbit; the result is symmetric bit-for-bit.
    pub fn symmetrized(&self) -> SymTensor3 {
        let n = self.dim;
        Self::from_canonical(n, |i, j, k| {
            let sum: Complex64 = orbit(i, j, k)
                .iter()
                .map(|&(a, b, c)| self.entries[idx(n, a, b, c)])
                .sum();
            sum / 6.0
        })
    }

    /// Cut into slices `T_k = (T_{ijk})_{i,j}`.
    pub fn slices(&self) -> SliceSet {
        let n = self.dim;
        SliceSet {
            slices: (0..n)
                .map(|k| CMatrix::from_fn(n, n, |i, j| self.get(i, j, k)))
                .collect(),
        }
    }

    /// `sum_i c_i T_i` entrywise under the context. In emulated mode the
    /// deviation from the exact combination is at most `2 n u ||c|| ||T||_F`.
    pub fn linear_combo_slices(&self, c: &[f64], ctx: &FpContext) -> Result<CMatrix> {
        let n = self.dim;
        if c.len() != n {
            return Err(Error::Dim(format!(
                "coefficient vector of length {} for dimension {n}",
                c.len()
            )));
        }
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for (k, &ck) in c.iter().enumerate() {
                    let t = ctx.mul_real(ck, self.get(i, j, k));
                    acc = ctx.add(acc, t);
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub_host(&self, other: &SymTensor3) -> SymTensor3 {
        assert_eq!(self.dim, other.dim);
        SymTensor3 {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale_host(&self, s: Complex64) -> SymTensor3 {
        SymTensor3 { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn add_host(&self, other: &SymTensor3) -> SymTensor3 {
        assert_eq!(self.dim, other.dim);
        SymTensor3 {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl SliceSet {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn get(&self, k: usize) -> &CMatrix {
        &self.slices[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CMatrix> {
        self.slices.iter()
    }

    /// Stack the slices back into a tensor; bit-exact inverse of `slices`.
    pub fn reassemble(&self) -> SymTensor3 {
        let n = self.slices.len();
        let mut t = SymTensor3::zeros(n);
        for (k, s) in self.slices.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    t.entries[idx(n, i, j, k)] = s[(i, j)];
                }
            }
        }
        t
    }
}

/// Full change of basis `(A (x) A (x) A).T` by three successive mode
/// contractions, host precision, O(n^4). This is the oracle the fast trace
/// routine is checked against; it is never on the fast path. The output is
/// re-symmetrized by orbit averaging so the symmetry invariant holds exactly.
pub fn change_of_basis(t: &SymTensor3, a: &CMatrix) -> Result<SymTensor3> {
    let n = t.dim();
    if a.rows() != n || a.cols() != n {
        return Err(Error::Dim(format!(
            "change of basis of dimension {n} by {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    // mode 1: R1[i1, j2, j3] = sum_j1 A[j1, i1] T[j1, j2, j3]
    let mut r1 = vec![Complex64::ZERO; n * n * n];
    for i1 in 0..n {
        for j2 in 0..n {
            for j3 in 0..n {
                let mut acc = Complex64::ZERO;
                for j1 in 0..n {
                    acc += a[(j1, i1)] * t.get(j1, j2, j3);
                }
                r1[idx(n, i1, j2, j3)] = acc;
            }
        }
    }
    // mode 2: R2[i1, i2, j3] = sum_j2 A[j2, i2] R1[i1, j2, j3]
    let mut r2 = vec![Complex64::ZERO; n * n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            for j3 in 0..n {
                let mut acc = Complex64::ZERO;
                for j2 in 0..n {
                    acc += a[(j2, i2)] * r1[idx(n, i1, j2, j3)];
                }
                r2[idx(n, i1, i2, j3)] = acc;
            }
        }
    }
    // mode 3: T'[i1, i2, i3] = sum_j3 A[j3, i3] R2[i1, i2, j3]
    let mut out = SymTensor3::zeros(n);
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let mut acc = Complex64::ZERO;
                for j3 in 0..n {
                    acc += a[(j3, i3)] * r2[idx(n, i1, i2, j3)];
                }
                out.entries[idx(n, i1, i2, i3)] = acc;
            }
        }
    }
    Ok(out.symmetrized())
}

/// Frobenius norm of the tensor.
pub fn tensor_norm(t: &SymTensor3) -> f64 {
    t.norm()
}

/// `||T - sum_i v_i^(x)3||_F / ||T||_F`, or the absolute error (flagged) when
/// `||T||_F = 0`.
pub fn residual(t: &SymTensor3, vectors: &[CVector]) -> Result<Residual> {
    let rebuilt = SymTensor3::from_rank_ones(vectors)?;
    if rebuilt.dim() != t.dim() {
        return Err(Error::Dim("residual dimension mismatch".into()));
    }
    let err = t.sub_host(&rebuilt).norm();
    let scale = t.norm();
    if scale == 0.0 {
        Ok(Residual { value: err, absolute: true })
    } else {
        Ok(Residual { value: err / scale, absolute: false })
    }
}
