//! Synthetic instance generation with controlled condition number,
//! ground-truth matching up to permutation and cube roots of unity, and the
//! runtime/precision benchmarking harness.

mod hungarian;

pub use hungarian::min_cost_assignment;

use crate::error::{Error, Result};
use crate::jennrich::{decompose_exact, decompose_fp, min_precision_bits, DEFAULT_PRECISION_GATE_C};
use crate::numerics::{mat_inv, CMatrix, CVector, FpContext};
use crate::spectral::standard_normal;
use crate::stream::{stream, StreamKind};
use crate::tscb::tscb_op_count;
use num_complex::Complex64;
use std::time::Instant;

/// A generated test instance: the tensor, its ground truth, and its measured
/// condition number `kappa(T) = ||U||_F^2 + ||U^-1||_F^2`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub t: crate::fptensor::SymTensor3,
    /// Rows are the ground-truth factors `u_i`.
    pub u_true: CMatrix,
    pub kappa: f64,
    pub seed: u64,
}

impl Instance {
    pub fn u_rows(&self) -> Vec<CVector> {
        (0..self.u_true.rows()).map(|i| self.u_true.row(i)).collect()
    }
}

/// Alignment of a recovered factor set against the truth: a permutation and
/// one cube root of unity per vector.
#[derive(Clone, Debug)]
pub struct MatchResult {
    /// `permutation[i] = j`: found vector `i` matches truth vector `j`.
    pub permutation: Vec<usize>,
    /// The phase applied to the truth vector in the match.
    pub phases: Vec<Complex64>,
    pub per_vector_error: Vec<f64>,
    pub max_error: f64,
}

pub fn cube_roots_of_unity() -> [Complex64; 3] {
    let th = 2.0 * std::f64::consts::PI / 3.0;
    [
        Complex64::ONE,
        Complex64::new(th.cos(), th.sin()),
        Complex64::new(th.cos(), -th.sin()),
    ]
}

/// Random unitary by two-pass modified Gram-Schmidt on a Ginibre matrix.
fn random_unitary(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    });
    let mut cols: Vec<CVector> = (0..n).map(|j| g.column(j)).collect();
    for _pass in 0..2 {
        for j in 0..n {
            for k in 0..j {
                let proj = cols[k].dot_h(&cols[j]);
                let sub = cols[k].scale(proj);
                cols[j] = cols[j].sub(&sub);
            }
            let nv = cols[j].norm();
            for z in cols[j].as_mut_slice() {
                *z /= nv;
            }
        }
    }
    CMatrix::from_columns(&cols).expect("square unitary")
}

/// `U = Q1 diag(sigma) Q2` with the singular-value spread tuned by bisection
/// so the measured `kappa(T)` lands within 5% of the target. The target must
/// be at least `2n` (the unconditional minimum of `kappa_F`).
pub fn generate_instance(n: usize, target_kappa: f64, seed: u64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidParams("instances need dimension >= 2".into()));
    }
    if target_kappa < 2.0 * n as f64 {
        return Err(Error::Infeasible(format!(
            "kappa(T) >= 2n = {} always; requested {target_kappa}",
            2 * n
        )));
    }
    let mut rng = stream(seed, StreamKind::InstanceGeneration);
    let q1 = random_unitary(n, &mut rng);
    let q2 = random_unitary(n, &mut rng);

    // sigma_i = exp(s t_i), t_i equispaced in [-1/2, 1/2];
    // kappa(s) = sum 2 cosh(2 s t_i) increases from 2n
    let ts: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                0.0
            } else {
                -0.5 + i as f64 / (n as f64 - 1.0)
            }
        })
        .collect();
    let kappa_of = |s: f64| -> f64 { ts.iter().map(|t| 2.0 * (2.0 * s * t).cosh()).sum() };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while kappa_of(hi) < target_kappa {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Infeasible(format!(
                "cannot reach kappa {target_kappa} at n = {n}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kappa_of(mid) < target_kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let sigma: Vec<Complex64> = ts.iter().map(|t| Complex64::new((s * t).exp(), 0.0)).collect();

    let u = q1.mul_host(&CMatrix::diagonal(&sigma)).mul_host(&q2);
    let uinv = mat_inv(&u, &FpContext::exact())?;
    let kappa = u.frobenius_norm().powi(2) + uinv.frobenius_norm().powi(2);
    debug_assert!(
        (kappa - target_kappa).abs() <= 0.05 * target_kappa,
        "bisection missed the target: {kappa} vs {target_kappa}"
    );
    let rows: Vec<CVector> = (0..n).map(|i| u.row(i)).collect();
    let t = crate::fptensor::SymTensor3::from_rank_ones(&rows)?;
    Ok(Instance { t, u_true: u, kappa, seed })
}

/// Align `found` with `truth` up to permutation and cube roots of unity:
/// Hungarian assignment on the cost `min_omega ||omega truth_j - found_i||`.
pub fn match_factors(found: &[CVector], truth: &[CVector]) -> Result<MatchResult> {
    let n = found.len();
    if n != truth.len() || n == 0 {
        return Err(Error::Dim("factor sets of different size".into()));
    }
    if found.iter().chain(truth).any(|v| v.dim() != truth[0].dim()) {
        return Err(Error::Dim("factor vectors of unequal dimension".into()));
    }
    let omegas = cube_roots_of_unity();
    let mut cost = vec![vec![0.0f64; n]; n];
    let mut best_phase = vec![vec![Complex64::ONE; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut best = f64::INFINITY;
            for &w in &omegas {
                let d = truth[j].scale(w).sub(&found[i]).norm();
                if d < best {
                    best = d;
                    best_phase[i][j] = w;
                }
            }
            cost[i][j] = best;
        }
    }
    let (assign, _) = min_cost_assignment(&cost);
    let per_vector_error: Vec<f64> = (0..n).map(|i| cost[i][assign[i]]).collect();
    let phases: Vec<Complex64> = (0..n).map(|i| best_phase[i][assign[i]]).collect();
    let max_error = per_vector_error.iter().copied().fold(0.0, f64::max);
    Ok(MatchResult { permutation: assign, phases, per_vector_error, max_error })
}

/// One benchmark record; the CSV has exactly one row per `(n, rep)`.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub rep: u32,
    pub seed: u64,
    pub phase: &'static str,
    pub wall_ms: f64,
    pub op_count: u64,
    pub residual: f64,
    pub max_error: f64,
}

pub fn bench_csv_header() -> &'static str {
    "n,rep,seed,phase,wall_ms,op_count,residual,max_error"
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{},{:.3e},{:.3e}",
            self.n, self.rep, self.seed, self.phase, self.wall_ms, self.op_count, self.residual,
            self.max_error
        )
    }
}

/// Wall time and instrumented op counts across sizes. Each rep generates an
/// instance at kappa ~ 3n, records the tscb op count at that dimension, and
/// times one decomposition (the finite-precision pipeline when the context
/// passes the precision gate at eps = 0.1, the exact pipeline otherwise).
/// Reps run sequentially to avoid timing interference.
pub fn bench_pipeline(n_list: &[usize], reps: u32, ctx: &FpContext, seed: u64) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(n_list.len() * reps as usize);
    for &n in n_list {
        for rep in 0..reps {
            let inst_seed = seed ^ ((n as u64) << 32) ^ rep as u64;
            let inst = generate_instance(n, 3.0 * n as f64, inst_seed)?;
            let op_count = tscb_op_count(n);
            let b_est = inst.kappa * 1.05;
            let eps = 0.1;
            let gate = min_precision_bits(n, b_est, eps, DEFAULT_PRECISION_GATE_C);
            let start = Instant::now();
            let (phase, result) = if ctx.precision_bits() >= gate {
                ("fp", decompose_fp(&inst.t, b_est, eps, ctx, inst_seed))
            } else {
                ("exact", decompose_exact(&inst.t, inst_seed))
            };
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let (residual, max_error) = match result {
                Ok(res) => {
                    let m = match_factors(&res.vectors, &inst.u_rows())?;
                    (res.diagnostics.residual, m.max_error)
                }
                Err(_) => (f64::INFINITY, f64::INFINITY),
            };
            rows.push(BenchRow { n, rep, seed: inst_seed, phase, wall_ms, op_count, residual, max_error });
        }
    }
    Ok(rows)
}
