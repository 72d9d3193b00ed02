//! JSON and CSV shaping for the CLI outputs. All JSON carries `"schema": 1`;
//! the timestamp field is omitted in deterministic mode so outputs are
//! byte-identical for identical flags and seed.

use serde::Serialize;
use tensorjenn::benchverify::{generate_instance, match_factors, Instance};
use tensorjenn::jennrich::{decompose_fp_with, Advisory, DecompParams, DecompResult};
use tensorjenn::{FpContext, Result};

#[derive(Serialize)]
struct DecompositionJson<'a> {
    schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp_unix_s: Option<u64>,
    n: usize,
    b: f64,
    eps: f64,
    seed: u64,
    vectors: Vec<Vec<(f64, f64)>>,
    diagnostics: DiagnosticsJson<'a>,
}

#[derive(Serialize)]
struct DiagnosticsJson<'a> {
    residual: f64,
    measured_gap: f64,
    measured_kappa_f_ta: f64,
    alpha: &'a [(f64, f64)],
    retries: u32,
    precision_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    advisory: Option<&'static str>,
}

pub fn decomposition_json(
    result: &DecompResult,
    params: &DecompParams,
    seed: u64,
    deterministic: bool,
) -> String {
    let timestamp_unix_s = if deterministic {
        None
    } else {
        Some(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    };
    let doc = DecompositionJson {
        schema: 1,
        timestamp_unix_s,
        n: params.n,
        b: params.b,
        eps: params.eps,
        seed,
        vectors: result
            .vectors
            .iter()
            .map(|v| v.as_slice().iter().map(|z| (z.re, z.im)).collect())
            .collect(),
        diagnostics: DiagnosticsJson {
            residual: result.diagnostics.residual,
            measured_gap: result.diagnostics.measured_gap,
            measured_kappa_f_ta: result.diagnostics.measured_kappa_f_ta,
            alpha: &result.diagnostics.alpha,
            retries: result.diagnostics.retries,
            precision_bits: result.diagnostics.precision_bits,
            advisory: result.diagnostics.advisory.map(|a| match a {
                Advisory::WrongConditionEstimate => "wrong_condition_estimate",
            }),
        },
    };
    serde_json::to_string_pretty(&doc).expect("decomposition JSON")
}

#[derive(Serialize)]
struct SidecarJson {
    schema: u32,
    n: usize,
    kappa: f64,
    seed: u64,
    /// Row-major complex pairs of the ground-truth factor matrix.
    u_true: Vec<Vec<(f64, f64)>>,
}

pub fn instance_sidecar_json(inst: &Instance) -> String {
    let n = inst.u_true.rows();
    let doc = SidecarJson {
        schema: 1,
        n,
        kappa: inst.kappa,
        seed: inst.seed,
        u_true: (0..n)
            .map(|i| {
                let row = inst.u_true.row(i);
                row.as_slice().iter().map(|z| (z.re, z.im)).collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("sidecar JSON")
}

/// One fixed instance decomposed at each mantissa width; columns show the
/// error-versus-precision curve.
pub fn precision_sweep_csv(
    n: usize,
    kappa: f64,
    eps: f64,
    bits_list: &[u32],
    seed: u64,
) -> Result<String> {
    let inst = generate_instance(n, kappa, seed)?;
    let truth = inst.u_rows();
    let b_est = inst.kappa * 1.05;
    let mut csv = String::from("p,success,residual,max_error\n");
    for &p in bits_list {
        let ctx = FpContext::emulated(p)?;
        let params = DecompParams::new(n, b_est, eps)?;
        let line = match decompose_fp_with(&inst.t, &params, &ctx, seed) {
            Ok(res) => {
                let m = match_factors(&res.vectors, &truth)?;
                format!("{p},true,{:.6e},{:.6e}\n", res.diagnostics.residual, m.max_error)
            }
            Err(e) => {
                crate::log::info(&format!("sweep at p={p} failed: {e}"));
                format!("{p},false,inf,inf\n")
            }
        };
        csv.push_str(&line);
    }
    Ok(csv)
}
