//! Command-line front end: decompose a tensor file, generate instances, run
//! probability and precision experiments, run benchmarks.
//!
//! Exit codes: 0 success, 1 I/O or validation error, 2 per-draw
//! probabilistic failure. Logging goes to stderr, controlled by
//! `TENSORJENN_LOG` in {error, info, debug} (default error).

mod log;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tensorjenn::benchverify::{bench_csv_header, bench_pipeline, generate_instance};
use tensorjenn::error::Error;
use tensorjenn::fptensor::io as tio;
use tensorjenn::jennrich::{
    decompose_fp_with, DecompParams, ParamOverrides, DEFAULT_RETRIES,
};
use tensorjenn::randlab::{probability_experiment, trial_csv_header};
use tensorjenn::FpContext;

#[derive(Parser)]
#[command(name = "tensorjenn", version, about = "Complete decomposition of symmetric order-3 complex tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a tensor file into rank-one factors.
    Decompose {
        /// Tensor file, SYT3 binary or JSON.
        #[arg(long)]
        input: PathBuf,
        /// Condition-number estimate, B >= kappa(T).
        #[arg(long = "B")]
        b: f64,
        /// Forward accuracy parameter in (0, 1).
        #[arg(long)]
        eps: f64,
        /// Run under emulated precision with this many mantissa bits.
        #[arg(long)]
        precision_bits: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Single draw, exactly as the algorithm is stated (no retries).
        #[arg(long)]
        strict: bool,
        /// Suppress the timestamp so outputs are byte-identical across runs.
        #[arg(long)]
        deterministic: bool,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the Carbery-Wright constant in the schedule.
        #[arg(long)]
        c_cw: Option<f64>,
        /// Override the grid-step constant C_eta.
        #[arg(long)]
        c_eta: Option<f64>,
        /// Override the grid step eta outright.
        #[arg(long)]
        eta: Option<f64>,
        /// Override the backend accuracy delta outright.
        #[arg(long)]
        delta: Option<f64>,
        /// Override the precision-gate constant c.
        #[arg(long)]
        gate_c: Option<f64>,
    },
    /// Generate a synthetic instance with a targeted condition number.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix; writes PREFIX.syt3 (or .json) plus PREFIX.meta.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "bin", value_parser = ["bin", "json"])]
        format: String,
    },
    /// Monte Carlo check of the invertibility / gap / kappa_F events.
    Probcheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Accuracy parameter used to build the schedule.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output prefix; writes PREFIX.report.json and PREFIX.trials.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Wall-time and operation-count benchmark across dimensions.
    Bench {
        /// Comma-separated dimensions, e.g. 8,16,32.
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error-versus-precision sweep on one fixed instance.
    PrecisionSweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Comma-separated mantissa widths, e.g. 32,40,48,53.
        #[arg(long = "bits-list", value_delimiter = ',')]
        bits_list: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error(&format!("{e}"));
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Probabilistic per-draw failures exit 2; everything else is a usage,
/// validation, or I/O failure and exits 1.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::SingularMatrix
        | Error::RepeatedEigenvalues { .. }
        | Error::EigFailure { .. }
        | Error::NotDiagonalisable { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> tensorjenn::Result<()> {
    match cli.command {
        Command::Decompose {
            input,
            b,
            eps,
            precision_bits,
            seed,
            strict,
            deterministic,
            out,
            c_cw,
            c_eta,
            eta,
            delta,
            gate_c,
        } => {
            let tensor = tio::load_auto(&input)?;
            log::info(&format!("loaded tensor of dimension {}", tensor.dim()));
            let ctx = match precision_bits {
                Some(p) => FpContext::emulated(p)?,
                None => FpContext::exact(),
            };
            let defaults = ParamOverrides::default();
            let overrides = ParamOverrides {
                retries: if strict { 0 } else { DEFAULT_RETRIES },
                c_cw: c_cw.unwrap_or(defaults.c_cw),
                c_eta: c_eta.unwrap_or(defaults.c_eta),
                eta_override: eta,
                delta_override: delta,
                precision_gate_c: gate_c.unwrap_or(defaults.precision_gate_c),
                ..defaults
            };
            let params = DecompParams::with_overrides(tensor.dim(), b, eps, overrides)?;
            let result = decompose_fp_with(&tensor, &params, &ctx, seed)?;
            log::info(&format!(
                "decomposed: residual {:.3e}, {} retries",
                result.diagnostics.residual, result.diagnostics.retries
            ));
            let json = output::decomposition_json(&result, &params, seed, deterministic);
            match out {
                Some(p) => std::fs::write(p, json)?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Generate { n, kappa, seed, out, format } => {
            let inst = generate_instance(n, kappa, seed)?;
            log::info(&format!("generated instance with kappa {:.3}", inst.kappa));
            let tensor_path = match format.as_str() {
                "json" => {
                    let p = out.with_extension("json");
                    tio::save_json(&inst.t, &p)?;
                    p
                }
                _ => {
                    let p = out.with_extension("syt3");
                    tio::save_binary(&inst.t, &p)?;
                    p
                }
            };
            let sidecar = out.with_extension("meta.json");
            std::fs::write(&sidecar, output::instance_sidecar_json(&inst))?;
            log::info(&format!(
                "wrote {} and {}",
                tensor_path.display(),
                sidecar.display()
            ));
            Ok(())
        }
        Command::Probcheck { n, kappa, trials, seed, eps, workers, out } => {
            if trials < 1 {
                return Err(Error::InvalidParams("trials must be at least 1".into()));
            }
            let inst = generate_instance(n, kappa, seed)?;
            let params = DecompParams::new(n, inst.kappa * 1.01, eps)?;
            let (report, rows) =
                probability_experiment(&inst.u_true, &params, trials, seed, workers)?;
            let report_path = out.with_extension("report.json");
            std::fs::write(&report_path, serde_json::to_string_pretty(&report).expect("report"))?;
            let mut csv = String::from(trial_csv_header());
            csv.push('\n');
            for r in &rows {
                csv.push_str(&r.to_csv(seed));
                csv.push('\n');
            }
            let csv_path = out.with_extension("trials.csv");
            std::fs::write(&csv_path, csv)?;
            log::info(&format!(
                "rates: invertible {:.4}, gap {:.4}, kappa_F {:.4} over {} trials",
                report.invertible_rate, report.gap_rate, report.kappa_f_rate, report.trials
            ));
            Ok(())
        }
        Command::Bench { n_list, reps, seed, out } => {
            if n_list.is_empty() || reps < 1 {
                return Err(Error::InvalidParams("need a non-empty n-list and reps >= 1".into()));
            }
            let rows = bench_pipeline(&n_list, reps, &FpContext::exact(), seed)?;
            let mut csv = String::from(bench_csv_header());
            csv.push('\n');
            for r in &rows {
                csv.push_str(&r.to_csv());
                csv.push('\n');
            }
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::PrecisionSweep { n, kappa, eps, bits_list, seed, out } => {
            if bits_list.is_empty() {
                return Err(Error::InvalidParams("need a non-empty bits-list".into()));
            }
            let csv = output::precision_sweep_csv(n, kappa, eps, &bits_list, seed)?;
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}
