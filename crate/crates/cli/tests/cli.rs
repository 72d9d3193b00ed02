//! End-to-end tests of the binary: every documented exit code is reachable,
//! outputs are deterministic under --deterministic, and the experiment
//! subcommands produce well-formed files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tensorjenn"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tensorjenn-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn generate(dir: &Path, n: usize, kappa: f64, seed: u64) -> PathBuf {
    let prefix = dir.join(format!("inst-{n}-{seed}"));
    let out = run(bin()
        .args(["generate", "--n", &n.to_string(), "--kappa", &kappa.to_string()])
        .args(["--seed", &seed.to_string()])
        .arg("--out")
        .arg(&prefix));
    assert_eq!(code(&out), 0, "generate failed: {}", String::from_utf8_lossy(&out.stderr));
    prefix.with_extension("syt3")
}

#[test]
fn generate_then_decompose_round_trip_exits_zero() {
    let dir = tmpdir("roundtrip");
    let tensor = generate(&dir, 4, 12.0, 5);
    assert!(tensor.exists());
    assert!(tensor.with_extension("meta.json").exists());

    let result = dir.join("out.json");
    let out = run(bin()
        .args(["decompose", "--B", "13", "--eps", "1e-3", "--seed", "3"])
        .arg("--input")
        .arg(&tensor)
        .arg("--out")
        .arg(&result));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["n"], 4);
    assert_eq!(doc["vectors"].as_array().unwrap().len(), 4);
    assert!(doc["diagnostics"]["residual"].as_f64().unwrap() < 1e-8);
    assert!(doc["diagnostics"]["advisory"].is_null());
}

#[test]
fn decompose_diagonal_json_tensor() {
    let dir = tmpdir("diag");
    // diagonal tensor in JSON form: T_iii = 1
    let path = dir.join("diag.json");
    std::fs::write(
        &path,
        r#"{"n": 3, "entries": [[0,0,0,1.0,0.0],[1,1,1,1.0,0.0],[2,2,2,1.0,0.0]]}"#,
    )
    .unwrap();
    let out = run(bin()
        .args(["decompose", "--B", "10", "--eps", "1e-3", "--deterministic"])
        .arg("--input")
        .arg(&path));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // each recovered vector is a standard basis vector up to a cube root of unity
    for vec in doc["vectors"].as_array().unwrap() {
        let mags: Vec<f64> = vec
            .as_array()
            .unwrap()
            .iter()
            .map(|z| {
                let re = z[0].as_f64().unwrap();
                let im = z[1].as_f64().unwrap();
                (re * re + im * im).sqrt()
            })
            .collect();
        let big = mags.iter().cloned().fold(0.0f64, f64::max);
        let rest: f64 = mags.iter().sum::<f64>() - big;
        assert!((big - 1.0).abs() < 1e-6 && rest < 1e-6, "not a basis vector: {mags:?}");
    }
}

#[test]
fn malformed_file_exits_one_naming_entry() {
    let dir = tmpdir("malformed");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"n": 2, "entries": [[0,0,0,1.0,0.0],[1,0,1,2.0,0.0]]}"#).unwrap();
    let out = run(bin()
        .args(["decompose", "--B", "5", "--eps", "1e-3"])
        .arg("--input")
        .arg(&path));
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("entry 1"), "stderr must name the offending entry: {stderr}");
}

#[test]
fn asymmetric_binary_exits_one() {
    let dir = tmpdir("asym");
    let tensor = generate(&dir, 3, 9.0, 8);
    let mut bytes = std::fs::read(&tensor).unwrap();
    // corrupt T[0,1,2] (flat index 5 at n = 3) without touching its orbit
    let off = 8 + 16 * 5;
    bytes[off..off + 8].copy_from_slice(&123.456f64.to_le_bytes());
    let bad = dir.join("asym.syt3");
    std::fs::write(&bad, bytes).unwrap();
    let out = run(bin()
        .args(["decompose", "--B", "10", "--eps", "1e-3"])
        .arg("--input")
        .arg(&bad));
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("asymmetric"));
}

#[test]
fn precision_gate_exits_one() {
    let dir = tmpdir("gate");
    let tensor = generate(&dir, 8, 18.0, 2);
    let out = run(bin()
        .args(["decompose", "--B", "19", "--eps", "1e-3", "--precision-bits", "8"])
        .arg("--input")
        .arg(&tensor));
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("precision too low"));
}

#[test]
fn strict_singular_draw_exits_two() {
    let dir = tmpdir("strict");
    // rank-1 symmetric tensor: every slice combination is singular, so the
    // single strict draw always fails on inversion
    let path = dir.join("rank1.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "entries": [[0,0,0,1.0,0.0],[0,0,1,0.5,0.0],[0,1,1,0.25,0.0],[1,1,1,0.125,0.0]]}"#,
    )
    .unwrap();
    let out = run(bin()
        .args(["decompose", "--B", "8", "--eps", "1e-2", "--strict"])
        .arg("--input")
        .arg(&path));
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn infeasible_kappa_exits_one() {
    let dir = tmpdir("infeasible");
    let out = run(bin()
        .args(["generate", "--n", "4", "--kappa", "3"])
        .arg("--out")
        .arg(dir.join("x")));
    assert_eq!(code(&out), 1);
}

#[test]
fn deterministic_outputs_are_byte_identical() {
    let dir = tmpdir("determ");
    let tensor = generate(&dir, 4, 12.0, 5);
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = run(bin()
            .args(["decompose", "--B", "13", "--eps", "1e-3", "--seed", "9", "--deterministic"])
            .arg("--input")
            .arg(&tensor));
        assert_eq!(code(&out), 0);
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1], "deterministic runs must be byte-identical");
    let doc: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert!(doc.get("timestamp_unix_s").is_none(), "timestamp must be suppressed");
}

#[test]
fn log_env_var_gates_info_output() {
    let dir = tmpdir("logenv");
    let tensor = generate(&dir, 3, 9.0, 4);
    let quiet = run(bin()
        .args(["decompose", "--B", "10", "--eps", "1e-3", "--deterministic"])
        .arg("--input")
        .arg(&tensor)
        .env_remove("TENSORJENN_LOG"));
    assert_eq!(code(&quiet), 0);
    assert!(!String::from_utf8_lossy(&quiet.stderr).contains("info:"));

    let chatty = run(bin()
        .args(["decompose", "--B", "10", "--eps", "1e-3", "--deterministic"])
        .arg("--input")
        .arg(&tensor)
        .env("TENSORJENN_LOG", "info"));
    assert_eq!(code(&chatty), 0);
    assert!(String::from_utf8_lossy(&chatty.stderr).contains("info:"));
}

#[test]
fn probcheck_writes_report_and_trials() {
    let dir = tmpdir("probcheck");
    let prefix = dir.join("probe");
    let out = run(bin()
        .args(["probcheck", "--n", "4", "--kappa", "12", "--trials", "300", "--seed", "6"])
        .args(["--workers", "3"])
        .arg("--out")
        .arg(&prefix));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(prefix.with_extension("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["trials"], 300);
    for (rate, floor) in [
        ("invertible_rate", "invertible_floor"),
        ("gap_rate", "gap_floor"),
        ("kappa_f_rate", "kappa_f_floor"),
    ] {
        assert!(
            report[rate].as_f64().unwrap() >= report[floor].as_f64().unwrap(),
            "{rate} below clamped floor"
        );
    }
    let csv = std::fs::read_to_string(prefix.with_extension("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301, "header plus one row per trial");
}

#[test]
fn bench_row_count_matches_grid() {
    let dir = tmpdir("bench");
    let path = dir.join("bench.csv");
    let out = run(bin()
        .args(["bench", "--n-list", "3,4,5", "--reps", "2", "--seed", "1"])
        .arg("--out")
        .arg(&path));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2, "header plus |n_list| * reps rows");
}

#[test]
fn precision_sweep_errors_non_increasing() {
    let dir = tmpdir("sweep");
    let path = dir.join("sweep.csv");
    let out = run(bin()
        .args(["precision-sweep", "--n", "6", "--kappa", "15", "--eps", "1e-3"])
        .args(["--bits-list", "32,40,48,53", "--seed", "4"])
        .arg("--out")
        .arg(&path));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let errors: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols[1], "true", "sweep run failed at p={}", cols[0]);
            cols[3].parse().unwrap()
        })
        .collect();
    assert_eq!(errors.len(), 4);
    for w in errors.windows(2) {
        assert!(w[1] <= 2.0 * w[0], "max_error grew beyond the 2x band: {errors:?}");
    }
}
