//! Tensor file formats, shared with the CLI.
//!
//! JSON: `{"n": int, "entries": [[i, j, k, re, im], ...]}` listing only
//! canonical entries `i <= j <= k` (0-based); omitted triples are zero.
//!
//! Binary: magic `SYT3`, little-endian `u32` dimension, then `n^3` pairs of
//! little-endian `f64` (re, im) in row-major `(i, j, k)` order.
//!
//! Loaded tensors are symmetrized (orbit average) when the relative asymmetry
//! is within `1e-12` and rejected otherwise.

use super::SymTensor3;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"SYT3";
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Largest accepted dimension; a dense n^3 complex tensor at this size is
/// already 2 GiB, far beyond anything the pipelines target.
pub const MAX_DIMENSION: usize = 512;

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::MalformedFile("dimension n must be positive".into()));
    }
    if n > MAX_DIMENSION {
        return Err(Error::MalformedFile(format!(
            "dimension {n} exceeds the supported maximum {MAX_DIMENSION}"
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonTensor {
    n: usize,
    entries: Vec<(usize, usize, usize, f64, f64)>,
}

fn finish_load(t: SymTensor3, what: &str) -> Result<SymTensor3> {
    let asym = t.asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::AsymmetricTensor(format!(
            "{what}: relative asymmetry {asym:.3e} exceeds {SYMMETRY_TOLERANCE:.0e}"
        )));
    }
    Ok(t.symmetrized())
}

pub fn to_json_string(t: &SymTensor3) -> String {
    let n = t.dim();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let v = t.get(i, j, k);
                if v != Complex64::ZERO {
                    entries.push((i, j, k, v.re, v.im));
                }
            }
        }
    }
    serde_json::to_string(&JsonTensor { n, entries }).expect("tensor JSON serialization")
}

pub fn from_json_str(s: &str) -> Result<SymTensor3> {
    let parsed: JsonTensor = serde_json::from_str(s)
        .map_err(|e| Error::MalformedFile(format!("JSON parse error: {e}")))?;
    let n = parsed.n;
    check_dimension(n)?;
    let mut t = SymTensor3::zeros(n);
    let mut seen = std::collections::HashSet::new();
    for (pos, &(i, j, k, re, im)) in parsed.entries.iter().enumerate() {
        if !(i <= j && j <= k) {
            return Err(Error::MalformedFile(format!(
                "entry {pos} [{i},{j},{k}]: indices must satisfy i <= j <= k"
            )));
        }
        if k >= n {
            return Err(Error::MalformedFile(format!(
                "entry {pos} [{i},{j},{k}]: index out of range for n = {n}"
            )));
        }
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::MalformedFile(format!(
                "entry {pos} [{i},{j},{k}]: non-finite value"
            )));
        }
        if !seen.insert((i, j, k)) {
            return Err(Error::MalformedFile(format!(
                "entry {pos} [{i},{j},{k}]: duplicate triple"
            )));
        }
        t.set_orbit(i, j, k, Complex64::new(re, im));
    }
    // canonical entries mirror to the full orbit, so symmetry holds by construction
    Ok(t)
}

pub fn save_json(t: &SymTensor3, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_string(t))?;
    Ok(())
}

pub fn load_json(path: &Path) -> Result<SymTensor3> {
    from_json_str(&std::fs::read_to_string(path)?)
}

pub fn to_binary(t: &SymTensor3) -> Vec<u8> {
    let n = t.dim();
    let mut buf = Vec::with_capacity(8 + 16 * n * n * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = t.get(i, j, k);
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    buf
}

pub fn from_binary(bytes: &[u8]) -> Result<SymTensor3> {
    if bytes.len() < 8 || &bytes[0..4] != MAGIC {
        return Err(Error::MalformedFile("missing SYT3 magic".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    check_dimension(n)?;
    let expected = 8 + 16 * n * n * n;
    if bytes.len() != expected {
        return Err(Error::MalformedFile(format!(
            "expected {expected} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let mut t = SymTensor3::zeros(n);
    let mut off = 8;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
                if !(re.is_finite() && im.is_finite()) {
                    return Err(Error::MalformedFile(format!(
                        "entry ({i},{j},{k}): non-finite value"
                    )));
                }
                // direct write; symmetry is checked afterwards
                t.raw_set(i, j, k, Complex64::new(re, im));
                off += 16;
            }
        }
    }
    finish_load(t, "binary tensor")
}

pub fn save_binary(t: &SymTensor3, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_binary(t))?;
    Ok(())
}

pub fn load_binary(path: &Path) -> Result<SymTensor3> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    from_binary(&buf)
}

/// Load either format, sniffing the binary magic first.
pub fn load_auto(path: &Path) -> Result<SymTensor3> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() >= 4 && &buf[0..4] == MAGIC {
        from_binary(&buf)
    } else {
        from_json_str(std::str::from_utf8(&buf).map_err(|_| {
            Error::MalformedFile("file is neither SYT3 binary nor UTF-8 JSON".into())
        })?)
    }
}
