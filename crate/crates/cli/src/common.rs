//! Shared plumbing: input loading, backend resolution, and output writing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use qfrag_core::circuit::{parse_qasm, QuantumCircuit};
use qfrag_core::learn::{load_model, TrainedModel};
use qfrag_core::sim::{ExecMode, OutcomeDistribution};
use qfrag_core::util::write_atomic;
use qfrag_core::NoiseModel64;

use crate::error::CliError;

/// Environment variable that overrides the backend choice everywhere.
pub const BACKEND_ENV: &str = "QFRAG_BACKEND";

/// Execution backend named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendArg {
    /// Exact probabilities from the statevector.
    Exact,
    /// Sampled shots under the configured noise model.
    NoisyShots,
}

impl BackendArg {
    pub fn name(self) -> &'static str {
        match self {
            BackendArg::Exact => "exact",
            BackendArg::NoisyShots => "noisy-shots",
        }
    }
}

/// Resolves the effective backend: the `QFRAG_BACKEND` environment variable
/// overrides the flag when set.
pub fn resolve_backend(flag: BackendArg) -> Result<BackendArg, CliError> {
    match std::env::var(BACKEND_ENV) {
        Ok(v) => match v.as_str() {
            "exact" => Ok(BackendArg::Exact),
            "noisy-shots" => Ok(BackendArg::NoisyShots),
            other => Err(CliError::Parse(format!(
                "{BACKEND_ENV} must be `exact` or `noisy-shots`, got `{other}`"
            ))),
        },
        Err(_) => Ok(flag),
    }
}

pub fn exec_mode(backend: BackendArg, shots: usize, noise: &NoiseModel64) -> ExecMode<f64> {
    match backend {
        BackendArg::Exact => ExecMode::Exact,
        BackendArg::NoisyShots => ExecMode::Shots {
            shots,
            noise: noise.clone(),
        },
    }
}

/// Noise-model file: JSON with the error probabilities and an optional seed
/// (the global `--seed` takes precedence over the file's). `p_idle` may be
/// omitted, in which case the built-in default applies.
#[derive(Debug, Deserialize)]
struct NoiseFile {
    p1: f64,
    p2: f64,
    p_idle: Option<f64>,
    p_ro: f64,
    seed: Option<u64>,
}

/// Loads the effective noise model: the optional file supplies the
/// probabilities, and the global seed (explicit flag first, then the file's
/// seed, then the built-in default) supplies the randomness stream.
pub fn load_noise(path: Option<&Path>, seed: Option<u64>) -> Result<NoiseModel64, CliError> {
    let mut noise = NoiseModel64::default();
    let mut file_seed = None;
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let file: NoiseFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        noise.p1 = file.p1;
        noise.p2 = file.p2;
        if let Some(v) = file.p_idle {
            noise.p_idle = v;
        }
        noise.p_ro = file.p_ro;
        file_seed = file.seed;
    }
    if let Some(s) = seed.or(file_seed) {
        noise.seed = s;
    }
    // Out-of-range probabilities in a noise file are bad input, not a
    // failure of execution.
    noise
        .validate()
        .map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(noise)
}

/// Reads and parses one OpenQASM circuit, naming it after the file stem when
/// the source names nothing.
pub fn load_circuit(path: &Path) -> Result<QuantumCircuit, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut circuit =
        parse_qasm(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if circuit.name.is_none() {
        circuit.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned());
    }
    Ok(circuit)
}

/// Loads every `.qasm` file in a directory, sorted by file name.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<QuantumCircuit>, CliError> {
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Parse(format!(
            "no .qasm files found in {}",
            dir.display()
        )));
    }
    paths.iter().map(|p| load_circuit(p)).collect()
}

pub fn load_model_file(path: &Path) -> Result<TrainedModel<f64>, CliError> {
    load_model::<f64>(path).map_err(CliError::from)
}

/// Renders `key` with one character per wire, wire 0 leftmost.
pub fn bitstring(key: u64, n_bits: usize) -> String {
    (0..n_bits)
        .map(|i| if (key >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Distribution as CSV. The leading comment documents the bit convention:
/// output keys follow the original circuit's wire indices.
pub fn distribution_csv(d: &OutcomeDistribution<f64>) -> String {
    let mut out = String::from("# bitstring: leftmost character is wire q0\nbitstring,probability\n");
    for (k, p) in d.iter() {
        let _ = writeln!(out, "{},{}", bitstring(k, d.n_bits()), p);
    }
    out
}

/// Creates the output directory (if needed) and returns the joined path.
pub fn out_path(out_dir: &Path, file: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    Ok(out_dir.join(file))
}

/// Atomic text write with error context.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline (stable across invocations).
pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serializing output: {e}")))?;
    s.push('\n');
    Ok(s)
}
