//! Stochastic Pauli noise model: depolarizing kicks after gates, spectator
//! kicks on idle wires, plus readout bit flips.

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::real::{real, Real};

/// Noise parameters for trajectory simulation.
///
/// After every single-qubit gate, a uniformly random Pauli is applied to its
/// wire with probability `p1`. After every multi-qubit gate, each of its
/// wires independently receives a random Pauli with probability `p2` (a
/// three-qubit gate is treated as two-qubit-grade noise on each of its three
/// wires). While any gate executes, every wire it does not touch
/// independently receives a random Pauli with probability `p_idle`: spectator
/// qubits decohere and pick up crosstalk during the gate window, so error
/// grows with circuit width, not just gate count. At readout, every measured
/// bit flips with probability `p_ro`. Boundary preparations and basis
/// rotations are measurement plumbing, not physical gates, and take no noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel<T> {
    pub p1: T,
    pub p2: T,
    pub p_idle: T,
    pub p_ro: T,
    pub seed: u64,
}

impl<T: Real> Default for NoiseModel<T> {
    fn default() -> Self {
        NoiseModel {
            p1: real(0.002),
            p2: real(0.02),
            p_idle: real(0.002),
            p_ro: real(0.03),
            seed: 7,
        }
    }
}

impl<T: Real> NoiseModel<T> {
    /// A model with every probability zero (sampling noise only).
    pub fn noiseless(seed: u64) -> Self {
        NoiseModel {
            p1: T::zero(),
            p2: T::zero(),
            p_idle: T::zero(),
            p_ro: T::zero(),
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// True when no gate-level noise can fire (trajectories all coincide).
    pub fn gates_are_noiseless(&self) -> bool {
        self.p1 == T::zero() && self.p2 == T::zero() && self.p_idle == T::zero()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p_idle", self.p_idle),
            ("p_ro", self.p_ro),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(SimError::InvalidNoiseProbability {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct NoiseDoc {
    p1: Option<f64>,
    p2: Option<f64>,
    p_idle: Option<f64>,
    p_ro: Option<f64>,
    seed: Option<u64>,
}

/// Reads a noise configuration from JSON (`{"p1": 0.002, ...}`) or simple
/// key/value lines (`p1 = 0.002`, `seed: 9`). Missing fields keep defaults.
pub fn parse_noise_config<T: Real>(text: &str) -> Result<NoiseModel<T>, SimError> {
    let mut base: NoiseModel<T> = NoiseModel::default();
    let doc: NoiseDoc = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| SimError::NoiseConfig(e.to_string()))?
    } else {
        let mut doc = NoiseDoc { p1: None, p2: None, p_idle: None, p_ro: None, seed: None };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| {
                    SimError::NoiseConfig(format!("line {}: expected key = value", i + 1))
                })?;
            let value = value.trim();
            let parse_f = || {
                value.parse::<f64>().map_err(|_| {
                    SimError::NoiseConfig(format!("line {}: bad number `{value}`", i + 1))
                })
            };
            match key.trim() {
                "p1" => doc.p1 = Some(parse_f()?),
                "p2" => doc.p2 = Some(parse_f()?),
                "p_idle" => doc.p_idle = Some(parse_f()?),
                "p_ro" => doc.p_ro = Some(parse_f()?),
                "seed" => {
                    doc.seed = Some(value.parse::<u64>().map_err(|_| {
                        SimError::NoiseConfig(format!("line {}: bad seed `{value}`", i + 1))
                    })?)
                }
                other => {
                    return Err(SimError::NoiseConfig(format!(
                        "line {}: unknown key `{other}`",
                        i + 1
                    )))
                }
            }
        }
        doc
    };
    if let Some(v) = doc.p1 {
        base.p1 = real(v);
    }
    if let Some(v) = doc.p2 {
        base.p2 = real(v);
    }
    if let Some(v) = doc.p_idle {
        base.p_idle = real(v);
    }
    if let Some(v) = doc.p_ro {
        base.p_ro = real(v);
    }
    if let Some(v) = doc.seed {
        base.seed = v;
    }
    base.validate()?;
    Ok(base)
}

/// Derives an independent sub-seed from a base seed and a salt (splitmix64
/// finalizer). Used to give separate fragment runs disjoint streams.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
