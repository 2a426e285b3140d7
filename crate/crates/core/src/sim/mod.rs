//! Circuit execution: an exact state-vector backend and a shot-sampled
//! trajectory backend with stochastic Pauli noise.
//!
//! Fragments produced by cutting carry boundary conditions: cut wires feeding
//! *into* a fragment are prepared in one of four states (|0⟩, |1⟩, |+⟩,
//! |+i⟩); cut wires leaving a fragment are measured in one of the three Pauli
//! bases. Preparations and basis rotations are treated as part of state
//! preparation and measurement, so they never attract gate noise.

mod gates;
mod noise;
mod state;

pub use gates::{matrix_of, GateMatrix};
pub use noise::{mix_seed, parse_noise_config, NoiseModel};
pub use state::{Pauli, StateVector};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, QuantumCircuit};
use crate::real::{real, Real};

/// Entries smaller than this are dropped when building a distribution from
/// exact amplitudes, keeping supports free of floating-point dust.
const PROB_FLOOR: f64 = 1e-12;

/// Errors from simulation.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("circuit has {n} qubits, exceeding the state-vector limit of {limit}")]
    TooManyQubits { n: usize, limit: usize },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("boundary wire {wire} out of range for {n_qubits}-qubit circuit")]
    BoundaryWireOutOfRange { wire: usize, n_qubits: usize },
    #[error("noise probability {name}={value} is outside [0, 1]")]
    InvalidNoiseProbability { name: &'static str, value: f64 },
    #[error("bad noise config: {0}")]
    NoiseConfig(String),
    #[error("expectation terms require at least one basis-measured cut wire")]
    EmptyBoundary,
    #[error("distributions have different widths: {a} vs {b} bits")]
    WidthMismatch { a: usize, b: usize },
}

/// Measurement basis for an outgoing cut wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeasureBasis {
    X,
    Y,
    Z,
}

/// Preparation state for an incoming cut wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InitState {
    Zero,
    One,
    Plus,
    PlusI,
}

/// Boundary conditions for one fragment execution: which wires are prepared
/// in which states, and which are rotated into which measurement bases.
/// A wire may be both (a mid-section of a wire cut twice in time).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CutBoundarySpec {
    pub init_states: BTreeMap<usize, InitState>,
    pub measure_bases: BTreeMap<usize, MeasureBasis>,
}

impl CutBoundarySpec {
    /// No boundary: a plain, uncut circuit.
    pub fn none() -> Self {
        CutBoundarySpec::default()
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), SimError> {
        for &wire in self.init_states.keys().chain(self.measure_bases.keys()) {
            if wire >= n_qubits {
                return Err(SimError::BoundaryWireOutOfRange { wire, n_qubits });
            }
        }
        Ok(())
    }
}

/// Execution backend: exact probabilities or sampled noisy shots.
#[derive(Debug, Clone)]
pub enum ExecMode<T> {
    Exact,
    Shots { shots: usize, noise: NoiseModel<T> },
}

/// Simulator limits.
#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Largest register the dense backend will accept (memory guard).
    pub max_qubits: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { max_qubits: 20 }
    }
}

/// A sparse probability distribution over bitstrings of fixed width. Bit `i`
/// of a key is the measured value of wire `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution<T> {
    n_bits: usize,
    probs: BTreeMap<u64, T>,
}

impl<T: Real> OutcomeDistribution<T> {
    /// Builds from `(key, probability)` pairs, accumulating duplicates and
    /// dropping entries below the dust floor.
    pub fn from_probs(n_bits: usize, entries: impl IntoIterator<Item = (u64, T)>) -> Self {
        assert!(n_bits <= 64, "outcome keys are limited to 64 bits");
        let floor = real::<T>(PROB_FLOOR);
        let mut probs: BTreeMap<u64, T> = BTreeMap::new();
        for (k, p) in entries {
            if p > T::zero() {
                *probs.entry(k).or_insert_with(T::zero) += p;
            }
        }
        probs.retain(|_, p| *p >= floor);
        OutcomeDistribution { n_bits, probs }
    }

    /// Empirical distribution from shot counts.
    pub fn from_counts(n_bits: usize, counts: &BTreeMap<u64, u64>, shots: u64) -> Self {
        let total = real::<T>(shots as f64);
        OutcomeDistribution::from_probs(
            n_bits,
            counts
                .iter()
                .map(|(&k, &c)| (k, real::<T>(c as f64) / total)),
        )
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    /// Probability of one outcome (zero when absent).
    pub fn prob(&self, key: u64) -> T {
        self.probs.get(&key).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn sum(&self) -> T {
        self.probs.values().copied().sum()
    }

    /// Total variation distance: half the L1 difference over the union of
    /// supports.
    pub fn total_variation(&self, other: &Self) -> Result<T, SimError> {
        if self.n_bits != other.n_bits {
            return Err(SimError::WidthMismatch { a: self.n_bits, b: other.n_bits });
        }
        let keys: std::collections::BTreeSet<u64> =
            self.probs.keys().chain(other.probs.keys()).copied().collect();
        let mut acc = T::zero();
        for k in keys {
            acc += (self.prob(k) - other.prob(k)).abs();
        }
        Ok(acc / real(2.0))
    }

    /// Renders a key as a bitstring with wire 0 leftmost.
    pub fn bitstring(key: u64, n_bits: usize) -> String {
        (0..n_bits)
            .map(|i| if key >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

/// A fragment distribution with the key split into ordinary output bits and
/// cut-wire measurement bits. Bit `i` of each part corresponds to the wire at
/// index `i` of the matching wire list (both ascending).
///
/// Produced by [`expectation_terms`] with true probabilities; reconstruction
/// reuses the container for signed intermediate weights.
#[derive(Debug, Clone)]
pub struct SplitDistribution<T> {
    pub output_wires: Vec<usize>,
    pub cut_wires: Vec<usize>,
    pub probs: BTreeMap<(u64, u64), T>,
}

impl<T: Real> SplitDistribution<T> {
    /// Splits a joint distribution over all wires into (output, cut) parts.
    pub fn from_joint(joint: &OutcomeDistribution<T>, cut_wires: &[usize]) -> Self {
        let n = joint.n_bits();
        let cut: Vec<usize> = {
            let mut c = cut_wires.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        };
        let output: Vec<usize> = (0..n).filter(|w| !cut.contains(w)).collect();
        let mut probs = BTreeMap::new();
        for (key, p) in joint.iter() {
            let ok = compress_bits(key, &output);
            let ck = compress_bits(key, &cut);
            *probs.entry((ok, ck)).or_insert_with(T::zero) += p;
        }
        SplitDistribution { output_wires: output, cut_wires: cut, probs }
    }
}

/// Packs the bits of `key` at positions `wires` into a dense little-endian
/// value: bit `j` of the result is bit `wires[j]` of `key`.
pub fn compress_bits(key: u64, wires: &[usize]) -> u64 {
    wires
        .iter()
        .enumerate()
        .map(|(j, &w)| ((key >> w) & 1) << j)
        .sum()
}

fn check_limits(circuit: &QuantumCircuit, opts: &SimOptions) -> Result<(), SimError> {
    if circuit.n_qubits() > opts.max_qubits {
        return Err(SimError::TooManyQubits { n: circuit.n_qubits(), limit: opts.max_qubits });
    }
    Ok(())
}

fn apply_boundary_prep<T: Real>(psi: &mut StateVector<T>, boundary: &CutBoundarySpec) {
    for (&wire, &init) in &boundary.init_states {
        match init {
            InitState::Zero => {}
            InitState::One => psi.apply(&Gate::x(wire)),
            InitState::Plus => psi.apply(&Gate::h(wire)),
            InitState::PlusI => {
                psi.apply(&Gate::h(wire));
                psi.apply(&Gate::s(wire));
            }
        }
    }
}

fn apply_basis_rotations<T: Real>(psi: &mut StateVector<T>, boundary: &CutBoundarySpec) {
    for (&wire, &basis) in &boundary.measure_bases {
        match basis {
            MeasureBasis::Z => {}
            MeasureBasis::X => psi.apply(&Gate::h(wire)),
            MeasureBasis::Y => {
                psi.apply(&Gate::sdg(wire));
                psi.apply(&Gate::h(wire));
            }
        }
    }
}

/// Runs the circuit exactly and returns the infinite-shot joint distribution
/// over all wires (wires never touched by a gate read 0).
pub fn simulate_ideal<T: Real>(
    circuit: &QuantumCircuit,
    boundary: &CutBoundarySpec,
    opts: &SimOptions,
) -> Result<OutcomeDistribution<T>, SimError> {
    check_limits(circuit, opts)?;
    boundary.validate(circuit.n_qubits())?;
    let mut psi = StateVector::<T>::new(circuit.n_qubits());
    apply_boundary_prep(&mut psi, boundary);
    for gate in circuit.gates() {
        psi.apply(gate);
    }
    apply_basis_rotations(&mut psi, boundary);
    Ok(OutcomeDistribution::from_probs(
        circuit.n_qubits(),
        psi.probabilities()
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i as u64, p)),
    ))
}

/// Samples `shots` noisy trajectories and returns the empirical distribution.
///
/// Each shot replays the circuit through the state-vector backend with
/// freshly sampled Pauli errors — on the wires each gate touches, and on the
/// idle wires that sit out that gate window — draws one outcome, then applies
/// readout flips. The generator is split per shot index, so results do not
/// depend on evaluation order. When the model has no gate-phase noise the
/// trajectory is simulated once and only sampling/readout vary per shot; the
/// outcome stream is identical to the general path.
pub fn simulate_noisy<T: Real>(
    circuit: &QuantumCircuit,
    noise: &NoiseModel<T>,
    shots: usize,
    boundary: &CutBoundarySpec,
    opts: &SimOptions,
) -> Result<OutcomeDistribution<T>, SimError> {
    check_limits(circuit, opts)?;
    boundary.validate(circuit.n_qubits())?;
    noise.validate()?;
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let n = circuit.n_qubits();
    let p1 = noise.p1.to_f64().unwrap_or(0.0);
    let p2 = noise.p2.to_f64().unwrap_or(0.0);
    let p_idle = noise.p_idle.to_f64().unwrap_or(0.0);
    let p_ro = noise.p_ro.to_f64().unwrap_or(0.0);

    let quiet_psi = if noise.gates_are_noiseless() {
        let mut psi = StateVector::<T>::new(n);
        apply_boundary_prep(&mut psi, boundary);
        for gate in circuit.gates() {
            psi.apply(gate);
        }
        apply_basis_rotations(&mut psi, boundary);
        Some(psi)
    } else {
        None
    };

    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        rng.set_stream(shot as u64);
        let outcome = match &quiet_psi {
            Some(psi) => psi.sample(&mut rng),
            None => {
                let mut psi = StateVector::<T>::new(n);
                apply_boundary_prep(&mut psi, boundary);
                for gate in circuit.gates() {
                    psi.apply(gate);
                    if gate.kind.is_pseudo() {
                        continue;
                    }
                    let p_err = if gate.qubits.len() == 1 { p1 } else { p2 };
                    if p_err > 0.0 {
                        for &q in &gate.qubits {
                            if rng.gen::<f64>() < p_err {
                                let pauli = match rng.gen_range(0..3u8) {
                                    0 => Pauli::X,
                                    1 => Pauli::Y,
                                    _ => Pauli::Z,
                                };
                                psi.apply_pauli(q, pauli);
                            }
                        }
                    }
                    if p_idle > 0.0 {
                        for q in 0..n {
                            if gate.qubits.contains(&q) {
                                continue;
                            }
                            if rng.gen::<f64>() < p_idle {
                                let pauli = match rng.gen_range(0..3u8) {
                                    0 => Pauli::X,
                                    1 => Pauli::Y,
                                    _ => Pauli::Z,
                                };
                                psi.apply_pauli(q, pauli);
                            }
                        }
                    }
                }
                apply_basis_rotations(&mut psi, boundary);
                psi.sample(&mut rng)
            }
        };
        let outcome = if p_ro > 0.0 {
            let mut o = outcome;
            for bit in 0..n {
                if rng.gen::<f64>() < p_ro {
                    o ^= 1 << bit;
                }
            }
            o
        } else {
            outcome
        };
        *counts.entry(outcome).or_insert(0) += 1;
    }
    Ok(OutcomeDistribution::from_counts(n, &counts, shots as u64))
}

/// Dispatches to the exact or shot-sampled backend.
pub fn simulate_with_mode<T: Real>(
    circuit: &QuantumCircuit,
    boundary: &CutBoundarySpec,
    mode: &ExecMode<T>,
    opts: &SimOptions,
) -> Result<OutcomeDistribution<T>, SimError> {
    match mode {
        ExecMode::Exact => simulate_ideal(circuit, boundary, opts),
        ExecMode::Shots { shots, noise } => {
            simulate_noisy(circuit, noise, *shots, boundary, opts)
        }
    }
}

/// Joint distribution over (ordinary output bits, cut-wire bits) for an
/// upstream fragment whose cut wires are measured in the bases given by
/// `boundary`. Requires at least one basis-measured wire.
pub fn expectation_terms<T: Real>(
    circuit: &QuantumCircuit,
    boundary: &CutBoundarySpec,
    mode: &ExecMode<T>,
    opts: &SimOptions,
) -> Result<SplitDistribution<T>, SimError> {
    if boundary.measure_bases.is_empty() {
        return Err(SimError::EmptyBoundary);
    }
    let joint = simulate_with_mode(circuit, boundary, mode, opts)?;
    let cut_wires: Vec<usize> = boundary.measure_bases.keys().copied().collect();
    Ok(SplitDistribution::from_joint(&joint, &cut_wires))
}
