//! Seeded random-circuit generators for building benchmark corpora and
//! training datasets.
//!
//! Two flavors: [`random_circuit`] draws gates uniformly from the full
//! supported palette with no structural guarantees, while
//! [`random_cuttable_circuit`] builds the circuit as two internally
//! connected gate groups joined through one or two bridge wires, so a valid
//! wire cut of size ≤ 2 is guaranteed to exist (and is returned alongside
//! the circuit).

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Gate, QuantumCircuit, WireCutPoint};
use crate::sim::mix_seed;

fn angle<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.1..TAU)
}

fn pick_distinct<R: Rng>(wires: &[usize], exclude: &[usize], rng: &mut R) -> usize {
    loop {
        let w = *wires.choose(rng).expect("non-empty wire set");
        if !exclude.contains(&w) {
            return w;
        }
    }
}

fn one_wire_gate<R: Rng>(q: usize, rng: &mut R) -> Gate {
    match rng.gen_range(0..12u8) {
        0 => Gate::h(q),
        1 => Gate::x(q),
        2 => Gate::y(q),
        3 => Gate::z(q),
        4 => Gate::s(q),
        5 => Gate::sdg(q),
        6 => Gate::t(q),
        7 => Gate::tdg(q),
        8 => Gate::rx(q, angle(rng)),
        9 => Gate::ry(q, angle(rng)),
        10 => Gate::rz(q, angle(rng)),
        _ => Gate::u3(q, angle(rng), angle(rng), angle(rng)),
    }
}

fn two_wire_gate<R: Rng>(a: usize, b: usize, rng: &mut R) -> Gate {
    let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    match rng.gen_range(0..8u8) {
        0..=3 => Gate::cnot(a, b),
        4 | 5 => Gate::cz(a, b),
        6 => Gate::cp(a, b, angle(rng)),
        _ => Gate::swap(a, b),
    }
}

/// One random gate over `wires`. When `pivot` is given the gate is
/// guaranteed to touch that wire, which is how the cuttable construction
/// keeps each gate group connected.
fn random_gate<R: Rng>(wires: &[usize], pivot: Option<usize>, rng: &mut R) -> Gate {
    let q0 = pivot.unwrap_or_else(|| *wires.choose(rng).expect("non-empty wire set"));
    let class = rng.gen_range(0..100u8);
    if wires.len() >= 3 && class >= 94 {
        let q1 = pick_distinct(wires, &[q0], rng);
        let q2 = pick_distinct(wires, &[q0, q1], rng);
        Gate::toffoli(q0, q1, q2)
    } else if wires.len() >= 2 && class >= 55 {
        two_wire_gate(q0, pick_distinct(wires, &[q0], rng), rng)
    } else {
        one_wire_gate(q0, rng)
    }
}

/// Uniform random circuit over the full gate palette (unitary gates only).
pub fn random_circuit<R: Rng>(n_qubits: usize, n_gates: usize, rng: &mut R) -> QuantumCircuit {
    assert!(n_qubits >= 1, "a circuit needs at least one wire");
    let wires: Vec<usize> = (0..n_qubits).collect();
    let gates = (0..n_gates).map(|_| random_gate(&wires, None, rng)).collect();
    QuantumCircuit::from_gates(n_qubits, gates).expect("generated wires are in range")
}

/// Emits `budget` gates confined to `phase_wires`, every gate sharing a wire
/// with an earlier one (so the group is weakly connected) and every bridge
/// wire touched at least once.
fn build_phase<R: Rng>(
    gates: &mut Vec<Gate>,
    phase_wires: &[usize],
    bridges: &[usize],
    budget: usize,
    rng: &mut R,
) {
    assert!(budget >= bridges.len());
    let mut touched: Vec<usize> = Vec::new();
    let mut pending: Vec<usize> = bridges.to_vec();
    for _ in 0..budget {
        let gate = if let Some(&beta) = pending.first() {
            if touched.is_empty() {
                // Anchor the group on the first bridge wire.
                random_gate(phase_wires, Some(beta), rng)
            } else {
                // Join the still-untouched bridge to the group.
                let pivot = *touched.choose(rng).expect("non-empty");
                two_wire_gate(pivot, beta, rng)
            }
        } else {
            let pivot = *touched.choose(rng).expect("non-empty");
            random_gate(phase_wires, Some(pivot), rng)
        };
        for &q in &gate.qubits {
            if !touched.contains(&q) {
                touched.push(q);
            }
        }
        pending.retain(|q| !touched.contains(q));
        gates.push(gate);
    }
    assert!(pending.is_empty(), "budget covers every bridge wire");
}

/// Random circuit guaranteed to admit a valid wire cut of size ≤ 2.
///
/// Construction: wires are partitioned into an upstream-only set, a
/// downstream-only set, and one or two bridge wires. An upstream gate group
/// is emitted over upstream ∪ bridge wires, then a downstream group over
/// downstream ∪ bridge wires; each group is kept weakly connected and
/// touches every bridge wire, so severing each bridge wire between the two
/// groups splits the circuit into exactly two components. The returned cut
/// points mark those positions.
///
/// Requires `n_qubits ≥ 2` and `n_gates ≥ 4` (≥ 8 gates before a two-wire
/// bridge is attempted).
pub fn random_cuttable_circuit<R: Rng>(
    n_qubits: usize,
    n_gates: usize,
    rng: &mut R,
) -> (QuantumCircuit, Vec<WireCutPoint>) {
    assert!(n_qubits >= 2, "a cuttable circuit needs at least two wires");
    assert!(n_gates >= 4, "a cuttable circuit needs at least four gates");
    let b = if n_qubits >= 3 && n_gates >= 8 && rng.gen_bool(0.35) {
        2
    } else {
        1
    };

    let mut perm: Vec<usize> = (0..n_qubits).collect();
    perm.shuffle(rng);
    let mut bridges = perm[..b].to_vec();
    bridges.sort_unstable();
    let rest = &perm[b..];
    let upstream_only = rng.gen_range(0..=rest.len());

    let mut up_wires = bridges.clone();
    up_wires.extend(&rest[..upstream_only]);
    up_wires.sort_unstable();
    let mut down_wires = bridges.clone();
    down_wires.extend(&rest[upstream_only..]);
    down_wires.sort_unstable();

    // Split the gate budget roughly in half, keeping room on both sides to
    // touch every bridge wire.
    let lo = b.max(n_gates / 4);
    let hi = (n_gates - b).min(3 * n_gates / 4);
    let g1 = if lo <= hi {
        rng.gen_range(lo..=hi)
    } else {
        rng.gen_range(b..=n_gates - b)
    };

    let mut gates = Vec::with_capacity(n_gates);
    build_phase(&mut gates, &up_wires, &bridges, g1, rng);
    build_phase(&mut gates, &down_wires, &bridges, n_gates - g1, rng);

    let points = bridges
        .iter()
        .map(|&beta| {
            let pos = (0..g1)
                .rev()
                .find(|&i| gates[i].qubits.contains(&beta))
                .expect("the upstream group touches every bridge wire");
            WireCutPoint::interior(beta, pos)
        })
        .collect();
    let circuit =
        QuantumCircuit::from_gates(n_qubits, gates).expect("generated wires are in range");
    (circuit, points)
}

/// Per-circuit RNG so corpora are stable under reordering or extension.
fn circuit_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, index as u64))
}

/// Deterministic corpus of named random circuits; sizes are drawn per
/// circuit from the given ranges.
pub fn random_corpus(
    count: usize,
    qubits: RangeInclusive<usize>,
    gates: RangeInclusive<usize>,
    seed: u64,
) -> Vec<QuantumCircuit> {
    (0..count)
        .map(|i| {
            let mut rng = circuit_rng(seed, i);
            let n = rng.gen_range(qubits.clone());
            let g = rng.gen_range(gates.clone());
            let mut c = random_circuit(n, g, &mut rng);
            c.name = Some(format!("synth-{i:03}"));
            c
        })
        .collect()
}

/// Deterministic corpus of named circuits that each carry a declared valid
/// cut of size ≤ 2.
pub fn random_cuttable_corpus(
    count: usize,
    qubits: RangeInclusive<usize>,
    gates: RangeInclusive<usize>,
    seed: u64,
) -> Vec<(QuantumCircuit, Vec<WireCutPoint>)> {
    (0..count)
        .map(|i| {
            let mut rng = circuit_rng(seed, i);
            let n = rng.gen_range(qubits.clone());
            let g = rng.gen_range(gates.clone());
            let (mut c, points) = random_cuttable_circuit(n, g, &mut rng);
            c.name = Some(format!("cut-{i:03}"));
            (c, points)
        })
        .collect()
}
