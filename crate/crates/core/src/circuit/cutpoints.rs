//! Enumeration of the places a wire can be severed in time.

use serde::{Deserialize, Serialize};

use super::QuantumCircuit;

/// A point where a wire is severed.
///
/// `position` indexes the unitary-only gate sequence. A non-negative value
/// cuts wire `qubit` immediately after the gate at that index acts on it (an
/// *interior* point, requiring a later gate on the same wire). The sentinel
/// `-1` addresses the segment before any gate on the wire — the fresh |0⟩
/// input — and is used to peel an already-disconnected gate group into its
/// own fragment rather than to sever live entanglement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WireCutPoint {
    pub qubit: usize,
    pub position: i64,
}

impl WireCutPoint {
    /// Interior point: cut wire `qubit` just after the unitary gate at `position`.
    pub fn interior(qubit: usize, position: usize) -> Self {
        WireCutPoint { qubit, position: position as i64 }
    }

    /// Pristine point: cut wire `qubit` before its first gate (position −1).
    pub fn pristine(qubit: usize) -> Self {
        WireCutPoint { qubit, position: -1 }
    }

    /// True when this point addresses the wire segment before any gate.
    pub fn is_pristine(&self) -> bool {
        self.position < 0
    }

    /// The unitary-gate index for an interior point, `None` for a pristine one.
    pub fn gate_position(&self) -> Option<usize> {
        usize::try_from(self.position).ok()
    }
}

/// Lists every interior cut point of the circuit: pairs `(q, g)` such that
/// unitary gate `g` acts on wire `q` and at least one later unitary gate also
/// acts on `q`. Pseudo-ops are invisible here; positions index the
/// unitary-only gate sequence. Results are sorted by `(qubit, position)`.
///
/// Pristine (−1) points are not listed: they never sever live entanglement,
/// so candidate builders add them separately where a disconnected gate group
/// makes one meaningful.
pub fn enumerate_wire_cut_positions(circuit: &QuantumCircuit) -> Vec<WireCutPoint> {
    let unitary: Vec<_> = circuit
        .gates()
        .iter()
        .filter(|g| !g.kind.is_pseudo())
        .collect();
    let mut points = Vec::new();
    for q in 0..circuit.n_qubits() {
        let on_wire: Vec<usize> = unitary
            .iter()
            .enumerate()
            .filter(|(_, g)| g.qubits.contains(&q))
            .map(|(i, _)| i)
            .collect();
        // Every gate on the wire except the last has a successor, hence an
        // interior cut immediately after it.
        for &g in on_wire.iter().take(on_wire.len().saturating_sub(1)) {
            points.push(WireCutPoint::interior(q, g));
        }
    }
    points
}
