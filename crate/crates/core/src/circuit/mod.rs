//! Circuit intermediate representation: a register of qubit wires and an
//! ordered gate list. Gate order defines temporal order on each wire; the
//! dependency DAG implied by shared wires is what the cutter bisects.

mod cutpoints;
mod features;
mod qasm;

pub use cutpoints::{enumerate_wire_cut_positions, WireCutPoint};
pub use features::{extract_features, FeatureVector, FEATURE_COLUMN_NAMES, FEATURE_LEN};
pub use qasm::{emit_qasm, parse_qasm, ParseError};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Errors from constructing or validating circuits.
#[derive(Debug, thiserror::Error)]
pub enum CircuitError {
    #[error("gate {kind:?} expects {expected} qubit(s), got {got}")]
    WrongArity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("gate {kind:?} expects {expected} parameter(s), got {got}")]
    WrongParamCount {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("gate {kind:?} repeats qubit {qubit}")]
    RepeatedQubit { kind: GateKind, qubit: usize },
    #[error("qubit index {qubit} out of range for {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("gate parameter is not finite")]
    NonFiniteParam,
}

/// The gate vocabulary. The first seventeen kinds form the feature schema in
/// fixed column order; `Measure` and `Barrier` are structural pseudo-ops that
/// never count toward features or depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    Cnot,
    X,
    Y,
    Z,
    Rx,
    Ry,
    Rz,
    Cz,
    Cp,
    T,
    Toffoli,
    Swap,
    Tdg,
    S,
    Sdg,
    U3,
    Measure,
    Barrier,
}

/// Feature-schema gate kinds in canonical column order.
pub const FEATURE_KINDS: [GateKind; 17] = [
    GateKind::H,
    GateKind::Cnot,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::Cz,
    GateKind::Cp,
    GateKind::T,
    GateKind::Toffoli,
    GateKind::Swap,
    GateKind::Tdg,
    GateKind::S,
    GateKind::Sdg,
    GateKind::U3,
];

impl GateKind {
    /// Number of qubit operands, or `None` for variadic (`Barrier`).
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Cp | GateKind::Swap => Some(2),
            GateKind::Toffoli => Some(3),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    /// Number of angle parameters.
    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cp => 1,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    /// Column index in the feature schema, or `None` for pseudo-ops.
    pub fn feature_index(self) -> Option<usize> {
        FEATURE_KINDS.iter().position(|&k| k == self)
    }

    /// True for `Measure`/`Barrier`, which carry no unitary action.
    pub fn is_pseudo(self) -> bool {
        matches!(self, GateKind::Measure | GateKind::Barrier)
    }

    /// Lower-case OpenQASM 2.0 mnemonic.
    pub fn qasm_name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::Cnot => "cx",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cz => "cz",
            GateKind::Cp => "cp",
            GateKind::T => "t",
            GateKind::Toffoli => "ccx",
            GateKind::Swap => "swap",
            GateKind::Tdg => "tdg",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::U3 => "u3",
            GateKind::Measure => "measure",
            GateKind::Barrier => "barrier",
        }
    }
}

/// One gate application: kind, operand wires, and angle parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl Gate {
    /// Builds a gate, validating arity, parameter count, and operand
    /// distinctness. Qubit range is checked when the gate joins a circuit.
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Self, CircuitError> {
        if let Some(expected) = kind.arity() {
            if qubits.len() != expected {
                return Err(CircuitError::WrongArity {
                    kind,
                    expected,
                    got: qubits.len(),
                });
            }
        } else if qubits.is_empty() {
            return Err(CircuitError::WrongArity {
                kind,
                expected: 1,
                got: 0,
            });
        }
        if params.len() != kind.param_count() {
            return Err(CircuitError::WrongParamCount {
                kind,
                expected: kind.param_count(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(CircuitError::NonFiniteParam);
        }
        for (i, &q) in qubits.iter().enumerate() {
            if qubits[..i].contains(&q) {
                return Err(CircuitError::RepeatedQubit { kind, qubit: q });
            }
        }
        Ok(Gate {
            kind,
            qubits,
            params,
        })
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q], vec![]).unwrap()
    }

    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q], vec![]).unwrap()
    }

    pub fn y(q: usize) -> Self {
        Gate::new(GateKind::Y, vec![q], vec![]).unwrap()
    }

    pub fn z(q: usize) -> Self {
        Gate::new(GateKind::Z, vec![q], vec![]).unwrap()
    }

    pub fn s(q: usize) -> Self {
        Gate::new(GateKind::S, vec![q], vec![]).unwrap()
    }

    pub fn sdg(q: usize) -> Self {
        Gate::new(GateKind::Sdg, vec![q], vec![]).unwrap()
    }

    pub fn t(q: usize) -> Self {
        Gate::new(GateKind::T, vec![q], vec![]).unwrap()
    }

    pub fn tdg(q: usize) -> Self {
        Gate::new(GateKind::Tdg, vec![q], vec![]).unwrap()
    }

    pub fn rx(q: usize, theta: f64) -> Self {
        Gate::new(GateKind::Rx, vec![q], vec![theta]).unwrap()
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Gate::new(GateKind::Ry, vec![q], vec![theta]).unwrap()
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Gate::new(GateKind::Rz, vec![q], vec![theta]).unwrap()
    }

    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::new(GateKind::U3, vec![q], vec![theta, phi, lambda]).unwrap()
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![control, target], vec![]).unwrap()
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Cz, vec![a, b], vec![]).unwrap()
    }

    pub fn cp(a: usize, b: usize, lambda: f64) -> Self {
        Gate::new(GateKind::Cp, vec![a, b], vec![lambda]).unwrap()
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, vec![a, b], vec![]).unwrap()
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Gate::new(GateKind::Toffoli, vec![c1, c2, target], vec![]).unwrap()
    }

    pub fn measure(q: usize) -> Self {
        Gate::new(GateKind::Measure, vec![q], vec![]).unwrap()
    }

    pub fn barrier(qubits: Vec<usize>) -> Self {
        Gate::new(GateKind::Barrier, qubits, vec![]).unwrap()
    }
}

/// A quantum circuit: `n_qubits` wires and an ordered gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    /// Optional label carried through fragmentation for reports.
    pub name: Option<String>,
}

impl QuantumCircuit {
    /// Creates an empty circuit on `n_qubits` wires (must be at least 1).
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "circuit needs at least one qubit");
        QuantumCircuit {
            n_qubits,
            gates: Vec::new(),
            name: None,
        }
    }

    /// Builds a circuit from a gate list, validating every gate.
    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = QuantumCircuit::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    /// Appends a gate, checking its wires fit the register.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        for &q in &gate.qubits {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of unitary (non-pseudo) gates.
    pub fn unitary_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.kind.is_pseudo()).count()
    }

    /// Wires touched by at least one unitary gate.
    pub fn touched_wires(&self) -> BTreeSet<usize> {
        self.gates
            .iter()
            .filter(|g| !g.kind.is_pseudo())
            .flat_map(|g| g.qubits.iter().copied())
            .collect()
    }

    /// Circuit depth: the longest path in the gate dependency DAG, where two
    /// gates depend on each other when they share a wire. Pseudo-ops are
    /// excluded. `[H(0), CNOT(0,1), X(1)]` has depth 3.
    pub fn depth(&self) -> usize {
        let mut wire_depth = vec![0usize; self.n_qubits];
        let mut max = 0;
        for g in self.gates.iter().filter(|g| !g.kind.is_pseudo()) {
            let level = 1 + g.qubits.iter().map(|&q| wire_depth[q]).max().unwrap_or(0);
            for &q in &g.qubits {
                wire_depth[q] = level;
            }
            max = max.max(level);
        }
        max
    }

    /// Copy with all `Measure`/`Barrier` pseudo-ops removed.
    pub fn strip_pseudo(&self) -> QuantumCircuit {
        QuantumCircuit {
            n_qubits: self.n_qubits,
            gates: self
                .gates
                .iter()
                .filter(|g| !g.kind.is_pseudo())
                .cloned()
                .collect(),
            name: self.name.clone(),
        }
    }

    /// Concatenation: `self`'s gates followed by `other`'s, on a register wide
    /// enough for both.
    pub fn concat(&self, other: &QuantumCircuit) -> QuantumCircuit {
        let mut c = QuantumCircuit::new(self.n_qubits.max(other.n_qubits));
        c.gates = self.gates.iter().chain(other.gates.iter()).cloned().collect();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_validation_rejects_bad_shapes() {
        assert!(matches!(
            Gate::new(GateKind::Cnot, vec![0], vec![]),
            Err(CircuitError::WrongArity { .. })
        ));
        assert!(matches!(
            Gate::new(GateKind::H, vec![0], vec![1.0]),
            Err(CircuitError::WrongParamCount { .. })
        ));
        assert!(matches!(
            Gate::new(GateKind::Cnot, vec![1, 1], vec![]),
            Err(CircuitError::RepeatedQubit { .. })
        ));
        assert!(matches!(
            Gate::new(GateKind::Rx, vec![0], vec![f64::NAN]),
            Err(CircuitError::NonFiniteParam)
        ));
    }

    #[test]
    fn push_checks_wire_range() {
        let mut c = QuantumCircuit::new(2);
        assert!(c.push(Gate::h(0)).is_ok());
        assert!(matches!(
            c.push(Gate::h(2)),
            Err(CircuitError::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn depth_is_longest_dependency_path() {
        let c = QuantumCircuit::from_gates(2, vec![Gate::h(0), Gate::cnot(0, 1), Gate::x(1)])
            .unwrap();
        assert_eq!(c.depth(), 3);
    }

    #[test]
    fn depth_counts_parallel_gates_once() {
        let c = QuantumCircuit::from_gates(2, vec![Gate::h(0), Gate::h(1)]).unwrap();
        assert_eq!(c.depth(), 1);
    }

    #[test]
    fn depth_ignores_measures_and_barriers() {
        let c = QuantumCircuit::from_gates(
            2,
            vec![
                Gate::h(0),
                Gate::barrier(vec![0, 1]),
                Gate::cnot(0, 1),
                Gate::measure(0),
                Gate::measure(1),
            ],
        )
        .unwrap();
        assert_eq!(c.depth(), 2);
    }

    #[test]
    fn empty_circuit_has_depth_zero() {
        assert_eq!(QuantumCircuit::new(3).depth(), 0);
    }

    #[test]
    fn concat_depth_is_subadditive_and_tight_on_shared_wires() {
        let a = QuantumCircuit::from_gates(1, vec![Gate::h(0), Gate::x(0)]).unwrap();
        let b = QuantumCircuit::from_gates(1, vec![Gate::z(0)]).unwrap();
        let ab = a.concat(&b);
        assert_eq!(ab.depth(), a.depth() + b.depth());

        // Disjoint wire sets: concatenation runs in parallel, strictly shorter.
        let c = QuantumCircuit::from_gates(2, vec![Gate::h(0)]).unwrap();
        let d = QuantumCircuit::from_gates(2, vec![Gate::h(1)]).unwrap();
        assert!(c.concat(&d).depth() <= c.depth() + d.depth());
        assert_eq!(c.concat(&d).depth(), 1);
    }

    #[test]
    fn strip_pseudo_keeps_unitary_gates_in_order() {
        let c = QuantumCircuit::from_gates(
            2,
            vec![Gate::h(0), Gate::measure(0), Gate::cnot(0, 1)],
        )
        .unwrap();
        let s = c.strip_pseudo();
        assert_eq!(s.gates().len(), 2);
        assert_eq!(s.gates()[0].kind, GateKind::H);
        assert_eq!(s.gates()[1].kind, GateKind::Cnot);
    }
}
