//! Feature extraction: the fixed-width numeric summary of a circuit that the
//! regression models consume.

use serde::{Deserialize, Serialize};

use super::{QuantumCircuit, FEATURE_KINDS};
use crate::real::{real, Real};

/// Total feature count: qubit count, depth, and seventeen gate counts.
pub const FEATURE_LEN: usize = 19;

/// Column names in canonical order, matching the dataset CSV schema.
pub const FEATURE_COLUMN_NAMES: [&str; FEATURE_LEN] = [
    "n_qubits", "depth", "h", "cnot", "x", "y", "z", "rx", "ry", "rz", "cz", "cp", "t",
    "toffoli", "swap", "tdg", "s", "sdg", "u3",
];

/// Fixed-order feature vector for one circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    pub n_qubits: usize,
    pub depth: usize,
    /// Gate counts in `FEATURE_KINDS` column order.
    pub gate_counts: [usize; 17],
}

impl FeatureVector {
    /// Flattens to numeric form: `[n_qubits, depth, counts...]`.
    pub fn to_floats<T: Real>(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(FEATURE_LEN);
        v.push(real(self.n_qubits as f64));
        v.push(real(self.depth as f64));
        v.extend(self.gate_counts.iter().map(|&c| real::<T>(c as f64)));
        v
    }

    /// One CSV row (no label column, no trailing newline).
    pub fn to_csv_row(&self) -> String {
        let mut fields = vec![self.n_qubits.to_string(), self.depth.to_string()];
        fields.extend(self.gate_counts.iter().map(|c| c.to_string()));
        fields.join(",")
    }
}

/// Counts gates per schema column and computes depth. Pseudo-ops contribute
/// to neither.
pub fn extract_features(circuit: &QuantumCircuit) -> FeatureVector {
    let mut gate_counts = [0usize; 17];
    for g in circuit.gates() {
        if let Some(i) = g.kind.feature_index() {
            gate_counts[i] += 1;
        }
    }
    debug_assert_eq!(FEATURE_KINDS.len(), gate_counts.len());
    FeatureVector {
        n_qubits: circuit.n_qubits(),
        depth: circuit.depth(),
        gate_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn counts_land_in_fixed_columns() {
        let c = QuantumCircuit::from_gates(
            3,
            vec![
                Gate::h(0),
                Gate::h(1),
                Gate::cnot(0, 1),
                Gate::toffoli(0, 1, 2),
                Gate::rz(2, 0.5),
                Gate::measure(2),
            ],
        )
        .unwrap();
        let f = extract_features(&c);
        assert_eq!(f.n_qubits, 3);
        assert_eq!(f.gate_counts[0], 2); // h
        assert_eq!(f.gate_counts[1], 1); // cnot
        assert_eq!(f.gate_counts[7], 1); // rz
        assert_eq!(f.gate_counts[11], 1); // toffoli
        assert_eq!(f.gate_counts.iter().sum::<usize>(), 5); // measure excluded
    }

    #[test]
    fn column_count_is_total_gate_count_without_pseudo_ops() {
        let c = QuantumCircuit::from_gates(
            2,
            vec![Gate::h(0), Gate::barrier(vec![0, 1]), Gate::measure(0)],
        )
        .unwrap();
        let f = extract_features(&c);
        assert_eq!(
            f.gate_counts.iter().sum::<usize>(),
            c.unitary_gate_count()
        );
    }

    #[test]
    fn csv_row_matches_column_order() {
        let c = QuantumCircuit::from_gates(2, vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        let f = extract_features(&c);
        let row = f.to_csv_row();
        assert_eq!(row, "2,2,1,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0");
        assert_eq!(row.split(',').count(), FEATURE_LEN);
    }

    #[test]
    fn float_form_has_schema_width() {
        let c = QuantumCircuit::from_gates(1, vec![Gate::h(0)]).unwrap();
        let floats: Vec<f64> = extract_features(&c).to_floats();
        assert_eq!(floats.len(), FEATURE_LEN);
        assert_eq!(floats[0], 1.0);
    }
}
