//! Dense state-vector backend. Basis index bit `q` is the value of wire `q`,
//! so wire 0 is the least significant bit of an outcome key.

use num_complex::Complex;
use rand::Rng;

use super::gates::{matrix_of, GateMatrix};
use crate::circuit::{Gate, GateKind};
use crate::real::{real, Real};

/// Pauli error kinds injected by the noise channel.
#[derive(Debug, Clone, Copy)]
pub enum Pauli {
    X,
    Y,
    Z,
}

pub struct StateVector<T: Real> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// The all-zeros computational basis state.
    pub fn new(n_qubits: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Applies one gate. Pseudo-ops are no-ops.
    pub fn apply(&mut self, gate: &Gate) {
        match gate.kind {
            GateKind::Measure | GateKind::Barrier => {}
            GateKind::Cnot => self.apply_controlled_x(&[gate.qubits[0]], gate.qubits[1]),
            GateKind::Toffoli => {
                self.apply_controlled_x(&[gate.qubits[0], gate.qubits[1]], gate.qubits[2])
            }
            GateKind::Cz => self.apply_phase_if_all_ones(&gate.qubits, Complex::new(-T::one(), T::zero())),
            GateKind::Cp => {
                let lam = gate.params[0];
                let phase = Complex::new(real(lam.cos()), real(lam.sin()));
                self.apply_phase_if_all_ones(&gate.qubits, phase);
            }
            GateKind::Swap => self.apply_swap(gate.qubits[0], gate.qubits[1]),
            kind => match matrix_of::<T>(kind, &gate.params) {
                Some(GateMatrix::One(m)) => self.apply_1q(gate.qubits[0], &m),
                _ => unreachable!("single-qubit kind {kind:?} must have a 2x2 matrix"),
            },
        }
    }

    pub fn apply_1q(&mut self, q: usize, m: &[[Complex<T>; 2]; 2]) {
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// X on `target` wherever all `controls` bits are 1.
    fn apply_controlled_x(&mut self, controls: &[usize], target: usize) {
        let cmask: usize = controls.iter().map(|&c| 1usize << c).sum();
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask == cmask && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
    }

    fn apply_phase_if_all_ones(&mut self, qubits: &[usize], phase: Complex<T>) {
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        for i in 0..self.amps.len() {
            if i & mask == mask {
                self.amps[i] = self.amps[i] * phase;
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (ma, mb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            // Swap amplitudes between ...a=1,b=0... and ...a=0,b=1...
            if i & ma == ma && i & mb == 0 {
                self.amps.swap(i, (i & !ma) | mb);
            }
        }
    }

    /// Generic dense application of a gate matrix; slower than `apply` but
    /// shape-agnostic. Used to cross-check the specialised paths.
    pub fn apply_matrix(&mut self, qubits: &[usize], m: &GateMatrix<T>) {
        let k = qubits.len();
        let dim = 1usize << k;
        // Local index convention: first listed qubit is the most significant
        // local bit, matching the textbook matrix layouts in `gates`.
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                (0..k)
                    .filter(|j| (local >> (k - 1 - j)) & 1 == 1)
                    .map(|j| 1usize << qubits[j])
                    .sum()
            })
            .collect();
        let gate_mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); dim];
        for base in 0..self.amps.len() {
            if base & gate_mask != 0 {
                continue;
            }
            for (l, &off) in offsets.iter().enumerate() {
                scratch[l] = self.amps[base | off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (l, s) in scratch.iter().enumerate() {
                    let coeff = match m {
                        GateMatrix::One(m) => m[r][l],
                        GateMatrix::Two(m) => m[r][l],
                        GateMatrix::Three(m) => m[r][l],
                    };
                    acc += coeff * *s;
                }
                self.amps[base | off] = acc;
            }
        }
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        let gate = match p {
            Pauli::X => Gate::x(q),
            Pauli::Y => Gate::y(q),
            Pauli::Z => Gate::z(q),
        };
        self.apply(&gate);
    }

    /// |amplitude|² for every basis state.
    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws one outcome from the Born distribution.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0f64;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr().to_f64().unwrap_or(0.0);
            if u < acc {
                return i as u64;
            }
        }
        (self.amps.len() - 1) as u64
    }
}
