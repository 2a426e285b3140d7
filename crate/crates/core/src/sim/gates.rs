//! Unitary matrices for every gate kind, used by the generic application path
//! and the unitarity checks.

use num_complex::Complex;

use crate::circuit::GateKind;
use crate::real::{real, Real};

/// Dense unitary for a gate, sized by its arity.
#[derive(Debug, Clone)]
pub enum GateMatrix<T: Real> {
    One([[Complex<T>; 2]; 2]),
    Two([[Complex<T>; 4]; 4]),
    Three(Box<[[Complex<T>; 8]; 8]>),
}

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(real(re), real(im))
}

/// The unitary for `kind` with the given parameters, or `None` for pseudo-ops.
///
/// Multi-qubit matrices are written in the basis where the first listed
/// operand is the most significant local bit, e.g. CNOT rows/columns run
/// |control target⟩ = |00⟩, |01⟩, |10⟩, |11⟩.
pub fn matrix_of<T: Real>(kind: GateKind, params: &[f64]) -> Option<GateMatrix<T>> {
    let m = match kind {
        GateKind::Measure | GateKind::Barrier => return None,
        GateKind::H => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            GateMatrix::One([[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])
        }
        GateKind::X => GateMatrix::One([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]),
        GateKind::Y => GateMatrix::One([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]),
        GateKind::Z => GateMatrix::One([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]),
        GateKind::S => GateMatrix::One([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]),
        GateKind::Sdg => {
            GateMatrix::One([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]])
        }
        GateKind::T => {
            let a = std::f64::consts::FRAC_PI_4;
            GateMatrix::One([
                [c(1.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(a.cos(), a.sin())],
            ])
        }
        GateKind::Tdg => {
            let a = std::f64::consts::FRAC_PI_4;
            GateMatrix::One([
                [c(1.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(a.cos(), -a.sin())],
            ])
        }
        GateKind::Rx => {
            let h = params[0] / 2.0;
            GateMatrix::One([
                [c(h.cos(), 0.0), c(0.0, -h.sin())],
                [c(0.0, -h.sin()), c(h.cos(), 0.0)],
            ])
        }
        GateKind::Ry => {
            let h = params[0] / 2.0;
            GateMatrix::One([
                [c(h.cos(), 0.0), c(-h.sin(), 0.0)],
                [c(h.sin(), 0.0), c(h.cos(), 0.0)],
            ])
        }
        GateKind::Rz => {
            let h = params[0] / 2.0;
            GateMatrix::One([
                [c(h.cos(), -h.sin()), c(0.0, 0.0)],
                [c(0.0, 0.0), c(h.cos(), h.sin())],
            ])
        }
        GateKind::U3 => {
            let (t2, phi, lam) = (params[0] / 2.0, params[1], params[2]);
            GateMatrix::One([
                [
                    c(t2.cos(), 0.0),
                    c(-lam.cos() * t2.sin(), -lam.sin() * t2.sin()),
                ],
                [
                    c(phi.cos() * t2.sin(), phi.sin() * t2.sin()),
                    c(
                        (phi + lam).cos() * t2.cos(),
                        (phi + lam).sin() * t2.cos(),
                    ),
                ],
            ])
        }
        GateKind::Cnot => {
            let mut m = zeros4();
            m[0][0] = c(1.0, 0.0);
            m[1][1] = c(1.0, 0.0);
            m[2][3] = c(1.0, 0.0);
            m[3][2] = c(1.0, 0.0);
            GateMatrix::Two(m)
        }
        GateKind::Cz => {
            let mut m = zeros4();
            for (i, item) in m.iter_mut().enumerate() {
                item[i] = if i == 3 { c(-1.0, 0.0) } else { c(1.0, 0.0) };
            }
            GateMatrix::Two(m)
        }
        GateKind::Cp => {
            let lam = params[0];
            let mut m = zeros4();
            m[0][0] = c(1.0, 0.0);
            m[1][1] = c(1.0, 0.0);
            m[2][2] = c(1.0, 0.0);
            m[3][3] = c(lam.cos(), lam.sin());
            GateMatrix::Two(m)
        }
        GateKind::Swap => {
            let mut m = zeros4();
            m[0][0] = c(1.0, 0.0);
            m[1][2] = c(1.0, 0.0);
            m[2][1] = c(1.0, 0.0);
            m[3][3] = c(1.0, 0.0);
            GateMatrix::Two(m)
        }
        GateKind::Toffoli => {
            let zero: Complex<T> = Complex::new(T::zero(), T::zero());
            let mut m = Box::new([[zero; 8]; 8]);
            for i in 0..6 {
                m[i][i] = c(1.0, 0.0);
            }
            m[6][7] = c(1.0, 0.0);
            m[7][6] = c(1.0, 0.0);
            GateMatrix::Three(m)
        }
    };
    Some(m)
}

fn zeros4<T: Real>() -> [[Complex<T>; 4]; 4] {
    [[Complex::new(T::zero(), T::zero()); 4]; 4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::FEATURE_KINDS;

    fn rows<T: Real>(m: &GateMatrix<T>) -> Vec<Vec<Complex<T>>> {
        match m {
            GateMatrix::One(m) => m.iter().map(|r| r.to_vec()).collect(),
            GateMatrix::Two(m) => m.iter().map(|r| r.to_vec()).collect(),
            GateMatrix::Three(m) => m.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn every_gate_matrix_is_unitary() {
        for kind in FEATURE_KINDS {
            let params: Vec<f64> = [0.7, -1.3, 2.1][..kind.param_count()].to_vec();
            let m = rows(&matrix_of::<f64>(kind, &params).unwrap());
            let n = m.len();
            for i in 0..n {
                for j in 0..n {
                    // (U U†)[i][j] = Σ_k U[i][k] conj(U[j][k])
                    let mut acc = Complex::new(0.0, 0.0);
                    for k in 0..n {
                        acc += m[i][k] * m[j][k].conj();
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (acc.re - expect).abs() < 1e-12 && acc.im.abs() < 1e-12,
                        "{kind:?} not unitary at ({i},{j}): {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn pseudo_ops_have_no_matrix() {
        assert!(matrix_of::<f64>(GateKind::Measure, &[]).is_none());
        assert!(matrix_of::<f64>(GateKind::Barrier, &[]).is_none());
    }
}
