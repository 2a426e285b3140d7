//! ε-insensitive support-vector regression with an RBF kernel, solved in the
//! dual by sequential minimal optimization (SMO).
//!
//! The dual is written over 2n box-constrained variables (one "above-tube"
//! and one "below-tube" multiplier per training point) tied by a single
//! equality constraint. Each step picks the maximal violating pair, solves
//! the two-variable subproblem in closed form, and updates the gradient;
//! convergence is declared when the worst KKT violation falls below the
//! tolerance. Features are standardized before the kernel is evaluated, and
//! the standardization is stored in the model for inference.

use crate::real::{real, Real};

use super::dataset::{to_xy, DatasetRow};
use super::linear::standardize_stats;
use super::LearnError;

/// Hyperparameters for [`fit_svr`].
#[derive(Debug, Clone, PartialEq)]
pub struct SvrParams<T> {
    /// Penalty on tube violations (box bound on the dual variables).
    pub c: T,
    /// RBF kernel width: K(a, b) = exp(−γ‖a − b‖²).
    pub gamma: T,
    /// Half-width of the insensitive tube around the regression surface.
    pub epsilon: T,
    /// KKT stopping tolerance.
    pub tol: T,
    /// Hard cap on SMO iterations.
    pub max_iter: usize,
}

impl<T: Real> Default for SvrParams<T> {
    fn default() -> Self {
        SvrParams {
            c: T::one(),
            gamma: T::one(),
            epsilon: real(0.1),
            tol: real(1e-3),
            max_iter: 200_000,
        }
    }
}

/// Trained SVR model: standardization, the support vectors (standardized),
/// their signed dual coefficients, and the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel<T> {
    pub n_features: usize,
    pub c: T,
    pub gamma: T,
    pub epsilon: T,
    pub means: Vec<T>,
    pub scales: Vec<T>,
    pub support_vectors: Vec<Vec<T>>,
    /// α_i − α_i* per support vector; each magnitude is at most `c`.
    pub dual_coefs: Vec<T>,
    pub bias: T,
}

impl<T: Real> SvrModel<T> {
    pub fn predict(&self, features: &[T]) -> T {
        assert_eq!(features.len(), self.n_features, "feature length mismatch");
        let z: Vec<T> = features
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect();
        let mut acc = self.bias;
        for (sv, &coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            acc += coef * rbf_kernel(sv, &z, self.gamma);
        }
        acc
    }
}

/// Result of an SMO run: the model plus convergence diagnostics.
pub struct SvrFit<T> {
    pub model: SvrModel<T>,
    /// Whether the KKT gap closed below the tolerance within the iteration cap.
    pub converged: bool,
    /// Final maximal KKT violation (m − M).
    pub kkt_violation: T,
    /// SMO iterations performed.
    pub iterations: usize,
    /// Final dual objective ½·βᵀQβ + pᵀβ (the minimized form).
    pub dual_objective: T,
}

/// Gaussian radial basis kernel K(a, b) = exp(−γ‖a − b‖²).
pub fn rbf_kernel<T: Real>(a: &[T], b: &[T], gamma: T) -> T {
    let sq: T = a
        .iter()
        .zip(b)
        .map(|(&u, &v)| (u - v) * (u - v))
        .sum();
    (-gamma * sq).exp()
}

fn validate_params<T: Real>(params: &SvrParams<T>) -> Result<(), LearnError> {
    if !(params.c > T::zero()) || !params.c.is_finite() {
        return Err(LearnError::InvalidHyperparameter(
            "SVR penalty C must be finite and positive".into(),
        ));
    }
    if !(params.gamma > T::zero()) || !params.gamma.is_finite() {
        return Err(LearnError::InvalidHyperparameter(
            "RBF gamma must be finite and positive".into(),
        ));
    }
    if !(params.epsilon >= T::zero()) || !params.epsilon.is_finite() {
        return Err(LearnError::InvalidHyperparameter(
            "tube width epsilon must be finite and nonnegative".into(),
        ));
    }
    if !(params.tol > T::zero()) {
        return Err(LearnError::InvalidHyperparameter(
            "SMO tolerance must be positive".into(),
        ));
    }
    Ok(())
}

/// Fits SVR on raw feature rows (standardization handled internally).
pub(crate) fn fit_svr_raw<T: Real>(
    xs: &[Vec<T>],
    ys: &[T],
    params: &SvrParams<T>,
) -> Result<SvrFit<T>, LearnError> {
    if xs.len() < 2 {
        return Err(LearnError::TooFewRows {
            got: xs.len(),
            need: 2,
        });
    }
    validate_params(params)?;
    let n = xs.len();
    let n_features = xs[0].len();
    let (means, scales) = standardize_stats(xs);
    let zs: Vec<Vec<T>> = xs
        .iter()
        .map(|x| {
            x.iter()
                .zip(means.iter().zip(&scales))
                .map(|(&v, (&m, &s))| (v - m) / s)
                .collect()
        })
        .collect();

    // Precomputed Gram matrix over the standardized points.
    let mut kern = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let k = rbf_kernel(&zs[i], &zs[j], params.gamma);
            kern[i][j] = k;
            kern[j][i] = k;
        }
    }

    // Dual variables: β_t for t < n are the above-tube multipliers (sign +1),
    // t ≥ n the below-tube multipliers (sign −1). Linear term p and gradient
    // G = Qβ + p, with Q_tu = sign_t·sign_u·K(t mod n, u mod n).
    let l = 2 * n;
    let sign = |t: usize| if t < n { T::one() } else { -T::one() };
    let point = |t: usize| if t < n { t } else { t - n };
    let mut p = vec![T::zero(); l];
    for t in 0..l {
        p[t] = if t < n {
            params.epsilon - ys[t]
        } else {
            params.epsilon + ys[t - n]
        };
    }
    let mut beta = vec![T::zero(); l];
    let mut grad = p.clone();

    let c = params.c;
    let tau = real::<T>(1e-12);
    let mut iterations = 0;
    let mut violation = T::infinity();
    let mut converged = false;

    while iterations < params.max_iter {
        // Maximal violating pair over −sign_t·G_t.
        let mut i_up = None;
        let mut m_up = -T::infinity();
        let mut j_low = None;
        let mut m_low = T::infinity();
        for t in 0..l {
            let v = -sign(t) * grad[t];
            let at_upper = beta[t] >= c;
            let at_lower = beta[t] <= T::zero();
            let in_up = if t < n { !at_upper } else { !at_lower };
            let in_low = if t < n { !at_lower } else { !at_upper };
            if in_up && v > m_up {
                m_up = v;
                i_up = Some(t);
            }
            if in_low && v < m_low {
                m_low = v;
                j_low = Some(t);
            }
        }
        let (i, j) = match (i_up, j_low) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                violation = T::zero();
                converged = true;
                break;
            }
        };
        violation = m_up - m_low;
        if violation <= params.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (pi, pj) = (point(i), point(j));
        let k_ii = kern[pi][pi];
        let k_jj = kern[pj][pj];
        let k_ij = kern[pi][pj];
        let old_i = beta[i];
        let old_j = beta[j];

        if sign(i) != sign(j) {
            let mut quad = k_ii + k_jj + real::<T>(2.0) * k_ij;
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > T::zero() {
                if beta[j] < T::zero() {
                    beta[j] = T::zero();
                    beta[i] = diff;
                }
            } else if beta[i] < T::zero() {
                beta[i] = T::zero();
                beta[j] = -diff;
            }
            if diff > T::zero() {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let mut quad = k_ii + k_jj - real::<T>(2.0) * k_ij;
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < T::zero() {
                beta[j] = T::zero();
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < T::zero() {
                beta[i] = T::zero();
                beta[j] = sum;
            }
        }

        let di = beta[i] - old_i;
        let dj = beta[j] - old_j;
        if di == T::zero() && dj == T::zero() {
            // Numerically stuck pair; treat the remaining violation as final.
            break;
        }
        for t in 0..l {
            let pt = point(t);
            grad[t] += sign(t) * (sign(i) * kern[pt][pi] * di + sign(j) * kern[pt][pj] * dj);
        }
    }
    if violation <= params.tol {
        converged = true;
    }

    // Bias from the KKT conditions: average over free variables, midpoint of
    // the feasibility interval when none are free.
    let mut sum_free = T::zero();
    let mut n_free = 0usize;
    let mut upper = T::infinity();
    let mut lower = -T::infinity();
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if beta[t] >= c {
            if sign(t) < T::zero() {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if beta[t] <= T::zero() {
            if sign(t) > T::zero() {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            sum_free += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 {
        sum_free / real::<T>(n_free as f64)
    } else {
        (upper + lower) / real::<T>(2.0)
    };
    let bias = -rho;

    let dual_objective = real::<T>(0.5)
        * (0..l)
            .map(|t| beta[t] * (grad[t] + p[t]))
            .sum::<T>();

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for idx in 0..n {
        let coef = beta[idx] - beta[idx + n];
        if coef != T::zero() {
            support_vectors.push(zs[idx].clone());
            dual_coefs.push(coef);
        }
    }

    Ok(SvrFit {
        model: SvrModel {
            n_features,
            c: params.c,
            gamma: params.gamma,
            epsilon: params.epsilon,
            means,
            scales,
            support_vectors,
            dual_coefs,
            bias,
        },
        converged,
        kkt_violation: violation,
        iterations,
        dual_objective,
    })
}

/// Fits ε-insensitive RBF support-vector regression to labelled rows.
pub fn fit_svr<T: Real>(
    rows: &[DatasetRow<T>],
    params: &SvrParams<T>,
) -> Result<SvrFit<T>, LearnError> {
    let (xs, ys) = to_xy(rows);
    fit_svr_raw(&xs, &ys, params)
}
