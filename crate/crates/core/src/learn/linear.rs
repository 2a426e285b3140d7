//! Polynomial least-squares and lasso regression.
//!
//! Both fitters expand the raw features into all monomials up to a configured
//! total degree, standardize each expanded column (zero mean, unit variance on
//! the training data), solve in the standardized space, and then map the
//! coefficients back to the raw expanded space. Storing raw-space weights
//! makes the recovered coefficients directly interpretable: fitting `y = x²`
//! at degree 2 yields weight 1 on the `x²` monomial.

use crate::real::{real, Real};

use super::dataset::{to_xy, DatasetRow};
use super::LearnError;

/// Ridge added to the normal-equation diagonal when the plain factorization
/// fails (collinear or constant expanded columns).
pub const SINGULARITY_RIDGE: f64 = 1e-10;
/// Lasso coordinate descent stops when the duality gap falls below this
/// fraction of the (scaled) training objective.
pub const LASSO_GAP_TOL: f64 = 1e-10;
/// Step-size stopping rule used when the lasso strength is exactly zero
/// (the duality gap is degenerate there).
pub const LASSO_STEP_TOL: f64 = 1e-12;
/// Upper bound on full coordinate-descent sweeps.
pub const LASSO_MAX_SWEEPS: usize = 100_000;

/// Exponent vectors of every monomial of total degree 1..=`degree` over
/// `n_features` variables, in graded order (degree 1 block first), each block
/// ordered lexicographically by descending leading exponents. The intercept
/// (degree-0 monomial) is handled separately by the fitters.
pub fn monomial_exponents(n_features: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, idx: usize, remaining: u32) {
        if idx + 1 == current.len() {
            current[idx] = remaining;
            out.push(current.clone());
            current[idx] = 0;
            return;
        }
        for e in (0..=remaining).rev() {
            current[idx] = e;
            fill(out, current, idx + 1, remaining - e);
        }
        current[idx] = 0;
    }

    assert!(n_features > 0, "at least one feature required");
    let mut out = Vec::new();
    let mut current = vec![0u32; n_features];
    for total in 1..=degree {
        fill(&mut out, &mut current, 0, total);
    }
    out
}

/// Evaluates one monomial on a raw feature vector.
fn monomial_value<T: Real>(x: &[T], exponents: &[u32]) -> T {
    let mut v = T::one();
    for (xi, &e) in x.iter().zip(exponents) {
        for _ in 0..e {
            v *= *xi;
        }
    }
    v
}

/// Expands a raw feature vector into the monomial basis.
pub fn expand_features<T: Real>(x: &[T], monomials: &[Vec<u32>]) -> Vec<T> {
    monomials.iter().map(|m| monomial_value(x, m)).collect()
}

/// Per-column mean and scale. A column whose spread is indistinguishable from
/// accumulated rounding noise is treated as constant: its scale is forced to
/// one so the centered column is (numerically) zero rather than amplified
/// noise.
fn column_stats<T: Real>(col: &[T]) -> (T, T) {
    let n = real::<T>(col.len() as f64);
    let mean = col.iter().copied().sum::<T>() / n;
    let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let sd = var.max(T::zero()).sqrt();
    let noise_floor = real::<T>(64.0) * T::epsilon() * (T::one() + mean.abs());
    if sd <= noise_floor {
        (mean, T::one())
    } else {
        (mean, sd)
    }
}

/// Per-feature means and scales across raw rows, using the same
/// constant-column rule as [`column_stats`]. Shared with the kernel models,
/// which standardize raw (unexpanded) features.
pub(crate) fn standardize_stats<T: Real>(xs: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let d = xs[0].len();
    let mut means = Vec::with_capacity(d);
    let mut scales = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<T> = xs.iter().map(|x| x[j]).collect();
        let (m, s) = column_stats(&col);
        means.push(m);
        scales.push(s);
    }
    (means, scales)
}

/// Solves `A w = b` for symmetric positive-definite `A` via an in-place
/// Cholesky factorization. Returns `None` when a pivot collapses (within
/// rounding of zero), signalling a singular system.
fn cholesky_solve<T: Real>(a: &mut [Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let p = a.len();
    let max_diag = (0..p).fold(T::zero(), |m, i| m.max(a[i][i]));
    let tiny = real::<T>(4.0) * T::epsilon() * (T::one() + max_diag);
    for j in 0..p {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > tiny) || !d.is_finite() {
            return None;
        }
        let l_jj = d.sqrt();
        a[j][j] = l_jj;
        for i in j + 1..p {
            let mut v = a[i][j];
            for k in 0..j {
                v -= a[i][k] * a[j][k];
            }
            a[i][j] = v / l_jj;
        }
    }
    // Forward substitution L z = b, then back substitution Lᵀ w = z.
    let mut z = vec![T::zero(); p];
    for i in 0..p {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i][k] * z[k];
        }
        z[i] = v / a[i][i];
    }
    let mut w = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut v = z[i];
        for k in i + 1..p {
            v -= a[k][i] * w[k];
        }
        w[i] = v / a[i][i];
    }
    Some(w)
}

/// Standardized design built from raw rows: expanded columns, their stats,
/// and the centered label vector.
struct Design<T> {
    columns: Vec<Vec<T>>,
    means: Vec<T>,
    scales: Vec<T>,
    y_centered: Vec<T>,
    y_mean: T,
    n: usize,
}

fn build_design<T: Real>(xs: &[Vec<T>], ys: &[T], monomials: &[Vec<u32>]) -> Design<T> {
    let n = xs.len();
    let mut columns = Vec::with_capacity(monomials.len());
    let mut means = Vec::with_capacity(monomials.len());
    let mut scales = Vec::with_capacity(monomials.len());
    for mono in monomials {
        let raw: Vec<T> = xs.iter().map(|x| monomial_value(x, mono)).collect();
        let (mean, scale) = column_stats(&raw);
        let std_col: Vec<T> = raw.iter().map(|&v| (v - mean) / scale).collect();
        columns.push(std_col);
        means.push(mean);
        scales.push(scale);
    }
    let y_mean = ys.iter().copied().sum::<T>() / real::<T>(n as f64);
    let y_centered: Vec<T> = ys.iter().map(|&y| y - y_mean).collect();
    Design {
        columns,
        means,
        scales,
        y_centered,
        y_mean,
        n,
    }
}

/// Maps standardized-space weights back to the raw expanded basis.
fn map_back<T: Real>(design: &Design<T>, w_std: &[T]) -> (Vec<T>, T) {
    let weights: Vec<T> = w_std
        .iter()
        .zip(&design.scales)
        .map(|(&w, &s)| w / s)
        .collect();
    let mut intercept = design.y_mean;
    for ((&w, &mu), &s) in w_std.iter().zip(&design.means).zip(&design.scales) {
        intercept -= w * mu / s;
    }
    (weights, intercept)
}

/// Ordinary-least-squares polynomial fit on raw feature rows. Returns the
/// raw-space weights (one per monomial) and the intercept.
pub(crate) fn fit_ols_raw<T: Real>(
    xs: &[Vec<T>],
    ys: &[T],
    degree: u32,
) -> Result<(Vec<T>, T, Vec<Vec<u32>>), LearnError> {
    check_fit_inputs(xs, ys, degree)?;
    let monomials = monomial_exponents(xs[0].len(), degree);
    let design = build_design(xs, ys, &monomials);
    let p = design.columns.len();
    let n = real::<T>(design.n as f64);

    // Normal equations on the standardized design, scaled by 1/n so the
    // diagonal is O(1) and the singularity ridge has a meaningful size.
    let mut a: Vec<Vec<T>> = vec![vec![T::zero(); p]; p];
    let mut b = vec![T::zero(); p];
    for i in 0..p {
        for j in 0..=i {
            let dot = design.columns[i]
                .iter()
                .zip(&design.columns[j])
                .map(|(&u, &v)| u * v)
                .sum::<T>()
                / n;
            a[i][j] = dot;
            a[j][i] = dot;
        }
        b[i] = design.columns[i]
            .iter()
            .zip(&design.y_centered)
            .map(|(&u, &v)| u * v)
            .sum::<T>()
            / n;
    }

    let mut plain = a.clone();
    let w_std = match cholesky_solve(&mut plain, &b) {
        Some(w) => w,
        None => {
            let ridge = real::<T>(SINGULARITY_RIDGE);
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += ridge;
            }
            cholesky_solve(&mut a, &b).ok_or(LearnError::RankDeficient)?
        }
    };
    let (weights, intercept) = map_back(&design, &w_std);
    Ok((weights, intercept, monomials))
}

fn soft_threshold<T: Real>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

/// Result of a lasso coordinate-descent run.
pub struct LassoFit<T> {
    pub model: LassoModel<T>,
    /// Whether the stopping rule was met before the sweep cap.
    pub converged: bool,
    /// Final duality gap (zero-strength runs report the last step size).
    pub duality_gap: T,
    /// Full coordinate sweeps performed.
    pub sweeps: usize,
}

pub(crate) struct LassoRawFit<T> {
    pub weights: Vec<T>,
    pub intercept: T,
    pub converged: bool,
    pub gap: T,
    pub sweeps: usize,
}

/// Cyclic coordinate descent for the objective
/// `(1/2n)·‖y − Xw − b‖² + strength·‖w‖₁` on the standardized expansion.
pub(crate) fn fit_lasso_raw<T: Real>(
    xs: &[Vec<T>],
    ys: &[T],
    strength: T,
    degree: u32,
) -> Result<LassoRawFit<T>, LearnError> {
    check_fit_inputs(xs, ys, degree)?;
    if !(strength >= T::zero()) || !strength.is_finite() {
        return Err(LearnError::InvalidHyperparameter(
            "lasso strength must be finite and nonnegative".into(),
        ));
    }
    let monomials = monomial_exponents(xs[0].len(), degree);
    let design = build_design(xs, ys, &monomials);
    let p = design.columns.len();
    let n = real::<T>(design.n as f64);
    let lambda = strength;

    // Columns with no spread were zeroed by standardization; skip them so
    // their (indeterminate) coefficients stay at zero.
    let col_sq: Vec<T> = design
        .columns
        .iter()
        .map(|c| c.iter().map(|&v| v * v).sum::<T>() / n)
        .collect();

    let mut w = vec![T::zero(); p];
    let mut residual = design.y_centered.clone();
    let y_scale = design
        .y_centered
        .iter()
        .map(|&v| v * v)
        .sum::<T>()
        / (real::<T>(2.0) * n);
    let gap_tol = real::<T>(LASSO_GAP_TOL) * T::one().max(y_scale);
    let step_tol = real::<T>(LASSO_STEP_TOL);

    let mut converged = false;
    let mut last_gap = T::infinity();
    let mut sweeps = 0;
    while sweeps < LASSO_MAX_SWEEPS {
        sweeps += 1;
        let mut max_step = T::zero();
        for j in 0..p {
            if col_sq[j] <= T::zero() {
                continue;
            }
            let col = &design.columns[j];
            let mut rho = w[j] * col_sq[j];
            rho += col
                .iter()
                .zip(&residual)
                .map(|(&u, &r)| u * r)
                .sum::<T>()
                / n;
            let w_new = soft_threshold(rho, lambda) / col_sq[j];
            let delta = w_new - w[j];
            if delta != T::zero() {
                for (r, &u) in residual.iter_mut().zip(col) {
                    *r -= delta * u;
                }
                w[j] = w_new;
            }
            max_step = max_step.max(delta.abs());
        }

        if lambda > T::zero() {
            // Duality gap: primal minus the value of the scaled-residual
            // dual point (feasible after shrinking onto ‖Xᵀθ‖∞ ≤ λ).
            let rss = residual.iter().map(|&r| r * r).sum::<T>();
            let primal = rss / (real::<T>(2.0) * n)
                + lambda * w.iter().map(|&v| v.abs()).sum::<T>();
            let mut corr_inf = T::zero();
            for (col, &sq) in design.columns.iter().zip(&col_sq) {
                if sq <= T::zero() {
                    continue;
                }
                let c = col
                    .iter()
                    .zip(&residual)
                    .map(|(&u, &r)| u * r)
                    .sum::<T>()
                    .abs()
                    / n;
                corr_inf = corr_inf.max(c);
            }
            let shrink = if corr_inf > lambda {
                lambda / corr_inf
            } else {
                T::one()
            };
            let r_dot_y = residual
                .iter()
                .zip(&design.y_centered)
                .map(|(&r, &y)| r * y)
                .sum::<T>();
            let dual = shrink * r_dot_y / n - shrink * shrink * rss / (real::<T>(2.0) * n);
            last_gap = primal - dual;
            if last_gap <= gap_tol {
                converged = true;
                break;
            }
        } else {
            last_gap = max_step;
            let w_mag = w.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
            if max_step <= step_tol * (T::one() + w_mag) {
                converged = true;
                break;
            }
        }
    }

    let (weights, intercept) = map_back(&design, &w);
    Ok(LassoRawFit {
        weights,
        intercept,
        converged,
        gap: last_gap,
        sweeps,
    })
}

fn check_fit_inputs<T: Real>(xs: &[Vec<T>], ys: &[T], degree: u32) -> Result<(), LearnError> {
    if xs.len() < 2 {
        return Err(LearnError::TooFewRows {
            got: xs.len(),
            need: 2,
        });
    }
    assert_eq!(xs.len(), ys.len(), "feature/label length mismatch");
    if degree == 0 {
        return Err(LearnError::InvalidHyperparameter(
            "polynomial degree must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Least-squares polynomial regression model in the raw monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub n_features: usize,
    pub degree: u32,
    /// One weight per monomial of [`monomial_exponents`]`(n_features, degree)`.
    pub weights: Vec<T>,
    pub intercept: T,
}

impl<T: Real> LinearModel<T> {
    pub fn predict(&self, features: &[T]) -> T {
        predict_poly(
            features,
            self.n_features,
            self.degree,
            &self.weights,
            self.intercept,
        )
    }
}

/// L1-regularized polynomial regression model in the raw monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoModel<T> {
    pub n_features: usize,
    pub degree: u32,
    pub strength: T,
    pub weights: Vec<T>,
    pub intercept: T,
}

impl<T: Real> LassoModel<T> {
    pub fn predict(&self, features: &[T]) -> T {
        predict_poly(
            features,
            self.n_features,
            self.degree,
            &self.weights,
            self.intercept,
        )
    }
}

fn predict_poly<T: Real>(
    features: &[T],
    n_features: usize,
    degree: u32,
    weights: &[T],
    intercept: T,
) -> T {
    assert_eq!(features.len(), n_features, "feature length mismatch");
    let monomials = monomial_exponents(n_features, degree);
    let mut acc = intercept;
    for (mono, &w) in monomials.iter().zip(weights) {
        if w != T::zero() {
            acc += w * monomial_value(features, mono);
        }
    }
    acc
}

/// Fits an exact least-squares polynomial model to labelled feature rows.
pub fn fit_linear<T: Real>(
    rows: &[DatasetRow<T>],
    degree: u32,
) -> Result<LinearModel<T>, LearnError> {
    let (xs, ys) = to_xy(rows);
    let (weights, intercept, monomials) = fit_ols_raw(&xs, &ys, degree)?;
    debug_assert_eq!(weights.len(), monomials.len());
    Ok(LinearModel {
        n_features: xs[0].len(),
        degree,
        weights,
        intercept,
    })
}

/// Fits an L1-regularized polynomial model by coordinate descent.
///
/// Non-convergence is reported through [`LassoFit::converged`] rather than as
/// an error; the best iterate is always returned.
pub fn fit_lasso<T: Real>(
    rows: &[DatasetRow<T>],
    strength: T,
    degree: u32,
) -> Result<LassoFit<T>, LearnError> {
    let (xs, ys) = to_xy(rows);
    let raw = fit_lasso_raw(&xs, &ys, strength, degree)?;
    Ok(LassoFit {
        model: LassoModel {
            n_features: xs[0].len(),
            degree,
            strength,
            weights: raw.weights,
            intercept: raw.intercept,
        },
        converged: raw.converged,
        duality_gap: raw.gap,
        sweeps: raw.sweeps,
    })
}
