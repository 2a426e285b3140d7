//! Error and model-quality metrics.
//!
//! Distribution errors compare probabilities on a 0–100 percent scale, state
//! by state, averaged over the compared set (a caller-supplied marked set or
//! the union of the two supports). `r_squared` follows the convention used
//! by the error-prediction scorecards here: the total sum of squares is the
//! raw (non-mean-centered) Σy². The conventional centered R² is also
//! reported, clearly named, for comparison with other tooling.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::real::{real, Real};
use crate::sim::OutcomeDistribution;

/// Errors from metric computation.
#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("distributions have different widths: {a} vs {b} bits")]
    WidthMismatch { a: usize, b: usize },
    #[error("marked state set is empty")]
    EmptyMarkedSet,
    #[error("input vectors have different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("input vectors are empty")]
    Empty,
    #[error("distribution is not normalized (sums to {sum})")]
    NotNormalized { sum: f64 },
    #[error("total sum of squares is zero; R² is undefined")]
    ZeroTotalSumOfSquares,
    #[error("adjusted R² undefined: {n} samples with {k} features leaves no degrees of freedom")]
    DegenerateDegreesOfFreedom { n: usize, k: usize },
}

fn compared_states<T: Real>(
    ideal: &OutcomeDistribution<T>,
    observed: &OutcomeDistribution<T>,
    marked: Option<&BTreeSet<u64>>,
) -> Result<Vec<u64>, MetricsError> {
    if ideal.n_bits() != observed.n_bits() {
        return Err(MetricsError::WidthMismatch { a: ideal.n_bits(), b: observed.n_bits() });
    }
    let states: Vec<u64> = match marked {
        Some(set) => {
            if set.is_empty() {
                return Err(MetricsError::EmptyMarkedSet);
            }
            set.iter().copied().collect()
        }
        None => ideal
            .iter()
            .map(|(k, _)| k)
            .chain(observed.iter().map(|(k, _)| k))
            .collect::<BTreeSet<u64>>()
            .into_iter()
            .collect(),
    };
    Ok(states)
}

/// Mean absolute probability error in percent: (1/N) Σ |100·p_s − 100·q_s|
/// over the marked states (or the union of supports when `marked` is None).
pub fn mean_abs_error<T: Real>(
    ideal: &OutcomeDistribution<T>,
    observed: &OutcomeDistribution<T>,
    marked: Option<&BTreeSet<u64>>,
) -> Result<T, MetricsError> {
    let states = compared_states(ideal, observed, marked)?;
    let hundred = real::<T>(100.0);
    let n = real::<T>(states.len() as f64);
    let sum: T = states
        .iter()
        .map(|&s| (hundred * ideal.prob(s) - hundred * observed.prob(s)).abs())
        .sum();
    Ok(sum / n)
}

/// Root-mean-square probability error in percent over the same compared set
/// as [`mean_abs_error`].
pub fn rms_error<T: Real>(
    ideal: &OutcomeDistribution<T>,
    observed: &OutcomeDistribution<T>,
    marked: Option<&BTreeSet<u64>>,
) -> Result<T, MetricsError> {
    let states = compared_states(ideal, observed, marked)?;
    let hundred = real::<T>(100.0);
    let n = real::<T>(states.len() as f64);
    let sum: T = states
        .iter()
        .map(|&s| {
            let d = hundred * ideal.prob(s) - hundred * observed.prob(s);
            d * d
        })
        .sum();
    Ok((sum / n).sqrt())
}

fn check_normalized<T: Real>(d: &OutcomeDistribution<T>) -> Result<(), MetricsError> {
    let sum = d.sum().to_f64().unwrap_or(f64::NAN);
    if (sum - 1.0).abs() > 1e-6 {
        return Err(MetricsError::NotNormalized { sum });
    }
    Ok(())
}

/// Hellinger distance H(p, q) = (1/√2)·√Σ(√p_s − √q_s)², in [0, 1].
/// Both inputs must be normalized.
pub fn hellinger_distance<T: Real>(
    p: &OutcomeDistribution<T>,
    q: &OutcomeDistribution<T>,
) -> Result<T, MetricsError> {
    if p.n_bits() != q.n_bits() {
        return Err(MetricsError::WidthMismatch { a: p.n_bits(), b: q.n_bits() });
    }
    check_normalized(p)?;
    check_normalized(q)?;
    let keys: BTreeSet<u64> = p.iter().map(|(k, _)| k).chain(q.iter().map(|(k, _)| k)).collect();
    let mut acc = T::zero();
    for k in keys {
        let d = p.prob(k).sqrt() - q.prob(k).sqrt();
        acc += d * d;
    }
    Ok((acc / real(2.0)).sqrt())
}

/// Classical fidelity derived from the Hellinger distance: (1 − H²)².
pub fn hellinger_fidelity<T: Real>(
    p: &OutcomeDistribution<T>,
    q: &OutcomeDistribution<T>,
) -> Result<T, MetricsError> {
    let h = hellinger_distance(p, q)?;
    let x = T::one() - h * h;
    Ok(x * x)
}

/// Coefficient of determination with the raw (non-centered) total sum of
/// squares: R² = 1 − Σ(y−ŷ)² / Σy².
pub fn r_squared<T: Real>(actual: &[T], predicted: &[T]) -> Result<T, MetricsError> {
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch { a: actual.len(), b: predicted.len() });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    let ss_res: T = actual
        .iter()
        .zip(predicted)
        .map(|(&y, &f)| (y - f) * (y - f))
        .sum();
    let ss_tot: T = actual.iter().map(|&y| y * y).sum();
    if ss_tot == T::zero() {
        return Err(MetricsError::ZeroTotalSumOfSquares);
    }
    Ok(T::one() - ss_res / ss_tot)
}

/// Conventional centered R²: total sum of squares taken about the mean.
pub fn r_squared_centered<T: Real>(actual: &[T], predicted: &[T]) -> Result<T, MetricsError> {
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch { a: actual.len(), b: predicted.len() });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = real::<T>(actual.len() as f64);
    let mean = actual.iter().copied().sum::<T>() / n;
    let ss_res: T = actual
        .iter()
        .zip(predicted)
        .map(|(&y, &f)| (y - f) * (y - f))
        .sum();
    let ss_tot: T = actual.iter().map(|&y| (y - mean) * (y - mean)).sum();
    if ss_tot == T::zero() {
        return Err(MetricsError::ZeroTotalSumOfSquares);
    }
    Ok(T::one() - ss_res / ss_tot)
}

/// Adjusted R²: 1 − (1 − R²)(n − 1)/(n − k − 1) for n samples, k features.
pub fn adjusted_r_squared<T: Real>(r2: T, n: usize, k: usize) -> Result<T, MetricsError> {
    if n < 2 || n <= k + 1 {
        return Err(MetricsError::DegenerateDegreesOfFreedom { n, k });
    }
    let nn = real::<T>(n as f64);
    let kk = real::<T>(k as f64);
    Ok(T::one() - (T::one() - r2) * (nn - T::one()) / (nn - kk - T::one()))
}

/// Prediction-quality summary for a trained model on a held-out set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scorecard<T> {
    pub mean_error: T,
    pub mse: T,
    pub rmse: T,
    /// Non-centered convention (Σy² in the denominator).
    pub r_squared: T,
    /// Adjusted form of `r_squared`; `None` when degrees of freedom run out.
    pub adjusted_r_squared: Option<T>,
    /// Conventional centered R², for comparison with other tooling.
    pub r_squared_centered: Option<T>,
}

/// Computes the full scorecard. `n_features` is the regressor count used for
/// the adjustment.
pub fn model_scorecard<T: Real>(
    actual: &[T],
    predicted: &[T],
    n_features: usize,
) -> Result<Scorecard<T>, MetricsError> {
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch { a: actual.len(), b: predicted.len() });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = real::<T>(actual.len() as f64);
    let mean_error: T = actual
        .iter()
        .zip(predicted)
        .map(|(&y, &f)| (y - f).abs())
        .sum::<T>()
        / n;
    let mse: T = actual
        .iter()
        .zip(predicted)
        .map(|(&y, &f)| (y - f) * (y - f))
        .sum::<T>()
        / n;
    let r2 = r_squared(actual, predicted)?;
    Ok(Scorecard {
        mean_error,
        mse,
        rmse: mse.sqrt(),
        r_squared: r2,
        adjusted_r_squared: adjusted_r_squared(r2, actual.len(), n_features).ok(),
        r_squared_centered: r_squared_centered(actual, predicted).ok(),
    })
}

/// One circuit's execution-error summary: how far an observed distribution
/// sits from the ideal one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport<T> {
    pub mean_error: T,
    pub rms_error: T,
    pub hellinger_fidelity: T,
    /// Number of states compared for the mean/RMS errors.
    pub n_states: usize,
}

impl<T: Real> ErrorReport<T> {
    pub const CSV_HEADER: &'static str = "mean_error,rms_error,hellinger_fidelity,n_states";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.mean_error, self.rms_error, self.hellinger_fidelity, self.n_states
        )
    }
}

/// Builds an [`ErrorReport`] comparing `observed` against `ideal`.
pub fn error_report<T: Real>(
    ideal: &OutcomeDistribution<T>,
    observed: &OutcomeDistribution<T>,
    marked: Option<&BTreeSet<u64>>,
) -> Result<ErrorReport<T>, MetricsError> {
    let states = compared_states(ideal, observed, marked)?;
    Ok(ErrorReport {
        mean_error: mean_abs_error(ideal, observed, marked)?,
        rms_error: rms_error(ideal, observed, marked)?,
        hellinger_fidelity: hellinger_fidelity(ideal, observed)?,
        n_states: states.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(n_bits: usize, entries: &[(u64, f64)]) -> OutcomeDistribution<f64> {
        OutcomeDistribution::from_probs(n_bits, entries.iter().copied())
    }

    #[test]
    fn identical_distributions_have_zero_error_and_unit_fidelity() {
        let d = dist(2, &[(0, 0.5), (3, 0.5)]);
        assert_eq!(mean_abs_error(&d, &d, None).unwrap(), 0.0);
        assert_eq!(rms_error(&d, &d, None).unwrap(), 0.0);
        assert_eq!(hellinger_distance(&d, &d).unwrap(), 0.0);
        assert_eq!(hellinger_fidelity(&d, &d).unwrap(), 1.0);
    }

    #[test]
    fn mean_error_on_point_vs_uniform() {
        // ideal all mass on |0⟩, observed 50/50: per-state gaps 50 and 50,
        // mean over the 2-state union = 50.
        let ideal = dist(1, &[(0, 1.0)]);
        let obs = dist(1, &[(0, 0.5), (1, 0.5)]);
        assert!((mean_abs_error(&ideal, &obs, None).unwrap() - 50.0).abs() < 1e-12);
        assert!((rms_error(&ideal, &obs, None).unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn marked_set_restricts_the_average() {
        let ideal = dist(2, &[(0, 1.0)]);
        let obs = dist(2, &[(0, 0.5), (1, 0.25), (2, 0.25)]);
        let marked: BTreeSet<u64> = [0u64].into_iter().collect();
        assert!((mean_abs_error(&ideal, &obs, Some(&marked)).unwrap() - 50.0).abs() < 1e-12);
        let empty = BTreeSet::new();
        assert!(matches!(
            mean_abs_error(&ideal, &obs, Some(&empty)),
            Err(MetricsError::EmptyMarkedSet)
        ));
    }

    #[test]
    fn hellinger_of_disjoint_distributions_is_one() {
        let p = dist(1, &[(0, 1.0)]);
        let q = dist(1, &[(1, 1.0)]);
        assert!((hellinger_distance(&p, &q).unwrap() - 1.0).abs() < 1e-12);
        assert!(hellinger_fidelity(&p, &q).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hellinger_rejects_unnormalized_input() {
        let p = dist(1, &[(0, 0.7)]);
        let q = dist(1, &[(0, 1.0)]);
        assert!(matches!(
            hellinger_distance(&p, &q),
            Err(MetricsError::NotNormalized { .. })
        ));
    }

    #[test]
    fn fidelity_identity_holds_pointwise() {
        let p = dist(2, &[(0, 0.25), (1, 0.25), (2, 0.5)]);
        let q = dist(2, &[(0, 0.5), (2, 0.5)]);
        let h = hellinger_distance(&p, &q).unwrap();
        let f = hellinger_fidelity(&p, &q).unwrap();
        assert!((f - (1.0 - h * h) * (1.0 - h * h)).abs() < 1e-15);
    }

    #[test]
    fn r_squared_single_point_worked_example() {
        // One observation y=64.343 predicted as 59.210:
        // SS_res = 5.133² = 26.347, SS_tot = 64.343² = 4140.021 → 0.99364.
        let r2 = r_squared(&[64.343f64], &[59.210]).unwrap();
        assert!((r2 - 0.993).abs() < 1e-3, "r2 = {r2}");
    }

    #[test]
    fn r_squared_is_one_for_perfect_predictions() {
        let y = [3.0f64, -1.0, 2.5];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_eq!(r_squared_centered(&y, &y).unwrap(), 1.0);
    }

    #[test]
    fn centered_and_raw_r_squared_differ_for_offset_data() {
        let actual = [10.0f64, 11.0, 12.0];
        let predicted = [11.0f64, 11.0, 11.0];
        let raw = r_squared(&actual, &predicted).unwrap();
        let centered = r_squared_centered(&actual, &predicted).unwrap();
        // Mean-only prediction: centered R² is exactly 0, raw is near 1.
        assert!(centered.abs() < 1e-12);
        assert!(raw > 0.99);
    }

    #[test]
    fn zero_total_sum_of_squares_is_an_error() {
        assert!(matches!(
            r_squared(&[0.0f64, 0.0], &[0.1, 0.2]),
            Err(MetricsError::ZeroTotalSumOfSquares)
        ));
    }

    #[test]
    fn adjusted_r_squared_shrinks_toward_zero() {
        let adj = adjusted_r_squared(0.9f64, 10, 3).unwrap();
        assert!((adj - (1.0 - 0.1 * 9.0 / 6.0)).abs() < 1e-12);
        assert!(matches!(
            adjusted_r_squared(0.9f64, 4, 3),
            Err(MetricsError::DegenerateDegreesOfFreedom { .. })
        ));
    }

    #[test]
    fn scorecard_composes_the_pieces() {
        let actual = [10.0f64, 20.0, 30.0, 40.0];
        let predicted = [12.0f64, 18.0, 33.0, 39.0];
        let sc = model_scorecard(&actual, &predicted, 2).unwrap();
        assert!((sc.mean_error - 2.0).abs() < 1e-12);
        assert!((sc.mse - (4.0 + 4.0 + 9.0 + 1.0) / 4.0).abs() < 1e-12);
        assert!((sc.rmse - sc.mse.sqrt()).abs() < 1e-15);
        assert!(sc.r_squared > 0.99); // errors are small next to Σy²
        assert!(sc.adjusted_r_squared.is_some());
    }

    #[test]
    fn error_report_round_trips_to_csv() {
        let ideal = dist(1, &[(0, 1.0)]);
        let obs = dist(1, &[(0, 0.9), (1, 0.1)]);
        let r = error_report(&ideal, &obs, None).unwrap();
        assert_eq!(r.n_states, 2);
        let row = r.to_csv_row();
        assert_eq!(row.split(',').count(), 4);
    }
}
