//! Shot-count sweeps: measure how the mean sampling error of a corpus decays
//! as the shot budget grows in powers of two, and pick the exponent a fitted
//! polynomial trend considers best.

use crate::circuit::QuantumCircuit;
use crate::metrics::mean_abs_error;
use crate::real::{real, Real};
use crate::sim::{mix_seed, simulate_ideal, simulate_noisy, CutBoundarySpec, NoiseModel, SimOptions};

use super::linear::fit_ols_raw;
use super::LearnError;

/// Default exponents: shot counts 2¹ through 2¹³.
pub const DEFAULT_SWEEP_EXPONENTS: std::ops::RangeInclusive<u32> = 1..=13;
/// Default degree of the fitted trend polynomial.
pub const DEFAULT_SWEEP_DEGREE: u32 = 3;

/// Mean corpus error measured at one shot exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub exponent: u32,
    /// Mean over the corpus of each circuit's mean absolute error (percent)
    /// at 2^exponent shots.
    pub mean_error: T,
}

/// Runs every corpus circuit at 2^exponent shots for each exponent and
/// reports the corpus-mean error per exponent.
pub fn shots_sweep<T: Real>(
    corpus: &[QuantumCircuit],
    noise: &NoiseModel<T>,
    exponents: &[u32],
) -> Result<Vec<SweepPoint<T>>, LearnError> {
    if corpus.is_empty() {
        return Err(LearnError::EmptyCorpus);
    }
    if exponents.is_empty() {
        return Err(LearnError::EmptyExponents);
    }
    let opts = SimOptions::default();
    let boundary = CutBoundarySpec::none();
    let ideals: Vec<_> = corpus
        .iter()
        .map(|c| simulate_ideal::<T>(c, &boundary, &opts))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(exponents.len());
    for &x in exponents {
        if x == 0 || x > 62 {
            return Err(LearnError::InvalidHyperparameter(format!(
                "shot exponent must be in 1..=62, got {x}"
            )));
        }
        let shots = 1usize << x;
        let mut total = T::zero();
        for (i, circuit) in corpus.iter().enumerate() {
            let salt = ((x as u64) << 32) ^ i as u64;
            let per_run = noise.clone().with_seed(mix_seed(noise.seed, salt));
            let noisy = simulate_noisy::<T>(circuit, &per_run, shots, &boundary, &opts)?;
            total += mean_abs_error(&ideals[i], &noisy, None)?;
        }
        out.push(SweepPoint {
            exponent: x,
            mean_error: total / real::<T>(corpus.len() as f64),
        });
    }
    Ok(out)
}

/// Fits a polynomial trend of error versus exponent and returns the tested
/// exponent where the fitted curve is lowest. Ties (in particular a flat
/// fitted curve) resolve to the smallest exponent.
pub fn pick_best_exponent<T: Real>(
    points: &[SweepPoint<T>],
    degree: u32,
) -> Result<u32, LearnError> {
    if points.is_empty() {
        return Err(LearnError::EmptyExponents);
    }
    if points.len() == 1 {
        return Ok(points[0].exponent);
    }
    if degree == 0 {
        return Err(LearnError::InvalidHyperparameter(
            "trend degree must be at least 1".into(),
        ));
    }
    // More coefficients than points would interpolate noise; cap the degree.
    let degree_eff = degree.min((points.len() - 1) as u32);
    let xs: Vec<Vec<T>> = points
        .iter()
        .map(|p| vec![real::<T>(p.exponent as f64)])
        .collect();
    let ys: Vec<T> = points.iter().map(|p| p.mean_error).collect();
    let (weights, intercept, monomials) = fit_ols_raw(&xs, &ys, degree_eff)?;

    let fitted = |x: T| -> T {
        let mut acc = intercept;
        for (mono, &w) in monomials.iter().zip(&weights) {
            let mut term = w;
            for _ in 0..mono[0] {
                term *= x;
            }
            acc += term;
        }
        acc
    };

    let mut best = points[0].exponent;
    let mut best_val = fitted(real::<T>(best as f64));
    for p in &points[1..] {
        let v = fitted(real::<T>(p.exponent as f64));
        if v < best_val || (v == best_val && p.exponent < best) {
            best_val = v;
            best = p.exponent;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn point(exponent: u32, mean_error: f64) -> SweepPoint<f64> {
        SweepPoint {
            exponent,
            mean_error,
        }
    }

    #[test]
    fn flat_curve_resolves_to_smallest_exponent() {
        let points: Vec<_> = (1..=13).map(|x| point(x, 4.25)).collect();
        assert_eq!(pick_best_exponent(&points, 3).unwrap(), 1);
    }

    #[test]
    fn synthetic_parabola_with_noise_recovers_its_minimum() {
        // e(x) = (x − 7)² plus small deterministic jitter below 0.1.
        let points: Vec<_> = (1..=13)
            .map(|x| {
                let jitter = ((x * 37) % 19) as f64 / 200.0;
                point(x, ((x as f64) - 7.0).powi(2) + jitter)
            })
            .collect();
        assert_eq!(pick_best_exponent(&points, 3).unwrap(), 7);
        assert_eq!(pick_best_exponent(&points, 2).unwrap(), 7);
    }

    #[test]
    fn monotone_decay_picks_the_largest_tested_exponent() {
        let points: Vec<_> = (1..=10).map(|x| point(x, 50.0 / x as f64)).collect();
        assert_eq!(pick_best_exponent(&points, 3).unwrap(), 10);
    }

    #[test]
    fn degree_is_capped_by_point_count() {
        let points = vec![point(3, 2.0), point(5, 1.0)];
        // Degree 3 requested but only two points: fits a line instead.
        assert_eq!(pick_best_exponent(&points, 3).unwrap(), 5);
        let single = vec![point(4, 9.0)];
        assert_eq!(pick_best_exponent(&single, 3).unwrap(), 4);
    }

    #[test]
    fn sweep_errors_shrink_with_more_shots() {
        // cos²(0.35) ≈ 0.883 is unreachable with 4 shots (multiples of 25%),
        // so the low-shot error is bounded away from zero.
        let biased = QuantumCircuit::from_gates(1, vec![Gate::rx(0, 0.7)]).unwrap();
        let noise = NoiseModel::<f64>::noiseless(7);
        let points = shots_sweep(&[biased], &noise, &[2, 12]).unwrap();
        assert_eq!(points.len(), 2);
        assert!(points[0].mean_error > 5.0, "4-shot error {}", points[0].mean_error);
        assert!(
            points[1].mean_error < points[0].mean_error,
            "4096 shots ({}) should beat 4 shots ({})",
            points[1].mean_error,
            points[0].mean_error
        );
    }

    #[test]
    fn sweep_rejects_degenerate_inputs() {
        let bell = QuantumCircuit::from_gates(2, vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        let noise = NoiseModel::<f64>::default();
        assert!(matches!(
            shots_sweep::<f64>(&[], &noise, &[3]),
            Err(LearnError::EmptyCorpus)
        ));
        assert!(matches!(
            shots_sweep(&[bell.clone()], &noise, &[]),
            Err(LearnError::EmptyExponents)
        ));
        assert!(shots_sweep(&[bell], &noise, &[0]).is_err());
        assert!(matches!(
            pick_best_exponent::<f64>(&[], 3),
            Err(LearnError::EmptyExponents)
        ));
    }
}
