//! Two-stage (coarse then fine) hyperparameter search for the SVR model,
//! scored by k-fold cross-validated RMSE.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::real::{real, Real};

use super::dataset::{to_xy, DatasetRow};
use super::svr::{fit_svr_raw, SvrParams};
use super::LearnError;

/// The C and γ values evaluated in each stage, plus the fold count.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub coarse_c: Vec<f64>,
    pub coarse_gamma: Vec<f64>,
    pub fine_c: Vec<f64>,
    pub fine_gamma: Vec<f64>,
    pub folds: usize,
}

impl Default for GridSpec {
    /// The published search grids: coarse C ∈ {1, 1000, 2000, …, 50000} with
    /// γ ∈ {1, 2, 3}; fine C ∈ {10, 20, …, 1000} with
    /// γ ∈ {0.001, 0.01, 0.1, 1}; five folds.
    fn default() -> Self {
        let mut coarse_c = vec![1.0];
        coarse_c.extend((1..=50).map(|k| (k * 1000) as f64));
        GridSpec {
            coarse_c,
            coarse_gamma: vec![1.0, 2.0, 3.0],
            fine_c: (1..=100).map(|k| (k * 10) as f64).collect(),
            fine_gamma: vec![0.001, 0.01, 0.1, 1.0],
            folds: 5,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.coarse_c.is_empty()
            || self.coarse_gamma.is_empty()
            || self.fine_c.is_empty()
            || self.fine_gamma.is_empty()
        {
            return Err(LearnError::InvalidHyperparameter(
                "grid stages must be nonempty".into(),
            ));
        }
        for &v in self
            .coarse_c
            .iter()
            .chain(&self.coarse_gamma)
            .chain(&self.fine_c)
            .chain(&self.fine_gamma)
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(LearnError::InvalidHyperparameter(format!(
                    "grid values must be finite and positive, got {v}"
                )));
            }
        }
        if self.folds < 2 {
            return Err(LearnError::InvalidHyperparameter(
                "cross-validation needs at least 2 folds".into(),
            ));
        }
        Ok(())
    }
}

/// Deterministic k-fold assignment: a seeded shuffle of 0..n chopped into
/// `folds` nearly equal contiguous chunks.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(folds >= 2 && folds <= n, "2 ≤ folds ≤ n required");
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Mean over folds of the held-out root-mean-square error of an SVR fit at
/// the given hyperparameters.
pub fn cross_validated_rmse<T: Real>(
    xs: &[Vec<T>],
    ys: &[T],
    params: &SvrParams<T>,
    folds: &[Vec<usize>],
) -> Result<T, LearnError> {
    let mut total = T::zero();
    for fold in folds {
        let holdout: std::collections::BTreeSet<usize> = fold.iter().copied().collect();
        let mut train_x = Vec::with_capacity(xs.len() - fold.len());
        let mut train_y = Vec::with_capacity(xs.len() - fold.len());
        for i in 0..xs.len() {
            if !holdout.contains(&i) {
                train_x.push(xs[i].clone());
                train_y.push(ys[i]);
            }
        }
        let fit = fit_svr_raw(&train_x, &train_y, params)?;
        let mut sq = T::zero();
        for &i in fold {
            let d = fit.model.predict(&xs[i]) - ys[i];
            sq += d * d;
        }
        total += (sq / real::<T>(fold.len() as f64)).sqrt();
    }
    Ok(total / real::<T>(folds.len() as f64))
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell<T> {
    pub c: f64,
    pub gamma: f64,
    pub rmse: T,
}

/// Outcome of the two-stage search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult<T> {
    pub c: f64,
    pub gamma: f64,
    pub rmse: T,
    /// Every cell evaluated, coarse stage first, in scan order
    /// (C ascending, then γ ascending).
    pub evaluated: Vec<GridCell<T>>,
}

/// Two-stage cross-validated grid search for SVR hyperparameters.
///
/// Both stages are scored with the same precomputed folds; the winner is the
/// cell with the lowest cross-validated RMSE over everything evaluated, with
/// ties broken toward smaller C and then smaller γ.
pub fn grid_search<T: Real>(
    rows: &[DatasetRow<T>],
    spec: &GridSpec,
    epsilon: T,
    seed: u64,
) -> Result<GridSearchResult<T>, LearnError> {
    let (xs, ys) = to_xy(rows);
    grid_search_raw(&xs, &ys, spec, epsilon, seed)
}

pub(crate) fn grid_search_raw<T: Real>(
    xs: &[Vec<T>],
    ys: &[T],
    spec: &GridSpec,
    epsilon: T,
    seed: u64,
) -> Result<GridSearchResult<T>, LearnError> {
    spec.validate()?;
    if spec.folds > xs.len() {
        return Err(LearnError::FoldsExceedRows {
            folds: spec.folds,
            rows: xs.len(),
        });
    }
    let folds = kfold_indices(xs.len(), spec.folds, seed);
    // Leave-one-out on two rows would train on a single point.
    if xs.len() - folds.iter().map(Vec::len).max().unwrap_or(0) < 2 {
        return Err(LearnError::TooFewRows {
            got: xs.len(),
            need: spec.folds + 2,
        });
    }

    let mut evaluated = Vec::new();
    let stage = |cs: &[f64], gammas: &[f64], evaluated: &mut Vec<GridCell<T>>| -> Result<(), LearnError> {
        for &c in cs {
            for &gamma in gammas {
                let params = SvrParams {
                    c: real::<T>(c),
                    gamma: real::<T>(gamma),
                    epsilon,
                    ..SvrParams::default()
                };
                let rmse = cross_validated_rmse(xs, ys, &params, &folds)?;
                evaluated.push(GridCell { c, gamma, rmse });
            }
        }
        Ok(())
    };
    stage(&spec.coarse_c, &spec.coarse_gamma, &mut evaluated)?;
    stage(&spec.fine_c, &spec.fine_gamma, &mut evaluated)?;

    let mut best = &evaluated[0];
    for cell in &evaluated[1..] {
        let better = cell.rmse < best.rmse
            || (cell.rmse == best.rmse
                && (cell.c, cell.gamma) < (best.c, best.gamma));
        if better {
            best = cell;
        }
    }
    Ok(GridSearchResult {
        c: best.c,
        gamma: best.gamma,
        rmse: best.rmse,
        evaluated,
    })
}
