//! Learning the error behaviour of noisy circuit execution.
//!
//! This module turns circuits into labelled training rows (gate-count
//! features against measured execution error), fits four regression model
//! families — polynomial least squares, lasso, random forest, and RBF
//! support-vector regression — tunes the SVR by a two-stage cross-validated
//! grid search, sweeps shot budgets, and persists trained models as
//! versioned JSON.

mod dataset;
mod forest;
mod grid;
mod linear;
mod model;
mod svr;
mod sweep;

pub use dataset::{
    build_dataset, dataset_to_csv, label_support, parse_dataset_csv, read_dataset_csv, to_xy,
    train_test_split, write_dataset_csv, DatasetRow, DATASET_CSV_HEADER,
};
pub use forest::{fit_forest, FeatureSubset, ForestConfig, ForestModel, RegressionTree, TreeNode};
pub use grid::{
    cross_validated_rmse, grid_search, kfold_indices, GridCell, GridSearchResult, GridSpec,
};
pub use linear::{
    expand_features, fit_lasso, fit_linear, monomial_exponents, LassoFit, LassoModel, LinearModel,
    LASSO_GAP_TOL, LASSO_MAX_SWEEPS, LASSO_STEP_TOL, SINGULARITY_RIDGE,
};
pub use model::{
    load_model, save_model, ErrorPredictor, MemoizedPredictor, ModelParams, TrainedModel,
    FEATURE_SCHEMA_VERSION, MODEL_FORMAT_VERSION,
};
pub use svr::{fit_svr, rbf_kernel, SvrFit, SvrModel, SvrParams};
pub use sweep::{
    pick_best_exponent, shots_sweep, SweepPoint, DEFAULT_SWEEP_DEGREE, DEFAULT_SWEEP_EXPONENTS,
};

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::sim::SimError;

/// Errors from dataset construction, model fitting, and persistence.
#[derive(Debug, Error)]
pub enum LearnError {
    #[error("the training corpus is empty")]
    EmptyCorpus,
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { got: usize, need: usize },
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("the design matrix is rank deficient and could not be regularized")]
    RankDeficient,
    #[error("cross-validation folds ({folds}) exceed the row count ({rows})")]
    FoldsExceedRows { folds: usize, rows: usize },
    #[error("no shot exponents supplied")]
    EmptyExponents,
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("unsupported model format version {found}")]
    UnsupportedFormatVersion { found: u32 },
    #[error("model was trained against feature schema {found}, expected {expected}")]
    FeatureSchemaMismatch { expected: u32, found: u32 },
    #[error("malformed model document: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("model document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}
