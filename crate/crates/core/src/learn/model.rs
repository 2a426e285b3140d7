//! Trained-model wrapper: prediction entry point, memoization, and versioned
//! JSON persistence.
//!
//! Models are stored as a self-describing JSON document carrying a format
//! version, the feature schema version the model was trained against, the
//! model family, and every parameter in double precision. Loading rejects
//! unknown versions instead of guessing.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{extract_features, FeatureVector, FEATURE_LEN};
use crate::circuit::QuantumCircuit;
use crate::real::{real, Real};
use crate::util::write_atomic;

use super::forest::{FeatureSubset, ForestModel, RegressionTree, TreeNode};
use super::linear::{monomial_exponents, LassoModel, LinearModel};
use super::svr::SvrModel;
use super::LearnError;

/// Version of the persistence document layout.
pub const MODEL_FORMAT_VERSION: u32 = 1;
/// Version of the 19-column feature schema models are trained against.
pub const FEATURE_SCHEMA_VERSION: u32 = 1;

/// Parameters of one trained model family.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams<T> {
    Linear(LinearModel<T>),
    Lasso(LassoModel<T>),
    Forest(ForestModel<T>),
    Svr(SvrModel<T>),
}

impl<T: Real> ModelParams<T> {
    pub fn family(&self) -> &'static str {
        match self {
            ModelParams::Linear(_) => "linear",
            ModelParams::Lasso(_) => "lasso",
            ModelParams::Forest(_) => "forest",
            ModelParams::Svr(_) => "svr",
        }
    }

    fn predict(&self, features: &[T]) -> T {
        match self {
            ModelParams::Linear(m) => m.predict(features),
            ModelParams::Lasso(m) => m.predict(features),
            ModelParams::Forest(m) => m.predict(features),
            ModelParams::Svr(m) => m.predict(features),
        }
    }
}

/// A trained model bound to the feature schema it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T> {
    feature_schema_version: u32,
    pub params: ModelParams<T>,
}

impl<T: Real> TrainedModel<T> {
    /// Wraps freshly fitted parameters (current feature schema).
    pub fn new(params: ModelParams<T>) -> Self {
        TrainedModel {
            feature_schema_version: FEATURE_SCHEMA_VERSION,
            params,
        }
    }

    pub fn feature_schema_version(&self) -> u32 {
        self.feature_schema_version
    }

    /// Raw model output for a feature vector (no clamping).
    pub fn predict(&self, features: &FeatureVector) -> T {
        self.params.predict(&features.to_floats())
    }

    /// Predicted execution error of a circuit, as a percentage clamped to
    /// [0, 100].
    pub fn predict_error(&self, circuit: &QuantumCircuit) -> Result<T, LearnError> {
        if self.feature_schema_version != FEATURE_SCHEMA_VERSION {
            return Err(LearnError::FeatureSchemaMismatch {
                expected: FEATURE_SCHEMA_VERSION,
                found: self.feature_schema_version,
            });
        }
        let raw = self.predict(&extract_features(circuit));
        Ok(raw.max(T::zero()).min(real::<T>(100.0)))
    }
}

/// Anything that can estimate a circuit's execution error. The fragmentation
/// engine is written against this so tests can substitute table-driven stubs.
pub trait ErrorPredictor<T: Real> {
    fn predict_error(&mut self, circuit: &QuantumCircuit) -> Result<T, LearnError>;
}

impl<T: Real> ErrorPredictor<T> for TrainedModel<T> {
    fn predict_error(&mut self, circuit: &QuantumCircuit) -> Result<T, LearnError> {
        TrainedModel::predict_error(self, circuit)
    }
}

/// Caches predictions by feature vector: circuits with identical features
/// always predict identically, and cut selection evaluates many closely
/// related fragments.
pub struct MemoizedPredictor<'a, T> {
    model: &'a TrainedModel<T>,
    cache: HashMap<FeatureVector, T>,
}

impl<'a, T: Real> MemoizedPredictor<'a, T> {
    pub fn new(model: &'a TrainedModel<T>) -> Self {
        MemoizedPredictor {
            model,
            cache: HashMap::new(),
        }
    }

    pub fn cached_len(&self) -> usize {
        self.cache.len()
    }
}

impl<T: Real> ErrorPredictor<T> for MemoizedPredictor<'_, T> {
    fn predict_error(&mut self, circuit: &QuantumCircuit) -> Result<T, LearnError> {
        if self.model.feature_schema_version != FEATURE_SCHEMA_VERSION {
            return Err(LearnError::FeatureSchemaMismatch {
                expected: FEATURE_SCHEMA_VERSION,
                found: self.model.feature_schema_version,
            });
        }
        let features = extract_features(circuit);
        if let Some(&hit) = self.cache.get(&features) {
            return Ok(hit);
        }
        let raw = self.model.predict(&features);
        let clamped = raw.max(T::zero()).min(real::<T>(100.0));
        self.cache.insert(features, clamped);
        Ok(clamped)
    }
}

// ---------------------------------------------------------------------------
// Persistence document (all numbers in double precision).

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    feature_schema_version: u32,
    #[serde(flatten)]
    params: ParamsDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ParamsDoc {
    Linear {
        n_features: usize,
        degree: u32,
        weights: Vec<f64>,
        intercept: f64,
    },
    Lasso {
        n_features: usize,
        degree: u32,
        strength: f64,
        weights: Vec<f64>,
        intercept: f64,
    },
    Forest {
        n_features: usize,
        max_depth: usize,
        min_samples_split: usize,
        feature_subset: FeatureSubset,
        bootstrap: bool,
        seed: u64,
        trees: Vec<TreeDoc>,
    },
    Svr {
        n_features: usize,
        c: f64,
        gamma: f64,
        epsilon: f64,
        bias: f64,
        means: Vec<f64>,
        scales: Vec<f64>,
        support_vectors: Vec<Vec<f64>>,
        dual_coefs: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum NodeDoc {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

fn to_f64s<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

fn from_f64s<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| real::<T>(x)).collect()
}

impl<T: Real> TrainedModel<T> {
    fn to_document(&self) -> ModelDocument {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let params = match &self.params {
            ModelParams::Linear(m) => ParamsDoc::Linear {
                n_features: m.n_features,
                degree: m.degree,
                weights: to_f64s(&m.weights),
                intercept: f(m.intercept),
            },
            ModelParams::Lasso(m) => ParamsDoc::Lasso {
                n_features: m.n_features,
                degree: m.degree,
                strength: f(m.strength),
                weights: to_f64s(&m.weights),
                intercept: f(m.intercept),
            },
            ModelParams::Forest(m) => ParamsDoc::Forest {
                n_features: m.n_features,
                max_depth: m.max_depth,
                min_samples_split: m.min_samples_split,
                feature_subset: m.feature_subset,
                bootstrap: m.bootstrap,
                seed: m.seed,
                trees: m
                    .trees
                    .iter()
                    .map(|t| TreeDoc {
                        nodes: t
                            .nodes
                            .iter()
                            .map(|n| match n {
                                TreeNode::Leaf { value } => NodeDoc::Leaf { value: f(*value) },
                                TreeNode::Split {
                                    feature,
                                    threshold,
                                    left,
                                    right,
                                } => NodeDoc::Split {
                                    feature: *feature,
                                    threshold: f(*threshold),
                                    left: *left,
                                    right: *right,
                                },
                            })
                            .collect(),
                    })
                    .collect(),
            },
            ModelParams::Svr(m) => ParamsDoc::Svr {
                n_features: m.n_features,
                c: f(m.c),
                gamma: f(m.gamma),
                epsilon: f(m.epsilon),
                bias: f(m.bias),
                means: to_f64s(&m.means),
                scales: to_f64s(&m.scales),
                support_vectors: m.support_vectors.iter().map(|v| to_f64s(v)).collect(),
                dual_coefs: to_f64s(&m.dual_coefs),
            },
        };
        ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            feature_schema_version: self.feature_schema_version,
            params,
        }
    }

    /// Serializes the model to its JSON document form.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_document())
            .expect("model document serialization cannot fail");
        text.push('\n');
        text
    }

    /// Parses and validates a JSON model document.
    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(LearnError::UnsupportedFormatVersion {
                found: doc.format_version,
            });
        }
        if doc.feature_schema_version != FEATURE_SCHEMA_VERSION {
            return Err(LearnError::FeatureSchemaMismatch {
                expected: FEATURE_SCHEMA_VERSION,
                found: doc.feature_schema_version,
            });
        }
        let bad = |message: String| LearnError::ModelFormat(message);
        let all_finite = |vals: &[f64], what: &str| -> Result<(), LearnError> {
            if vals.iter().any(|v| !v.is_finite()) {
                Err(bad(format!("{what} contains a non-finite value")))
            } else {
                Ok(())
            }
        };
        let params = match doc.params {
            ParamsDoc::Linear {
                n_features,
                degree,
                weights,
                intercept,
            } => {
                check_poly_shape(n_features, degree, weights.len())?;
                all_finite(&weights, "weights")?;
                all_finite(&[intercept], "intercept")?;
                ModelParams::Linear(LinearModel {
                    n_features,
                    degree,
                    weights: from_f64s(&weights),
                    intercept: real::<T>(intercept),
                })
            }
            ParamsDoc::Lasso {
                n_features,
                degree,
                strength,
                weights,
                intercept,
            } => {
                check_poly_shape(n_features, degree, weights.len())?;
                all_finite(&weights, "weights")?;
                all_finite(&[strength, intercept], "parameters")?;
                if strength < 0.0 {
                    return Err(bad("lasso strength must be nonnegative".into()));
                }
                ModelParams::Lasso(LassoModel {
                    n_features,
                    degree,
                    strength: real::<T>(strength),
                    weights: from_f64s(&weights),
                    intercept: real::<T>(intercept),
                })
            }
            ParamsDoc::Forest {
                n_features,
                max_depth,
                min_samples_split,
                feature_subset,
                bootstrap,
                seed,
                trees,
            } => {
                if n_features != FEATURE_LEN {
                    return Err(bad(format!(
                        "expected {FEATURE_LEN} features, document says {n_features}"
                    )));
                }
                if trees.is_empty() {
                    return Err(bad("forest must contain at least one tree".into()));
                }
                let mut converted = Vec::with_capacity(trees.len());
                for (ti, tree) in trees.iter().enumerate() {
                    let mut nodes = Vec::with_capacity(tree.nodes.len());
                    for node in &tree.nodes {
                        nodes.push(match node {
                            NodeDoc::Leaf { value } => {
                                if !value.is_finite() {
                                    return Err(bad(format!(
                                        "tree {ti} has a non-finite leaf"
                                    )));
                                }
                                TreeNode::Leaf {
                                    value: real::<T>(*value),
                                }
                            }
                            NodeDoc::Split {
                                feature,
                                threshold,
                                left,
                                right,
                            } => {
                                if *feature >= n_features {
                                    return Err(bad(format!(
                                        "tree {ti} splits on feature {feature}, \
                                         but there are only {n_features}"
                                    )));
                                }
                                if *left >= tree.nodes.len() || *right >= tree.nodes.len() {
                                    return Err(bad(format!(
                                        "tree {ti} has a child index out of range"
                                    )));
                                }
                                if !threshold.is_finite() {
                                    return Err(bad(format!(
                                        "tree {ti} has a non-finite threshold"
                                    )));
                                }
                                TreeNode::Split {
                                    feature: *feature,
                                    threshold: real::<T>(*threshold),
                                    left: *left,
                                    right: *right,
                                }
                            }
                        });
                    }
                    converted.push(RegressionTree { nodes });
                }
                ModelParams::Forest(ForestModel {
                    n_features,
                    trees: converted,
                    max_depth,
                    min_samples_split,
                    feature_subset,
                    bootstrap,
                    seed,
                })
            }
            ParamsDoc::Svr {
                n_features,
                c,
                gamma,
                epsilon,
                bias,
                means,
                scales,
                support_vectors,
                dual_coefs,
            } => {
                if n_features != FEATURE_LEN {
                    return Err(bad(format!(
                        "expected {FEATURE_LEN} features, document says {n_features}"
                    )));
                }
                if !(c > 0.0) || !(gamma > 0.0) || !(epsilon >= 0.0) {
                    return Err(bad(
                        "SVR requires C > 0, gamma > 0 and epsilon ≥ 0".into()
                    ));
                }
                if means.len() != n_features || scales.len() != n_features {
                    return Err(bad("standardization length mismatch".into()));
                }
                if scales.iter().any(|&s| !(s > 0.0)) {
                    return Err(bad("scales must be positive".into()));
                }
                if support_vectors.len() != dual_coefs.len() {
                    return Err(bad("support vector / coefficient count mismatch".into()));
                }
                if support_vectors.iter().any(|v| v.len() != n_features) {
                    return Err(bad("support vector length mismatch".into()));
                }
                all_finite(&means, "means")?;
                all_finite(&dual_coefs, "dual coefficients")?;
                if dual_coefs.iter().any(|&d| d.abs() > c * (1.0 + 1e-9)) {
                    return Err(bad("a dual coefficient exceeds the box bound C".into()));
                }
                for v in &support_vectors {
                    all_finite(v, "support vectors")?;
                }
                ModelParams::Svr(SvrModel {
                    n_features,
                    c: real::<T>(c),
                    gamma: real::<T>(gamma),
                    epsilon: real::<T>(epsilon),
                    means: from_f64s(&means),
                    scales: from_f64s(&scales),
                    support_vectors: support_vectors.iter().map(|v| from_f64s(v)).collect(),
                    dual_coefs: from_f64s(&dual_coefs),
                    bias: real::<T>(bias),
                })
            }
        };
        Ok(TrainedModel {
            feature_schema_version: doc.feature_schema_version,
            params,
        })
    }
}

fn check_poly_shape(n_features: usize, degree: u32, n_weights: usize) -> Result<(), LearnError> {
    if n_features != FEATURE_LEN {
        return Err(LearnError::ModelFormat(format!(
            "expected {FEATURE_LEN} features, document says {n_features}"
        )));
    }
    if degree == 0 {
        return Err(LearnError::ModelFormat("degree must be at least 1".into()));
    }
    let expected = monomial_exponents(n_features, degree).len();
    if n_weights != expected {
        return Err(LearnError::ModelFormat(format!(
            "degree {degree} over {n_features} features needs {expected} weights, \
             document has {n_weights}"
        )));
    }
    Ok(())
}

/// Writes a model document atomically.
pub fn save_model<T: Real>(path: &Path, model: &TrainedModel<T>) -> Result<(), LearnError> {
    write_atomic(path, model.to_json().as_bytes())?;
    Ok(())
}

/// Loads and validates a model document.
pub fn load_model<T: Real>(path: &Path) -> Result<TrainedModel<T>, LearnError> {
    let text = std::fs::read_to_string(path)?;
    TrainedModel::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::learn::dataset::DatasetRow;
    use crate::learn::forest::ForestConfig;
    use crate::learn::svr::SvrParams;
    use crate::learn::{fit_forest, fit_linear, fit_svr};

    fn tiny_rows() -> Vec<DatasetRow<f64>> {
        (0..8)
            .map(|i| {
                let mut gate_counts = [0usize; 17];
                gate_counts[0] = i; // H count varies
                DatasetRow {
                    features: FeatureVector {
                        n_qubits: 2,
                        depth: i,
                        gate_counts,
                    },
                    label: 3.0 * i as f64 + 1.0,
                }
            })
            .collect()
    }

    fn bell() -> QuantumCircuit {
        QuantumCircuit::from_gates(2, vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap()
    }

    #[test]
    fn zero_model_predicts_zero_everywhere() {
        let params = ModelParams::Linear(LinearModel {
            n_features: FEATURE_LEN,
            degree: 1,
            weights: vec![0.0; FEATURE_LEN],
            intercept: 0.0,
        });
        let model = TrainedModel::new(params);
        assert_eq!(model.predict_error(&bell()).unwrap(), 0.0);
    }

    #[test]
    fn linear_prediction_matches_hand_dot_product() {
        // Weight 2 on depth, weight 5 on the H count, intercept 1. Bell has
        // depth 2 and one H: 1 + 2·2 + 5·1 = 10.
        let mut weights = vec![0.0; FEATURE_LEN];
        weights[1] = 2.0;
        weights[2] = 5.0;
        let model = TrainedModel::new(ModelParams::Linear(LinearModel {
            n_features: FEATURE_LEN,
            degree: 1,
            weights,
            intercept: 1.0,
        }));
        assert_eq!(model.predict_error(&bell()).unwrap(), 10.0);
    }

    #[test]
    fn predictions_clamp_to_percent_range() {
        let mut weights = vec![0.0; FEATURE_LEN];
        weights[0] = 1000.0; // n_qubits · 1000 far exceeds 100
        let big = TrainedModel::new(ModelParams::Linear(LinearModel {
            n_features: FEATURE_LEN,
            degree: 1,
            weights: weights.clone(),
            intercept: 0.0,
        }));
        assert_eq!(big.predict_error(&bell()).unwrap(), 100.0);
        let small = TrainedModel::new(ModelParams::Linear(LinearModel {
            n_features: FEATURE_LEN,
            degree: 1,
            weights: vec![0.0; FEATURE_LEN],
            intercept: -50.0,
        }));
        assert_eq!(small.predict_error(&bell()).unwrap(), 0.0);
    }

    #[test]
    fn prediction_ignores_gate_order() {
        let a = QuantumCircuit::from_gates(2, vec![Gate::h(0), Gate::x(1), Gate::cnot(0, 1)])
            .unwrap();
        let b = QuantumCircuit::from_gates(2, vec![Gate::x(1), Gate::h(0), Gate::cnot(0, 1)])
            .unwrap();
        assert_eq!(extract_features(&a), extract_features(&b));
        let model = TrainedModel::new(ModelParams::Linear(
            fit_linear(&tiny_rows(), 1).unwrap(),
        ));
        assert_eq!(
            model.predict_error(&a).unwrap(),
            model.predict_error(&b).unwrap()
        );
    }

    #[test]
    fn json_round_trip_preserves_every_family() {
        let rows = tiny_rows();
        let linear = TrainedModel::new(ModelParams::Linear(fit_linear(&rows, 2).unwrap()));
        let lasso = TrainedModel::new(ModelParams::Lasso(
            crate::learn::fit_lasso(&rows, 0.5, 1).unwrap().model,
        ));
        let forest = TrainedModel::new(ModelParams::Forest(
            fit_forest(&rows, &ForestConfig::default()).unwrap(),
        ));
        let svr = TrainedModel::new(ModelParams::Svr(
            fit_svr(&rows, &SvrParams::default()).unwrap().model,
        ));
        for model in [linear, lasso, forest, svr] {
            let text = model.to_json();
            let parsed = TrainedModel::<f64>::from_json(&text).unwrap();
            assert_eq!(parsed, model);
            assert_eq!(parsed.to_json(), text, "serialization must be stable");
            let again = TrainedModel::<f64>::from_json(&parsed.to_json()).unwrap();
            assert_eq!(
                again.predict_error(&bell()).unwrap(),
                model.predict_error(&bell()).unwrap()
            );
        }
    }

    #[test]
    fn loading_rejects_version_mismatches() {
        let model = TrainedModel::new(ModelParams::Linear(
            fit_linear(&tiny_rows(), 1).unwrap(),
        ));
        let good = model.to_json();
        let bad_format = good.replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        assert!(matches!(
            TrainedModel::<f64>::from_json(&bad_format),
            Err(LearnError::UnsupportedFormatVersion { found: 99 })
        ));
        let bad_schema = good.replacen(
            "\"feature_schema_version\": 1",
            "\"feature_schema_version\": 2",
            1,
        );
        assert!(matches!(
            TrainedModel::<f64>::from_json(&bad_schema),
            Err(LearnError::FeatureSchemaMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn loading_rejects_malformed_parameters() {
        let model = TrainedModel::new(ModelParams::Linear(
            fit_linear(&tiny_rows(), 1).unwrap(),
        ));
        let good = model.to_json();
        // Wrong weight count for the declared degree.
        let doc: serde_json::Value = serde_json::from_str(&good).unwrap();
        let mut truncated = doc.clone();
        truncated["weights"].as_array_mut().unwrap().pop();
        assert!(matches!(
            TrainedModel::<f64>::from_json(&truncated.to_string()),
            Err(LearnError::ModelFormat(_))
        ));
        let mut wrong_features = doc;
        wrong_features["n_features"] = serde_json::json!(7);
        assert!(TrainedModel::<f64>::from_json(&wrong_features.to_string()).is_err());
        assert!(TrainedModel::<f64>::from_json("not json").is_err());
    }

    #[test]
    fn save_and_load_round_trip_on_disk() {
        let dir = std::env::temp_dir().join(format!("qfrag-model-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");
        let model = TrainedModel::new(ModelParams::Svr(
            fit_svr(&tiny_rows(), &SvrParams::default()).unwrap().model,
        ));
        save_model(&path, &model).unwrap();
        let loaded = load_model::<f64>(&path).unwrap();
        assert_eq!(loaded, model);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn memoized_predictor_caches_by_features() {
        let model = TrainedModel::new(ModelParams::Linear(
            fit_linear(&tiny_rows(), 1).unwrap(),
        ));
        let mut memo = MemoizedPredictor::new(&model);
        let c1 = bell();
        let c2 = bell();
        let direct = model.predict_error(&c1).unwrap();
        assert_eq!(memo.predict_error(&c1).unwrap(), direct);
        assert_eq!(memo.predict_error(&c2).unwrap(), direct);
        assert_eq!(memo.cached_len(), 1, "identical features share one entry");
    }
}
