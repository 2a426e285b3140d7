//! Training-data construction and CSV persistence.
//!
//! A dataset row pairs a circuit's gate-count feature vector with the
//! mean absolute error (percent) between its ideal output distribution and a
//! sampled noisy execution at a fixed shot count.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{extract_features, FeatureVector, FEATURE_COLUMN_NAMES};
use crate::circuit::QuantumCircuit;
use crate::metrics::mean_abs_error;
use crate::real::{real, Real};
use crate::sim::{mix_seed, simulate_ideal, simulate_noisy, CutBoundarySpec, NoiseModel, SimOptions};
use crate::util::write_atomic;

use super::LearnError;

/// Column header of the dataset CSV: the nineteen feature columns followed by
/// the error label.
pub const DATASET_CSV_HEADER: &str =
    "n_qubits,depth,h,cnot,x,y,z,rx,ry,rz,cz,cp,t,toffoli,swap,tdg,s,sdg,u3,error";

/// One labelled training example.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow<T> {
    pub features: FeatureVector,
    /// Mean absolute probability error in percent (0–100 scale), ≥ 0.
    pub label: T,
}

/// Splits rows into raw feature matrix and label vector.
pub fn to_xy<T: Real>(rows: &[DatasetRow<T>]) -> (Vec<Vec<T>>, Vec<T>) {
    let xs = rows.iter().map(|r| r.features.to_floats()).collect();
    let ys = rows.iter().map(|r| r.label).collect();
    (xs, ys)
}

/// Builds one labelled row per circuit: the label is the mean absolute error
/// between the exact distribution and a noisy sampled run at `shots` shots.
///
/// Each circuit gets its own derived noise seed so sampling noise is
/// independent across the corpus while the whole dataset stays deterministic
/// for a given base seed.
pub fn build_dataset<T: Real>(
    corpus: &[QuantumCircuit],
    noise: &NoiseModel<T>,
    shots: usize,
) -> Result<Vec<DatasetRow<T>>, LearnError> {
    if corpus.is_empty() {
        return Err(LearnError::EmptyCorpus);
    }
    let opts = SimOptions::default();
    let boundary = CutBoundarySpec::none();
    let mut rows = Vec::with_capacity(corpus.len());
    for (i, circuit) in corpus.iter().enumerate() {
        let per_circuit = noise.clone().with_seed(mix_seed(noise.seed, i as u64));
        let ideal = simulate_ideal::<T>(circuit, &boundary, &opts)?;
        let noisy = simulate_noisy::<T>(circuit, &per_circuit, shots, &boundary, &opts)?;
        let label = mean_abs_error(&ideal, &noisy, None)?;
        rows.push(DatasetRow {
            features: extract_features(circuit),
            label,
        });
    }
    Ok(rows)
}

/// Seeded shuffle-and-split into training and test sets. The training side
/// gets `round(fraction · n)` rows, clamped so both sides stay nonempty.
pub fn train_test_split<T: Real>(
    rows: &[DatasetRow<T>],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<DatasetRow<T>>, Vec<DatasetRow<T>>), LearnError> {
    if rows.len() < 2 {
        return Err(LearnError::TooFewRows {
            got: rows.len(),
            need: 2,
        });
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(LearnError::InvalidFraction(fraction));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = ((fraction * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
    let train = order[..n_train].iter().map(|&i| rows[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| rows[i].clone()).collect();
    Ok((train, test))
}

fn format_label(label: f64) -> String {
    // Shortest round-trip decimal form, so rewriting a dataset is
    // byte-stable.
    format!("{label}")
}

/// Serializes rows to the dataset CSV format.
pub fn dataset_to_csv<T: Real>(rows: &[DatasetRow<T>]) -> String {
    let mut out = String::from(DATASET_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.features.to_csv_row());
        out.push(',');
        out.push_str(&format_label(row.label.to_f64().unwrap_or(f64::NAN)));
        out.push('\n');
    }
    out
}

/// Writes rows to `path` atomically in the dataset CSV format.
pub fn write_dataset_csv<T: Real>(path: &Path, rows: &[DatasetRow<T>]) -> Result<(), LearnError> {
    write_atomic(path, dataset_to_csv(rows).as_bytes())?;
    Ok(())
}

/// Parses dataset CSV text. The header must match [`DATASET_CSV_HEADER`]
/// exactly; labels must be finite and nonnegative.
pub fn parse_dataset_csv<T: Real>(text: &str) -> Result<Vec<DatasetRow<T>>, LearnError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| LearnError::Csv {
        line: 1,
        message: "empty file".into(),
    })?;
    if header.trim_end() != DATASET_CSV_HEADER {
        return Err(LearnError::Csv {
            line: 1,
            message: format!("unexpected header `{}`", header.trim_end()),
        });
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != FEATURE_COLUMN_NAMES.len() + 1 {
            return Err(LearnError::Csv {
                line: line_no,
                message: format!(
                    "expected {} fields, found {}",
                    FEATURE_COLUMN_NAMES.len() + 1,
                    fields.len()
                ),
            });
        }
        let uint = |field: &str, name: &str| -> Result<usize, LearnError> {
            field.parse::<usize>().map_err(|_| LearnError::Csv {
                line: line_no,
                message: format!("invalid {name} `{field}`"),
            })
        };
        let n_qubits = uint(fields[0], "n_qubits")?;
        if n_qubits == 0 {
            return Err(LearnError::Csv {
                line: line_no,
                message: "n_qubits must be at least 1".into(),
            });
        }
        let depth = uint(fields[1], "depth")?;
        let mut gate_counts = [0usize; FEATURE_COLUMN_NAMES.len() - 2];
        for (slot, (field, name)) in gate_counts.iter_mut().zip(
            fields[2..FEATURE_COLUMN_NAMES.len()]
                .iter()
                .zip(&FEATURE_COLUMN_NAMES[2..]),
        ) {
            *slot = uint(field, name)?;
        }
        let label_field = fields[FEATURE_COLUMN_NAMES.len()];
        let label_f64 = label_field.parse::<f64>().map_err(|_| LearnError::Csv {
            line: line_no,
            message: format!("invalid error label `{label_field}`"),
        })?;
        if !label_f64.is_finite() || label_f64 < 0.0 {
            return Err(LearnError::Csv {
                line: line_no,
                message: format!("error label must be finite and nonnegative, got {label_f64}"),
            });
        }
        rows.push(DatasetRow {
            features: FeatureVector {
                n_qubits,
                depth,
                gate_counts,
            },
            label: real::<T>(label_f64),
        });
    }
    Ok(rows)
}

/// Reads a dataset CSV file.
pub fn read_dataset_csv<T: Real>(path: &Path) -> Result<Vec<DatasetRow<T>>, LearnError> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset_csv(&text)
}

/// The set of outcome states compared when labelling: union of both supports.
/// Exposed for reporting tools that want to show what a label covered.
pub fn label_support<T: Real>(
    ideal: &crate::sim::OutcomeDistribution<T>,
    noisy: &crate::sim::OutcomeDistribution<T>,
) -> BTreeSet<u64> {
    ideal.iter().map(|(s, _)| s).chain(noisy.iter().map(|(s, _)| s)).collect()
}
