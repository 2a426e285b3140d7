//! One module per subcommand.

pub mod bench;
pub mod cut;
pub mod dataset;
pub mod predict;
pub mod run;
pub mod simulate;
pub mod sweep;
pub mod train;

use qfrag_core::circuit::QuantumCircuit;
use qfrag_core::synth::{random_corpus, random_cuttable_corpus};

use crate::common::load_corpus_dir;
use crate::error::CliError;
use crate::CorpusArgs;

/// Resolves a corpus source into circuits. Synthetic corpora are seeded by
/// the global seed; `cuttable` selects the generator that guarantees each
/// circuit admits a valid cut of size ≤ 2.
pub fn resolve_corpus(
    source: &CorpusArgs,
    seed: u64,
    cuttable: bool,
) -> Result<Vec<QuantumCircuit>, CliError> {
    if let Some(dir) = &source.corpus {
        return load_corpus_dir(dir);
    }
    let count = source
        .synthetic
        .expect("clap requires --corpus or --synthetic");
    if count == 0 {
        return Err(CliError::Parse("--synthetic needs at least 1 circuit".into()));
    }
    if source.min_qubits > source.max_qubits || source.min_gates > source.max_gates {
        return Err(CliError::Parse(
            "synthetic ranges need min ≤ max for qubits and gates".into(),
        ));
    }
    let qubits = source.min_qubits..=source.max_qubits;
    let gates = source.min_gates..=source.max_gates;
    if cuttable {
        if source.min_qubits < 2 || source.min_gates < 4 {
            return Err(CliError::Parse(
                "cuttable synthetic circuits need at least 2 qubits and 4 gates".into(),
            ));
        }
        Ok(random_cuttable_corpus(count, qubits, gates, seed)
            .into_iter()
            .map(|(c, _)| c)
            .collect())
    } else {
        if source.min_qubits < 1 {
            return Err(CliError::Parse("circuits need at least 1 qubit".into()));
        }
        Ok(random_corpus(count, qubits, gates, seed))
    }
}
