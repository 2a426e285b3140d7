//! CLI error taxonomy and the exit-code contract.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | filesystem / other I/O failure |
//! | 2 | command-line usage error (from the argument parser) |
//! | 3 | input parsing or validation: circuit QASM, noise/dataset files, flag values |
//! | 4 | model problems: loading, persistence format, schema mismatch, training |
//! | 5 | execution: simulation, fragmentation, reconstruction |

use std::fmt;

use qfrag_core::circuit::ParseError;
use qfrag_core::fragment::FragmentError;
use qfrag_core::learn::LearnError;
use qfrag_core::metrics::MetricsError;
use qfrag_core::reconstruct::ReconstructError;
use qfrag_core::sim::SimError;

#[derive(Debug)]
pub enum CliError {
    /// Exit 1: reading or writing files.
    Io(String),
    /// Exit 3: malformed or invalid input (circuits, configs, flag values).
    Parse(String),
    /// Exit 4: model loading, persistence, or training failures.
    Model(String),
    /// Exit 5: simulation, fragmentation, or reconstruction failures.
    Exec(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 3,
            CliError::Model(_) => 4,
            CliError::Exec(_) => 5,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Model(_) => "model",
            CliError::Exec(_) => "execution",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::Io(m) | CliError::Parse(m) | CliError::Model(m) | CliError::Exec(m)) = self;
        write!(f, "{} error: {}", self.label(), m)
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Exec(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Exec(e.to_string())
    }
}

impl From<ReconstructError> for CliError {
    fn from(e: ReconstructError) -> Self {
        CliError::Exec(e.to_string())
    }
}

impl From<FragmentError> for CliError {
    fn from(e: FragmentError) -> Self {
        match e {
            // A threshold outside (0, 100] is a bad flag value.
            FragmentError::InvalidThreshold(_) => CliError::Parse(e.to_string()),
            FragmentError::Predictor(inner) => inner.into(),
            FragmentError::NoCandidates => CliError::Exec(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Io(io) => CliError::Io(io.to_string()),
            LearnError::Csv { .. } => CliError::Parse(e.to_string()),
            LearnError::Sim(_) | LearnError::Metrics(_) => CliError::Exec(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
