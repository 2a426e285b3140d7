//! Noise-aware error prediction, circuit cutting, and classical reconstruction
//! for gate-model quantum circuits.
//!
//! The pipeline: parse a circuit, predict its noisy-execution error with a
//! trained regression model, recursively bisect it along wire cuts chosen to
//! balance the predicted error of the two halves, execute the small fragments,
//! and recombine the fragment distributions classically into an estimate of
//! the full circuit's output distribution.

pub mod circuit;
pub mod fragment;
pub mod learn;
pub mod metrics;
pub mod real;
pub mod reconstruct;
pub mod sim;
pub mod synth;
pub mod util;

pub use real::Real;

/// Double-precision outcome distribution.
pub type Distribution64 = sim::OutcomeDistribution<f64>;
/// Double-precision noise model.
pub type NoiseModel64 = sim::NoiseModel<f64>;
/// Double-precision trained regression model.
pub type Model64 = learn::TrainedModel<f64>;
/// Double-precision fragmentation tree.
pub type Tree64 = fragment::FragmentationTree<f64>;
/// Double-precision error report.
pub type ErrorReport64 = metrics::ErrorReport<f64>;
