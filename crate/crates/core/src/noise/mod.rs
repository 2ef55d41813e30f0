//! Circuit-level Pauli-frame simulation of repeated syndrome measurement.

mod circuit;
mod dataset;
mod params;
mod syndrome;

pub use circuit::{two_qubit_pauli, Circuit, FaultSet, RoundsOutcome};
pub use dataset::{
    generate_dataset, label, read_dataset, residual_labels, simulate_rounds, stream_rng, write_dataset,
    DatasetGenerator, DatasetHeader,
};
pub use params::{preset, NoiseModel, NoiseParams, Preset};
pub use syndrome::{LabeledSample, SyndromeArray, SyndromePair};
