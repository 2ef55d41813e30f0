use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code distance {0}: must be odd and within 3..=15")]
    InvalidDistance(usize),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("operator has a nonzero syndrome; homology class is undefined")]
    NonzeroSyndrome,

    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("quantization failed: {0}")]
    Quantization(String),

    #[error("label {label} out of range for head {head} with {classes} classes")]
    LabelOutOfRange { head: usize, label: usize, classes: usize },

    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    #[error("matching overflow: {defects} defects exceed the cap of {cap}")]
    MatchingOverflow { defects: usize, cap: usize },

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("compile error: {0}")]
    Compile(String),

    #[error("hazard at cycle {cycle}: {detail}")]
    Hazard { cycle: u64, detail: String },

    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
