//! Logical-error-rate trajectories, syndrome weight statistics and run
//! configuration.

mod config;
mod hamming;
mod ler;

pub use config::{DecoderKind, RunConfig, ENV_PREFIX, MIN_TRAJECTORIES};
pub use hamming::{hamming_stats, write_hamming_csv, HammingStats, Histogram};
pub use ler::{
    estimate_ler, ler_from_tau, run_trajectory, wilson, write_raw_csv, write_summary_csv, LerResult, LerRun,
    Trajectory, SUMMARY_HEADER,
};
