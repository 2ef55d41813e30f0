//! Decoding workbench for rotated surface codes: circuit-level noise
//! simulation, a multi-task neural decoder with 8-bit inference, exact
//! baselines and a cycle-level model of a VLIW neural processing engine.

pub mod code;
pub mod decoders;
pub mod error;
pub mod harness;
pub mod neural;
pub mod noise;
pub mod npe;
mod scalar;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FloatWeightsF32 = neural::FloatWeights<f32>;
pub type FloatWeightsF64 = neural::FloatWeights<f64>;
pub type FloatNetworkF32 = neural::FloatNetwork<f32>;
pub type FloatNetworkF64 = neural::FloatNetwork<f64>;
