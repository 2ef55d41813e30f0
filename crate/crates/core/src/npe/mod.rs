//! Network-specific resource allocation, a VLIW compiler for the
//! programmable engine and its cycle-level simulator.

mod alloc;
mod compile;
mod config;
mod sim;

pub use alloc::{allocate, allocation_latency, continuous_allocation, layer_groups, Allocation};
pub use compile::{
    compile, pipeline_latency, Instruction, LayerPlan, Lowering, NpeProgram, Schedule, SfMode, INSTRUCTION_BYTES,
};
pub use config::NpeConfig;
pub use sim::{latency_report, simulate, write_trace_csv, SimOutcome, Simulator, Stage, TraceEvent};
