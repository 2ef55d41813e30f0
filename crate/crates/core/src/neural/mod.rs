//! Multi-task network description, float reference inference and the 8-bit
//! integer pipeline.

mod float;
mod io;
mod quant;
mod spec;

pub use float::{
    activate, activate_grad, encode_input, forward_float, layer_forward, linear, FloatNetwork, FloatWeights,
    ForwardTrace, HeadOutputs, LayerParams,
};
pub use io::WeightFile;
pub use quant::{
    activation_maxima, fixed_point, forward_quantized, quantize, quantize_inputs, round_half_away, round_shift,
    QuantLayer, QuantTrace, QuantizedNetwork, INPUT_SCALE,
};
pub use spec::{
    count_multiplications, default_spec, spec_with_widths, Activation, Geometry, HeadSpec, LayerKind, LayerSpec,
    NetworkSpec, Placement, Shape3, SpecWidths,
};
