use super::float::{FloatNetwork, HeadOutputs};
use super::spec::{Activation, Geometry, LayerSpec, NetworkSpec, Placement};
use crate::error::{Error, Result};
use crate::noise::SyndromeArray;
use crate::Scalar;

/// Scale of the network input: syndrome bit 1 becomes 127.
pub const INPUT_SCALE: f32 = 127.0;

/// `round(x)` with halves rounded away from zero.
#[inline]
pub fn round_half_away(x: f64) -> f64 {
    x.signum() * (x.abs() + 0.5).floor()
}

/// `v / 2^shift` rounded half away from zero.
#[inline]
pub fn round_shift(v: i64, shift: u32) -> i64 {
    if shift == 0 {
        return v;
    }
    let half = 1i64 << (shift - 1);
    if v >= 0 {
        (v + half) >> shift
    } else {
        -((-v + half) >> shift)
    }
}

/// Fixed-point form `multiplier * 2^-shift` of a positive real, with the
/// multiplier in `[2^14, 2^15)`.
pub fn fixed_point(r: f64) -> Result<(i32, u8)> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Quantization(format!("rescale factor {r} is not positive")));
    }
    let mut shift = 14 - r.log2().floor() as i64;
    let mut m = round_half_away(r * (shift as f64).exp2());
    if m >= 32768.0 {
        m /= 2.0;
        shift -= 1;
    }
    if m < 16384.0 {
        m *= 2.0;
        shift += 1;
    }
    if !(0..=62).contains(&shift) {
        return Err(Error::Quantization(format!("rescale factor {r} needs shift {shift}")));
    }
    Ok((m as i32, shift as u8))
}

/// One 8-bit layer. Hidden layers emit i8 activations at `output_scale`;
/// head output layers emit raw i32 accumulators at `weight_scale * input_scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantLayer {
    pub spec: LayerSpec,
    pub placement: Placement,
    pub weights: Vec<i8>,
    pub bias: Vec<i32>,
    pub weight_scale: f32,
    pub input_scale: f32,
    pub output_scale: Option<f32>,
    /// Largest calibration activation magnitude (float units).
    pub activation_max: f32,
    pub multiplier: i32,
    pub shift: u8,
}

impl QuantLayer {
    pub fn accumulator_scale(&self) -> f64 {
        self.weight_scale as f64 * self.input_scale as f64
    }

    /// Bias, activation and requantization of one dot product.
    #[inline]
    pub fn finalize(&self, channel: usize, dot: i32) -> i32 {
        let acc = dot.wrapping_add(self.bias[channel]);
        let act = match self.spec.activation {
            Activation::Identity => acc,
            Activation::Relu => acc.max(0),
            Activation::LeakyRelu { shift } => {
                if acc < 0 {
                    round_shift(acc as i64, shift as u32) as i32
                } else {
                    acc
                }
            }
        };
        match self.output_scale {
            None => act,
            Some(_) => {
                let v = round_shift(act as i64 * self.multiplier as i64, self.shift as u32);
                v.clamp(-128, 127) as i32
            }
        }
    }

    /// Dot products without bias, i32 wrapping accumulation.
    pub fn dots(&self, g: &Geometry, input: &[i32], out: &mut Vec<i32>) {
        let in_vol = g.in_shape.volume();
        let out_vol = g.out_shape.volume();
        let kv = g.kernel_volume();
        out.clear();
        out.resize(g.output_len(), 0);
        if g.is_dense() {
            for (o, y) in out.iter_mut().enumerate() {
                let w = &self.weights[o * g.in_channels..][..g.in_channels];
                *y = w.iter().zip(input).fold(0i32, |acc, (&a, &b)| acc.wrapping_add(a as i32 * b));
            }
            return;
        }
        for o in 0..g.out_channels {
            for (site, taps) in g.taps.iter().enumerate() {
                let mut acc = 0i32;
                for i in 0..g.in_channels {
                    let w = &self.weights[(o * g.in_channels + i) * kv..][..kv];
                    let x = &input[i * in_vol..][..in_vol];
                    for &(k, pos) in taps {
                        acc = acc.wrapping_add(w[k] as i32 * x[pos]);
                    }
                }
                out[o * out_vol + site] = acc;
            }
        }
    }

    pub fn forward(&self, g: &Geometry, input: &[i32]) -> Vec<i32> {
        let mut out = Vec::new();
        self.dots(g, input, &mut out);
        let out_vol = g.out_shape.volume();
        for (idx, v) in out.iter_mut().enumerate() {
            *v = self.finalize(idx / out_vol, *v);
        }
        out
    }

    /// Worst-case accumulator magnitude for inputs in `[-128, 127]`.
    pub fn accumulator_bound(&self) -> i64 {
        let fan_in = self.weights.len() / self.bias.len().max(1);
        self.weights
            .chunks(fan_in.max(1))
            .zip(&self.bias)
            .map(|(w, b)| w.iter().map(|&v| (v as i64).abs() * 128).sum::<i64>() + (*b as i64).abs())
            .max()
            .unwrap_or(0)
    }
}

/// Integer network for one check type.
#[derive(Clone, Debug)]
pub struct QuantizedNetwork {
    pub spec: NetworkSpec,
    pub layers: Vec<QuantLayer>,
    pub input_scale: f32,
    geometries: Vec<Geometry>,
    cells: Vec<usize>,
}

impl PartialEq for QuantizedNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.layers == other.layers && self.input_scale == other.input_scale
    }
}

/// Per-layer integer outputs, canonical order.
#[derive(Clone, Debug)]
pub struct QuantTrace {
    pub input: Vec<i32>,
    pub outputs: Vec<Vec<i32>>,
}

impl QuantizedNetwork {
    pub fn from_layers(spec: NetworkSpec, layers: Vec<QuantLayer>, input_scale: f32) -> Result<Self> {
        spec.validate()?;
        let specs = spec.layers();
        if specs.len() != layers.len() {
            return Err(Error::SizeMismatch {
                expected: specs.len(),
                found: layers.len(),
            });
        }
        for ((placement, l), q) in specs.iter().zip(&layers) {
            if q.spec != *l || q.placement != *placement {
                return Err(Error::InvalidNetwork("layer does not match spec".into()));
            }
            if q.weights.len() != l.weight_count() || q.bias.len() != l.out_channels() {
                return Err(Error::InvalidNetwork("layer payload has wrong size".into()));
            }
            if q.weights.iter().any(|&w| w == i8::MIN) {
                return Err(Error::Quantization("weights must lie in [-127, 127]".into()));
            }
            if q.accumulator_bound() >= 1 << 31 {
                return Err(Error::Quantization("accumulator may overflow 32 bits".into()));
            }
        }
        let geometries = specs.iter().map(|(_, l)| l.geometry()).collect();
        let cells = spec.input_cells()?;
        Ok(Self {
            spec,
            layers,
            input_scale,
            geometries,
            cells,
        })
    }

    pub fn geometries(&self) -> &[Geometry] {
        &self.geometries
    }

    pub fn encode(&self, syndromes: &SyndromeArray) -> Result<Vec<i32>> {
        let x: Vec<f64> = super::float::encode_input(&self.spec, &self.cells, syndromes)?;
        Ok(x.iter().map(|&v| round_half_away(v * self.input_scale as f64) as i32).collect())
    }

    pub fn trace_input(&self, input: &[i32]) -> Result<QuantTrace> {
        if input.len() != self.spec.input_len() {
            return Err(Error::SizeMismatch {
                expected: self.spec.input_len(),
                found: input.len(),
            });
        }
        let nf = self.spec.frontend.len();
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut x = input.to_vec();
        for idx in 0..nf {
            x = self.layers[idx].forward(&self.geometries[idx], &x);
            outputs.push(x.clone());
        }
        for j in 0..self.spec.heads.len() {
            let a = nf + 2 * j;
            let h = self.layers[a].forward(&self.geometries[a], &x);
            let o = self.layers[a + 1].forward(&self.geometries[a + 1], &h);
            outputs.push(h);
            outputs.push(o);
        }
        Ok(QuantTrace {
            input: input.to_vec(),
            outputs,
        })
    }

    pub fn head_outputs(&self, trace: &QuantTrace) -> HeadOutputs<i32> {
        let nf = self.spec.frontend.len();
        HeadOutputs {
            heads: (0..self.spec.heads.len())
                .map(|j| trace.outputs[nf + 2 * j + 1].clone())
                .collect(),
        }
    }

    pub fn forward_input(&self, input: &[i32]) -> Result<HeadOutputs<i32>> {
        Ok(self.head_outputs(&self.trace_input(input)?))
    }

    pub fn forward(&self, syndromes: &SyndromeArray) -> Result<HeadOutputs<i32>> {
        self.forward_input(&self.encode(syndromes)?)
    }

    /// Logits converted back to float units.
    pub fn dequantize(&self, out: &HeadOutputs<i32>) -> HeadOutputs<f64> {
        let nf = self.spec.frontend.len();
        HeadOutputs {
            heads: out
                .heads
                .iter()
                .enumerate()
                .map(|(j, h)| {
                    let s = self.layers[nf + 2 * j + 1].accumulator_scale();
                    h.iter().map(|&v| v as f64 / s).collect()
                })
                .collect(),
        }
    }
}

pub fn forward_quantized(qnet: &QuantizedNetwork, syndromes: &SyndromeArray) -> Result<HeadOutputs<i32>> {
    qnet.forward(syndromes)
}

/// Largest `|activation|` per layer over a calibration batch.
pub fn activation_maxima<S: Scalar>(net: &FloatNetwork<S>, calibration: &[Vec<S>]) -> Result<Vec<f64>> {
    let nl = net.layer_specs().len();
    let mut maxima = vec![0.0f64; nl];
    for x in calibration {
        let tr = net.trace_input(x)?;
        for (idx, pre) in tr.pre.iter().enumerate() {
            let act = net.layer_specs()[idx].activation;
            for &v in pre {
                let a = super::float::activate(act, v).as_f64().abs();
                if a > maxima[idx] {
                    maxima[idx] = a;
                }
            }
        }
    }
    Ok(maxima)
}

/// Non-saturating 8-bit quantization: the largest weight of each layer maps
/// to 127 and activation scales come from the calibration maxima.
pub fn quantize<S: Scalar>(net: &FloatNetwork<S>, calibration: &[SyndromeArray]) -> Result<QuantizedNetwork> {
    let inputs = calibration
        .iter()
        .map(|s| net.encode(s))
        .collect::<Result<Vec<_>>>()?;
    quantize_inputs(net, &inputs)
}

pub fn quantize_inputs<S: Scalar>(net: &FloatNetwork<S>, calibration: &[Vec<S>]) -> Result<QuantizedNetwork> {
    if calibration.is_empty() {
        return Err(Error::Quantization("calibration batch is empty".into()));
    }
    let maxima = activation_maxima(net, calibration)?;
    let spec = &net.spec;
    let nf = spec.frontend.len();
    let mut out_scales = vec![0.0f32; maxima.len()];
    for (idx, &m) in maxima.iter().enumerate() {
        out_scales[idx] = if m > 0.0 { (127.0 / m) as f32 } else { 127.0 };
    }
    let mut layers = Vec::with_capacity(maxima.len());
    for (idx, (placement, layer)) in spec.layers().into_iter().enumerate() {
        let p = &net.weights.layers[idx];
        let input_scale = match placement {
            Placement::Frontend(0) => INPUT_SCALE,
            Placement::Frontend(_) => out_scales[idx - 1],
            Placement::HeadHidden(_) => {
                if nf == 0 {
                    INPUT_SCALE
                } else {
                    out_scales[nf - 1]
                }
            }
            Placement::HeadOutput(_) => out_scales[idx - 1],
        };
        let wmax = p.weights.iter().map(|w| w.as_f64().abs()).fold(0.0, f64::max);
        if wmax == 0.0 || !wmax.is_finite() {
            return Err(Error::Quantization(format!("layer {idx}: weight tensor is all zero or not finite")));
        }
        if let Activation::LeakyRelu { shift } = layer.activation {
            if shift > 30 {
                return Err(Error::Quantization(format!("layer {idx}: leaky slope 2^-{shift} too small")));
            }
        }
        let weight_scale = (127.0 / wmax) as f32;
        let ws = weight_scale as f64;
        let weights = p
            .weights
            .iter()
            .map(|w| round_half_away(w.as_f64() * ws).clamp(-127.0, 127.0) as i8)
            .collect();
        let acc_scale = ws * input_scale as f64;
        let bias = p
            .bias
            .iter()
            .map(|b| {
                let v = round_half_away(b.as_f64() * acc_scale);
                if v.abs() >= (1u64 << 31) as f64 {
                    Err(Error::Quantization(format!("layer {idx}: bias {b} overflows i32")))
                } else {
                    Ok(v as i32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let (output_scale, multiplier, shift) = match placement {
            Placement::HeadOutput(_) => (None, 0, 0),
            _ => {
                let (m, s) = fixed_point(out_scales[idx] as f64 / acc_scale)?;
                (Some(out_scales[idx]), m, s)
            }
        };
        layers.push(QuantLayer {
            spec: layer,
            placement,
            weights,
            bias,
            weight_scale,
            input_scale,
            output_scale,
            activation_max: maxima[idx] as f32,
            multiplier,
            shift,
        });
    }
    QuantizedNetwork::from_layers(spec.clone(), layers, INPUT_SCALE)
}
