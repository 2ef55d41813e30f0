use rand::Rng;

use super::spec::{Activation, Geometry, LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::noise::SyndromeArray;
use crate::Scalar;

/// Weights `[out][in][kt][kh][kw]` (or `[out][in]` for FC) and one bias per
/// output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<S> {
    pub weights: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> LayerParams<S> {
    pub fn zeros(layer: &LayerSpec) -> Self {
        Self {
            weights: vec![S::zero(); layer.weight_count()],
            bias: vec![S::zero(); layer.out_channels()],
        }
    }

    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot<R: Rng + ?Sized>(layer: &LayerSpec, rng: &mut R) -> Self {
        let g = layer.geometry();
        let kv = g.kernel_volume();
        let limit = (6.0 / ((g.in_channels + g.out_channels) * kv) as f64).sqrt();
        Self {
            weights: (0..layer.weight_count())
                .map(|_| S::lit(rng.gen_range(-limit..=limit)))
                .collect(),
            bias: vec![S::zero(); layer.out_channels()],
        }
    }

    pub fn cast<T: Scalar>(&self) -> LayerParams<T> {
        LayerParams {
            weights: self.weights.iter().map(|w| T::lit(w.as_f64())).collect(),
            bias: self.bias.iter().map(|b| T::lit(b.as_f64())).collect(),
        }
    }
}

/// Parameters of every layer in [`NetworkSpec::layers`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatWeights<S> {
    pub layers: Vec<LayerParams<S>>,
}

impl<S: Scalar> FloatWeights<S> {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self {
            layers: spec.layers().iter().map(|(_, l)| LayerParams::zeros(l)).collect(),
        }
    }

    pub fn glorot<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Self {
        Self {
            layers: spec.layers().iter().map(|(_, l)| LayerParams::glorot(l, rng)).collect(),
        }
    }

    pub fn check(&self, spec: &NetworkSpec) -> Result<()> {
        let layers = spec.layers();
        if layers.len() != self.layers.len() {
            return Err(Error::SizeMismatch {
                expected: layers.len(),
                found: self.layers.len(),
            });
        }
        for ((_, l), p) in layers.iter().zip(&self.layers) {
            if p.weights.len() != l.weight_count() || p.bias.len() != l.out_channels() {
                return Err(Error::SizeMismatch {
                    expected: l.param_count(),
                    found: p.weights.len() + p.bias.len(),
                });
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters flattened, weights before bias per layer.
    pub fn flatten(&self) -> Vec<S> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn get_flat(&self, mut index: usize) -> S {
        for l in &self.layers {
            if index < l.weights.len() {
                return l.weights[index];
            }
            index -= l.weights.len();
            if index < l.bias.len() {
                return l.bias[index];
            }
            index -= l.bias.len();
        }
        panic!("parameter index out of range")
    }

    pub fn set_flat(&mut self, mut index: usize, value: S) {
        for l in &mut self.layers {
            if index < l.weights.len() {
                l.weights[index] = value;
                return;
            }
            index -= l.weights.len();
            if index < l.bias.len() {
                l.bias[index] = value;
                return;
            }
            index -= l.bias.len();
        }
        panic!("parameter index out of range")
    }

    pub fn cast<T: Scalar>(&self) -> FloatWeights<T> {
        FloatWeights {
            layers: self.layers.iter().map(|l| l.cast()).collect(),
        }
    }
}

/// Pre-activation of a layer: `out[o][site] = b[o] + sum W[o][i][k] x[i][pos]`.
pub fn linear<S: Scalar>(g: &Geometry, p: &LayerParams<S>, input: &[S], out: &mut Vec<S>) {
    let in_vol = g.in_shape.volume();
    let out_vol = g.out_shape.volume();
    let kv = g.kernel_volume();
    out.clear();
    out.resize(g.output_len(), S::zero());
    if g.is_dense() {
        for (o, y) in out.iter_mut().enumerate() {
            let w = &p.weights[o * g.in_channels..][..g.in_channels];
            *y = p.bias[o] + w.iter().zip(input).fold(S::zero(), |acc, (&a, &b)| acc + a * b);
        }
        return;
    }
    for o in 0..g.out_channels {
        for (site, taps) in g.taps.iter().enumerate() {
            let mut acc = p.bias[o];
            for i in 0..g.in_channels {
                let w = &p.weights[(o * g.in_channels + i) * kv..][..kv];
                let x = &input[i * in_vol..][..in_vol];
                for &(k, pos) in taps {
                    acc += w[k] * x[pos];
                }
            }
            out[o * out_vol + site] = acc;
        }
    }
}

pub fn activate<S: Scalar>(a: Activation, v: S) -> S {
    match a {
        Activation::Identity => v,
        Activation::Relu => v.max(S::zero()),
        Activation::LeakyRelu { .. } => {
            if v < S::zero() {
                v * S::lit(a.negative_slope())
            } else {
                v
            }
        }
    }
}

/// Derivative with respect to the pre-activation (0 at the ReLU kink).
pub fn activate_grad<S: Scalar>(a: Activation, pre: S) -> S {
    match a {
        Activation::Identity => S::one(),
        _ if pre > S::zero() => S::one(),
        Activation::Relu => S::zero(),
        Activation::LeakyRelu { .. } => S::lit(a.negative_slope()),
    }
}

/// One layer, activation applied.
pub fn layer_forward<S: Scalar>(layer: &LayerSpec, p: &LayerParams<S>, input: &[S]) -> Result<Vec<S>> {
    if input.len() != layer.input_len() {
        return Err(Error::SizeMismatch {
            expected: layer.input_len(),
            found: input.len(),
        });
    }
    let mut out = Vec::new();
    linear(&layer.geometry(), p, input, &mut out);
    for v in &mut out {
        *v = activate(layer.activation, *v);
    }
    Ok(out)
}

/// Raw logits of every head; index 0 is the class head.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadOutputs<T> {
    pub heads: Vec<Vec<T>>,
}

impl<T: PartialOrd + Copy> HeadOutputs<T> {
    /// Index of the largest logit per head, lowest index on ties.
    pub fn argmax(&self) -> Vec<usize> {
        self.heads
            .iter()
            .map(|h| {
                let mut best = 0;
                for (i, v) in h.iter().enumerate() {
                    if *v > h[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }
}

/// Scatters the syndrome bits of one check type into the network input volume.
pub fn encode_input<S: Scalar>(spec: &NetworkSpec, cells: &[usize], syndromes: &SyndromeArray) -> Result<Vec<S>> {
    if syndromes.rounds() != spec.rounds || syndromes.checks() != cells.len() {
        return Err(Error::SizeMismatch {
            expected: spec.rounds * cells.len(),
            found: syndromes.rounds() * syndromes.checks(),
        });
    }
    let plane = spec.input.h * spec.input.w;
    let mut x = vec![S::zero(); spec.input_len()];
    for t in 0..spec.rounds {
        for (k, &cell) in cells.iter().enumerate() {
            if syndromes.get(t, k) {
                x[t * plane + cell] = S::one();
            }
        }
    }
    Ok(x)
}

/// Intermediate values kept for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardTrace<S> {
    /// Input of each layer in canonical order.
    pub inputs: Vec<Vec<S>>,
    /// Pre-activation of each layer.
    pub pre: Vec<Vec<S>>,
    pub logits: HeadOutputs<S>,
}

/// Float network bound to its spec, with geometries and input map cached.
#[derive(Clone, Debug)]
pub struct FloatNetwork<S> {
    pub spec: NetworkSpec,
    pub weights: FloatWeights<S>,
    layers: Vec<LayerSpec>,
    geometries: Vec<Geometry>,
    cells: Vec<usize>,
}

impl<S: Scalar> FloatNetwork<S> {
    pub fn new(spec: NetworkSpec, weights: FloatWeights<S>) -> Result<Self> {
        spec.validate()?;
        weights.check(&spec)?;
        let layers: Vec<LayerSpec> = spec.layers().into_iter().map(|(_, l)| l).collect();
        let geometries = layers.iter().map(|l| l.geometry()).collect();
        let cells = spec.input_cells()?;
        Ok(Self {
            spec,
            weights,
            layers,
            geometries,
            cells,
        })
    }

    pub fn geometries(&self) -> &[Geometry] {
        &self.geometries
    }

    pub fn layer_specs(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn encode(&self, syndromes: &SyndromeArray) -> Result<Vec<S>> {
        encode_input(&self.spec, &self.cells, syndromes)
    }

    pub fn forward(&self, syndromes: &SyndromeArray) -> Result<HeadOutputs<S>> {
        Ok(self.trace_input(&self.encode(syndromes)?)?.logits)
    }

    pub fn forward_input(&self, input: &[S]) -> Result<HeadOutputs<S>> {
        Ok(self.trace_input(input)?.logits)
    }

    pub fn trace_input(&self, input: &[S]) -> Result<ForwardTrace<S>> {
        self.trace_with(&self.weights, input)
    }

    /// Forward pass with substitute weights of the same shape.
    pub fn trace_with(&self, weights: &FloatWeights<S>, input: &[S]) -> Result<ForwardTrace<S>> {
        if input.len() != self.spec.input_len() {
            return Err(Error::SizeMismatch {
                expected: self.spec.input_len(),
                found: input.len(),
            });
        }
        let nf = self.spec.frontend.len();
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = input.to_vec();
        let run = |idx: usize, x: &[S], pre: &mut Vec<Vec<S>>, inputs: &mut Vec<Vec<S>>| {
            let mut z = Vec::new();
            linear(&self.geometries[idx], &weights.layers[idx], x, &mut z);
            let a: Vec<S> = z.iter().map(|&v| activate(self.layers[idx].activation, v)).collect();
            inputs.push(x.to_vec());
            pre.push(z);
            a
        };
        for idx in 0..nf {
            x = run(idx, &x, &mut pre, &mut inputs);
        }
        let mut heads = Vec::with_capacity(self.spec.heads.len());
        for j in 0..self.spec.heads.len() {
            let h = run(nf + 2 * j, &x, &mut pre, &mut inputs);
            heads.push(run(nf + 2 * j + 1, &h, &mut pre, &mut inputs));
        }
        Ok(ForwardTrace {
            inputs,
            pre,
            logits: HeadOutputs { heads },
        })
    }
}

/// Logits of `weights` under `spec` for one syndrome array.
pub fn forward_float<S: Scalar>(
    spec: &NetworkSpec,
    weights: &FloatWeights<S>,
    syndromes: &SyndromeArray,
) -> Result<HeadOutputs<S>> {
    FloatNetwork::new(spec.clone(), weights.clone())?.forward(syndromes)
}
