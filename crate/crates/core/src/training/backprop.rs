use rayon::prelude::*;

use crate::code::CheckType;
use crate::error::{Error, Result};
use crate::neural::{activate_grad, FloatNetwork, FloatWeights, ForwardTrace, Geometry, LayerParams, NetworkSpec};
use crate::noise::LabeledSample;
use crate::Scalar;

/// Samples per gradient chunk. Chunks are summed in a fixed pairwise tree,
/// so results do not depend on the number of worker threads.
const CHUNK: usize = 32;

/// Encoded input plus one class index per head.
#[derive(Clone, Debug, PartialEq)]
pub struct Example<S> {
    pub input: Vec<S>,
    pub targets: Vec<usize>,
}

/// Head targets of a sample: the class bit, then each syndrome piece read as
/// an integer with its first bit least significant.
pub fn sample_targets(spec: &NetworkSpec, sample: &LabeledSample) -> Vec<usize> {
    let t = spec.check_type;
    let s = sample.s(t);
    let mut targets = vec![sample.class(t).bit() as usize];
    for (offset, size) in spec.piece_offsets().into_iter().zip(&spec.piece_sizes) {
        targets.push(s.field(offset, *size) as usize);
    }
    targets
}

/// Encodes samples for the network's check type.
pub fn examples<S: Scalar>(net: &FloatNetwork<S>, samples: &[LabeledSample]) -> Result<Vec<Example<S>>> {
    samples
        .iter()
        .map(|s| {
            Ok(Example {
                input: net.encode(s.syndromes.get(net.spec.check_type))?,
                targets: sample_targets(&net.spec, s),
            })
        })
        .collect()
}

/// Numerically stable `log(sum(exp(z)))`.
fn log_sum_exp<S: Scalar>(z: &[S]) -> S {
    let m = z.iter().copied().fold(S::neg_infinity(), S::max);
    m + z.iter().map(|&v| (v - m).exp()).sum::<S>().ln()
}

/// Cross-entropy of `softmax(logits)` against `target`.
pub fn cross_entropy<S: Scalar>(logits: &[S], target: usize) -> S {
    log_sum_exp(logits) - logits[target]
}

fn check_targets<S: Scalar>(net: &FloatNetwork<S>, ex: &Example<S>) -> Result<()> {
    if ex.targets.len() != net.spec.heads.len() {
        return Err(Error::SizeMismatch {
            expected: net.spec.heads.len(),
            found: ex.targets.len(),
        });
    }
    for (head, (&label, h)) in ex.targets.iter().zip(&net.spec.heads).enumerate() {
        if label >= h.classes() {
            return Err(Error::LabelOutOfRange {
                head,
                label,
                classes: h.classes(),
            });
        }
    }
    Ok(())
}

/// Which heads contribute to the loss.
fn head_on(mask: Option<&[bool]>, j: usize) -> bool {
    mask.map_or(true, |m| m[j])
}

/// Mean over the batch of the summed head cross-entropies.
pub fn loss<S: Scalar>(net: &FloatNetwork<S>, weights: &FloatWeights<S>, batch: &[Example<S>]) -> Result<S> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut total = S::zero();
    for ex in batch {
        check_targets(net, ex)?;
        let tr = net.trace_with(weights, &ex.input)?;
        for (h, &t) in tr.logits.heads.iter().zip(&ex.targets) {
            total += cross_entropy(h, t);
        }
    }
    Ok(total / S::lit(batch.len() as f64))
}

/// Loss, gradient and per-head correct-prediction counts of a batch.
#[derive(Clone, Debug)]
pub struct BatchGradient<S> {
    pub loss: S,
    pub grads: FloatWeights<S>,
    pub correct: Vec<usize>,
}

/// Exact gradient of [`loss`].
pub fn gradients<S: Scalar>(
    net: &FloatNetwork<S>,
    weights: &FloatWeights<S>,
    batch: &[Example<S>],
) -> Result<BatchGradient<S>> {
    gradients_masked(net, weights, batch, None)
}

/// Gradient of the loss restricted to heads with `mask[j]` set.
pub fn gradients_masked<S: Scalar>(
    net: &FloatNetwork<S>,
    weights: &FloatWeights<S>,
    batch: &[Example<S>],
    mask: Option<&[bool]>,
) -> Result<BatchGradient<S>> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let scale = S::one() / S::lit(batch.len() as f64);
    let parts = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = BatchGradient {
                loss: S::zero(),
                grads: zeros_like(weights),
                correct: vec![0; net.spec.heads.len()],
            };
            for ex in chunk {
                accumulate(net, weights, ex, scale, mask, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tree_sum(parts))
}

fn zeros_like<S: Scalar>(w: &FloatWeights<S>) -> FloatWeights<S> {
    FloatWeights {
        layers: w
            .layers
            .iter()
            .map(|l| LayerParams {
                weights: vec![S::zero(); l.weights.len()],
                bias: vec![S::zero(); l.bias.len()],
            })
            .collect(),
    }
}

fn add_into<S: Scalar>(a: &mut BatchGradient<S>, b: &BatchGradient<S>) {
    a.loss += b.loss;
    for (la, lb) in a.grads.layers.iter_mut().zip(&b.grads.layers) {
        for (x, y) in la.weights.iter_mut().zip(&lb.weights) {
            *x += *y;
        }
        for (x, y) in la.bias.iter_mut().zip(&lb.bias) {
            *x += *y;
        }
    }
    for (x, y) in a.correct.iter_mut().zip(&b.correct) {
        *x += y;
    }
}

/// Pairwise sum in a fixed tree shape.
fn tree_sum<S: Scalar>(mut parts: Vec<BatchGradient<S>>) -> BatchGradient<S> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                add_into(&mut a, &b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().expect("at least one chunk")
}

/// Back through one layer given the gradient at its pre-activation.
fn linear_backward<S: Scalar>(
    g: &Geometry,
    p: &LayerParams<S>,
    x: &[S],
    gpre: &[S],
    grad: &mut LayerParams<S>,
    gin: Option<&mut Vec<S>>,
) {
    let in_vol = g.in_shape.volume();
    let out_vol = g.out_shape.volume();
    let kv = g.kernel_volume();
    let mut gin = gin.map(|v| {
        v.clear();
        v.resize(g.input_len(), S::zero());
        v
    });
    if g.is_dense() {
        for (o, &go) in gpre.iter().enumerate() {
            if go == S::zero() {
                continue;
            }
            grad.bias[o] += go;
            let gw = &mut grad.weights[o * g.in_channels..][..g.in_channels];
            for (w, &xi) in gw.iter_mut().zip(x) {
                *w += go * xi;
            }
            if let Some(gin) = gin.as_deref_mut() {
                let w = &p.weights[o * g.in_channels..][..g.in_channels];
                for (gi, &wi) in gin.iter_mut().zip(w) {
                    *gi += go * wi;
                }
            }
        }
        return;
    }
    for o in 0..g.out_channels {
        for (site, taps) in g.taps.iter().enumerate() {
            let go = gpre[o * out_vol + site];
            if go == S::zero() {
                continue;
            }
            grad.bias[o] += go;
            for i in 0..g.in_channels {
                let base = (o * g.in_channels + i) * kv;
                for &(k, pos) in taps {
                    grad.weights[base + k] += go * x[i * in_vol + pos];
                    if let Some(gin) = gin.as_deref_mut() {
                        gin[i * in_vol + pos] += go * p.weights[base + k];
                    }
                }
            }
        }
    }
}

/// Back through every selected head; returns the head loss and the gradient
/// at the frontend output, summed over heads.
#[allow(clippy::too_many_arguments)]
fn backward_heads<S: Scalar>(
    net: &FloatNetwork<S>,
    weights: &FloatWeights<S>,
    tr: &ForwardTrace<S>,
    targets: &[usize],
    scale: S,
    mask: Option<&[bool]>,
    grads: &mut FloatWeights<S>,
) -> (S, Vec<S>) {
    let specs = net.layer_specs();
    let geoms = net.geometries();
    let nf = net.spec.frontend.len();
    let mut loss = S::zero();
    let mut gfront = vec![S::zero(); tr.inputs[nf].len()];
    let mut gtmp = Vec::new();
    for (j, (logits, &target)) in tr.logits.heads.iter().zip(targets).enumerate() {
        if !head_on(mask, j) {
            continue;
        }
        loss += cross_entropy(logits, target) * scale;
        // d CE / d logits = softmax - onehot.
        let lse = log_sum_exp(logits);
        let gout: Vec<S> = logits
            .iter()
            .enumerate()
            .map(|(i, &z)| ((z - lse).exp() - if i == target { S::one() } else { S::zero() }) * scale)
            .collect();
        let (hi, oi) = (nf + 2 * j, nf + 2 * j + 1);
        linear_backward(&geoms[oi], &weights.layers[oi], &tr.inputs[oi], &gout, &mut grads.layers[oi], Some(&mut gtmp));
        let ghid: Vec<S> = gtmp
            .iter()
            .zip(&tr.pre[hi])
            .map(|(&g, &z)| g * activate_grad(specs[hi].activation, z))
            .collect();
        linear_backward(&geoms[hi], &weights.layers[hi], &tr.inputs[hi], &ghid, &mut grads.layers[hi], Some(&mut gtmp));
        for (a, b) in gfront.iter_mut().zip(&gtmp) {
            *a += *b;
        }
    }
    (loss, gfront)
}

fn accumulate<S: Scalar>(
    net: &FloatNetwork<S>,
    weights: &FloatWeights<S>,
    ex: &Example<S>,
    scale: S,
    mask: Option<&[bool]>,
    acc: &mut BatchGradient<S>,
) -> Result<()> {
    check_targets(net, ex)?;
    let tr = net.trace_with(weights, &ex.input)?;
    for (j, (logits, &target)) in tr.logits.heads.iter().zip(&ex.targets).enumerate() {
        let best = (0..logits.len()).fold(0, |b, i| if logits[i] > logits[b] { i } else { b });
        if best == target {
            acc.correct[j] += 1;
        }
    }
    let (loss, mut gout) = backward_heads(net, weights, &tr, &ex.targets, scale, mask, &mut acc.grads);
    acc.loss += loss;
    let specs = net.layer_specs();
    let geoms = net.geometries();
    let mut gtmp = Vec::new();
    for idx in (0..net.spec.frontend.len()).rev() {
        let gpre: Vec<S> = gout
            .iter()
            .zip(&tr.pre[idx])
            .map(|(&g, &z)| g * activate_grad(specs[idx].activation, z))
            .collect();
        let gin = if idx > 0 { Some(&mut gtmp) } else { None };
        linear_backward(&geoms[idx], &weights.layers[idx], &tr.inputs[idx], &gpre, &mut acc.grads.layers[idx], gin);
        if idx > 0 {
            std::mem::swap(&mut gout, &mut gtmp);
        }
    }
    Ok(())
}

/// Gradient of the single-example loss with respect to the frontend output,
/// summed over the selected heads.
pub fn frontend_output_gradient<S: Scalar>(
    net: &FloatNetwork<S>,
    ex: &Example<S>,
    mask: Option<&[bool]>,
) -> Result<Vec<S>> {
    check_targets(net, ex)?;
    let tr = net.trace_input(&ex.input)?;
    let mut scratch = zeros_like(&net.weights);
    Ok(backward_heads(net, &net.weights, &tr, &ex.targets, S::one(), mask, &mut scratch).1)
}

/// Class index of every head for a check type, as used by [`sample_targets`].
pub fn head_predictions(spec: &NetworkSpec, argmax: &[usize], t: CheckType) -> Option<(bool, crate::code::BitRow)> {
    if t != spec.check_type || argmax.len() != spec.heads.len() {
        return None;
    }
    let mut s = crate::code::BitRow::zeros(spec.num_checks());
    for ((offset, size), &v) in spec.piece_offsets().into_iter().zip(&spec.piece_sizes).zip(&argmax[1..]) {
        s.set_field(offset, *size, v as u64);
    }
    Some((argmax[0] == 1, s))
}
