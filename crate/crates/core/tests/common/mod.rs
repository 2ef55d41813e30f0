#![allow(dead_code)]

use rand::Rng;
use rscw::neural::{FloatNetwork, FloatWeights, NetworkSpec, SpecWidths};
use rscw::noise::{stream_rng, SyndromeArray};
use rscw::training::{gradients, loss, Example};

pub fn tiny_widths() -> SpecWidths {
    SpecWidths {
        conv_channels: 3,
        frontend_width: 10,
        head_hidden: 6,
        piece_size: 3,
    }
}

/// Weights and biases uniform in (-1, 1).
pub fn random_weights(spec: &NetworkSpec, seed: u64) -> FloatWeights<f64> {
    let mut rng = stream_rng(seed, 99);
    let mut w = FloatWeights::<f64>::zeros(spec);
    for l in &mut w.layers {
        for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    w
}

pub fn random_syndromes(rounds: usize, checks: usize, density: f64, seed: u64, n: usize) -> Vec<SyndromeArray> {
    let mut rng = stream_rng(seed, 5);
    (0..n)
        .map(|_| {
            let bits = (0..rounds * checks).map(|_| rng.gen_bool(density) as u8).collect();
            SyndromeArray::from_bits(rounds, checks, bits).unwrap()
        })
        .collect()
}

/// Random inputs with uniformly drawn head targets.
pub fn random_examples(net: &FloatNetwork<f64>, seed: u64, n: usize) -> Vec<Example<f64>> {
    let spec = &net.spec;
    let mut rng = stream_rng(seed, 6);
    random_syndromes(spec.rounds, spec.num_checks(), 0.3, seed, n)
        .iter()
        .map(|s| Example {
            input: net.encode(s).unwrap(),
            targets: spec.heads.iter().map(|h| rng.gen_range(0..h.classes())).collect(),
        })
        .collect()
}

/// Flat parameter range of every layer.
pub fn layer_ranges(w: &FloatWeights<f64>) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    w.layers
        .iter()
        .map(|l| {
            let r = start..start + l.weights.len() + l.bias.len();
            start = r.end;
            r
        })
        .collect()
}

/// Largest relative gap between backprop and central differences with step
/// `h` over `probes` parameters, cycling through the layers so each one is
/// probed. Relative gaps use `max(|g|, |fd|, 1e-6)` as denominator.
pub fn finite_difference_gap(
    net: &FloatNetwork<f64>,
    batch: &[Example<f64>],
    probes: usize,
    h: f64,
    seed: u64,
) -> (f64, usize) {
    let g = gradients(net, &net.weights, batch).unwrap().grads;
    let ranges = layer_ranges(&net.weights);
    let mut rng = stream_rng(seed, 7);
    let mut worst: f64 = 0.0;
    for probe in 0..probes {
        let r = &ranges[probe % ranges.len()];
        let idx = rng.gen_range(r.clone());
        let mut w = net.weights.clone();
        let base = w.get_flat(idx);
        w.set_flat(idx, base + h);
        let up = loss(net, &w, batch).unwrap();
        w.set_flat(idx, base - h);
        let down = loss(net, &w, batch).unwrap();
        let fd = (up - down) / (2.0 * h);
        let bp = g.get_flat(idx);
        let rel = (fd - bp).abs() / bp.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    (worst, ranges.len())
}
