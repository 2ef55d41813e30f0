use std::io::Write;

use rand::seq::SliceRandom;

use super::backprop::{examples, gradients, Example};
use crate::error::{Error, Result};
use crate::neural::{FloatNetwork, FloatWeights, NetworkSpec};
use crate::noise::{stream_rng, LabeledSample};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Optimizer {
    Sgd { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Visit samples in a fresh seed-derived order every epoch.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 1000,
            epochs: 10,
            learning_rate: 1e-3,
            optimizer: Optimizer::adam(),
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}

/// Sample order of one epoch.
pub fn epoch_permutation(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    // Streams below 2^63 belong to samples and trajectories.
    let mut rng = stream_rng(seed, (1 << 63) | epoch as u64);
    order.shuffle(&mut rng);
    order
}

/// Optimizer state over the flattened parameter vector.
#[derive(Clone, Debug)]
pub struct OptimizerState<S> {
    optimizer: Optimizer,
    learning_rate: S,
    m: Vec<S>,
    v: Vec<S>,
    step: i32,
}

impl<S: Scalar> OptimizerState<S> {
    pub fn new(optimizer: Optimizer, learning_rate: f64, params: usize) -> Self {
        Self {
            optimizer,
            learning_rate: S::lit(learning_rate),
            m: vec![S::zero(); params],
            v: vec![S::zero(); params],
            step: 0,
        }
    }

    pub fn apply(&mut self, weights: &mut FloatWeights<S>, grads: &FloatWeights<S>) {
        self.step += 1;
        let lr = self.learning_rate;
        let mut idx = 0;
        for (lw, lg) in weights.layers.iter_mut().zip(&grads.layers) {
            let pairs = lw.weights.iter_mut().zip(&lg.weights).chain(lw.bias.iter_mut().zip(&lg.bias));
            for (w, &g) in pairs {
                match self.optimizer {
                    Optimizer::Sgd { momentum } => {
                        let m = S::lit(momentum) * self.m[idx] + g;
                        self.m[idx] = m;
                        *w -= lr * m;
                    }
                    Optimizer::Adam { beta1, beta2, eps } => {
                        let (b1, b2) = (S::lit(beta1), S::lit(beta2));
                        let m = b1 * self.m[idx] + (S::one() - b1) * g;
                        let v = b2 * self.v[idx] + (S::one() - b2) * g * g;
                        self.m[idx] = m;
                        self.v[idx] = v;
                        let mh = m / (S::one() - b1.powi(self.step));
                        let vh = v / (S::one() - b2.powi(self.step));
                        *w -= lr * mh / (vh.sqrt() + S::lit(eps));
                    }
                }
                idx += 1;
            }
        }
    }
}

/// Mean training loss and per-head accuracy of one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub head_accuracy: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<S> {
    pub weights: FloatWeights<S>,
    pub log: Vec<EpochLog>,
}

/// Initial weights used by [`train`] for a given seed.
pub fn initial_weights<S: Scalar>(spec: &NetworkSpec, seed: u64) -> FloatWeights<S> {
    FloatWeights::glorot(spec, &mut stream_rng(seed, u64::MAX))
}

/// Trains a fresh network for `spec.check_type` on labelled samples.
pub fn train<S: Scalar>(spec: &NetworkSpec, data: &[LabeledSample], config: &TrainConfig) -> Result<TrainOutcome<S>> {
    let net = FloatNetwork::new(spec.clone(), initial_weights::<S>(spec, config.seed))?;
    let data = examples(&net, data)?;
    train_examples(&net, &data, config)
}

/// Trains starting from `net.weights`.
pub fn train_examples<S: Scalar>(
    net: &FloatNetwork<S>,
    data: &[Example<S>],
    config: &TrainConfig,
) -> Result<TrainOutcome<S>> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let mut weights = net.weights.clone();
    let mut state = OptimizerState::new(config.optimizer, config.learning_rate, weights.param_count());
    let mut log = Vec::with_capacity(config.epochs);
    let heads = net.spec.heads.len();
    let mut batch = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        let order: Vec<usize> = if config.shuffle {
            epoch_permutation(config.seed, epoch, data.len())
        } else {
            (0..data.len()).collect()
        };
        let mut loss_sum = 0.0;
        let mut correct = vec![0usize; heads];
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            batch.clear();
            batch.extend(idx.iter().map(|&i| data[i].clone()));
            let g = gradients(net, &weights, &batch)?;
            let l = g.loss.as_f64();
            if !l.is_finite() {
                return Err(Error::Diverged { epoch, batch: b, loss: l });
            }
            loss_sum += l * batch.len() as f64;
            for (c, n) in correct.iter_mut().zip(&g.correct) {
                *c += n;
            }
            state.apply(&mut weights, &g.grads);
        }
        let n = data.len() as f64;
        let entry = EpochLog {
            epoch,
            loss: loss_sum / n,
            head_accuracy: correct.iter().map(|&c| c as f64 / n).collect(),
        };
        log::info!("epoch {epoch}: loss {:.5}, class accuracy {:.4}", entry.loss, entry.head_accuracy[0]);
        log.push(entry);
    }
    Ok(TrainOutcome { weights, log })
}

/// CSV with columns `epoch,loss,head0,head1,...`.
pub fn write_log_csv<W: Write>(w: &mut W, log: &[EpochLog]) -> Result<()> {
    let heads = log.first().map_or(0, |e| e.head_accuracy.len());
    write!(w, "epoch,loss")?;
    for j in 0..heads {
        write!(w, ",head{j}_accuracy")?;
    }
    writeln!(w)?;
    for e in log {
        write!(w, "{},{}", e.epoch, e.loss)?;
        for a in &e.head_accuracy {
            write!(w, ",{a}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Fraction of examples where every head's argmax matches its target, and
/// the per-head accuracies.
pub fn evaluate<S: Scalar>(net: &FloatNetwork<S>, data: &[Example<S>]) -> Result<(f64, Vec<f64>)> {
    let heads = net.spec.heads.len();
    let mut per_head = vec![0usize; heads];
    let mut all = 0usize;
    for ex in data {
        let pred = net.forward_input(&ex.input)?.argmax();
        let mut ok = true;
        for (j, (p, t)) in pred.iter().zip(&ex.targets).enumerate() {
            if p == t {
                per_head[j] += 1;
            } else {
                ok = false;
            }
        }
        all += ok as usize;
    }
    let n = data.len().max(1) as f64;
    Ok((all as f64 / n, per_head.iter().map(|&c| c as f64 / n).collect()))
}
