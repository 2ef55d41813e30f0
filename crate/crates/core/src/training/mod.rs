//! Multi-task cross-entropy training with hand-written backpropagation.

mod backprop;
mod train;

pub use backprop::{
    cross_entropy, examples, frontend_output_gradient, gradients, gradients_masked, head_predictions, loss,
    sample_targets, BatchGradient, Example,
};
pub use train::{
    epoch_permutation, evaluate, initial_weights, train, train_examples, write_log_csv, EpochLog, Optimizer,
    OptimizerState, TrainConfig, TrainOutcome,
};
