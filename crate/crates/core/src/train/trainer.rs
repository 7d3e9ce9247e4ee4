use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::data::Dataset;
use crate::error::{domain, Error, Result};
use crate::kaf::fmt_real;
use crate::nn::loss::softmax_cross_entropy;
use crate::nn::{Mode, Network};
use crate::train::{adam_step_network, AdamState, EpochSampler, TrainConfig};

const EVAL_CHUNK: usize = 256;

/// Everything recorded by one [`train`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// `(k, loss)`: the minibatch loss (penalty included) seen before update `k + 1`.
    pub loss_curve: Vec<(usize, f64)>,
    /// `(k, accuracy)` after `k` updates.
    pub val_curve: Vec<(usize, f64)>,
    pub best_iteration: usize,
    pub best_val_accuracy: f64,
    /// Updates performed before stopping.
    pub stop_iteration: usize,
    /// Whether the run ended on patience rather than the iteration cap.
    pub early_stopped: bool,
    /// Test accuracy of the restored best-validation parameters.
    pub test_accuracy: f64,
    /// Test accuracy of the parameters in place when training stopped.
    pub test_accuracy_at_stop: f64,
    pub param_count: usize,
    pub wall_time: Duration,
}

impl TrainReport {
    /// `iteration,loss`
    pub fn loss_csv(&self) -> String {
        let mut s = String::from("iteration,loss\n");
        for (k, l) in &self.loss_curve {
            let _ = writeln!(s, "{k},{}", fmt_real(*l));
        }
        s
    }

    /// `iteration,accuracy`
    pub fn val_csv(&self) -> String {
        let mut s = String::from("iteration,accuracy\n");
        for (k, a) in &self.val_curve {
            let _ = writeln!(s, "{k},{}", fmt_real(*a));
        }
        s
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "param_count = {}", self.param_count);
        let _ = writeln!(s, "best_iteration = {}", self.best_iteration);
        let _ = writeln!(s, "best_val_accuracy = {}", fmt_real(self.best_val_accuracy));
        let _ = writeln!(s, "stop_iteration = {}", self.stop_iteration);
        let _ = writeln!(s, "early_stopped = {}", self.early_stopped);
        let _ = writeln!(s, "test_accuracy = {}", fmt_real(self.test_accuracy));
        let _ = writeln!(s, "test_accuracy_at_stop = {}", fmt_real(self.test_accuracy_at_stop));
        let _ = writeln!(s, "wall_time_s = {:.3}", self.wall_time.as_secs_f64());
        s
    }
}

/// First iteration at which the curve reaches `target`.
pub fn iterations_to_reach(curve: &[(usize, f64)], target: f64) -> Option<usize> {
    curve.iter().find(|(_, a)| *a >= target).map(|(k, _)| *k)
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of samples whose highest logit (lowest index on ties) is the label.
/// Runs in inference mode.
pub fn evaluate(network: &mut Network, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return domain("cannot evaluate on an empty set");
    }
    let mut correct = 0usize;
    let mut start = 0;
    while start < data.len() {
        let len = EVAL_CHUNK.min(data.len() - start);
        let x = data.images.slice_batch(start, len)?;
        let x = x.reshape(&input_shape(network, len))?;
        let logits = network.forward(&x, Mode::Infer)?;
        let c = logits.shape()[1];
        for (r, row) in logits.data().chunks(c).enumerate() {
            if argmax(row) == data.labels[start + r] {
                correct += 1;
            }
        }
        start += len;
    }
    Ok(correct as f64 / data.len() as f64)
}

fn input_shape(network: &Network, batch: usize) -> Vec<usize> {
    let mut s = vec![batch];
    s.extend_from_slice(&network.spec().input_shape);
    s
}

/// Trains until validation accuracy fails to strictly improve for
/// `config.patience` iterations or `config.max_iters` updates are done, then
/// restores the best-validation parameters.
///
/// Validation happens after every `eval_every` updates. The network's input
/// shape must hold each sample's `(channels, h, w)` values in order.
pub fn train(
    network: &mut Network,
    train_set: &Dataset,
    val_set: &Dataset,
    test_set: &Dataset,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() || test_set.is_empty() {
        return domain(format!(
            "train/val/test splits must be non-empty, got {}/{}/{}",
            train_set.len(),
            val_set.len(),
            test_set.len()
        ));
    }
    let started = Instant::now();
    let mut sampler = EpochSampler::new(train_set.len(), config.batch_size, config.seed)?;
    let mut adam = AdamState::for_network(network);
    network.reseed_dropout(config.seed ^ 0x0D80_90C7);
    let shape = input_shape(network, config.batch_size);

    let mut loss_curve = Vec::new();
    let mut val_curve = Vec::new();
    let mut best: Option<(usize, f64, Vec<_>)> = None;
    let mut k = 0;
    let mut early_stopped = false;
    while k < config.max_iters {
        let batch = sampler.next_batch(config.batch_size).to_vec();
        let x = train_set.images.gather_batch(&batch)?.reshape(&shape)?;
        let targets = train_set.one_hot_rows(&batch);
        let logits = network.forward(&x, Mode::Train)?;
        let l2 = config.lambda * network.l2_norm_sq();
        let (loss, grad) = softmax_cross_entropy(&logits, &targets, l2)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("loss is {loss} at iteration {k}")));
        }
        loss_curve.push((k, loss));
        network.zero_grads();
        network.backward(&grad)?;
        network.add_l2_grad(config.lambda);
        adam_step_network(network, &mut adam, config)?;
        k += 1;

        if k % config.eval_every == 0 || k == config.max_iters {
            let acc = evaluate(network, val_set)?;
            val_curve.push((k, acc));
            match &best {
                Some((_, b, _)) if acc <= *b => {}
                _ => best = Some((k, acc, network.snapshot())),
            }
            let best_k = best.as_ref().map_or(0, |b| b.0);
            if k - best_k >= config.patience {
                early_stopped = true;
                break;
            }
        }
    }
    let test_accuracy_at_stop = evaluate(network, test_set)?;
    let (best_iteration, best_val_accuracy, snapshot) =
        best.expect("at least one validation pass happens before the loop ends");
    network.load_state(snapshot)?;
    let test_accuracy = evaluate(network, test_set)?;
    Ok(TrainReport {
        loss_curve,
        val_curve,
        best_iteration,
        best_val_accuracy,
        stop_iteration: k,
        early_stopped,
        test_accuracy,
        test_accuracy_at_stop,
        param_count: network.param_count(),
        wall_time: started.elapsed(),
    })
}
