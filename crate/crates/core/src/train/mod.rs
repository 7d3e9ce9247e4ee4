//! Minibatch training with Adam, periodic validation and patience-based early
//! stopping.

mod adam;
mod split;
mod trainer;

pub use adam::{adam_step, adam_step_network, AdamState};
pub use split::{split_dataset, split_indices, EpochSampler, Split};
pub use trainer::{evaluate, iterations_to_reach, train, TrainReport};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// L2 penalty weight.
    pub lambda: f64,
    pub batch_size: usize,
    /// Validation period in iterations.
    pub eval_every: usize,
    /// Iterations without a strict validation improvement before stopping.
    pub patience: usize,
    pub lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            batch_size: 32,
            eval_every: 10,
            patience: 250,
            lr: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            max_iters: 10_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// A zero learning rate is accepted; it freezes the parameters.
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.eval_every == 0 || self.patience == 0 || self.max_iters == 0 {
            return domain("batch_size, eval_every, patience and max_iters must be positive");
        }
        if self.patience < self.eval_every {
            return domain(format!(
                "patience ({}) must be at least eval_every ({})",
                self.patience, self.eval_every
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return domain(format!("lambda must be finite and non-negative, got {}", self.lambda));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return domain(format!("learning rate must be finite and non-negative, got {}", self.lr));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return domain(format!("{name} must be in [0, 1), got {b}"));
            }
        }
        if !(self.adam_eps > 0.0) {
            return domain(format!("adam_eps must be positive, got {}", self.adam_eps));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TrainConfig::default().validate().unwrap();
        let bad = TrainConfig {
            patience: 5,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let frozen = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        frozen.validate().unwrap();
        assert!(TrainConfig {
            adam_beta2: 1.0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
    }
}
