use crate::error::{domain, Result};
use crate::nn::{Network, Param};
use crate::tensor::Tensor;
use crate::train::TrainConfig;

/// First and second moment estimates, one pair per parameter tensor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub t: u64,
}

impl AdamState {
    pub fn new(shapes: &[&[usize]]) -> Self {
        Self {
            m: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            v: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            t: 0,
        }
    }

    pub fn for_network(network: &Network) -> Self {
        let shapes: Vec<&[usize]> = network.params().iter().map(|p| p.value.shape()).collect();
        Self::new(&shapes)
    }
}

/// One Adam update with bias-corrected moments:
/// `p ← p − lr · m̂ / (√v̂ + eps)`.
pub fn adam_step(
    params: &mut [&mut Tensor],
    grads: &[&Tensor],
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return domain(format!(
            "{} parameters, {} gradients, {} moment slots",
            params.len(),
            grads.len(),
            state.m.len()
        ));
    }
    for (i, ((p, g), m)) in params.iter().zip(grads).zip(&state.m).enumerate() {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return domain(format!(
                "tensor {i}: parameter {:?}, gradient {:?}, moments {:?}",
                p.shape(),
                g.shape(),
                m.shape()
            ));
        }
    }
    state.t += 1;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let c1 = 1.0 - b1.powf(state.t as f64);
    let c2 = 1.0 - b2.powf(state.t as f64);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        let p = p.data_mut();
        for (k, &gk) in g.data().iter().enumerate() {
            let mk = &mut m.data_mut()[k];
            *mk = b1 * *mk + (1.0 - b1) * gk;
            let vk = &mut v.data_mut()[k];
            *vk = b2 * *vk + (1.0 - b2) * gk * gk;
            let mhat = m.data()[k] / c1;
            let vhat = v.data()[k] / c2;
            p[k] -= config.lr * mhat / (vhat.sqrt() + config.adam_eps);
        }
    }
    Ok(())
}

/// Applies [`adam_step`] to every trainable tensor of `network` using the
/// accumulated gradients.
pub fn adam_step_network(network: &mut Network, state: &mut AdamState, config: &TrainConfig) -> Result<()> {
    let mut values = Vec::new();
    let mut grads = Vec::new();
    for Param { value, grad, .. } in network.params_mut() {
        values.push(value);
        grads.push(&*grad);
    }
    adam_step(&mut values, &grads, state, config)
}
