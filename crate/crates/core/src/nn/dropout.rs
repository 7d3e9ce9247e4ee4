//! Inverted dropout.

use rand::Rng;

use crate::error::{domain, Result};
use crate::tensor::Tensor;

/// In training mode zeroes each element with probability `p` and scales the
/// survivors by `1/(1-p)`; returns the applied per-element multipliers. In
/// inference mode (or with `p = 0`) the input passes through unchanged and the
/// mask is `None`.
pub fn dropout_forward<R: Rng>(
    input: &Tensor,
    p: f64,
    training: bool,
    rng: &mut R,
) -> Result<(Tensor, Option<Vec<f64>>)> {
    if !(0.0..1.0).contains(&p) {
        return domain(format!("dropout probability must be in [0, 1), got {p}"));
    }
    if !training || p == 0.0 {
        return Ok((input.clone(), None));
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..input.len())
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect();
    let mut y = input.clone();
    for (v, m) in y.data_mut().iter_mut().zip(&mask) {
        *v *= m;
    }
    Ok((y, Some(mask)))
}

pub fn dropout_backward(mask: Option<&[f64]>, upstream: &Tensor) -> Result<Tensor> {
    let mut g = upstream.clone();
    if let Some(mask) = mask {
        if mask.len() != g.len() {
            return domain("dropout mask does not match upstream gradient");
        }
        for (v, m) in g.data_mut().iter_mut().zip(mask) {
            *v *= m;
        }
    }
    Ok(g)
}
