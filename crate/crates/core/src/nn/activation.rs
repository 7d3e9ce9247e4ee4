//! Fixed pointwise activations.

use crate::error::Result;
use crate::kaf::{elu, elu_grad};
use crate::tensor::Tensor;

pub fn relu_forward(input: &Tensor) -> Tensor {
    let mut y = input.clone();
    y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    y
}

/// Gate is 1 where `s > 0`, 0 elsewhere (including `s = 0`).
pub fn relu_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    upstream.check_shape(input.shape(), "relu upstream gradient")?;
    let mut g = upstream.clone();
    for (v, &s) in g.data_mut().iter_mut().zip(input.data()) {
        if s <= 0.0 {
            *v = 0.0;
        }
    }
    Ok(g)
}

pub fn elu_forward(input: &Tensor) -> Tensor {
    let mut y = input.clone();
    y.data_mut().iter_mut().for_each(|v| *v = elu(*v));
    y
}

pub fn elu_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    upstream.check_shape(input.shape(), "elu upstream gradient")?;
    let mut g = upstream.clone();
    for (v, &s) in g.data_mut().iter_mut().zip(input.data()) {
        *v *= elu_grad(s);
    }
    Ok(g)
}
