//! Batch normalization over axis 1 (features, or channels of an image batch).

use crate::error::{domain, Result};
use crate::tensor::Tensor;

pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_EPS: f64 = 1e-5;

/// Saved by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BatchNormGrads {
    pub input: Tensor,
    pub gamma: Tensor,
    pub beta: Tensor,
}

/// Running statistics updated as `r ← momentum·r + (1 − momentum)·batch`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    pub mean: Tensor,
    pub var: Tensor,
    pub momentum: f64,
    pub eps: f64,
}

impl RunningStats {
    pub fn new(features: usize, momentum: f64, eps: f64) -> Self {
        Self {
            mean: Tensor::zeros(&[features]),
            var: Tensor::full(&[features], 1.0),
            momentum,
            eps,
        }
    }
}

fn layout(input: &Tensor, features: usize) -> Result<(usize, usize)> {
    if input.rank() < 2 || input.shape()[1] != features {
        return domain(format!(
            "batch norm over {features} features got input {:?}",
            input.shape()
        ));
    }
    Ok((input.shape()[0], input.shape()[2..].iter().product()))
}

/// Training-mode forward: normalizes with batch statistics and updates `stats`.
pub fn batchnorm_forward_train(
    input: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    stats: &mut RunningStats,
) -> Result<(Tensor, BatchNormCache)> {
    let f = gamma.len();
    let (batch, inner) = layout(input, f)?;
    beta.check_shape(&[f], "batch norm shift")?;
    if batch < 2 {
        return domain(format!("batch norm in training mode needs batch >= 2, got {batch}"));
    }
    let count = (batch * inner) as f64;
    let x = input.data();
    let mut xhat = Tensor::zeros(input.shape());
    let mut y = Tensor::zeros(input.shape());
    let mut inv_std = vec![0.0; f];
    for c in 0..f {
        let plane = |b: usize| (b * f + c) * inner..(b * f + c + 1) * inner;
        let mean = (0..batch).map(|b| x[plane(b)].iter().sum::<f64>()).sum::<f64>() / count;
        let var = (0..batch)
            .map(|b| x[plane(b)].iter().map(|v| (v - mean) * (v - mean)).sum::<f64>())
            .sum::<f64>()
            / count;
        let is = 1.0 / (var + stats.eps).sqrt();
        inv_std[c] = is;
        let (g, sh) = (gamma.data()[c], beta.data()[c]);
        for b in 0..batch {
            for idx in plane(b) {
                let xh = (x[idx] - mean) * is;
                xhat.data_mut()[idx] = xh;
                y.data_mut()[idx] = g * xh + sh;
            }
        }
        let unbiased = var * count / (count - 1.0);
        let m = stats.momentum;
        stats.mean.data_mut()[c] = m * stats.mean.data()[c] + (1.0 - m) * mean;
        stats.var.data_mut()[c] = m * stats.var.data()[c] + (1.0 - m) * unbiased;
    }
    Ok((y, BatchNormCache { xhat, inv_std }))
}

/// Inference-mode forward with running statistics.
pub fn batchnorm_forward_infer(
    input: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    stats: &RunningStats,
) -> Result<Tensor> {
    let f = gamma.len();
    let (batch, inner) = layout(input, f)?;
    let mut y = input.clone();
    for c in 0..f {
        let is = 1.0 / (stats.var.data()[c] + stats.eps).sqrt();
        let mean = stats.mean.data()[c];
        let (g, sh) = (gamma.data()[c], beta.data()[c]);
        for b in 0..batch {
            for v in &mut y.data_mut()[(b * f + c) * inner..(b * f + c + 1) * inner] {
                *v = g * (*v - mean) * is + sh;
            }
        }
    }
    Ok(y)
}

pub fn batchnorm_backward(
    cache: &BatchNormCache,
    gamma: &Tensor,
    upstream: &Tensor,
) -> Result<BatchNormGrads> {
    upstream.check_shape(cache.xhat.shape(), "batch norm upstream gradient")?;
    let f = gamma.len();
    let (batch, inner) = layout(upstream, f)?;
    let count = (batch * inner) as f64;
    let up = upstream.data();
    let xh = cache.xhat.data();
    let mut gx = Tensor::zeros(upstream.shape());
    let mut gg = Tensor::zeros(&[f]);
    let mut gbeta = Tensor::zeros(&[f]);
    for c in 0..f {
        let plane = |b: usize| (b * f + c) * inner..(b * f + c + 1) * inner;
        let mut sum_up = 0.0;
        let mut sum_up_xh = 0.0;
        for b in 0..batch {
            for idx in plane(b) {
                sum_up += up[idx];
                sum_up_xh += up[idx] * xh[idx];
            }
        }
        gbeta.data_mut()[c] = sum_up;
        gg.data_mut()[c] = sum_up_xh;
        let scale = gamma.data()[c] * cache.inv_std[c] / count;
        for b in 0..batch {
            for idx in plane(b) {
                gx.data_mut()[idx] = scale * (count * up[idx] - sum_up - xh[idx] * sum_up_xh);
            }
        }
    }
    Ok(BatchNormGrads {
        input: gx,
        gamma: gg,
        beta: gbeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_each_feature() {
        let x = Tensor::from_fn(&[16, 3], |i| ((i * 37) % 11) as f64 * 10.0 * (1.0 + (i % 3) as f64));
        let mut st = RunningStats::new(3, DEFAULT_MOMENTUM, DEFAULT_EPS);
        let (y, _) = batchnorm_forward_train(&x, &Tensor::full(&[3], 1.0), &Tensor::zeros(&[3]), &mut st)
            .unwrap();
        for c in 0..3 {
            let col: Vec<f64> = (0..16).map(|b| y.data()[b * 3 + c]).collect();
            let mean = col.iter().sum::<f64>() / 16.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 16.0;
            assert!(mean.abs() < 1e-6);
            assert!((var - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_scale_gives_shift() {
        let x = Tensor::from_fn(&[4, 2, 3, 3], |i| (i as f64).sin());
        let beta = Tensor::new(vec![2], vec![0.25, -1.5]).unwrap();
        let mut st = RunningStats::new(2, DEFAULT_MOMENTUM, DEFAULT_EPS);
        let (y, _) = batchnorm_forward_train(&x, &Tensor::zeros(&[2]), &beta, &mut st).unwrap();
        for (i, v) in y.data().iter().enumerate() {
            assert_eq!(*v, beta.data()[(i / 9) % 2]);
        }
    }

    #[test]
    fn batch_of_one_rejected_in_training() {
        let mut st = RunningStats::new(2, DEFAULT_MOMENTUM, DEFAULT_EPS);
        let x = Tensor::zeros(&[1, 2]);
        let g = Tensor::full(&[2], 1.0);
        assert!(batchnorm_forward_train(&x, &g, &Tensor::zeros(&[2]), &mut st).is_err());
        assert!(batchnorm_forward_infer(&x, &g, &Tensor::zeros(&[2]), &st).is_ok());
    }

    #[test]
    fn running_stats_move_toward_batch() {
        let x = Tensor::new(vec![2, 1], vec![1.0, 3.0]).unwrap();
        let mut st = RunningStats::new(1, 0.9, DEFAULT_EPS);
        batchnorm_forward_train(&x, &Tensor::full(&[1], 1.0), &Tensor::zeros(&[1]), &mut st).unwrap();
        assert!((st.mean.data()[0] - 0.2).abs() < 1e-15);
        // unbiased batch variance is 2
        assert!((st.var.data()[0] - (0.9 + 0.2)).abs() < 1e-15);
    }
}
