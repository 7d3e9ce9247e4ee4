//! Max pooling without padding.

use crate::error::{domain, Result};
use crate::tensor::Tensor;

/// Forward max pooling. Returns the pooled tensor and, per output element,
/// the flat input index of its window maximum (first in row-major order on
/// ties).
pub fn maxpool_forward(input: &Tensor, kernel: usize, stride: usize) -> Result<(Tensor, Vec<usize>)> {
    if input.rank() != 4 {
        return domain(format!("max-pool expects (batch, channels, h, w), got {:?}", input.shape()));
    }
    if kernel == 0 || stride == 0 {
        return domain("max-pool kernel and stride must be positive");
    }
    let (b, c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2], input.shape()[3]);
    if h % stride != 0 || w % stride != 0 || h < kernel || w < kernel {
        return domain(format!(
            "max-pool with stride {stride} needs spatial dims divisible by it, got {h}x{w}"
        ));
    }
    let ho = (h - kernel) / stride + 1;
    let wo = (w - kernel) / stride + 1;
    let mut y = Tensor::zeros(&[b, c, ho, wo]);
    let mut argmax = Vec::with_capacity(y.len());
    let x = input.data();
    let ys = y.data_mut();
    let mut k = 0;
    for plane in 0..b * c {
        let base = plane * h * w;
        for oy in 0..ho {
            for ox in 0..wo {
                let mut best = base + oy * stride * w + ox * stride;
                for ky in 0..kernel {
                    for kx in 0..kernel {
                        let idx = base + (oy * stride + ky) * w + ox * stride + kx;
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                ys[k] = x[best];
                argmax.push(best);
                k += 1;
            }
        }
    }
    Ok((y, argmax))
}

pub fn maxpool_backward(input_shape: &[usize], argmax: &[usize], upstream: &Tensor) -> Result<Tensor> {
    if upstream.len() != argmax.len() {
        return domain(format!(
            "max-pool upstream has {} elements, forward produced {}",
            upstream.len(),
            argmax.len()
        ));
    }
    let mut gx = Tensor::zeros(input_shape);
    let g = gx.data_mut();
    for (&idx, &u) in argmax.iter().zip(upstream.data()) {
        g[idx] += u;
    }
    Ok(gx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_maximum() {
        let x = Tensor::new(vec![1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, am) = maxpool_forward(&x, 2, 2).unwrap();
        assert_eq!(y.data(), &[4.0]);
        assert_eq!(am, vec![3]);
    }

    #[test]
    fn ties_route_to_first() {
        let x = Tensor::full(&[1, 1, 4, 4], 0.5);
        let (y, am) = maxpool_forward(&x, 2, 2).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.5));
        let g = maxpool_backward(x.shape(), &am, &Tensor::full(y.shape(), 1.0)).unwrap();
        let expect: Vec<f64> = (0..16)
            .map(|i| {
                let (r, c) = (i / 4, i % 4);
                if r % 2 == 0 && c % 2 == 0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        assert_eq!(g.data(), &expect[..]);
    }

    #[test]
    fn halving_sequence() {
        let mut x = Tensor::from_fn(&[1, 1, 56, 56], |i| ((i * 7919) % 101) as f64);
        let mut sizes = vec![];
        for _ in 0..3 {
            x = maxpool_forward(&x, 2, 2).unwrap().0;
            sizes.push(x.shape()[2]);
        }
        assert_eq!(sizes, vec![28, 14, 7]);
    }

    #[test]
    fn indivisible_rejected() {
        assert!(maxpool_forward(&Tensor::zeros(&[1, 1, 7, 8]), 2, 2).is_err());
    }
}
