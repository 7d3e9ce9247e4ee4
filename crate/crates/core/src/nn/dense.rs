//! Fully connected layer `y = W x + b`.

use crate::error::{domain, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weight: Tensor,
    pub bias: Tensor,
}

fn dims(input: &Tensor, weight: &Tensor) -> Result<(usize, usize, usize)> {
    if weight.rank() != 2 {
        return domain(format!("dense weight must be [out, in], got {:?}", weight.shape()));
    }
    let (out, inp) = (weight.shape()[0], weight.shape()[1]);
    if input.rank() != 2 || input.shape()[1] != inp {
        return domain(format!(
            "dense layer expects input [batch, {inp}], got {:?}",
            input.shape()
        ));
    }
    Ok((input.shape()[0], inp, out))
}

/// `input: [batch, in]`, `weight: [out, in]`, `bias: [out]`.
pub fn dense_forward(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (batch, inp, out) = dims(input, weight)?;
    bias.check_shape(&[out], "dense bias")?;
    let mut y = Tensor::zeros(&[batch, out]);
    let x = input.data();
    let w = weight.data();
    let b = bias.data();
    for (r, yrow) in y.data_mut().chunks_exact_mut(out).enumerate() {
        let xrow = &x[r * inp..(r + 1) * inp];
        for (o, slot) in yrow.iter_mut().enumerate() {
            let wrow = &w[o * inp..(o + 1) * inp];
            *slot = b[o] + wrow.iter().zip(xrow).map(|(a, c)| a * c).sum::<f64>();
        }
    }
    Ok(y)
}

pub fn dense_backward(input: &Tensor, weight: &Tensor, upstream: &Tensor) -> Result<DenseGrads> {
    let (batch, inp, out) = dims(input, weight)?;
    upstream.check_shape(&[batch, out], "dense upstream gradient")?;
    let x = input.data();
    let w = weight.data();
    let up = upstream.data();
    let mut gx = Tensor::zeros(&[batch, inp]);
    let mut gw = Tensor::zeros(&[out, inp]);
    let mut gb = Tensor::zeros(&[out]);
    for r in 0..batch {
        let xrow = &x[r * inp..(r + 1) * inp];
        let uprow = &up[r * out..(r + 1) * out];
        let gxrow = &mut gx.data_mut()[r * inp..(r + 1) * inp];
        for (o, &u) in uprow.iter().enumerate() {
            if u == 0.0 {
                continue;
            }
            let wrow = &w[o * inp..(o + 1) * inp];
            for (g, wv) in gxrow.iter_mut().zip(wrow) {
                *g += u * wv;
            }
        }
        for (o, &u) in uprow.iter().enumerate() {
            gb.data_mut()[o] += u;
            let gwrow = &mut gw.data_mut()[o * inp..(o + 1) * inp];
            for (g, xv) in gwrow.iter_mut().zip(xrow) {
                *g += u * xv;
            }
        }
    }
    Ok(DenseGrads {
        input: gx,
        weight: gw,
        bias: gb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weight_passes_input() {
        let x = Tensor::from_fn(&[2, 3], |i| i as f64 - 2.5);
        let w = Tensor::from_fn(&[3, 3], |i| if i % 4 == 0 { 1.0 } else { 0.0 });
        let y = dense_forward(&x, &w, &Tensor::zeros(&[3])).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn zero_weight_gives_bias() {
        let x = Tensor::from_fn(&[4, 2], |i| i as f64);
        let b = Tensor::new(vec![3], vec![0.5, -1.0, 2.0]).unwrap();
        let y = dense_forward(&x, &Tensor::zeros(&[3, 2]), &b).unwrap();
        for row in y.data().chunks(3) {
            assert_eq!(row, b.data());
        }
    }

    #[test]
    fn shape_mismatch() {
        let x = Tensor::zeros(&[2, 4]);
        assert!(dense_forward(&x, &Tensor::zeros(&[3, 3]), &Tensor::zeros(&[3])).is_err());
        assert!(dense_forward(&x, &Tensor::zeros(&[3, 4]), &Tensor::zeros(&[2])).is_err());
        assert!(dense_backward(&x, &Tensor::zeros(&[3, 4]), &Tensor::zeros(&[2, 2])).is_err());
    }
}
