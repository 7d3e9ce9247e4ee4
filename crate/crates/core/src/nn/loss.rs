//! Softmax cross-entropy with an externally supplied L2 term.

use crate::error::{domain, Result};
use crate::tensor::Tensor;

/// Row-wise softmax of `[batch, classes]` logits.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    if logits.rank() != 2 {
        return domain(format!("softmax expects [batch, classes], got {:?}", logits.shape()));
    }
    let c = logits.shape()[1];
    let mut p = logits.clone();
    for row in p.data_mut().chunks_exact_mut(c) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            z += *v;
        }
        row.iter_mut().for_each(|v| *v /= z);
    }
    Ok(p)
}

/// Batch-mean cross-entropy plus `l2_term`, and its gradient w.r.t. the logits.
///
/// `onehot` holds the target distribution per row.
pub fn softmax_cross_entropy(logits: &Tensor, onehot: &Tensor, l2_term: f64) -> Result<(f64, Tensor)> {
    onehot.check_shape(logits.shape(), "cross-entropy targets")?;
    if logits.rank() != 2 || logits.shape()[0] == 0 {
        return domain(format!("cross-entropy expects non-empty [batch, classes], got {:?}", logits.shape()));
    }
    let (batch, c) = (logits.shape()[0], logits.shape()[1]);
    let mut grad = Tensor::zeros(logits.shape());
    let mut total = 0.0;
    let scale = 1.0 / batch as f64;
    for ((row, target), g) in logits
        .data()
        .chunks_exact(c)
        .zip(onehot.data().chunks_exact(c))
        .zip(grad.data_mut().chunks_exact_mut(c))
    {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        for ((&z, &t), gv) in row.iter().zip(target).zip(g.iter_mut()) {
            let log_p = z - lse;
            if t != 0.0 {
                total -= t * log_p;
            }
            *gv = (log_p.exp() - t) * scale;
        }
    }
    Ok((total * scale + l2_term, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_log_classes() {
        let logits = Tensor::zeros(&[4, 23]);
        let mut t = Tensor::zeros(&[4, 23]);
        for b in 0..4 {
            t.data_mut()[b * 23 + (b * 5) % 23] = 1.0;
        }
        let (loss, _) = softmax_cross_entropy(&logits, &t, 0.0).unwrap();
        assert!((loss - 23f64.ln()).abs() < 1e-12);
        assert!((23f64.ln() - 3.135_494_215_929_15).abs() < 1e-12);
        let (loss, _) = softmax_cross_entropy(&logits, &t, 0.25).unwrap();
        assert!((loss - 23f64.ln() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_logit_leaves_l2_term() {
        let logits = Tensor::new(vec![1, 3], vec![0.0, 800.0, 0.0]).unwrap();
        let t = Tensor::new(vec![1, 3], vec![0.0, 1.0, 0.0]).unwrap();
        let (loss, g) = softmax_cross_entropy(&logits, &t, 0.125).unwrap();
        assert_eq!(loss, 0.125);
        assert!(g.data().iter().all(|v| v.abs() < 1e-300));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits = Tensor::from_fn(&[5, 7], |i| ((i * 31) % 17) as f64 - 8.0);
        let p = softmax(&logits).unwrap();
        for row in p.data().chunks(7) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(softmax_cross_entropy(&Tensor::zeros(&[2, 3]), &Tensor::zeros(&[2, 4]), 0.0).is_err());
    }
}
