use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{domain, Result};

/// Index partition of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `0..n`; the first `n_val` indices validate, the next
/// `n_test` test, the rest train.
pub fn split_indices(n: usize, n_val: usize, n_test: usize, seed: u64) -> Result<Split> {
    if n_val + n_test >= n {
        return domain(format!(
            "cannot hold out {n_val} + {n_test} samples from {n}"
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = order.split_off(n_val + n_test);
    let test = order.split_off(n_val);
    Ok(Split {
        train,
        val: order,
        test,
    })
}

/// `(train, val, test)` subsets.
pub fn split_dataset(
    dataset: &Dataset,
    n_val: usize,
    n_test: usize,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let s = split_indices(dataset.len(), n_val, n_test, seed)?;
    Ok((
        dataset.subset(&s.train)?,
        dataset.subset(&s.val)?,
        dataset.subset(&s.test)?,
    ))
}

/// Endless stream of full minibatches: each epoch is a fresh seeded
/// permutation, and the tail that does not fill a batch is dropped.
#[derive(Debug, Clone)]
pub struct EpochSampler {
    order: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl EpochSampler {
    pub fn new(n: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 || batch_size > n {
            return domain(format!("batch size {batch_size} does not fit {n} samples"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        Ok(Self { order, pos: 0, rng })
    }

    pub fn next_batch(&mut self, batch_size: usize) -> &[usize] {
        if self.pos + batch_size > self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let b = &self.order[self.pos..self.pos + batch_size];
        self.pos += batch_size;
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_holdout_sizes() {
        let s = split_indices(23_000, 2500, 2300, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (18_200, 2500, 2300));
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23_000).collect::<Vec<_>>());
    }

    #[test]
    fn no_holdout_keeps_everything() {
        let s = split_indices(10, 0, 0, 3).unwrap();
        assert_eq!(s.train.len(), 10);
        assert!(s.val.is_empty() && s.test.is_empty());
        assert!(split_indices(10, 5, 5, 0).is_err());
        assert_eq!(split_indices(50, 7, 9, 4).unwrap(), split_indices(50, 7, 9, 4).unwrap());
    }

    #[test]
    fn sampler_covers_each_epoch() {
        let mut s = EpochSampler::new(10, 3, 0).unwrap();
        let mut seen: Vec<usize> = (0..3).flat_map(|_| s.next_batch(3).to_vec()).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 9);
        assert_eq!(s.next_batch(3).len(), 3);
        assert!(EpochSampler::new(2, 3, 0).is_err());
    }
}
