use std::collections::HashSet;

use kafforge::data::{gen_blobs, BlobParams, Dataset};
use kafforge::kaf::KafConfig;
use kafforge::nn::{build_icr_cnn, ArchSpec, LayerSpec, Network, NetworkSpec, Variant};
use kafforge::train::{evaluate, split_dataset, split_indices, train, EpochSampler, TrainConfig};
use kafforge::Tensor;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blobs(classes: usize, n_per_class: usize, dim: usize, seed: u64) -> Dataset {
    gen_blobs(&BlobParams {
        n_per_class,
        classes,
        dim,
        spread: 0.1,
        seed,
    })
    .unwrap()
}

fn mlp(dim: usize, classes: usize, variant: Variant, seed: u64) -> Network {
    let spec = ArchSpec {
        input_shape: vec![1, 1, dim],
        filters: vec![],
        kernel: 3,
        dense: vec![8, 8],
        classes,
        variant,
        kaf: KafConfig::multikaf(),
        dropout: None,
        batchnorm: false,
        seed,
    }
    .with_variant_defaults()
    .to_network_spec()
    .unwrap();
    Network::build(&spec).unwrap()
}

fn values(net: &Network) -> Vec<Tensor> {
    net.params().iter().map(|p| p.value.clone()).collect()
}

/// A single dense layer with zero weights: logits equal the bias for every input.
fn constant_network(inputs: usize, bias: &[f64]) -> Network {
    let spec = NetworkSpec {
        input_shape: vec![1, 1, inputs],
        layers: vec![
            LayerSpec::Flatten,
            LayerSpec::Dense {
                inputs,
                outputs: bias.len(),
            },
        ],
        seed: 0,
    };
    let mut net = Network::build(&spec).unwrap();
    let mut params = net.params_mut();
    params[0].value.fill(0.0);
    params[1].value.data_mut().copy_from_slice(bias);
    net
}

fn random_labels(n: usize, classes: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = Tensor::from_fn(&[n, 1, 1, dim], |_| rng.random_range(0.0..1.0));
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    Dataset::new(images, labels, classes).unwrap()
}

#[test]
fn zero_learning_rate_freezes_parameters_and_stops_on_patience() {
    let (tr, va, te) = split_dataset(&blobs(2, 100, 4, 1), 40, 40, 2).unwrap();
    for variant in [Variant::MultiKaf, Variant::Relu] {
        let mut net = mlp(4, 2, variant, 3);
        let before = values(&net);
        let cfg = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        let report = train(&mut net, &tr, &va, &te, &cfg).unwrap();
        assert_eq!(values(&net), before);
        assert!(report.early_stopped);
        assert_eq!(report.best_iteration, cfg.eval_every);
        assert!(report.stop_iteration <= cfg.patience + cfg.eval_every);
        assert_eq!(report.stop_iteration, 260);
    }
}

#[test]
fn runs_are_reproducible() {
    let (tr, va, te) = split_dataset(&blobs(3, 60, 4, 5), 30, 30, 6).unwrap();
    let cfg = TrainConfig {
        max_iters: 120,
        ..TrainConfig::default()
    };
    let run = || {
        let mut net = mlp(4, 3, Variant::Relu, 7);
        let mut r = train(&mut net, &tr, &va, &te, &cfg).unwrap();
        r.wall_time = Default::default();
        (r, net.snapshot())
    };
    let (a, sa) = run();
    let (b, sb) = run();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    assert_eq!(a.loss_csv(), b.loss_csv());
    assert_eq!(a.loss_curve.len(), 120);
}

#[test]
fn initial_loss_is_near_uniform_for_23_classes() {
    let upper_base = 1.2 * 23f64.ln();
    let lower = 0.9 * 23f64.ln();
    let data = random_labels(300, 23, 16, 8);
    let (tr, va, te) = split_dataset(&data, 50, 50, 9).unwrap();
    let cfg = TrainConfig {
        max_iters: 1,
        ..TrainConfig::default()
    };
    for variant in [Variant::Relu, Variant::Kaf, Variant::MultiKaf] {
        for seed in 0..3 {
            let mut net = mlp(16, 23, variant, seed);
            let penalty = cfg.lambda * net.l2_norm_sq();
            let r = train(&mut net, &tr, &va, &te, &cfg).unwrap();
            let l0 = r.loss_curve[0].1;
            assert!(l0 >= lower && l0 <= upper_base + penalty, "{variant:?} seed {seed}: {l0}");
        }
    }
}

#[test]
fn initial_loss_of_the_character_cnn() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 24;
    let images = Tensor::from_fn(&[n, 1, 56, 56], |_| if rng.random::<f64>() < 0.1 { 1.0 } else { 0.0 });
    let labels = (0..n).map(|i| i % 23).collect();
    let data = Dataset::new(images, labels, 23).unwrap();
    let (tr, va, te) = split_dataset(&data, 4, 4, 1).unwrap();
    let cfg = TrainConfig {
        max_iters: 1,
        batch_size: 16,
        ..TrainConfig::default()
    };
    let mut net = Network::build(&build_icr_cnn(Variant::MultiKaf, 0.25).unwrap()).unwrap();
    let penalty = cfg.lambda * net.l2_norm_sq();
    let l0 = train(&mut net, &tr, &va, &te, &cfg).unwrap().loss_curve[0].1;
    assert!(l0 >= 0.9 * 23f64.ln() && l0 <= 1.2 * 23f64.ln() + penalty, "{l0}");
}

#[test]
fn restored_parameters_reach_the_best_validation_accuracy() {
    let (tr, va, te) = split_dataset(&blobs(4, 80, 4, 11), 60, 60, 12).unwrap();
    let cfg = TrainConfig {
        max_iters: 400,
        eval_every: 20,
        patience: 100,
        ..TrainConfig::default()
    };
    let mut net = mlp(4, 4, Variant::MultiKaf, 13);
    let r = train(&mut net, &tr, &va, &te, &cfg).unwrap();
    let max_seen = r.val_curve.iter().map(|c| c.1).fold(0.0, f64::max);
    assert_eq!(r.best_val_accuracy, max_seen);
    assert!(evaluate(&mut net, &va).unwrap() >= max_seen);
    assert_eq!(evaluate(&mut net, &te).unwrap(), r.test_accuracy);
    let first = r.val_curve.iter().find(|c| c.1 == max_seen).unwrap();
    assert_eq!(first.0, r.best_iteration);
}

#[test]
fn empty_splits_and_bad_configs_are_rejected() {
    let (tr, va, _) = split_dataset(&blobs(2, 20, 2, 1), 5, 5, 1).unwrap();
    let empty = tr.subset(&[]).unwrap();
    let mut net = mlp(2, 2, Variant::Relu, 0);
    assert!(train(&mut net, &tr, &va, &empty, &TrainConfig::default()).is_err());
    let bad = TrainConfig {
        patience: 5,
        ..TrainConfig::default()
    };
    assert!(train(&mut net, &tr, &va, &va, &bad).is_err());
    assert!(evaluate(&mut net, &empty).is_err());
}

#[test]
fn constant_network_accuracy() {
    let n = 50;
    let data = Dataset::new(Tensor::full(&[n, 1, 1, 3], 0.5), vec![2; n], 4).unwrap();
    let mut net = constant_network(3, &[0.1, 0.3, 0.9, -1.0]);
    assert_eq!(evaluate(&mut net, &data).unwrap(), 1.0);
}

#[test]
fn constant_logits_on_random_labels_score_chance() {
    let data = random_labels(2300, 23, 3, 21);
    let mut net = constant_network(3, &[0.0; 23]);
    let acc = evaluate(&mut net, &data).unwrap();
    assert!((acc - 1.0 / 23.0).abs() <= 0.03, "{acc}");
}

#[test]
fn accuracy_is_invariant_to_logit_scaling() {
    let data = random_labels(400, 5, 6, 22);
    let spec = NetworkSpec {
        input_shape: vec![1, 1, 6],
        layers: vec![LayerSpec::Flatten, LayerSpec::Dense { inputs: 6, outputs: 5 }],
        seed: 4,
    };
    let mut net = Network::build(&spec).unwrap();
    let base = evaluate(&mut net, &data).unwrap();
    for p in net.params_mut() {
        for v in p.value.data_mut() {
            *v *= 7.5;
        }
    }
    assert_eq!(evaluate(&mut net, &data).unwrap(), base);
}

#[test]
fn split_sizes() {
    let s = split_indices(23_000, 2500, 2300, 0).unwrap();
    assert_eq!((s.train.len(), s.val.len(), s.test.len()), (18_200, 2500, 2300));
    let all = split_indices(10, 0, 0, 0).unwrap();
    assert_eq!(all.train.len(), 10);
    assert!(split_indices(10, 5, 5, 0).is_err());
}

proptest! {
    #[test]
    fn splits_partition_the_index_range(n in 1usize..400, a in 0usize..200, b in 0usize..200, seed in any::<u64>()) {
        prop_assume!(a + b < n);
        let s = split_indices(n, a, b, seed).unwrap();
        prop_assert_eq!(s.val.len(), a);
        prop_assert_eq!(s.test.len(), b);
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(split_indices(n, a, b, seed).unwrap(), s);
    }

    #[test]
    fn each_epoch_draws_distinct_indices(n in 1usize..100, batch in 1usize..20, seed in any::<u64>()) {
        prop_assume!(batch <= n);
        let mut sampler = EpochSampler::new(n, batch, seed).unwrap();
        let per_epoch = n / batch;
        for _ in 0..3 {
            let mut seen = HashSet::new();
            for _ in 0..per_epoch {
                let b = sampler.next_batch(batch);
                prop_assert_eq!(b.len(), batch);
                for &i in b {
                    prop_assert!(i < n);
                    prop_assert!(seen.insert(i));
                }
            }
        }
    }
}
