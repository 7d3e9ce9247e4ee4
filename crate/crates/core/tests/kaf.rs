use std::sync::Arc;

use kafforge::kaf::{
    elu, init_multikaf, krr_init, mixed_gram, multikaf_backward, multikaf_forward,
    multikaf_forward_uncached, sample_grid, Dictionary, KafConfig, MultiKafParams, KRR_EPSILON,
};
use kafforge::kernels::{gamma_rule_of_thumb, KernelSpec, RqVariant};
use kafforge::Tensor;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dictionary() -> Arc<Dictionary> {
    Arc::new(Dictionary::new(15, -3.0, 3.0).unwrap())
}

fn three_kernels(dict: &Dictionary) -> Vec<KernelSpec> {
    KafConfig::multikaf().kernel_specs(dict).unwrap()
}

fn random_params(neurons: usize, kernels: Vec<KernelSpec>, dict: Arc<Dictionary>, seed: u64) -> MultiKafParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = kernels.len();
    let alpha = Tensor::from_fn(&[neurons, dict.len()], |_| rng.random_range(-1.0..1.0));
    let mu = Tensor::from_fn(&[neurons, m], |_| rng.random_range(0.0..1.0));
    MultiKafParams::new(alpha, mu, kernels, dict).unwrap()
}

/// `Σᵢ αᵢ Σₘ μₘ κₘ(s, dᵢ)` by direct double summation.
fn double_sum(p: &MultiKafParams, neuron: usize, s: f64) -> f64 {
    let pts = p.dictionary().points();
    let mut g = 0.0;
    for (i, &d) in pts.iter().enumerate() {
        let mut mixed = 0.0;
        for (m, k) in p.kernels().iter().enumerate() {
            mixed += p.mu_row(neuron)[m] * k.eval(s, d);
        }
        g += p.alpha_row(neuron)[i] * mixed;
    }
    g
}

#[test]
fn dictionary_layout() {
    let d = dictionary();
    assert_eq!(d.len(), 15);
    assert_eq!(d.points()[0], -3.0);
    assert_eq!(d.points()[14], 3.0);
    assert!((d.delta() - 3.0 / 7.0).abs() < 1e-15);
    assert!(Dictionary::new(1, 0.0, 1.0).is_err());
    assert!(Dictionary::new(5, 1.0, 1.0).is_err());
}

#[test]
fn default_configs() {
    let dict = dictionary();
    let kaf = KafConfig::kaf().kernel_specs(&dict).unwrap();
    assert_eq!(kaf.len(), 1);
    match kaf[0] {
        KernelSpec::Gaussian { gamma } => assert!((gamma - 49.0 / 54.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    let multi = three_kernels(&dict);
    assert_eq!(multi.len(), 3);
    assert!(matches!(
        multi[1],
        KernelSpec::RationalQuadratic { c, variant: RqVariant::PaperPlus } if c == 1.0
    ));
    assert!(matches!(multi[2], KernelSpec::Polynomial2));
}

#[test]
fn forward_matches_double_sum_oracle() {
    let dict = dictionary();
    let p = random_params(3, three_kernels(&dict), dict, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = Tensor::from_fn(&[4, 3, 2, 2], |_| rng.random_range(-4.0..4.0));
    let (y, _) = multikaf_forward(&p, &x).unwrap();
    for (idx, (&s, &g)) in x.data().iter().zip(y.data()).enumerate() {
        let neuron = (idx / 4) % 3;
        assert!((g - double_sum(&p, neuron, s)).abs() < 1e-12);
        assert!((g - p.eval(neuron, s)).abs() < 1e-12);
    }
}

#[test]
fn single_kernel_reduces_to_plain_expansion() {
    let dict = dictionary();
    let gauss = KernelSpec::gaussian(gamma_rule_of_thumb(dict.delta()).unwrap()).unwrap();
    let mut p = random_params(1, vec![gauss], dict.clone(), 8);
    p.mu.fill(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = Tensor::from_fn(&[10_000, 1], |_| rng.random_range(-5.0..5.0));
    let y = multikaf_forward_uncached(&p, &x).unwrap();
    for (&s, &g) in x.data().iter().zip(y.data()) {
        let direct: f64 = dict
            .points()
            .iter()
            .zip(p.alpha_row(0))
            .map(|(&d, a)| a * gauss.eval(s, d))
            .sum();
        assert!((g - direct).abs() < 1e-12, "{g} vs {direct}");
    }
}

#[test]
fn mixture_is_linear_in_kernel_weights() {
    let dict = dictionary();
    let kernels = three_kernels(&dict);
    let pa = random_params(2, kernels.clone(), dict.clone(), 1);
    let pb = random_params(2, kernels.clone(), dict.clone(), 2);
    let mut sum = pa.clone();
    for (s, b) in sum.mu.data_mut().iter_mut().zip(pb.mu.data()) {
        *s += b;
    }
    let pb = MultiKafParams::new(pa.alpha.clone(), pb.mu.clone(), kernels, dict).unwrap();
    for s in sample_grid(-4.0, 4.0, 101) {
        for n in 0..2 {
            let lhs = sum.eval(n, s);
            let rhs = pa.eval(n, s) + pb.eval(n, s);
            assert!((lhs - rhs).abs() < 1e-12);
            let parts: f64 = pa.components(n, s).iter().sum();
            assert!((parts - pa.eval(n, s)).abs() < 1e-12);
        }
    }
}

#[test]
fn init_fits_elu_on_dictionary() {
    let dict = dictionary();
    let p = init_multikaf(4, dict.clone(), three_kernels(&dict)).unwrap();
    assert!(p.mu.data().iter().all(|&m| m == 1.0 / 3.0));
    let worst = dict
        .points()
        .iter()
        .map(|&d| (p.eval(2, d) - elu(d)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
    let interior = sample_grid(-2.0, 2.0, 401)
        .into_iter()
        .map(|s| (p.eval(0, s) - elu(s)).abs())
        .fold(0.0, f64::max);
    assert!(interior < 2e-2, "{interior}");
}

#[test]
fn ridge_solution_matches_nalgebra() {
    let dict = dictionary();
    for variant in [RqVariant::PaperPlus, RqVariant::StandardMinus] {
        let cfg = KafConfig {
            rq_variant: variant,
            ..KafConfig::multikaf()
        };
        let kernels = cfg.kernel_specs(&dict).unwrap();
        let mu = [0.2, 0.5, 0.3];
        let t: Vec<f64> = dict.points().iter().map(|&d| elu(d)).collect();
        let ours = krr_init(&kernels, &mu, &dict, &t, KRR_EPSILON).unwrap();
        let pts = dict.points();
        let k = DMatrix::from_fn(15, 15, |i, j| {
            kernels.iter().zip(mu).map(|(k, w)| w * k.eval(pts[i], pts[j])).sum::<f64>()
        }) + DMatrix::identity(15, 15) * KRR_EPSILON;
        let oracle = k.lu().solve(&DVector::from_vec(t)).unwrap();
        for (a, b) in ours.iter().zip(oracle.iter()) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
        let gram = mixed_gram(&kernels, &mu, &dict).unwrap();
        assert_eq!(gram.dim(), 15);
    }
}

#[test]
fn cached_and_uncached_agree_bitwise() {
    let dict = dictionary();
    let p = random_params(5, three_kernels(&dict), dict, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = Tensor::from_fn(&[7, 5], |_| rng.random_range(-3.0..3.0));
    let (a, cache) = multikaf_forward(&p, &x).unwrap();
    let b = multikaf_forward_uncached(&p, &x).unwrap();
    assert_eq!(a, b);
    let g = multikaf_backward(&p, &cache, &Tensor::full(&[7, 5], 1.0)).unwrap();
    assert_eq!(g.alpha.shape(), &[5, 15]);
    assert_eq!(g.mu.shape(), &[5, 3]);
    assert!(multikaf_forward(&p, &Tensor::zeros(&[7, 4])).is_err());
}

proptest! {
    #[test]
    fn mu_gradient_is_per_kernel_expansion(s in -4.0f64..4.0, seed in any::<u64>()) {
        let dict = dictionary();
        let p = random_params(1, three_kernels(&dict), dict, seed);
        let x = Tensor::new(vec![1, 1], vec![s]).unwrap();
        let (_, cache) = multikaf_forward(&p, &x).unwrap();
        let g = multikaf_backward(&p, &cache, &Tensor::full(&[1, 1], 1.0)).unwrap();
        for (m, part) in p.components(0, s).iter().enumerate() {
            let mu = p.mu_row(0)[m];
            prop_assume!(mu > 1e-3);
            prop_assert!((g.mu.data()[m] - part / mu).abs() < 1e-9 * (part / mu).abs().max(1.0));
        }
    }
}
