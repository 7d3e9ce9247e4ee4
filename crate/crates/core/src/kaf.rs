//! Kernel activation functions.
//!
//! Every neuron owns an activation `g(s) = Σᵢ αᵢ Σₘ μₘ κₘ(s, dᵢ)` where the
//! dictionary `d` is fixed and shared, and `α` (one row per neuron) and `μ`
//! (one weight per base kernel per neuron) are trained. A plain KAF is the
//! single-kernel case with `μ = 1`.
//!
//! Neurons live on axis 1 of the activation tensor: features for `(batch,
//! features)` inputs and channels for `(batch, channels, h, w)` inputs, so all
//! spatial positions of a channel share its coefficients.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::kernels::{gamma_rule_of_thumb, KernelKind, KernelSpec, RqVariant, DEFAULT_RQ_C};
use crate::linalg::Matrix;
use crate::tensor::Tensor;

/// Ridge term used when fitting the initial activation.
pub const KRR_EPSILON: f64 = 1e-4;

/// Equispaced, fixed sample points `d₀ < d₁ < … < d_{D-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    points: Vec<f64>,
    delta: f64,
    lo: f64,
    hi: f64,
}

impl Dictionary {
    /// `size` points from `lo` to `hi` inclusive.
    pub fn new(size: usize, lo: f64, hi: f64) -> Result<Self> {
        if size < 2 {
            return domain(format!("dictionary needs at least 2 points, got {size}"));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("dictionary range must satisfy lo < hi, got [{lo}, {hi}]"));
        }
        let delta = (hi - lo) / (size - 1) as f64;
        let mut points: Vec<f64> = (0..size).map(|i| lo + i as f64 * delta).collect();
        points[size - 1] = hi;
        Ok(Self {
            points,
            delta,
            lo,
            hi,
        })
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Declarative settings for a KAF layer. Resolved into kernels against a
/// concrete dictionary with [`KafConfig::kernel_specs`].
#[derive(Debug, Clone, PartialEq)]
pub struct KafConfig {
    pub dict_size: usize,
    pub lo: f64,
    pub hi: f64,
    /// Gaussian bandwidth; `None` applies the `1/(6Δ²)` rule.
    pub gamma: Option<f64>,
    pub rq_c: f64,
    pub rq_variant: RqVariant,
    pub kernels: Vec<KernelKind>,
}

impl KafConfig {
    /// Single Gaussian kernel over 15 points on `[-3, 3]`.
    pub fn kaf() -> Self {
        Self {
            dict_size: 15,
            lo: -3.0,
            hi: 3.0,
            gamma: None,
            rq_c: DEFAULT_RQ_C,
            rq_variant: RqVariant::PaperPlus,
            kernels: vec![KernelKind::Gaussian],
        }
    }

    /// Gaussian, rational-quadratic and quadratic-polynomial mixture.
    pub fn multikaf() -> Self {
        Self {
            kernels: vec![
                KernelKind::Gaussian,
                KernelKind::RationalQuadratic,
                KernelKind::Polynomial2,
            ],
            ..Self::kaf()
        }
    }

    pub fn dictionary(&self) -> Result<Dictionary> {
        Dictionary::new(self.dict_size, self.lo, self.hi)
    }

    pub fn kernel_specs(&self, dictionary: &Dictionary) -> Result<Vec<KernelSpec>> {
        if self.kernels.is_empty() {
            return domain("a KAF needs at least one base kernel");
        }
        self.kernels
            .iter()
            .map(|kind| match kind {
                KernelKind::Gaussian => {
                    let gamma = match self.gamma {
                        Some(g) => g,
                        None => gamma_rule_of_thumb(dictionary.delta())?,
                    };
                    KernelSpec::gaussian(gamma)
                }
                KernelKind::RationalQuadratic => {
                    KernelSpec::rational_quadratic(self.rq_c, self.rq_variant)
                }
                KernelKind::Polynomial2 => Ok(KernelSpec::Polynomial2),
            })
            .collect()
    }
}

/// Trainable coefficients of a layer of (multi-)KAF neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiKafParams {
    /// `[neurons, D]`
    pub alpha: Tensor,
    /// `[neurons, M]`
    pub mu: Tensor,
    kernels: Vec<KernelSpec>,
    dictionary: Arc<Dictionary>,
}

impl MultiKafParams {
    pub fn new(
        alpha: Tensor,
        mu: Tensor,
        kernels: Vec<KernelSpec>,
        dictionary: Arc<Dictionary>,
    ) -> Result<Self> {
        let d = dictionary.len();
        let m = kernels.len();
        if m == 0 {
            return domain("a KAF needs at least one base kernel");
        }
        if alpha.rank() != 2 || alpha.shape()[1] != d {
            return domain(format!(
                "alpha must be [neurons, {d}], got {:?}",
                alpha.shape()
            ));
        }
        let n = alpha.shape()[0];
        mu.check_shape(&[n, m], "mu")?;
        Ok(Self {
            alpha,
            mu,
            kernels,
            dictionary,
        })
    }

    #[inline]
    pub fn neurons(&self) -> usize {
        self.alpha.shape()[0]
    }

    #[inline]
    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    #[inline]
    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dictionary
    }

    pub fn alpha_row(&self, n: usize) -> &[f64] {
        let d = self.dictionary.len();
        &self.alpha.data()[n * d..(n + 1) * d]
    }

    pub fn mu_row(&self, n: usize) -> &[f64] {
        let m = self.kernels.len();
        &self.mu.data()[n * m..(n + 1) * m]
    }

    /// `g(s)` for one neuron.
    pub fn eval(&self, neuron: usize, s: f64) -> f64 {
        let mut row = vec![0.0; self.kernels.len() * self.dictionary.len()];
        fill_kernel_row(&self.kernels, self.dictionary.points(), s, &mut row);
        combine(&row, self.alpha_row(neuron), self.mu_row(neuron))
    }

    /// Per-kernel contributions `μₘ Σᵢ αᵢ κₘ(s, dᵢ)`; they sum to `g(s)`.
    pub fn components(&self, neuron: usize, s: f64) -> Vec<f64> {
        let pts = self.dictionary.points();
        let alpha = self.alpha_row(neuron);
        self.kernels
            .iter()
            .zip(self.mu_row(neuron))
            .map(|(k, mu)| {
                mu * pts
                    .iter()
                    .zip(alpha)
                    .map(|(&d, a)| a * k.eval(s, d))
                    .sum::<f64>()
            })
            .collect()
    }
}

/// Base-kernel evaluations saved by the forward pass: for every input scalar,
/// the `M × D` values `κₘ(s, dᵢ)` (kernel-major).
#[derive(Debug, Clone)]
pub struct CachedKernels {
    input: Tensor,
    values: Vec<f64>,
}

impl CachedKernels {
    pub fn input(&self) -> &Tensor {
        &self.input
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Gradients of a multi-KAF layer.
#[derive(Debug, Clone)]
pub struct KafGrads {
    pub input: Tensor,
    pub alpha: Tensor,
    pub mu: Tensor,
}

#[inline]
fn fill_kernel_row(kernels: &[KernelSpec], points: &[f64], s: f64, row: &mut [f64]) {
    let d = points.len();
    for (k, chunk) in kernels.iter().zip(row.chunks_exact_mut(d)) {
        for (slot, &p) in chunk.iter_mut().zip(points) {
            *slot = k.eval(s, p);
        }
    }
}

/// `Σᵢ αᵢ Σₘ μₘ row[m][i]`; the single summation order used everywhere so that
/// cached and uncached evaluation agree bit-for-bit.
#[inline]
fn combine(row: &[f64], alpha: &[f64], mu: &[f64]) -> f64 {
    let d = alpha.len();
    let mut g = 0.0;
    for (i, a) in alpha.iter().enumerate() {
        let mut mixed = 0.0;
        for (m, w) in mu.iter().enumerate() {
            mixed += w * row[m * d + i];
        }
        g += a * mixed;
    }
    g
}

/// `(outer, inner)` sizes around axis 1, which must hold `neurons` entries.
fn neuron_layout(shape: &[usize], neurons: usize) -> Result<(usize, usize)> {
    if shape.len() < 2 {
        return domain(format!(
            "KAF input needs a neuron axis at position 1, got shape {shape:?}"
        ));
    }
    if shape[1] != neurons {
        return domain(format!(
            "KAF input has {} neurons on axis 1, parameters have {neurons}",
            shape[1]
        ));
    }
    Ok((shape[0], shape[2..].iter().product()))
}

/// Forward pass; returns the activations and the kernel cache for backward.
pub fn multikaf_forward(
    params: &MultiKafParams,
    input: &Tensor,
) -> Result<(Tensor, CachedKernels)> {
    let n = params.neurons();
    let (outer, inner) = neuron_layout(input.shape(), n)?;
    let pts = params.dictionary.points();
    let width = params.kernels.len() * pts.len();
    let mut values = vec![0.0; input.len() * width];
    let mut out = Tensor::zeros(input.shape());
    let xs = input.data();
    let ys = out.data_mut();
    for b in 0..outer {
        for neuron in 0..n {
            let alpha = params.alpha_row(neuron);
            let mu = params.mu_row(neuron);
            let base = (b * n + neuron) * inner;
            for idx in base..base + inner {
                let row = &mut values[idx * width..(idx + 1) * width];
                fill_kernel_row(&params.kernels, pts, xs[idx], row);
                ys[idx] = combine(row, alpha, mu);
            }
        }
    }
    Ok((
        out,
        CachedKernels {
            input: input.clone(),
            values,
        },
    ))
}

/// Forward pass that recomputes every kernel value instead of caching.
pub fn multikaf_forward_uncached(params: &MultiKafParams, input: &Tensor) -> Result<Tensor> {
    let n = params.neurons();
    let (outer, inner) = neuron_layout(input.shape(), n)?;
    let pts = params.dictionary.points();
    let mut row = vec![0.0; params.kernels.len() * pts.len()];
    let mut out = Tensor::zeros(input.shape());
    let xs = input.data();
    let ys = out.data_mut();
    for b in 0..outer {
        for neuron in 0..n {
            let base = (b * n + neuron) * inner;
            for idx in base..base + inner {
                fill_kernel_row(&params.kernels, pts, xs[idx], &mut row);
                ys[idx] = combine(&row, params.alpha_row(neuron), params.mu_row(neuron));
            }
        }
    }
    Ok(out)
}

/// Reverse pass. Gradients for `α` and `μ` accumulate over every scalar that
/// belongs to a neuron (all batch rows and spatial positions).
pub fn multikaf_backward(
    params: &MultiKafParams,
    cache: &CachedKernels,
    upstream: &Tensor,
) -> Result<KafGrads> {
    upstream.check_shape(cache.input.shape(), "KAF upstream gradient")?;
    let n = params.neurons();
    let (outer, inner) = neuron_layout(upstream.shape(), n)?;
    let pts = params.dictionary.points();
    let d = pts.len();
    let m = params.kernels.len();
    let width = m * d;
    if cache.values.len() != cache.input.len() * width {
        return domain("kernel cache does not match these parameters");
    }

    let mut grad_input = Tensor::zeros(upstream.shape());
    let mut grad_alpha = Tensor::zeros(params.alpha.shape());
    let mut grad_mu = Tensor::zeros(params.mu.shape());
    let xs = cache.input.data();
    let ups = upstream.data();
    let gi = grad_input.data_mut();

    for neuron in 0..n {
        let alpha = params.alpha_row(neuron);
        let mu = params.mu_row(neuron);
        let ga = &mut grad_alpha.data_mut()[neuron * d..(neuron + 1) * d];
        let gm = &mut grad_mu.data_mut()[neuron * m..(neuron + 1) * m];
        for b in 0..outer {
            let base = (b * n + neuron) * inner;
            for idx in base..base + inner {
                let up = ups[idx];
                let s = xs[idx];
                let row = &cache.values[idx * width..(idx + 1) * width];
                let mut ds = 0.0;
                for (i, (&a, &p)) in alpha.iter().zip(pts).enumerate() {
                    let mut mixed = 0.0;
                    let mut mixed_grad = 0.0;
                    for (k, (spec, &w)) in params.kernels.iter().zip(mu).enumerate() {
                        let v = row[k * d + i];
                        mixed += w * v;
                        mixed_grad += w * spec.grad_s_given_value(s, p, v);
                    }
                    ga[i] += up * mixed;
                    ds += a * mixed_grad;
                }
                for (k, slot) in gm.iter_mut().enumerate() {
                    let proj: f64 = alpha
                        .iter()
                        .zip(&row[k * d..(k + 1) * d])
                        .map(|(a, v)| a * v)
                        .sum();
                    *slot += up * proj;
                }
                gi[idx] = up * ds;
            }
        }
    }
    Ok(KafGrads {
        input: grad_input,
        alpha: grad_alpha,
        mu: grad_mu,
    })
}

/// Unit-scale exponential linear unit.
#[inline]
pub fn elu(s: f64) -> f64 {
    if s > 0.0 {
        s
    } else {
        s.exp_m1()
    }
}

#[inline]
pub fn elu_grad(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else {
        s.exp()
    }
}

/// The mixed Gram matrix `K̃[i][j] = Σₘ μₘ κₘ(dᵢ, dⱼ)` over the dictionary.
pub fn mixed_gram(kernels: &[KernelSpec], mu: &[f64], dictionary: &Dictionary) -> Result<Matrix> {
    if kernels.len() != mu.len() {
        return domain(format!(
            "{} kernels but {} kernel weights",
            kernels.len(),
            mu.len()
        ));
    }
    let pts = dictionary.points();
    Ok(Matrix::from_fn(pts.len(), |i, j| {
        kernels
            .iter()
            .zip(mu)
            .map(|(k, w)| w * k.eval(pts[i], pts[j]))
            .sum()
    }))
}

/// Kernel ridge regression fit of the mixing coefficients:
/// `α = (K̃ + εI)⁻¹ t`.
pub fn krr_init(
    kernels: &[KernelSpec],
    mu: &[f64],
    dictionary: &Dictionary,
    targets: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>> {
    if targets.len() != dictionary.len() {
        return domain(format!(
            "{} targets for a dictionary of {} points",
            targets.len(),
            dictionary.len()
        ));
    }
    if !(epsilon >= 0.0) {
        return domain(format!("ridge term must be non-negative, got {epsilon}"));
    }
    let mut gram = mixed_gram(kernels, mu, dictionary)?;
    gram.add_diagonal(epsilon);
    gram.solve(targets)
}

/// Fresh layer of `neurons` identical activations: `μ = 1/M` and `α` fitted
/// so that every `g` starts close to ELU on the dictionary.
pub fn init_multikaf(
    neurons: usize,
    dictionary: Arc<Dictionary>,
    kernels: Vec<KernelSpec>,
) -> Result<MultiKafParams> {
    let m = kernels.len();
    if m == 0 {
        return domain("a KAF needs at least one base kernel");
    }
    let mu_row = vec![1.0 / m as f64; m];
    let targets: Vec<f64> = dictionary.points().iter().map(|&p| elu(p)).collect();
    let alpha_row = krr_init(&kernels, &mu_row, &dictionary, &targets, KRR_EPSILON)?;
    let alpha = Tensor::new(vec![neurons, dictionary.len()], alpha_row.repeat(neurons))?;
    let mu = Tensor::new(vec![neurons, m], mu_row.repeat(neurons))?;
    MultiKafParams::new(alpha, mu, kernels, dictionary)
}

/// `steps` equispaced samples of `[lo, hi]`, endpoints exact.
pub fn sample_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|j| {
            if j == 0 {
                lo
            } else if j == steps - 1 {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// CSV of one neuron's activation sampled at `steps` equispaced points of
/// `[lo, hi]`. With `components`, one extra column per base kernel.
pub fn activation_shape_csv(
    params: &MultiKafParams,
    neuron: usize,
    lo: f64,
    hi: f64,
    steps: usize,
    components: bool,
) -> Result<String> {
    if neuron >= params.neurons() {
        return domain(format!(
            "neuron {neuron} out of range ({} neurons)",
            params.neurons()
        ));
    }
    if steps == 0 || !(lo <= hi) {
        return domain(format!("bad sample grid: {steps} steps on [{lo}, {hi}]"));
    }
    let mut out = String::from("s,g(s)");
    if components {
        for (m, k) in params.kernels.iter().enumerate() {
            let _ = write!(out, ",mu{}_{}", m + 1, k.kind());
        }
    }
    out.push('\n');
    for s in sample_grid(lo, hi, steps) {
        let _ = write!(out, "{},{}", fmt_real(s), fmt_real(params.eval(neuron, s)));
        if components {
            for c in params.components(neuron, s) {
                let _ = write!(out, ",{}", fmt_real(c));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Decimal scientific notation with 15 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.14e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_only(dict: &Arc<Dictionary>) -> Vec<KernelSpec> {
        vec![KernelSpec::gaussian(gamma_rule_of_thumb(dict.delta()).unwrap()).unwrap()]
    }

    #[test]
    fn dictionary_construction() {
        let d = Dictionary::new(15, -3.0, 3.0).unwrap();
        assert!((d.delta() - 3.0 / 7.0).abs() < 1e-15);
        assert_eq!(d.points()[0], -3.0);
        assert_eq!(d.points()[14], 3.0);
        for w in d.points().windows(2) {
            assert!((w[1] - w[0] - d.delta()).abs() < 1e-12);
        }
        let d = Dictionary::new(2, -3.0, 3.0).unwrap();
        assert_eq!(d.points(), &[-3.0, 3.0]);
        assert_eq!(d.delta(), 6.0);
        assert!(Dictionary::new(1, -3.0, 3.0).is_err());
        assert!(Dictionary::new(5, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_alpha_gives_zero() {
        let dict = Arc::new(Dictionary::new(7, -2.0, 2.0).unwrap());
        let kernels = KafConfig::multikaf().kernel_specs(&dict).unwrap();
        let p = MultiKafParams::new(
            Tensor::zeros(&[2, 7]),
            Tensor::full(&[2, 3], 0.4),
            kernels,
            dict,
        )
        .unwrap();
        let x = Tensor::from_fn(&[3, 2], |i| i as f64 * 0.3 - 0.7);
        let (y, cache) = multikaf_forward(&p, &x).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.0));
        let g = multikaf_backward(&p, &cache, &Tensor::full(&[3, 2], 1.0)).unwrap();
        assert!(g.mu.data().iter().all(|&v| v == 0.0));
        assert!(g.input.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_term_reduction() {
        let dict = Arc::new(Dictionary::new(5, -1.0, 1.0).unwrap());
        let kernels = gaussian_only(&dict);
        let mut alpha = Tensor::zeros(&[1, 5]);
        alpha.data_mut()[0] = 1.0;
        let p = MultiKafParams::new(alpha, Tensor::full(&[1, 1], 1.0), kernels.clone(), dict)
            .unwrap();
        for &s in &[-2.0, -0.3, 0.0, 0.8, 1.7] {
            let y = multikaf_forward(&p, &Tensor::new(vec![1, 1], vec![s]).unwrap())
                .unwrap()
                .0;
            assert_eq!(y.data()[0], kernels[0].eval(s, -1.0));
        }
    }

    #[test]
    fn one_hot_upstream_gives_mixed_kernel() {
        let dict = Arc::new(Dictionary::new(6, -2.0, 2.0).unwrap());
        let kernels = KafConfig::multikaf().kernel_specs(&dict).unwrap();
        let mu = [0.2, -0.7, 1.3];
        let p = MultiKafParams::new(
            Tensor::from_fn(&[2, 6], |i| (i as f64).sin()),
            Tensor::new(vec![2, 3], [mu, mu].concat()).unwrap(),
            kernels.clone(),
            dict.clone(),
        )
        .unwrap();
        let x = Tensor::new(vec![2, 2], vec![0.1, -0.4, 1.1, 0.6]).unwrap();
        let (_, cache) = multikaf_forward(&p, &x).unwrap();
        let mut up = Tensor::zeros(&[2, 2]);
        up.data_mut()[3] = 1.0; // batch 1, neuron 1, s = 0.6
        let g = multikaf_backward(&p, &cache, &up).unwrap();
        for (i, &d) in dict.points().iter().enumerate() {
            let want: f64 = kernels.iter().zip(&mu).map(|(k, w)| w * k.eval(0.6, d)).sum();
            assert!((g.alpha.data()[6 + i] - want).abs() < 1e-15);
            assert_eq!(g.alpha.data()[i], 0.0);
        }
    }

    #[test]
    fn neuron_axis_mismatch() {
        let dict = Arc::new(Dictionary::new(5, -1.0, 1.0).unwrap());
        let p = init_multikaf(3, dict.clone(), gaussian_only(&dict)).unwrap();
        assert!(multikaf_forward(&p, &Tensor::zeros(&[2, 4])).is_err());
        assert!(multikaf_forward(&p, &Tensor::zeros(&[6])).is_err());
        let (_, cache) = multikaf_forward(&p, &Tensor::zeros(&[2, 3])).unwrap();
        assert!(multikaf_backward(&p, &cache, &Tensor::zeros(&[2, 3, 1])).is_err());
    }

    #[test]
    fn elu_values() {
        assert_eq!(elu(0.0), 0.0);
        assert_eq!(elu(2.0), 2.0);
        assert!((elu(-1.0) - (-0.632_120_558_828_557_7)).abs() < 1e-15);
    }

    #[test]
    fn krr_trivial_cases() {
        let dict = Dictionary::new(2, -3.0, 3.0).unwrap();
        let k = vec![KernelSpec::gaussian(0.5).unwrap()];
        assert_eq!(
            krr_init(&k, &[1.0], &dict, &[0.0, 0.0], KRR_EPSILON).unwrap(),
            vec![0.0, 0.0]
        );
        assert!(krr_init(&k, &[1.0], &dict, &[0.0], KRR_EPSILON).is_err());
        assert!(krr_init(&k, &[1.0, 1.0], &dict, &[0.0, 0.0], KRR_EPSILON).is_err());
        let dict = Dictionary::new(15, -3.0, 3.0).unwrap();
        let k = KafConfig::multikaf().kernel_specs(&dict).unwrap();
        let a = krr_init(&k, &[1.0 / 3.0; 3], &dict, &[0.0; 15], KRR_EPSILON).unwrap();
        assert!(a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_rows_identical_and_mu_uniform() {
        let dict = Arc::new(KafConfig::multikaf().dictionary().unwrap());
        let k = KafConfig::multikaf().kernel_specs(&dict).unwrap();
        let p = init_multikaf(2, dict, k).unwrap();
        assert_eq!(p.alpha_row(0), p.alpha_row(1));
        assert!(p.mu.data().iter().all(|&v| v == 1.0 / 3.0));
    }

    #[test]
    fn csv_grid_and_components() {
        let dict = Arc::new(KafConfig::multikaf().dictionary().unwrap());
        let k = KafConfig::multikaf().kernel_specs(&dict).unwrap();
        let p = init_multikaf(1, dict, k).unwrap();
        let csv = activation_shape_csv(&p, 0, -1.0, 1.0, 3, true).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,g(s),mu1_gaussian,mu2_rq,mu3_poly2");
        let s: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(s, vec![-1.0, 0.0, 1.0]);
        assert!(activation_shape_csv(&p, 1, -1.0, 1.0, 3, false).is_err());
    }
}
