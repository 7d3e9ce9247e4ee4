//! Finite-difference audit of every hand-written backward pass.
//!
//! Each check compares an analytic gradient against central differences
//! `(L(x + h) − L(x − h)) / 2h` of a scalar probe, element by element. For a
//! single layer the probe is `Σ u ⊙ f(x)` with a fixed random upstream `u`;
//! for a whole network it is the regularized cross-entropy itself.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kaf::{self, KafConfig, MultiKafParams};
use crate::kernels::{KernelKind, KernelSpec, RqVariant};
use crate::nn::activation::{elu_backward, elu_forward, relu_backward, relu_forward};
use crate::nn::batchnorm::{batchnorm_backward, batchnorm_forward_train, RunningStats};
use crate::nn::conv::{conv2d_backward, conv2d_forward, ConvGeometry};
use crate::nn::dense::{dense_backward, dense_forward};
use crate::nn::dropout::{dropout_backward, dropout_forward};
use crate::nn::loss::softmax_cross_entropy;
use crate::nn::pool::{maxpool_backward, maxpool_forward};
use crate::nn::{ActivationSpec, Layer, LayerSpec, Mode, Network, NetworkSpec};
use crate::tensor::Tensor;

/// Central-difference step.
pub const STEP: f64 = 1e-6;
/// Largest admissible error for a single layer.
pub const LAYER_TOLERANCE: f64 = 1e-5;
/// Largest admissible error for a composed network.
pub const NETWORK_TOLERANCE: f64 = 1e-4;
/// Gradient magnitude below which errors are scaled by this floor instead of
/// the entry itself. Central differences cannot resolve an entry much smaller
/// than the rounding noise of the probe (about `1e-16 · |L| / STEP`), so tiny
/// entries are held to an absolute bound of `LAYER_TOLERANCE · SCALE_FLOOR`.
pub const SCALE_FLOOR: f64 = 1e-4;
/// Offset added to an analytic gradient by [`AuditOptions::perturb`].
pub const PERTURBATION: f64 = 1e-3;

/// `|a − n| / max(|a|, |n|, SCALE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(SCALE_FLOOR)
}

/// Central differences of `f` with respect to every element of `x`.
pub fn numeric_gradient(x: &mut [f64], mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let orig = x[j];
        x[j] = orig + STEP;
        let up = f(x)?;
        x[j] = orig - STEP;
        let down = f(x)?;
        x[j] = orig;
        out.push((up - down) / (2.0 * STEP));
    }
    Ok(out)
}

/// Outcome for one gradient tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub threshold: f64,
    pub entries: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error < self.threshold
    }
}

#[derive(Debug, Clone, Default)]
pub struct AuditOptions {
    pub seed: u64,
    /// Adds [`PERTURBATION`] to the first analytic entry of every check whose
    /// name starts with this prefix, to show the audit notices.
    pub perturb: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub checks: Vec<Check>,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    /// One line per check.
    pub fn report(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<28} entries={:<5} max_rel_err={:.3e} threshold={:.0e} {}",
                c.name,
                c.entries,
                c.max_error,
                c.threshold,
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

struct Auditor {
    rng: ChaCha8Rng,
    perturb: Option<String>,
    checks: Vec<Check>,
}

impl Auditor {
    fn record(&mut self, name: String, mut analytic: Vec<f64>, numeric: &[f64], threshold: f64) {
        if let Some(prefix) = &self.perturb {
            if name.starts_with(prefix.as_str()) && !analytic.is_empty() {
                analytic[0] += PERTURBATION;
            }
        }
        let max_error = analytic
            .iter()
            .zip(numeric)
            .map(|(&a, &n)| relative_error(a, n))
            .fold(0.0, f64::max);
        self.checks.push(Check {
            name,
            max_error,
            threshold,
            entries: numeric.len(),
        });
    }

    fn uniform(&mut self, shape: &[usize], lo: f64, hi: f64) -> Tensor {
        Tensor::from_fn(shape, |_| self.rng.random_range(lo..hi))
    }

    /// Values bounded away from zero by `gap`.
    fn away_from_zero(&mut self, shape: &[usize], gap: f64) -> Tensor {
        Tensor::from_fn(shape, |_| {
            let v = self.rng.random_range(gap..1.5);
            if self.rng.random::<bool>() {
                v
            } else {
                -v
            }
        })
    }

    /// Checks every operand of a layer. `forward` maps operands to the output;
    /// `backward` maps operands and an upstream gradient to one gradient per
    /// operand.
    fn layer(
        &mut self,
        name: &str,
        operands: Vec<(&str, Tensor)>,
        forward: impl Fn(&[Tensor]) -> Result<Tensor>,
        backward: impl Fn(&[Tensor], &Tensor) -> Result<Vec<Tensor>>,
    ) -> Result<()> {
        let (labels, mut values): (Vec<&str>, Vec<Tensor>) = operands.into_iter().unzip();
        let out = forward(&values)?;
        let upstream = self.uniform(out.shape(), -1.0, 1.0);
        let analytic = backward(&values, &upstream)?;
        for (i, label) in labels.iter().enumerate() {
            let mut x = values[i].data().to_vec();
            let numeric = numeric_gradient(&mut x, |x| {
                values[i].data_mut().copy_from_slice(x);
                let y = forward(&values)?;
                Ok(y.data().iter().zip(upstream.data()).map(|(a, b)| a * b).sum())
            })?;
            values[i].data_mut().copy_from_slice(&x);
            self.record(
                format!("{name}/{label}"),
                analytic[i].data().to_vec(),
                &numeric,
                LAYER_TOLERANCE,
            );
        }
        Ok(())
    }
}

fn kaf_params(values: &[Tensor], kernels: &[KernelSpec], dict: &Arc<kaf::Dictionary>) -> Result<MultiKafParams> {
    MultiKafParams::new(values[1].clone(), values[2].clone(), kernels.to_vec(), dict.clone())
}

fn audit_kaf(a: &mut Auditor, name: &str, input_shape: &[usize], cfg: KafConfig) -> Result<()> {
    let dict = Arc::new(cfg.dictionary()?);
    let kernels = cfg.kernel_specs(&dict)?;
    let neurons = input_shape[1];
    let x = a.uniform(input_shape, -3.5, 3.5);
    let alpha = a.uniform(&[neurons, dict.len()], -1.0, 1.0);
    let mu = a.uniform(&[neurons, kernels.len()], 0.0, 1.0);
    a.layer(
        name,
        vec![("input", x), ("alpha", alpha), ("mu", mu)],
        |v| kaf::multikaf_forward_uncached(&kaf_params(v, &kernels, &dict)?, &v[0]),
        |v, up| {
            let p = kaf_params(v, &kernels, &dict)?;
            let (_, cache) = kaf::multikaf_forward(&p, &v[0])?;
            let g = kaf::multikaf_backward(&p, &cache, up)?;
            Ok(vec![g.input, g.alpha, g.mu])
        },
    )
}

fn audit_layers(a: &mut Auditor) -> Result<()> {
    let (x, w, b) = (
        a.uniform(&[4, 5], -1.0, 1.0),
        a.uniform(&[3, 5], -1.0, 1.0),
        a.uniform(&[3], -1.0, 1.0),
    );
    a.layer(
        "dense",
        vec![("input", x), ("weight", w), ("bias", b)],
        |v| dense_forward(&v[0], &v[1], &v[2]),
        |v, up| {
            let g = dense_backward(&v[0], &v[1], up)?;
            Ok(vec![g.input, g.weight, g.bias])
        },
    )?;

    for (name, shape, k, geom) in [
        ("conv2d", [2, 2, 6, 6], 3, ConvGeometry { padding: 1, stride: 1 }),
        ("conv2d-strided", [2, 2, 7, 7], 3, ConvGeometry { padding: 0, stride: 2 }),
    ] {
        let x = a.uniform(&shape, -1.0, 1.0);
        let w = a.uniform(&[3, 2, k, k], -1.0, 1.0);
        let b = a.uniform(&[3], -1.0, 1.0);
        a.layer(
            name,
            vec![("input", x), ("weight", w), ("bias", b)],
            |v| conv2d_forward(&v[0], &v[1], &v[2], geom),
            |v, up| {
                let g = conv2d_backward(&v[0], &v[1], up, geom)?;
                Ok(vec![g.input, g.weight, g.bias])
            },
        )?;
    }

    // Distinct values 0.01 apart keep every window's argmax stable under ±STEP.
    let mut ranks: Vec<usize> = (0..2 * 2 * 4 * 4).collect();
    for i in (1..ranks.len()).rev() {
        ranks.swap(i, a.rng.random_range(0..=i));
    }
    let x = Tensor::from_fn(&[2, 2, 4, 4], |i| ranks[i] as f64 * 0.01 - 0.3);
    a.layer(
        "maxpool",
        vec![("input", x)],
        |v| Ok(maxpool_forward(&v[0], 2, 2)?.0),
        |v, up| {
            let (_, argmax) = maxpool_forward(&v[0], 2, 2)?;
            Ok(vec![maxpool_backward(v[0].shape(), &argmax, up)?])
        },
    )?;

    let (x, g, b) = (
        a.uniform(&[4, 3, 2, 2], -2.0, 2.0),
        a.uniform(&[3], 0.5, 1.5),
        a.uniform(&[3], -0.5, 0.5),
    );
    let bn_forward = |v: &[Tensor]| {
        let mut stats = RunningStats::new(3, 0.9, 1e-5);
        batchnorm_forward_train(&v[0], &v[1], &v[2], &mut stats)
    };
    a.layer(
        "batchnorm",
        vec![("input", x), ("gamma", g), ("beta", b)],
        |v| Ok(bn_forward(v)?.0),
        |v, up| {
            let (_, cache) = bn_forward(v)?;
            let g = batchnorm_backward(&cache, &v[1], up)?;
            Ok(vec![g.input, g.gamma, g.beta])
        },
    )?;

    let x = a.away_from_zero(&[3, 7], 1e-3);
    a.layer(
        "relu",
        vec![("input", x)],
        |v| Ok(relu_forward(&v[0])),
        |v, up| Ok(vec![relu_backward(&v[0], up)?]),
    )?;

    let x = a.away_from_zero(&[3, 7], 1e-3);
    a.layer(
        "elu",
        vec![("input", x)],
        |v| Ok(elu_forward(&v[0])),
        |v, up| Ok(vec![elu_backward(&v[0], up)?]),
    )?;

    let mask_seed = a.rng.random::<u64>();
    let x = a.uniform(&[4, 6], -1.0, 1.0);
    let dropout = |v: &[Tensor]| {
        dropout_forward(&v[0], 0.5, true, &mut ChaCha8Rng::seed_from_u64(mask_seed))
    };
    a.layer(
        "dropout",
        vec![("input", x)],
        |v| Ok(dropout(v)?.0),
        |v, up| Ok(vec![dropout_backward(dropout(v)?.1.as_deref(), up)?]),
    )?;

    audit_kaf(a, "kaf", &[4, 3], KafConfig::kaf())?;
    audit_kaf(a, "multikaf", &[2, 3, 2, 2], KafConfig::multikaf())?;
    audit_kaf(
        a,
        "multikaf-rq-minus",
        &[3, 2],
        KafConfig {
            rq_variant: RqVariant::StandardMinus,
            kernels: vec![KernelKind::RationalQuadratic, KernelKind::Polynomial2],
            ..KafConfig::multikaf()
        },
    )?;

    let logits = a.uniform(&[3, 4], -2.0, 2.0);
    let onehot = Tensor::from_fn(&[3, 4], |i| if i % 4 == (i / 4 + 1) % 4 { 1.0 } else { 0.0 });
    let mut x = logits.data().to_vec();
    let (_, grad) = softmax_cross_entropy(&logits, &onehot, 0.0)?;
    let numeric = numeric_gradient(&mut x, |x| {
        let l = Tensor::new(vec![3, 4], x.to_vec())?;
        Ok(softmax_cross_entropy(&l, &onehot, 0.0)?.0)
    })?;
    a.record("cross-entropy/logits".into(), grad.into_data(), &numeric, LAYER_TOLERANCE);
    Ok(())
}

/// Small conv net exercising every trainable layer kind together.
pub fn audit_network_spec(seed: u64) -> NetworkSpec {
    let mk = ActivationSpec::MultiKaf(KafConfig::multikaf());
    NetworkSpec {
        input_shape: vec![1, 6, 6],
        layers: vec![
            LayerSpec::Conv2d { in_ch: 1, out_ch: 3, kernel: 3, padding: 1, stride: 1 },
            LayerSpec::BatchNorm { features: 3, momentum: 0.9, eps: 1e-5 },
            LayerSpec::Activation(mk.clone()),
            LayerSpec::MaxPool2d { kernel: 2, stride: 2 },
            LayerSpec::Flatten,
            LayerSpec::Dropout { p: 0.3 },
            LayerSpec::Dense { inputs: 27, outputs: 5 },
            LayerSpec::BatchNorm { features: 5, momentum: 0.9, eps: 1e-5 },
            LayerSpec::Activation(mk),
            LayerSpec::Dense { inputs: 5, outputs: 4 },
            LayerSpec::Activation(ActivationSpec::Elu),
            LayerSpec::Dense { inputs: 4, outputs: 3 },
        ],
        seed,
    }
}

fn param_labels(layer: &Layer) -> [&'static str; 2] {
    match layer {
        Layer::BatchNorm { .. } => ["gamma", "beta"],
        Layer::Kaf { .. } => ["alpha", "mu"],
        _ => ["weight", "bias"],
    }
}

fn audit_network(a: &mut Auditor) -> Result<()> {
    const LAMBDA: f64 = 1e-3;
    let spec = audit_network_spec(a.rng.random());
    let mut net = Network::build(&spec)?;
    // Move the KAFs away from their shared initialization.
    for p in net.params_mut() {
        for v in p.value.data_mut() {
            *v += a.rng.random_range(-0.1..0.1);
        }
    }
    let batch = 4;
    let x = a.uniform(&[batch, 1, 6, 6], 0.0, 1.0);
    let onehot = Tensor::from_fn(&[batch, 3], |i| if i % 3 == (i / 3) % 3 { 1.0 } else { 0.0 });
    let mask_seed = a.rng.random::<u64>();

    let objective = |net: &mut Network, x: &Tensor| -> Result<(f64, Tensor)> {
        net.reseed_dropout(mask_seed);
        let logits = net.forward(x, Mode::Train)?;
        softmax_cross_entropy(&logits, &onehot, LAMBDA * net.l2_norm_sq())
    };

    let (_, grad) = objective(&mut net, &x)?;
    net.zero_grads();
    let input_grad = net.backward(&grad)?;
    net.add_l2_grad(LAMBDA);

    let mut owners = Vec::new();
    for (li, layer) in net.layers().iter().enumerate() {
        for (pi, label) in param_labels(layer).iter().take(layer.params().len()).enumerate() {
            owners.push((format!("network/{li}:{}/{label}", layer.name()), pi));
        }
    }
    let analytic: Vec<Vec<f64>> = net.params().iter().map(|p| p.grad.data().to_vec()).collect();
    for (t, (name, _)) in owners.iter().enumerate() {
        let mut values = net.params()[t].value.data().to_vec();
        let numeric = numeric_gradient(&mut values, |v| {
            net.params_mut()[t].value.data_mut().copy_from_slice(v);
            Ok(objective(&mut net, &x)?.0)
        })?;
        net.params_mut()[t].value.data_mut().copy_from_slice(&values);
        a.record(name.clone(), analytic[t].clone(), &numeric, NETWORK_TOLERANCE);
    }

    let mut xv = x.data().to_vec();
    let numeric = numeric_gradient(&mut xv, |v| {
        let xp = Tensor::new(x.shape().to_vec(), v.to_vec())?;
        Ok(objective(&mut net, &xp)?.0)
    })?;
    a.record("network/input".into(), input_grad.into_data(), &numeric, NETWORK_TOLERANCE);
    Ok(())
}

/// Runs every layer check and the composed-network check.
pub fn run_audit(options: &AuditOptions) -> Result<Audit> {
    let mut a = Auditor {
        rng: ChaCha8Rng::seed_from_u64(options.seed),
        perturb: options.perturb.clone(),
        checks: Vec::new(),
    };
    audit_layers(&mut a)?;
    audit_network(&mut a)?;
    Ok(Audit { checks: a.checks })
}
