//! Instantiated networks: parameter state, forward/backward through the layer
//! list, and parameter accounting.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::kaf::{self, CachedKernels, Dictionary, KafConfig, MultiKafParams};
use crate::nn::activation::{elu_backward, elu_forward, relu_backward, relu_forward};
use crate::nn::batchnorm::{self, BatchNormCache, RunningStats};
use crate::nn::conv::{conv2d_backward, conv2d_forward, ConvGeometry};
use crate::nn::dense::{dense_backward, dense_forward};
use crate::nn::dropout::{dropout_backward, dropout_forward};
use crate::nn::pool::{maxpool_backward, maxpool_forward};
use crate::nn::spec::{ActivationSpec, LayerSpec, NetworkSpec};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// A trainable tensor and its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    /// Whether the tensor is part of the L2 penalty.
    pub decay: bool,
}

impl Param {
    fn new(value: Tensor, decay: bool) -> Self {
        let grad = value.zeros_like();
        Self { value, grad, decay }
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Dense {
        weight: Param,
        bias: Param,
        input: Option<Tensor>,
    },
    Conv2d {
        weight: Param,
        bias: Param,
        geom: ConvGeometry,
        input: Option<Tensor>,
    },
    MaxPool2d {
        kernel: usize,
        stride: usize,
        cache: Option<(Vec<usize>, Vec<usize>)>,
    },
    BatchNorm {
        gamma: Param,
        beta: Param,
        stats: RunningStats,
        cache: Option<BatchNormCache>,
    },
    Dropout {
        p: f64,
        mask: Option<Option<Vec<f64>>>,
    },
    Flatten {
        input_shape: Option<Vec<usize>>,
    },
    Relu {
        input: Option<Tensor>,
    },
    Elu {
        input: Option<Tensor>,
    },
    Kaf {
        /// `α` and `μ` live here; the [`Param`] pair mirrors them for the optimizer.
        params: MultiKafParams,
        alpha: Param,
        mu: Param,
        cache: Option<CachedKernels>,
    },
}

fn missing_cache(name: &str) -> Error {
    Error::Domain(format!("{name} backward called without a matching training forward"))
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dense { .. } => "dense",
            Self::Conv2d { .. } => "conv2d",
            Self::MaxPool2d { .. } => "maxpool",
            Self::BatchNorm { .. } => "batchnorm",
            Self::Dropout { .. } => "dropout",
            Self::Flatten { .. } => "flatten",
            Self::Relu { .. } => "relu",
            Self::Elu { .. } => "elu",
            Self::Kaf { mu, .. } if mu.value.shape()[1] == 1 => "kaf",
            Self::Kaf { .. } => "multikaf",
        }
    }

    /// Trainable tensors, in a fixed order per layer kind.
    pub fn params(&self) -> Vec<&Param> {
        match self {
            Self::Dense { weight, bias, .. } | Self::Conv2d { weight, bias, .. } => {
                vec![weight, bias]
            }
            Self::BatchNorm { gamma, beta, .. } => vec![gamma, beta],
            Self::Kaf { alpha, mu, .. } => vec![alpha, mu],
            _ => vec![],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        match self {
            Self::Dense { weight, bias, .. } | Self::Conv2d { weight, bias, .. } => {
                vec![weight, bias]
            }
            Self::BatchNorm { gamma, beta, .. } => vec![gamma, beta],
            Self::Kaf { alpha, mu, .. } => vec![alpha, mu],
            _ => vec![],
        }
    }

    /// The multi-KAF coefficients, if this is a KAF layer.
    pub fn kaf_params(&self) -> Option<&MultiKafParams> {
        match self {
            Self::Kaf { params, .. } => Some(params),
            _ => None,
        }
    }

    fn sync_kaf(&mut self) {
        if let Self::Kaf {
            params, alpha, mu, ..
        } = self
        {
            params.alpha.data_mut().copy_from_slice(alpha.value.data());
            params.mu.data_mut().copy_from_slice(mu.value.data());
        }
    }

    fn forward(&mut self, x: Tensor, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Tensor> {
        let train = mode == Mode::Train;
        match self {
            Self::Dense {
                weight,
                bias,
                input,
            } => {
                let y = dense_forward(&x, &weight.value, &bias.value)?;
                *input = train.then_some(x);
                Ok(y)
            }
            Self::Conv2d {
                weight,
                bias,
                geom,
                input,
            } => {
                let y = conv2d_forward(&x, &weight.value, &bias.value, *geom)?;
                *input = train.then_some(x);
                Ok(y)
            }
            Self::MaxPool2d {
                kernel,
                stride,
                cache,
            } => {
                let (y, argmax) = maxpool_forward(&x, *kernel, *stride)?;
                *cache = train.then(|| (x.shape().to_vec(), argmax));
                Ok(y)
            }
            Self::BatchNorm {
                gamma,
                beta,
                stats,
                cache,
            } => {
                if train {
                    let (y, c) =
                        batchnorm::batchnorm_forward_train(&x, &gamma.value, &beta.value, stats)?;
                    *cache = Some(c);
                    Ok(y)
                } else {
                    *cache = None;
                    batchnorm::batchnorm_forward_infer(&x, &gamma.value, &beta.value, stats)
                }
            }
            Self::Dropout { p, mask } => {
                let (y, m) = dropout_forward(&x, *p, train, rng)?;
                *mask = train.then_some(m);
                Ok(y)
            }
            Self::Flatten { input_shape } => {
                let b = x.batch();
                let rest = x.len() / b.max(1);
                *input_shape = train.then(|| x.shape().to_vec());
                x.reshape(&[b, rest])
            }
            Self::Relu { input } => {
                let y = relu_forward(&x);
                *input = train.then_some(x);
                Ok(y)
            }
            Self::Elu { input } => {
                let y = elu_forward(&x);
                *input = train.then_some(x);
                Ok(y)
            }
            Self::Kaf { params, cache, .. } => {
                if train {
                    let (y, c) = kaf::multikaf_forward(params, &x)?;
                    *cache = Some(c);
                    Ok(y)
                } else {
                    *cache = None;
                    kaf::multikaf_forward_uncached(params, &x)
                }
            }
        }
    }

    /// Accumulates parameter gradients and returns the input gradient.
    fn backward(&mut self, up: Tensor) -> Result<Tensor> {
        let name = self.name();
        match self {
            Self::Dense {
                weight,
                bias,
                input,
            } => {
                let x = input.as_ref().ok_or_else(|| missing_cache(name))?;
                let g = dense_backward(x, &weight.value, &up)?;
                accumulate(&mut weight.grad, &g.weight);
                accumulate(&mut bias.grad, &g.bias);
                Ok(g.input)
            }
            Self::Conv2d {
                weight,
                bias,
                geom,
                input,
            } => {
                let x = input.as_ref().ok_or_else(|| missing_cache(name))?;
                let g = conv2d_backward(x, &weight.value, &up, *geom)?;
                accumulate(&mut weight.grad, &g.weight);
                accumulate(&mut bias.grad, &g.bias);
                Ok(g.input)
            }
            Self::MaxPool2d { cache, .. } => {
                let (shape, argmax) = cache.as_ref().ok_or_else(|| missing_cache(name))?;
                maxpool_backward(shape, argmax, &up)
            }
            Self::BatchNorm {
                gamma, beta, cache, ..
            } => {
                let c = cache.as_ref().ok_or_else(|| missing_cache(name))?;
                let g = batchnorm::batchnorm_backward(c, &gamma.value, &up)?;
                accumulate(&mut gamma.grad, &g.gamma);
                accumulate(&mut beta.grad, &g.beta);
                Ok(g.input)
            }
            Self::Dropout { mask, .. } => {
                let m = mask.as_ref().ok_or_else(|| missing_cache(name))?;
                dropout_backward(m.as_deref(), &up)
            }
            Self::Flatten { input_shape } => {
                let s = input_shape.as_ref().ok_or_else(|| missing_cache(name))?;
                up.reshape(s)
            }
            Self::Relu { input } => {
                let x = input.as_ref().ok_or_else(|| missing_cache(name))?;
                relu_backward(x, &up)
            }
            Self::Elu { input } => {
                let x = input.as_ref().ok_or_else(|| missing_cache(name))?;
                elu_backward(x, &up)
            }
            Self::Kaf {
                params,
                alpha,
                mu,
                cache,
            } => {
                let c = cache.as_ref().ok_or_else(|| missing_cache(name))?;
                let g = kaf::multikaf_backward(params, c, &up)?;
                accumulate(&mut alpha.grad, &g.alpha);
                accumulate(&mut mu.grad, &g.mu);
                Ok(g.input)
            }
        }
    }

    /// Every tensor a checkpoint stores for this layer: trainable values, then
    /// batch-norm running statistics.
    pub fn state(&self) -> Vec<&Tensor> {
        let mut out: Vec<&Tensor> = self.params().into_iter().map(|p| &p.value).collect();
        if let Self::BatchNorm { stats, .. } = self {
            out.push(&stats.mean);
            out.push(&stats.var);
        }
        out
    }

    fn state_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Self::BatchNorm {
                gamma, beta, stats, ..
            } => vec![
                &mut gamma.value,
                &mut beta.value,
                &mut stats.mean,
                &mut stats.var,
            ],
            other => other.params_mut().into_iter().map(|p| &mut p.value).collect(),
        }
    }
}

fn accumulate(into: &mut Tensor, g: &Tensor) {
    for (a, b) in into.data_mut().iter_mut().zip(g.data()) {
        *a += b;
    }
}

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Tensor::from_fn(shape, |_| rng.random_range(-bound..bound))
}

/// A built network: layers with owned parameters and the dropout RNG.
#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<Layer>,
    rng: ChaCha8Rng,
}

impl Network {
    /// Instantiates `spec`: weights drawn from a generator seeded with
    /// `spec.seed`, KAF layers initialized by the ELU ridge fit, and one
    /// dictionary shared by all KAF layers with the same settings.
    pub fn build(spec: &NetworkSpec) -> Result<Self> {
        let shapes = spec.shapes()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut dictionaries: Vec<(KafConfig, Arc<Dictionary>)> = Vec::new();
        let mut layers = Vec::with_capacity(spec.layers.len());
        for (i, ls) in spec.layers.iter().enumerate() {
            let in_shape = if i == 0 {
                &spec.input_shape
            } else {
                &shapes[i - 1]
            };
            let layer = match ls {
                LayerSpec::Dense { inputs, outputs } => Layer::Dense {
                    weight: Param::new(
                        glorot(&[*outputs, *inputs], *inputs, *outputs, &mut rng),
                        true,
                    ),
                    bias: Param::new(Tensor::zeros(&[*outputs]), false),
                    input: None,
                },
                LayerSpec::Conv2d {
                    in_ch,
                    out_ch,
                    kernel,
                    padding,
                    stride,
                } => {
                    let area = kernel * kernel;
                    Layer::Conv2d {
                        weight: Param::new(
                            glorot(
                                &[*out_ch, *in_ch, *kernel, *kernel],
                                in_ch * area,
                                out_ch * area,
                                &mut rng,
                            ),
                            true,
                        ),
                        bias: Param::new(Tensor::zeros(&[*out_ch]), false),
                        geom: ConvGeometry {
                            padding: *padding,
                            stride: *stride,
                        },
                        input: None,
                    }
                }
                LayerSpec::MaxPool2d { kernel, stride } => Layer::MaxPool2d {
                    kernel: *kernel,
                    stride: *stride,
                    cache: None,
                },
                LayerSpec::BatchNorm {
                    features,
                    momentum,
                    eps,
                } => Layer::BatchNorm {
                    gamma: Param::new(Tensor::full(&[*features], 1.0), true),
                    beta: Param::new(Tensor::zeros(&[*features]), false),
                    stats: RunningStats::new(*features, *momentum, *eps),
                    cache: None,
                },
                LayerSpec::Dropout { p } => Layer::Dropout { p: *p, mask: None },
                LayerSpec::Flatten => Layer::Flatten { input_shape: None },
                LayerSpec::Activation(ActivationSpec::Relu) => Layer::Relu { input: None },
                LayerSpec::Activation(ActivationSpec::Elu) => Layer::Elu { input: None },
                LayerSpec::Activation(ActivationSpec::Kaf(cfg))
                | LayerSpec::Activation(ActivationSpec::MultiKaf(cfg)) => {
                    let dict = match dictionaries.iter().find(|(c, _)| {
                        c.dict_size == cfg.dict_size && c.lo == cfg.lo && c.hi == cfg.hi
                    }) {
                        Some((_, d)) => d.clone(),
                        None => {
                            let d = Arc::new(cfg.dictionary()?);
                            dictionaries.push((cfg.clone(), d.clone()));
                            d
                        }
                    };
                    let kernels = cfg.kernel_specs(&dict)?;
                    let params = kaf::init_multikaf(in_shape[0], dict, kernels)
                        .map_err(|e| Error::Numeric(format!("layer {i} (kaf init): {e}")))?;
                    Layer::Kaf {
                        alpha: Param::new(params.alpha.clone(), true),
                        mu: Param::new(params.mu.clone(), true),
                        params,
                        cache: None,
                    }
                }
            };
            layers.push(layer);
        }
        Ok(Self {
            spec: spec.clone(),
            layers,
            rng: ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5EED_D80F),
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, index: usize) -> Option<&Layer> {
        self.layers.get(index)
    }

    /// Reseeds the generator that draws dropout masks.
    pub fn reseed_dropout(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    /// `input` is `[batch, ..input_shape]`.
    pub fn forward(&mut self, input: &Tensor, mode: Mode) -> Result<Tensor> {
        if input.rank() != self.spec.input_shape.len() + 1
            || input.shape()[1..] != self.spec.input_shape[..]
        {
            return domain(format!(
                "network expects [batch, {:?}], got {:?}",
                self.spec.input_shape,
                input.shape()
            ));
        }
        for layer in &mut self.layers {
            layer.sync_kaf();
        }
        let mut x = input.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            x = layer.forward(x, mode, &mut self.rng).map_err(|e| match e {
                Error::Domain(m) => Error::Domain(format!("layer {i} ({}): {m}", layer.name())),
                other => other,
            })?;
        }
        Ok(x)
    }

    /// Backpropagates `grad_output` through the most recent training forward,
    /// adding into every parameter's `grad`. Returns the input gradient.
    pub fn backward(&mut self, grad_output: &Tensor) -> Result<Tensor> {
        let mut g = grad_output.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(g)?;
        }
        Ok(g)
    }

    pub fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.grad.fill(0.0);
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Total trainable scalars.
    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    /// `‖w‖²` over decayed tensors (weights, batch-norm scale, `α`, `μ`;
    /// biases and batch-norm shift are excluded).
    pub fn l2_norm_sq(&self) -> f64 {
        self.params()
            .iter()
            .filter(|p| p.decay)
            .map(|p| p.value.sum_sq())
            .sum()
    }

    /// Adds `2λw` to the gradient of every decayed tensor.
    pub fn add_l2_grad(&mut self, lambda: f64) {
        for p in self.params_mut() {
            if p.decay {
                for (g, w) in p.grad.data_mut().iter_mut().zip(p.value.data()) {
                    *g += 2.0 * lambda * w;
                }
            }
        }
    }

    pub fn state(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.state()).collect()
    }

    /// Overwrites all state tensors (shapes must match) in checkpoint order.
    pub fn load_state(&mut self, tensors: Vec<Tensor>) -> Result<()> {
        let mut slots: Vec<&mut Tensor> =
            self.layers.iter_mut().flat_map(|l| l.state_mut()).collect();
        if slots.len() != tensors.len() {
            return domain(format!(
                "state has {} tensors, network expects {}",
                tensors.len(),
                slots.len()
            ));
        }
        for (i, (slot, t)) in slots.iter_mut().zip(&tensors).enumerate() {
            if slot.shape() != t.shape() {
                return domain(format!(
                    "state tensor {i}: expected shape {:?}, got {:?}",
                    slot.shape(),
                    t.shape()
                ));
            }
        }
        for (slot, t) in slots.into_iter().zip(tensors) {
            *slot = t;
        }
        for layer in &mut self.layers {
            layer.sync_kaf();
        }
        Ok(())
    }

    /// Snapshot of all state tensors.
    pub fn snapshot(&self) -> Vec<Tensor> {
        self.state().into_iter().cloned().collect()
    }
}
