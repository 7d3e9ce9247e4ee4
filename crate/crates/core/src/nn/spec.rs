//! Declarative network descriptions and their text form.
//!
//! A [`NetworkSpec`] is a per-sample input shape plus an ordered layer list.
//! It round-trips through a line-oriented `key = value` text format:
//!
//! ```text
//! network.input = 1,16,16
//! network.seed = 7
//! layer.0 = conv2d in=1 out=8 kernel=5 padding=2 stride=1
//! layer.1 = batchnorm features=8 momentum=0.9 eps=0.00001
//! layer.2 = multikaf dict=15 lo=-3 hi=3 gamma=auto rq_c=1 rq=plus kernels=gaussian+rq+poly2
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};
use crate::kaf::KafConfig;
use crate::kernels::{KernelKind, RqVariant};
use crate::nn::batchnorm::{DEFAULT_EPS, DEFAULT_MOMENTUM};
use crate::nn::conv::{conv_output_size, ConvGeometry};

#[derive(Debug, Clone, PartialEq)]
pub enum ActivationSpec {
    Relu,
    Elu,
    /// Single-kernel KAF.
    Kaf(KafConfig),
    /// Mixture of base kernels.
    MultiKaf(KafConfig),
}

impl ActivationSpec {
    pub fn kaf_config(&self) -> Option<&KafConfig> {
        match self {
            Self::Kaf(c) | Self::MultiKaf(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Conv2d {
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        padding: usize,
        stride: usize,
    },
    MaxPool2d {
        kernel: usize,
        stride: usize,
    },
    BatchNorm {
        features: usize,
        momentum: f64,
        eps: f64,
    },
    Dropout {
        p: f64,
    },
    Flatten,
    Activation(ActivationSpec),
}

impl LayerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dense { .. } => "dense",
            Self::Conv2d { .. } => "conv2d",
            Self::MaxPool2d { .. } => "maxpool",
            Self::BatchNorm { .. } => "batchnorm",
            Self::Dropout { .. } => "dropout",
            Self::Flatten => "flatten",
            Self::Activation(ActivationSpec::Relu) => "relu",
            Self::Activation(ActivationSpec::Elu) => "elu",
            Self::Activation(ActivationSpec::Kaf(_)) => "kaf",
            Self::Activation(ActivationSpec::MultiKaf(_)) => "multikaf",
        }
    }

    /// Per-sample output shape for a per-sample input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let bad = |msg: String| -> Result<Vec<usize>> { Err(Error::Domain(msg)) };
        match *self {
            Self::Dense { inputs, outputs } => {
                if inputs == 0 || outputs == 0 {
                    return bad("dense dimensions must be positive".into());
                }
                if input != [inputs] {
                    return bad(format!("dense expects input [{inputs}], got {input:?}"));
                }
                Ok(vec![outputs])
            }
            Self::Conv2d {
                in_ch,
                out_ch,
                kernel,
                padding,
                stride,
            } => {
                if in_ch == 0 || out_ch == 0 || kernel == 0 || stride == 0 {
                    return bad("conv2d dimensions must be positive".into());
                }
                if input.len() != 3 || input[0] != in_ch {
                    return bad(format!("conv2d expects [{in_ch}, h, w], got {input:?}"));
                }
                let geom = ConvGeometry { padding, stride };
                match (
                    conv_output_size(input[1], kernel, geom),
                    conv_output_size(input[2], kernel, geom),
                ) {
                    (Some(h), Some(w)) => Ok(vec![out_ch, h, w]),
                    _ => bad(format!(
                        "conv2d kernel {kernel} does not fit input {input:?} with padding {padding}"
                    )),
                }
            }
            Self::MaxPool2d { kernel, stride } => {
                if kernel == 0 || stride == 0 {
                    return bad("max-pool dimensions must be positive".into());
                }
                if input.len() != 3
                    || !input[1].is_multiple_of(stride)
                    || !input[2].is_multiple_of(stride)
                    || input[1] < kernel
                    || input[2] < kernel
                {
                    return bad(format!(
                        "max-pool {kernel}/{stride} needs [c, h, w] with h, w divisible by the stride, got {input:?}"
                    ));
                }
                Ok(vec![
                    input[0],
                    (input[1] - kernel) / stride + 1,
                    (input[2] - kernel) / stride + 1,
                ])
            }
            Self::BatchNorm { features, .. } => {
                if input.first() != Some(&features) {
                    return bad(format!("batch norm over {features} features got {input:?}"));
                }
                Ok(input.to_vec())
            }
            Self::Dropout { p } => {
                if !(0.0..1.0).contains(&p) {
                    return bad(format!("dropout probability must be in [0, 1), got {p}"));
                }
                Ok(input.to_vec())
            }
            Self::Flatten => Ok(vec![input.iter().product()]),
            Self::Activation(ref a) => {
                if let ActivationSpec::Kaf(cfg) = a {
                    if cfg.kernels.len() != 1 {
                        return bad(format!(
                            "kaf takes exactly one kernel, got {}",
                            cfg.kernels.len()
                        ));
                    }
                }
                if let Some(cfg) = a.kaf_config() {
                    cfg.dictionary()?;
                    if cfg.kernels.is_empty() {
                        return bad("multikaf needs at least one kernel".into());
                    }
                    if input.is_empty() {
                        return bad("kaf input has no neuron axis".into());
                    }
                }
                Ok(input.to_vec())
            }
        }
    }
}

/// Per-sample input shape plus an ordered layer list.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub seed: u64,
}

impl NetworkSpec {
    /// Per-sample shapes flowing out of each layer. Errors name the layer index.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        if self.input_shape.is_empty() || self.input_shape.contains(&0) {
            return domain(format!("invalid input shape {:?}", self.input_shape));
        }
        let mut shape = self.input_shape.clone();
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            shape = layer.output_shape(&shape).map_err(|e| {
                Error::Domain(format!("layer {i} ({}): {}", layer.name(), strip(&e)))
            })?;
            out.push(shape.clone());
        }
        Ok(out)
    }

    pub fn output_shape(&self) -> Result<Vec<usize>> {
        Ok(self
            .shapes()?
            .pop()
            .unwrap_or_else(|| self.input_shape.clone()))
    }

    /// Neurons that carry a trainable activation: the size of the neuron axis
    /// at each KAF layer, summed.
    pub fn kaf_neurons(&self) -> Result<usize> {
        let shapes = self.shapes()?;
        Ok(self
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, LayerSpec::Activation(a) if a.kaf_config().is_some()))
            .map(|(i, _)| {
                if i == 0 {
                    self.input_shape[0]
                } else {
                    shapes[i - 1][0]
                }
            })
            .sum())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "network.input = {}", join(&self.input_shape));
        let _ = writeln!(s, "network.seed = {}", self.seed);
        for (i, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(s, "layer.{i} = {}", layer_to_text(layer));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut input = None;
        let mut seed = 0;
        let mut layers: BTreeMap<usize, (usize, LayerSpec)> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "network.input" => input = Some(parse_list(value).map_err(perr)?),
                "network.seed" => {
                    seed = value
                        .parse()
                        .map_err(|_| perr(format!("bad seed `{value}`")))?
                }
                _ if key.starts_with("layer.") => {
                    let idx: usize = key["layer.".len()..]
                        .parse()
                        .map_err(|_| perr(format!("bad layer index in `{key}`")))?;
                    let layer = layer_from_text(value).map_err(perr)?;
                    if layers.insert(idx, (line_no, layer)).is_some() {
                        return Err(perr(format!("duplicate layer index {idx}")));
                    }
                }
                _ => return Err(perr(format!("unknown key `{key}`"))),
            }
        }
        for (expect, (&idx, (line, _))) in layers.iter().enumerate() {
            if idx != expect {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("layer indices must be contiguous from 0; missing {expect}"),
                });
            }
        }
        let input_shape = input.ok_or(Error::Parse {
            line: 0,
            msg: "missing `network.input`".into(),
        })?;
        Ok(Self {
            input_shape,
            layers: layers.into_values().map(|(_, l)| l).collect(),
            seed,
        })
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad integer `{p}` in list `{s}`"))
        })
        .collect()
}

fn kaf_to_text(cfg: &KafConfig) -> String {
    let gamma = cfg.gamma.map_or("auto".to_string(), |g| g.to_string());
    let rq = match cfg.rq_variant {
        RqVariant::PaperPlus => "plus",
        RqVariant::StandardMinus => "minus",
    };
    let kernels: Vec<&str> = cfg.kernels.iter().map(|k| k.name()).collect();
    format!(
        "dict={} lo={} hi={} gamma={gamma} rq_c={} rq={rq} kernels={}",
        cfg.dict_size,
        cfg.lo,
        cfg.hi,
        cfg.rq_c,
        kernels.join("+")
    )
}

fn layer_to_text(layer: &LayerSpec) -> String {
    match layer {
        LayerSpec::Dense { inputs, outputs } => format!("dense in={inputs} out={outputs}"),
        LayerSpec::Conv2d {
            in_ch,
            out_ch,
            kernel,
            padding,
            stride,
        } => format!(
            "conv2d in={in_ch} out={out_ch} kernel={kernel} padding={padding} stride={stride}"
        ),
        LayerSpec::MaxPool2d { kernel, stride } => format!("maxpool kernel={kernel} stride={stride}"),
        LayerSpec::BatchNorm {
            features,
            momentum,
            eps,
        } => format!("batchnorm features={features} momentum={momentum} eps={eps}"),
        LayerSpec::Dropout { p } => format!("dropout p={p}"),
        LayerSpec::Flatten => "flatten".into(),
        LayerSpec::Activation(ActivationSpec::Relu) => "relu".into(),
        LayerSpec::Activation(ActivationSpec::Elu) => "elu".into(),
        LayerSpec::Activation(ActivationSpec::Kaf(c)) => format!("kaf {}", kaf_to_text(c)),
        LayerSpec::Activation(ActivationSpec::MultiKaf(c)) => {
            format!("multikaf {}", kaf_to_text(c))
        }
    }
}

/// Parses `key=value` fields following the layer kind.
struct Fields<'a> {
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn parse(parts: impl Iterator<Item = &'a str>) -> std::result::Result<Self, String> {
        let mut map = BTreeMap::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("expected `key=value`, got `{part}`"))?;
            map.insert(k, v);
        }
        Ok(Self { map })
    }

    fn get<T: std::str::FromStr>(&mut self, key: &str) -> std::result::Result<T, String> {
        let v = self
            .map
            .remove(key)
            .ok_or_else(|| format!("missing field `{key}`"))?;
        v.parse().map_err(|_| format!("bad value `{v}` for `{key}`"))
    }

    fn get_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> std::result::Result<T, String> {
        if self.map.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.map.remove(key)
    }

    fn finish(self) -> std::result::Result<(), String> {
        match self.map.keys().next() {
            Some(k) => Err(format!("unknown field `{k}`")),
            None => Ok(()),
        }
    }
}

fn kaf_from_fields(f: &mut Fields<'_>, multi: bool) -> std::result::Result<KafConfig, String> {
    let base = if multi {
        KafConfig::multikaf()
    } else {
        KafConfig::kaf()
    };
    let gamma = match f.raw("gamma") {
        None | Some("auto") => None,
        Some(g) => Some(g.parse().map_err(|_| format!("bad gamma `{g}`"))?),
    };
    let rq_variant = match f.raw("rq") {
        None => base.rq_variant,
        Some(v) => parse_rq_variant(v)?,
    };
    let kernels = match f.raw("kernels") {
        None => base.kernels.clone(),
        Some(list) => parse_kernel_list(list)?,
    };
    Ok(KafConfig {
        dict_size: f.get_or("dict", base.dict_size)?,
        lo: f.get_or("lo", base.lo)?,
        hi: f.get_or("hi", base.hi)?,
        gamma,
        rq_c: f.get_or("rq_c", base.rq_c)?,
        rq_variant,
        kernels,
    })
}

pub(crate) fn parse_rq_variant(v: &str) -> std::result::Result<RqVariant, String> {
    match v.trim() {
        "plus" => Ok(RqVariant::PaperPlus),
        "minus" => Ok(RqVariant::StandardMinus),
        other => Err(format!("rq variant must be `plus` or `minus`, got `{other}`")),
    }
}

pub(crate) fn parse_kernel_list(list: &str) -> std::result::Result<Vec<KernelKind>, String> {
    list.split(['+', ','])
        .map(|k| KernelKind::parse(k).ok_or_else(|| format!("unknown kernel `{k}`")))
        .collect()
}

fn layer_from_text(s: &str) -> std::result::Result<LayerSpec, String> {
    let mut parts = s.split_whitespace();
    let kind = parts.next().ok_or("empty layer description")?;
    let mut f = Fields::parse(parts)?;
    let layer = match kind {
        "dense" => LayerSpec::Dense {
            inputs: f.get("in")?,
            outputs: f.get("out")?,
        },
        "conv2d" => LayerSpec::Conv2d {
            in_ch: f.get("in")?,
            out_ch: f.get("out")?,
            kernel: f.get_or("kernel", 5)?,
            padding: f.get_or("padding", 0)?,
            stride: f.get_or("stride", 1)?,
        },
        "maxpool" => LayerSpec::MaxPool2d {
            kernel: f.get_or("kernel", 2)?,
            stride: f.get_or("stride", 2)?,
        },
        "batchnorm" => LayerSpec::BatchNorm {
            features: f.get("features")?,
            momentum: f.get_or("momentum", DEFAULT_MOMENTUM)?,
            eps: f.get_or("eps", DEFAULT_EPS)?,
        },
        "dropout" => LayerSpec::Dropout { p: f.get("p")? },
        "flatten" => LayerSpec::Flatten,
        "relu" => LayerSpec::Activation(ActivationSpec::Relu),
        "elu" => LayerSpec::Activation(ActivationSpec::Elu),
        "kaf" => LayerSpec::Activation(ActivationSpec::Kaf(kaf_from_fields(&mut f, false)?)),
        "multikaf" => {
            LayerSpec::Activation(ActivationSpec::MultiKaf(kaf_from_fields(&mut f, true)?))
        }
        other => return Err(format!("unknown layer kind `{other}`")),
    };
    f.finish()?;
    Ok(layer)
}

/// Activation family of a generated architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Relu,
    Kaf,
    MultiKaf,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Some(Self::Relu),
            "kaf" => Some(Self::Kaf),
            "multikaf" | "multi-kaf" => Some(Self::MultiKaf),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Relu => "relu",
            Self::Kaf => "kaf",
            Self::MultiKaf => "multikaf",
        }
    }
}

/// A conv-pool stack followed by dense layers.
///
/// Each conv block is `[dropout] conv [batchnorm] activation maxpool`, each
/// hidden dense block `[dropout] dense [batchnorm] activation`, and the output
/// layer `[dropout] dense` without activation. With no conv blocks the input is
/// flattened first, giving an MLP.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchSpec {
    pub input_shape: Vec<usize>,
    pub filters: Vec<usize>,
    pub kernel: usize,
    pub dense: Vec<usize>,
    pub classes: usize,
    pub variant: Variant,
    /// Base settings for KAF activations; the kernel list is overridden to a
    /// single Gaussian for [`Variant::Kaf`].
    pub kaf: KafConfig,
    pub dropout: Option<f64>,
    pub batchnorm: bool,
    pub seed: u64,
}

impl ArchSpec {
    /// ReLU networks get dropout 0.5 before every linear layer; KAF networks
    /// get batch norm before every activation and no dropout.
    pub fn with_variant_defaults(mut self) -> Self {
        match self.variant {
            Variant::Relu => {
                self.dropout = Some(0.5);
                self.batchnorm = false;
            }
            Variant::Kaf | Variant::MultiKaf => {
                self.dropout = None;
                self.batchnorm = true;
            }
        }
        self
    }

    fn activation(&self) -> ActivationSpec {
        match self.variant {
            Variant::Relu => ActivationSpec::Relu,
            Variant::Kaf => ActivationSpec::Kaf(KafConfig {
                kernels: vec![KernelKind::Gaussian],
                ..self.kaf.clone()
            }),
            Variant::MultiKaf => ActivationSpec::MultiKaf(self.kaf.clone()),
        }
    }

    pub fn to_network_spec(&self) -> Result<NetworkSpec> {
        let mut layers = Vec::new();
        let mut shape = self.input_shape.clone();
        let push = |layers: &mut Vec<LayerSpec>, shape: &mut Vec<usize>, l: LayerSpec| -> Result<()> {
            *shape = l.output_shape(shape)?;
            layers.push(l);
            Ok(())
        };
        let dropout = |layers: &mut Vec<LayerSpec>| {
            if let Some(p) = self.dropout {
                layers.push(LayerSpec::Dropout { p });
            }
        };
        if !self.filters.is_empty() && shape.len() != 3 {
            return domain(format!("conv stack needs [c, h, w] input, got {shape:?}"));
        }
        for &f in &self.filters {
            dropout(&mut layers);
            let in_ch = shape[0];
            push(
                &mut layers,
                &mut shape,
                LayerSpec::Conv2d {
                    in_ch,
                    out_ch: f,
                    kernel: self.kernel,
                    padding: self.kernel / 2,
                    stride: 1,
                },
            )?;
            if self.batchnorm {
                layers.push(LayerSpec::BatchNorm {
                    features: f,
                    momentum: DEFAULT_MOMENTUM,
                    eps: DEFAULT_EPS,
                });
            }
            layers.push(LayerSpec::Activation(self.activation()));
            push(&mut layers, &mut shape, LayerSpec::MaxPool2d { kernel: 2, stride: 2 })?;
        }
        if shape.len() != 1 {
            push(&mut layers, &mut shape, LayerSpec::Flatten)?;
        }
        for &width in &self.dense {
            dropout(&mut layers);
            let inputs = shape[0];
            push(
                &mut layers,
                &mut shape,
                LayerSpec::Dense {
                    inputs,
                    outputs: width,
                },
            )?;
            if self.batchnorm {
                layers.push(LayerSpec::BatchNorm {
                    features: width,
                    momentum: DEFAULT_MOMENTUM,
                    eps: DEFAULT_EPS,
                });
            }
            layers.push(LayerSpec::Activation(self.activation()));
        }
        dropout(&mut layers);
        layers.push(LayerSpec::Dense {
            inputs: shape[0],
            outputs: self.classes,
        });
        let spec = NetworkSpec {
            input_shape: self.input_shape.clone(),
            layers,
            seed: self.seed,
        };
        spec.shapes()?;
        Ok(spec)
    }
}

/// Round half up.
pub fn scale_width(width: usize, scale: f64) -> usize {
    ((width as f64 * scale) + 0.5).floor().max(1.0) as usize
}

/// The character-recognition CNN: three 5×5 same-padded conv blocks (42, 28,
/// 28 filters) each followed by 2×2 max-pooling, a 100-unit dense layer and a
/// 23-way output, on 1×56×56 inputs. Filter and hidden widths are multiplied
/// by `width_scale`.
pub fn build_icr_cnn(variant: Variant, width_scale: f64) -> Result<NetworkSpec> {
    if !(width_scale > 0.0 && width_scale <= 1.0) {
        return domain(format!("width scale must be in (0, 1], got {width_scale}"));
    }
    let kaf = match variant {
        Variant::Kaf => KafConfig::kaf(),
        _ => KafConfig::multikaf(),
    };
    ArchSpec {
        input_shape: vec![1, 56, 56],
        filters: [42, 28, 28].iter().map(|&f| scale_width(f, width_scale)).collect(),
        kernel: 5,
        dense: vec![scale_width(100, width_scale)],
        classes: 23,
        variant,
        kaf,
        dropout: None,
        batchnorm: false,
        seed: 0,
    }
    .with_variant_defaults()
    .to_network_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv_filters(spec: &NetworkSpec) -> Vec<usize> {
        spec.layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Conv2d { out_ch, .. } => Some(*out_ch),
                _ => None,
            })
            .collect()
    }

    fn dense_widths(spec: &NetworkSpec) -> Vec<usize> {
        spec.layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Dense { outputs, .. } => Some(*outputs),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn icr_relu_full_width() {
        let spec = build_icr_cnn(Variant::Relu, 1.0).unwrap();
        assert_eq!(conv_filters(&spec), vec![42, 28, 28]);
        assert_eq!(dense_widths(&spec), vec![100, 23]);
        let dropouts = spec
            .layers
            .iter()
            .filter(|l| matches!(l, LayerSpec::Dropout { p } if *p == 0.5))
            .count();
        assert_eq!(dropouts, 5);
        assert!(!spec.layers.iter().any(|l| matches!(l, LayerSpec::BatchNorm { .. })));
    }

    #[test]
    fn icr_multikaf_reduced_width() {
        let spec = build_icr_cnn(Variant::MultiKaf, 0.9).unwrap();
        assert_eq!(conv_filters(&spec), vec![38, 25, 25]);
        assert_eq!(dense_widths(&spec), vec![90, 23]);
        assert!(!spec.layers.iter().any(|l| matches!(l, LayerSpec::Dropout { .. })));
        let shapes = spec.shapes().unwrap();
        let flatten = spec.layers.iter().position(|l| *l == LayerSpec::Flatten).unwrap();
        assert_eq!(shapes[flatten - 1], vec![25, 7, 7]);
        assert!(build_icr_cnn(Variant::Relu, 0.0).is_err());
        assert!(build_icr_cnn(Variant::Relu, 1.5).is_err());
    }

    #[test]
    fn composition_errors_name_layer() {
        let spec = NetworkSpec {
            input_shape: vec![10],
            layers: vec![
                LayerSpec::Dense { inputs: 10, outputs: 4 },
                LayerSpec::Dense { inputs: 5, outputs: 2 },
            ],
            seed: 0,
        };
        let err = spec.shapes().unwrap_err().to_string();
        assert!(err.contains("layer 1"), "{err}");
    }

    #[test]
    fn text_round_trip() {
        let mut spec = build_icr_cnn(Variant::MultiKaf, 0.9).unwrap();
        if let LayerSpec::Activation(ActivationSpec::MultiKaf(cfg)) = &mut spec.layers[2] {
            cfg.gamma = Some(0.123_456_789_012_345_6);
            cfg.rq_variant = RqVariant::StandardMinus;
        } else {
            panic!("layer 2 should be the first activation");
        }
        spec.seed = 99;
        let text = spec.to_text();
        assert_eq!(NetworkSpec::from_text(&text).unwrap(), spec);
    }

    #[test]
    fn text_errors_carry_lines() {
        let err = NetworkSpec::from_text("network.input = 4\nlayer.0 = dense in=4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = NetworkSpec::from_text("network.input = 4\nlayer.1 = relu\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(NetworkSpec::from_text("layer.0 = relu\n").is_err());
    }
}
