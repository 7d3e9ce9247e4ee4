//! Run configuration: a flat list of `section.key = value` lines.
//!
//! ```text
//! # blobs.cfg
//! network.variant = multikaf
//! network.dense = 16,16
//! network.seed = 1
//! kaf.dict = 15
//! train.max_iters = 2000
//! data.generator = blobs
//! data.classes = 2
//! data.n_per_class = 500
//! data.spread = 0.1
//! data.n_val = 200
//! data.n_test = 200
//! output.dir = runs/blobs
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{gen_blobs, gen_glyphs, load_csv_dataset, load_icrd, BlobParams, Dataset, GlyphParams};
use crate::error::{Error, Result};
use crate::kaf::KafConfig;
use crate::nn::spec::{parse_kernel_list, parse_rq_variant, scale_width};
use crate::nn::{ArchSpec, NetworkSpec, Variant};
use crate::train::TrainConfig;

const KEYS: &[&str] = &[
    "network.variant",
    "network.preset",
    "network.width_scale",
    "network.filters",
    "network.kernel",
    "network.dense",
    "network.dropout",
    "network.batchnorm",
    "network.seed",
    "kaf.dict",
    "kaf.lo",
    "kaf.hi",
    "kaf.gamma",
    "kaf.rq_c",
    "kaf.rq",
    "kaf.kernels",
    "train.lambda",
    "train.batch_size",
    "train.eval_every",
    "train.patience",
    "train.lr",
    "train.beta1",
    "train.beta2",
    "train.eps",
    "train.max_iters",
    "train.seed",
    "data.icrd",
    "data.csv",
    "data.generator",
    "data.classes",
    "data.height",
    "data.width",
    "data.n_per_class",
    "data.dim",
    "data.spread",
    "data.noise",
    "data.max_shift",
    "data.seed",
    "data.n_val",
    "data.n_test",
    "data.split_seed",
    "output.dir",
];

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Icrd(PathBuf),
    Csv {
        path: PathBuf,
        classes: usize,
        height: usize,
        width: usize,
    },
    Blobs(BlobParams),
    Glyphs(GlyphParams),
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            Self::Icrd(p) => load_icrd(p),
            Self::Csv {
                path,
                classes,
                height,
                width,
            } => load_csv_dataset(path, *classes, *height, *width),
            Self::Blobs(p) => gen_blobs(p),
            Self::Glyphs(p) => gen_glyphs(p),
        }
    }
}

/// Architecture settings; input shape and class count come from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub variant: Variant,
    pub filters: Vec<usize>,
    pub kernel: usize,
    pub dense: Vec<usize>,
    /// `None` keeps the variant default.
    pub dropout: Option<Option<f64>>,
    pub batchnorm: Option<bool>,
    pub kaf: KafConfig,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn to_spec(&self, input_shape: &[usize], classes: usize) -> Result<NetworkSpec> {
        let mut arch = ArchSpec {
            input_shape: input_shape.to_vec(),
            filters: self.filters.clone(),
            kernel: self.kernel,
            dense: self.dense.clone(),
            classes,
            variant: self.variant,
            kaf: self.kaf.clone(),
            dropout: None,
            batchnorm: false,
            seed: self.seed,
        }
        .with_variant_defaults();
        if let Some(d) = self.dropout {
            arch.dropout = d;
        }
        if let Some(b) = self.batchnorm {
            arch.batchnorm = b;
        }
        arch.to_network_spec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub data: DataSource,
    pub n_val: usize,
    pub n_test: usize,
    pub split_seed: u64,
    pub output_dir: PathBuf,
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
    base: PathBuf,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        self.opt(key).map(|v| v.unwrap_or(default))
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| Error::Parse {
                line,
                msg: format!("`{key}`: cannot parse `{v}`"),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.opt(key)?.ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing required key `{key}`"),
        })
    }

    fn with<T>(&self, key: &str, f: impl FnOnce(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => f(v).map(Some).map_err(|msg| Error::Parse {
                line,
                msg: format!("`{key}`: {msg}"),
            }),
        }
    }

    fn path(&self, key: &str, must_exist: bool) -> Result<Option<PathBuf>> {
        let base = self.base.clone();
        self.with(key, |v| {
            let p = base.join(v);
            if must_exist && !p.exists() {
                return Err(format!("`{}` does not exist", p.display()));
            }
            Ok(p)
        })
    }
}

fn usize_list(v: &str) -> std::result::Result<Vec<usize>, String> {
    let v = v.trim();
    if v.is_empty() || v == "none" {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad integer `{}`", p.trim())))
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `section.key = value`, got `{t}`"),
            })?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{k}`"),
                });
            }
            if map.insert(k.to_string(), (line, v.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key `{k}`"),
                });
            }
        }
        let e = Entries {
            map,
            base: base.to_path_buf(),
        };

        let variant = e
            .with("network.variant", |v| {
                Variant::parse(v).ok_or_else(|| format!("unknown variant `{v}` (relu, kaf, multikaf)"))
            })?
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: "missing required key `network.variant`".into(),
            })?;
        let preset = e.get("network.preset", "custom".to_string())?;
        let (filters, dense) = match preset.as_str() {
            "custom" => (
                e.with("network.filters", usize_list)?.unwrap_or_default(),
                e.with("network.dense", usize_list)?.unwrap_or_default(),
            ),
            "icr" => {
                let default_scale = if variant == Variant::Relu { 1.0 } else { 0.9 };
                let scale: f64 = e.get("network.width_scale", default_scale)?;
                if !(scale > 0.0 && scale <= 1.0) {
                    return Err(Error::Parse {
                        line: e.raw("network.width_scale").map_or(0, |r| r.0),
                        msg: format!("`network.width_scale` must be in (0, 1], got {scale}"),
                    });
                }
                (
                    [42, 28, 28].iter().map(|&f| scale_width(f, scale)).collect(),
                    vec![scale_width(100, scale)],
                )
            }
            other => {
                return Err(Error::Parse {
                    line: e.raw("network.preset").map_or(0, |r| r.0),
                    msg: format!("`network.preset`: unknown preset `{other}` (custom, icr)"),
                })
            }
        };
        let dropout = e.with("network.dropout", |v| {
            if v == "none" {
                return Ok(None);
            }
            let p: f64 = v.parse().map_err(|_| format!("cannot parse `{v}`"))?;
            if !(0.0..1.0).contains(&p) {
                return Err(format!("probability {p} outside [0, 1)"));
            }
            Ok(Some(p))
        })?;
        let base_kaf = if variant == Variant::Kaf {
            KafConfig::kaf()
        } else {
            KafConfig::multikaf()
        };
        let kaf = KafConfig {
            dict_size: e.get("kaf.dict", base_kaf.dict_size)?,
            lo: e.get("kaf.lo", base_kaf.lo)?,
            hi: e.get("kaf.hi", base_kaf.hi)?,
            gamma: e
                .with("kaf.gamma", |v| {
                    if v == "auto" {
                        Ok(None)
                    } else {
                        v.parse().map(Some).map_err(|_| format!("cannot parse `{v}`"))
                    }
                })?
                .unwrap_or(base_kaf.gamma),
            rq_c: e.get("kaf.rq_c", base_kaf.rq_c)?,
            rq_variant: e.with("kaf.rq", parse_rq_variant)?.unwrap_or(base_kaf.rq_variant),
            kernels: e.with("kaf.kernels", parse_kernel_list)?.unwrap_or(base_kaf.kernels),
        };
        let network = NetworkConfig {
            variant,
            filters,
            kernel: e.get("network.kernel", 5)?,
            dense,
            dropout,
            batchnorm: e.opt("network.batchnorm")?,
            kaf,
            seed: e.get("network.seed", 0)?,
        };

        let d = TrainConfig::default();
        let train = TrainConfig {
            lambda: e.get("train.lambda", d.lambda)?,
            batch_size: e.get("train.batch_size", d.batch_size)?,
            eval_every: e.get("train.eval_every", d.eval_every)?,
            patience: e.get("train.patience", d.patience)?,
            lr: e.get("train.lr", d.lr)?,
            adam_beta1: e.get("train.beta1", d.adam_beta1)?,
            adam_beta2: e.get("train.beta2", d.adam_beta2)?,
            adam_eps: e.get("train.eps", d.adam_eps)?,
            max_iters: e.get("train.max_iters", d.max_iters)?,
            seed: e.get("train.seed", d.seed)?,
        };
        train.validate().map_err(|err| Error::Parse {
            line: 0,
            msg: format!("train section: {err}"),
        })?;

        let sources: Vec<&str> = ["data.icrd", "data.csv", "data.generator"]
            .into_iter()
            .filter(|k| e.has(k))
            .collect();
        if sources.len() != 1 {
            let line = sources.get(1).and_then(|k| e.raw(k)).map_or(0, |r| r.0);
            return Err(Error::Parse {
                line,
                msg: format!(
                    "exactly one of data.icrd, data.csv, data.generator is required, found {}",
                    sources.len()
                ),
            });
        }
        let data_seed = e.get("data.seed", 0)?;
        let data = match sources[0] {
            "data.icrd" => DataSource::Icrd(e.path("data.icrd", true)?.unwrap()),
            "data.csv" => DataSource::Csv {
                path: e.path("data.csv", true)?.unwrap(),
                classes: e.require("data.classes")?,
                height: e.require("data.height")?,
                width: e.require("data.width")?,
            },
            _ => {
                let name: String = e.require("data.generator")?;
                match name.as_str() {
                    "blobs" => DataSource::Blobs(BlobParams {
                        n_per_class: e.get("data.n_per_class", 500)?,
                        classes: e.get("data.classes", 2)?,
                        dim: e.get("data.dim", 2)?,
                        spread: e.get("data.spread", 0.1)?,
                        seed: data_seed,
                    }),
                    "glyphs" => DataSource::Glyphs(GlyphParams {
                        n_per_class: e.get("data.n_per_class", 400)?,
                        classes: e.get("data.classes", 8)?,
                        height: e.get("data.height", 16)?,
                        width: e.get("data.width", 16)?,
                        noise: e.get("data.noise", 0.02)?,
                        max_shift: e.get("data.max_shift", 2)?,
                        seed: data_seed,
                    }),
                    other => {
                        return Err(Error::Parse {
                            line: e.raw("data.generator").map_or(0, |r| r.0),
                            msg: format!("`data.generator`: unknown generator `{other}` (blobs, glyphs)"),
                        })
                    }
                }
            }
        };
        let output_dir = e.path("output.dir", false)?.ok_or_else(|| Error::Parse {
            line: 0,
            msg: "missing required key `output.dir`".into(),
        })?;
        Ok(Self {
            network,
            train,
            data,
            n_val: e.require("data.n_val")?,
            n_test: e.require("data.n_test")?,
            split_seed: e.get("data.split_seed", 0)?,
            output_dir,
        })
    }
}
