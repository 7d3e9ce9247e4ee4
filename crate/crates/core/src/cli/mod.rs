//! The `kafforge` command line.
//!
//! Exit codes: 0 success, 1 audit failure, 2 usage or configuration error,
//! 3 numeric abort.

mod config;

pub use config::{DataSource, NetworkConfig, RunConfig};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{gen_blobs, gen_glyphs, save_icrd, BlobParams, Dataset, GlyphParams};
use crate::error::Error;
use crate::gradcheck::{run_audit, AuditOptions};
use crate::kaf::{activation_shape_csv, fmt_real, MultiKafParams};
use crate::nn::checkpoint::{load_checkpoint, save_checkpoint};
use crate::nn::{Network, NetworkSpec};
use crate::train::{split_dataset, train};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable capping internal parallelism.
pub const THREADS_ENV: &str = "KAFFORGE_THREADS";

pub const CHECKPOINT_FILE: &str = "model.kafw";
pub const NETWORK_FILE: &str = "network.cfg";

/// A failed command: message and exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(name = "kafforge", version, about = "Train and inspect networks with kernel activation functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a network described by a run config.
    Train { config: PathBuf },
    /// Write a freshly initialized checkpoint for a run config, without training.
    Init { config: PathBuf },
    /// Finite-difference audit of every backward pass.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corrupt the analytic gradients of checks with this name prefix.
        #[arg(long, hide = true)]
        perturb: Option<String>,
    },
    /// Sample one activation function (and its per-kernel parts) as CSV.
    PlotAct {
        checkpoint: PathBuf,
        /// Layer index in the network description.
        #[arg(long)]
        layer: usize,
        #[arg(long)]
        neuron: usize,
        /// `lo:hi`
        #[arg(long, allow_hyphen_values = true, default_value = "-3:3")]
        range: String,
        #[arg(long, default_value_t = 201)]
        steps: usize,
        /// Network description; defaults to `network.cfg` beside the checkpoint.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Output file; defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the kernel weights of randomly chosen neurons as CSV.
    ExportMu {
        checkpoint: PathBuf,
        #[arg(long)]
        layer: usize,
        #[arg(long, default_value_t = 25)]
        sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset into an ICRD file.
    GenData {
        /// `blobs` or `glyphs`.
        name: String,
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_per_class: usize,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        /// Blobs: vector length.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Blobs: cluster standard deviation.
        #[arg(long, default_value_t = 0.1)]
        spread: f64,
        /// Glyphs: image height.
        #[arg(long, default_value_t = 16)]
        height: usize,
        /// Glyphs: image width.
        #[arg(long, default_value_t = 16)]
        width: usize,
        /// Glyphs: salt-and-pepper rate.
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
        /// Glyphs: maximum shift in pixels.
        #[arg(long, default_value_t = 2)]
        max_shift: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Reads [`THREADS_ENV`]; every code path here is sequential, so any valid
/// cap is honored trivially.
pub fn thread_cap() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = thread_cap().and_then(|_| dispatch(cli.command, out));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Train { config } => cmd_train(&config, out),
        Command::Init { config } => cmd_init(&config, out),
        Command::Gradcheck { seed, perturb } => cmd_gradcheck(seed, perturb, out),
        Command::PlotAct {
            checkpoint,
            layer,
            neuron,
            range,
            steps,
            network,
            out: file,
        } => {
            let (lo, hi) = parse_range(&range)?;
            let csv = cmd_plot_activation(&checkpoint, network.as_deref(), layer, neuron, lo, hi, steps)?;
            emit(&csv, file.as_deref(), out)
        }
        Command::ExportMu {
            checkpoint,
            layer,
            sample,
            seed,
            network,
            out: file,
        } => {
            let csv = cmd_export_mu(&checkpoint, network.as_deref(), layer, sample, seed)?;
            emit(&csv, file.as_deref(), out)
        }
        Command::GenData {
            name,
            out: path,
            n_per_class,
            classes,
            dim,
            spread,
            height,
            width,
            noise,
            max_shift,
            seed,
        } => {
            let ds = match name.as_str() {
                "blobs" => gen_blobs(&BlobParams {
                    n_per_class,
                    classes,
                    dim,
                    spread,
                    seed,
                })?,
                "glyphs" => gen_glyphs(&GlyphParams {
                    n_per_class,
                    classes,
                    height,
                    width,
                    noise,
                    max_shift,
                    seed,
                })?,
                other => {
                    return Err(CliError::usage(format!(
                        "unknown generator `{other}` (blobs, glyphs)"
                    )))
                }
            };
            cmd_gen_data(&ds, &path, out)
        }
    }
}

fn emit(text: &str, file: Option<&Path>, out: &mut dyn Write) -> CliResult {
    match file {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `lo:hi` with `lo ≤ hi`.
pub fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("range must be `lo:hi`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo <= hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn prepare(config_path: &Path) -> Result<(RunConfig, Dataset, Network), CliError> {
    let cfg = RunConfig::load(config_path).map_err(|e| match e {
        Error::Io(io) => CliError::usage(format!("{}: {io}", config_path.display())),
        other => CliError::usage(format!("{}: {other}", config_path.display())),
    })?;
    let data = cfg.data.load()?;
    let spec = cfg.network.to_spec(&data.sample_shape(), data.class_count)?;
    let network = Network::build(&spec)?;
    Ok((cfg, data, network))
}

fn write_network(dir: &Path, network: &Network) -> CliResult {
    std::fs::create_dir_all(dir)?;
    save_checkpoint(network, &dir.join(CHECKPOINT_FILE))?;
    std::fs::write(dir.join(NETWORK_FILE), network.spec().to_text())?;
    Ok(())
}

/// Trains per the config and writes `loss.csv`, `val.csv`, `report.txt`, the
/// checkpoint and its network description into the output directory.
pub fn cmd_train(config_path: &Path, out: &mut dyn Write) -> CliResult {
    let (cfg, data, mut network) = prepare(config_path)?;
    let (tr, va, te) = split_dataset(&data, cfg.n_val, cfg.n_test, cfg.split_seed)?;
    let report = train(&mut network, &tr, &va, &te, &cfg.train)?;
    let dir = &cfg.output_dir;
    write_network(dir, &network)?;
    std::fs::write(dir.join("loss.csv"), report.loss_csv())?;
    std::fs::write(dir.join("val.csv"), report.val_csv())?;
    let mut text = String::new();
    let _ = writeln!(text, "variant = {}", cfg.network.variant.name());
    let _ = writeln!(text, "train_samples = {}", tr.len());
    let _ = writeln!(text, "val_samples = {}", va.len());
    let _ = writeln!(text, "test_samples = {}", te.len());
    text.push_str(&report.summary());
    std::fs::write(dir.join("report.txt"), &text)?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Writes the untrained network for a config.
pub fn cmd_init(config_path: &Path, out: &mut dyn Write) -> CliResult {
    let (cfg, _, network) = prepare(config_path)?;
    write_network(&cfg.output_dir, &network)?;
    writeln!(
        out,
        "wrote {} ({} parameters)",
        cfg.output_dir.join(CHECKPOINT_FILE).display(),
        network.param_count()
    )?;
    Ok(())
}

/// Prints one line per check; fails with [`EXIT_AUDIT`] if any breaches its
/// threshold.
pub fn cmd_gradcheck(seed: u64, perturb: Option<String>, out: &mut dyn Write) -> CliResult {
    let audit = run_audit(&AuditOptions { seed, perturb })?;
    out.write_all(audit.report().as_bytes())?;
    if audit.passed() {
        writeln!(out, "all checks passed")?;
        Ok(())
    } else {
        let names: Vec<&str> = audit.failures().iter().map(|c| c.name.as_str()).collect();
        Err(CliError {
            code: EXIT_AUDIT,
            message: format!("gradient check failed for: {}", names.join(", ")),
        })
    }
}

/// Rebuilds the network a checkpoint belongs to and loads its values.
pub fn load_network(checkpoint: &Path, network_cfg: Option<&Path>) -> Result<Network, CliError> {
    let cfg_path = match network_cfg {
        Some(p) => p.to_path_buf(),
        None => checkpoint.with_file_name(NETWORK_FILE),
    };
    let text = std::fs::read_to_string(&cfg_path)
        .map_err(|e| CliError::usage(format!("{}: {e}", cfg_path.display())))?;
    let spec = NetworkSpec::from_text(&text)?;
    let mut network = Network::build(&spec)?;
    load_checkpoint(&mut network, checkpoint)?;
    Ok(network)
}

fn kaf_layer(network: &Network, layer: usize) -> Result<&MultiKafParams, CliError> {
    let l = network.layer(layer).ok_or_else(|| {
        CliError::usage(format!("layer {layer} out of range ({} layers)", network.layers().len()))
    })?;
    l.kaf_params().ok_or_else(|| {
        let kafs: Vec<String> = network
            .layers()
            .iter()
            .enumerate()
            .filter(|(_, l)| l.kaf_params().is_some())
            .map(|(i, _)| i.to_string())
            .collect();
        CliError::usage(format!(
            "layer {layer} is {}, not a KAF; KAF layers: {}",
            l.name(),
            kafs.join(", ")
        ))
    })
}

/// CSV `s,g(s),mu1_…` sampling one neuron's activation on `[lo, hi]`.
pub fn cmd_plot_activation(
    checkpoint: &Path,
    network_cfg: Option<&Path>,
    layer: usize,
    neuron: usize,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<String, CliError> {
    let network = load_network(checkpoint, network_cfg)?;
    let params = kaf_layer(&network, layer)?;
    if neuron >= params.neurons() {
        return Err(CliError::usage(format!(
            "neuron {neuron} out of range ({} neurons)",
            params.neurons()
        )));
    }
    if steps == 0 {
        return Err(CliError::usage("steps must be positive"));
    }
    Ok(activation_shape_csv(params, neuron, lo, hi, steps, true)?)
}

/// CSV of the kernel weights of `n_sample` distinct neurons drawn with `seed`,
/// listed in ascending neuron order.
pub fn cmd_export_mu(
    checkpoint: &Path,
    network_cfg: Option<&Path>,
    layer: usize,
    n_sample: usize,
    seed: u64,
) -> Result<String, CliError> {
    let network = load_network(checkpoint, network_cfg)?;
    let params = kaf_layer(&network, layer)?;
    if params.kernels().len() < 2 {
        return Err(CliError::usage(format!(
            "layer {layer} is a single-kernel KAF; kernel weights need a multi-KAF"
        )));
    }
    let n = params.neurons();
    if n_sample == 0 || n_sample > n {
        return Err(CliError::usage(format!(
            "cannot sample {n_sample} of {n} neurons"
        )));
    }
    let mut picked = sample(&mut ChaCha8Rng::seed_from_u64(seed), n, n_sample).into_vec();
    picked.sort_unstable();
    let mut csv = String::from("neuron");
    for (m, k) in params.kernels().iter().enumerate() {
        let _ = write!(csv, ",mu{}_{}", m + 1, k.kind());
    }
    csv.push('\n');
    for i in picked {
        let _ = write!(csv, "{i}");
        for &v in params.mu_row(i) {
            let _ = write!(csv, ",{}", fmt_real(v));
        }
        csv.push('\n');
    }
    Ok(csv)
}

/// Writes `dataset` as ICRD and prints its size and class histogram.
pub fn cmd_gen_data(dataset: &Dataset, path: &Path, out: &mut dyn Write) -> CliResult {
    save_icrd(dataset, path)?;
    let bytes = std::fs::metadata(path)?.len();
    writeln!(
        out,
        "wrote {} ({bytes} bytes, n={}, shape={:?})",
        path.display(),
        dataset.len(),
        dataset.sample_shape()
    )?;
    for (c, count) in dataset.histogram().iter().enumerate() {
        let name = dataset
            .class_names
            .as_ref()
            .map_or(String::new(), |n| format!(" {}", n[c]));
        writeln!(out, "class {c}{name}: {count}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-1:1").unwrap(), (-1.0, 1.0));
        assert_eq!(parse_range("0.5:0.5").unwrap(), (0.5, 0.5));
        assert!(parse_range("1:-1").is_err());
        assert!(parse_range("1").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["kafforge", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["kafforge", "--help"], &mut o, &mut e), EXIT_OK);
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let dir = std::env::temp_dir().join("kafforge-cli-unit.icrd");
        assert_eq!(
            run(["kafforge", "gen-data", "spirals", dir.to_str().unwrap()], &mut o, &mut e),
            EXIT_USAGE
        );
    }
}
