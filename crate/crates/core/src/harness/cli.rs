//! `meanshift` command line.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when the request
//! is infeasible or exceeds a resource cap.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::contamination::{read_dataset, write_dataset_to, ContaminationModel};
use crate::distributions::{BaseDistribution, DistKind};
use crate::error::{Error, Result};
use crate::estimator::{estimate, CfMode, Centering, EstimatorConfig, DEFAULT_BUDGET_CONSTANT};
use crate::lowerbound::{build_hard_instance, tv_distance, HardInstance, InstanceOptions, TvOptions};
use crate::rng::seeded;
use crate::spectral::{band_l2_mass, delta_quantity, find_witness, BandL2Options, DeltaScan, DEFAULT_COVER_CAP};

use super::records::{write_csv, write_json, RecordFormat};
use super::{linear_fit, run_benchmark, run_min_n_sweep, LinearFit, NSpec, SweepConfig, ThresholdRule};

#[derive(Debug, Parser)]
#[command(name = "meanshift", version, about = "Mean estimation under mean-shift contamination")]
struct Cli {
    /// JSON configuration file (top-level "version": 1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Characteristic function of a base distribution.
    Cf(CfArgs),
    /// Draw a contaminated dataset.
    Sample(SampleArgs),
    /// Run the tournament estimator on a dataset.
    Estimate(EstimateArgs),
    /// Search for a frequency witness.
    Witness(WitnessArgs),
    /// The hardness quantity delta(eps, alpha, D).
    Delta(DeltaArgs),
    /// Band-gap L2 mass of the base CF.
    BandL2(BandArgs),
    /// Build a Fourier-matching hard instance.
    LbConstruct(LbArgs),
    /// Total variation between the hard-instance pair.
    LbTv(LbArgs),
    /// Run a benchmark sweep.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistName {
    Gaussian,
    Laplace,
    Uniform,
    UniformConv,
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    dist: Option<DistName>,
    /// Dimension for the Gaussian and Laplace kinds.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Number of convolved uniforms.
    #[arg(long)]
    m: Option<u32>,
}

impl DistArgs {
    fn build(&self) -> Result<BaseDistribution> {
        let name = self.dist.ok_or_else(|| Error::arg("--dist is required"))?;
        let kind = match name {
            DistName::Gaussian => DistKind::Gaussian { d: self.d },
            DistName::Laplace => DistKind::Laplace { d: self.d },
            DistName::Uniform => DistKind::Uniform,
            DistName::UniformConv => DistKind::UniformConv {
                m: self.m.ok_or_else(|| Error::arg("--m is required for uniform-conv"))?,
            },
        };
        if matches!(name, DistName::Uniform | DistName::UniformConv) && self.d != 1 {
            return Err(Error::Unsupported("uniform kinds are univariate".into()));
        }
        BaseDistribution::new(kind)
    }
}

#[derive(Debug, Args)]
struct CfArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// Frequency, comma-separated coordinates; repeat for several.
    #[arg(long, required = true, allow_hyphen_values = true)]
    omega: Vec<String>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Overrides the config's sample count.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Dataset written by `sample`; otherwise the config's model is sampled.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Include every candidate's score.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// Offset, comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    v: String,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Debug, Args)]
struct DeltaArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct BandArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long)]
    epsilon: f64,
    /// Band half-width in units of `eps omega`.
    #[arg(long)]
    halfwidth: f64,
}

#[derive(Debug, Args)]
struct LbArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Window constant in `w = c alpha / eps`; bisected when absent.
    #[arg(long)]
    c: Option<f64>,
    /// Truncation index of the atomic measure.
    #[arg(long)]
    truncation: Option<u64>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn check_version(v: u32) -> Result<()> {
    if v != 1 {
        return Err(Error::arg(format!("unsupported config version {v}")));
    }
    Ok(())
}

fn default_version() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleConfig {
    #[serde(default = "default_version")]
    version: u32,
    model: ContaminationModel,
    #[serde(default)]
    n: Option<usize>,
}

fn default_budget_constant() -> f64 {
    DEFAULT_BUDGET_CONSTANT
}

fn default_cover_cap() -> u64 {
    DEFAULT_COVER_CAP
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateConfig {
    #[serde(default = "default_version")]
    version: u32,
    dist: BaseDistribution,
    epsilon: f64,
    alpha: f64,
    radius: f64,
    #[serde(default)]
    thresholds: ThresholdRule,
    #[serde(default = "default_budget_constant")]
    budget_constant: f64,
    #[serde(default)]
    cf_mode: CfMode,
    #[serde(default)]
    centering: Centering,
    #[serde(default = "default_cover_cap")]
    cover_cap: u64,
    /// Sampled with `--seed` when no `--data` is given.
    #[serde(default)]
    model: Option<ContaminationModel>,
    #[serde(default)]
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LbConfig {
    #[serde(default = "default_version")]
    version: u32,
    dist: BaseDistribution,
    epsilon: f64,
    alpha: f64,
    #[serde(default)]
    instance: InstanceOptions,
    #[serde(default)]
    tv: TvOptions,
}

#[derive(Debug, Serialize)]
struct ConstructOutput<'a> {
    epsilon: f64,
    alpha: f64,
    c: f64,
    w: f64,
    m: f64,
    l1_norm: f64,
    truncation_k: u64,
    tail_bound: f64,
    instance: &'a HardInstance,
}

#[derive(Debug, Serialize)]
struct BandOutput {
    epsilon: f64,
    halfwidth: f64,
    value: f64,
}

#[derive(Debug, Serialize)]
struct MinNSummary {
    cells: Vec<super::MinNResult>,
    /// `ln n_min` against `(alpha / eps)^2`.
    fit_exp_square: Option<LinearFit>,
    /// `ln n_min` against `ln(1 / eps)`.
    fit_log_inv_eps: Option<LinearFit>,
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::arg(format!("bad coordinate {t:?}: {e}")))
        })
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Sends `bytes` to `--out` or the output stream.
fn deliver(bytes: &[u8], out_path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match out_path {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => out.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn lb_inputs(cli: &Cli, args: &LbArgs) -> Result<(BaseDistribution, f64, f64, InstanceOptions, TvOptions)> {
    let (mut dist, mut eps, mut alpha, mut inst, mut tv) = (None, None, None, InstanceOptions::default(), TvOptions::default());
    if let Some(path) = &cli.config {
        let cfg: LbConfig = read_config(path)?;
        check_version(cfg.version)?;
        dist = Some(cfg.dist);
        eps = Some(cfg.epsilon);
        alpha = Some(cfg.alpha);
        inst = cfg.instance;
        tv = cfg.tv;
    }
    if args.dist.dist.is_some() {
        dist = Some(args.dist.build()?);
    }
    eps = args.epsilon.or(eps);
    alpha = args.alpha.or(alpha);
    if args.c.is_some() {
        inst.c = args.c;
    }
    if args.truncation.is_some() {
        inst.truncation = args.truncation;
    }
    let dist = dist.ok_or_else(|| Error::arg("--dist or a config is required"))?;
    let eps = eps.ok_or_else(|| Error::arg("--epsilon is required"))?;
    let alpha = alpha.ok_or_else(|| Error::arg("--alpha is required"))?;
    Ok((dist, eps, alpha, inst, tv))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let out_path = cli.out.as_deref();
    match &cli.command {
        Command::Cf(args) => {
            let dist = args.dist.build()?;
            let mut text = String::new();
            for w in &args.omega {
                let omega = parse_point(w)?;
                text.push_str(&format!("{}\n", dist.cf(&omega)?));
            }
            deliver(text.as_bytes(), out_path, out)
        }
        Command::Sample(args) => {
            let path = cli.config.as_ref().ok_or_else(|| Error::arg("sample needs --config"))?;
            let cfg: SampleConfig = read_config(path)?;
            check_version(cfg.version)?;
            let n = args
                .n
                .or(cfg.n)
                .ok_or_else(|| Error::arg("sample count missing: pass --n or set \"n\""))?;
            let seed = cli.seed.unwrap_or(0);
            let samples = cfg.model.draw(&mut seeded(seed), n);
            let mut buf = Vec::new();
            write_dataset_to(&mut buf, &samples, seed, &cfg.model).map_err(|e| Error::io("<buffer>", e))?;
            deliver(&buf, out_path, out)
        }
        Command::Estimate(args) => {
            let path = cli.config.as_ref().ok_or_else(|| Error::arg("estimate needs --config"))?;
            let cfg: EstimateConfig = read_config(path)?;
            check_version(cfg.version)?;
            let t = cfg.thresholds.resolve(&cfg.dist, cfg.epsilon, cfg.alpha)?;
            let mut est = EstimatorConfig::for_distribution(&cfg.dist, cfg.epsilon, cfg.alpha, cfg.radius, t.a, t.delta);
            est.budget_constant = cfg.budget_constant;
            est.cf_mode = cfg.cf_mode;
            est.centering = cfg.centering.clone();
            est.cover_cap = cfg.cover_cap;
            est.trace = args.trace;
            let samples = match (&args.data, &cfg.model) {
                (Some(p), _) => read_dataset(p)?.samples,
                (None, Some(model)) => {
                    let n = cfg.n.ok_or_else(|| Error::arg("config model needs \"n\""))?;
                    model.draw(&mut seeded(cli.seed.unwrap_or(0)), n)
                }
                (None, None) => return Err(Error::arg("estimate needs --data or a model in the config")),
            };
            let report = estimate(&est, &samples, &cfg.dist)?;
            deliver(&to_json(&report)?, out_path, out)
        }
        Command::Witness(args) => {
            let dist = args.dist.build()?;
            let v = parse_point(&args.v)?;
            let w = find_witness(&dist, &v, args.a, args.delta, None)?;
            deliver(&to_json(&w)?, out_path, out)
        }
        Command::Delta(args) => {
            let dist = args.dist.build()?;
            let r = delta_quantity(&dist, args.epsilon, args.alpha, &DeltaScan::default())?;
            deliver(&to_json(&r)?, out_path, out)
        }
        Command::BandL2(args) => {
            let dist = args.dist.build()?;
            let value = band_l2_mass(&dist, args.epsilon, args.halfwidth, &BandL2Options::default())?;
            let r = BandOutput {
                epsilon: args.epsilon,
                halfwidth: args.halfwidth,
                value,
            };
            deliver(&to_json(&r)?, out_path, out)
        }
        Command::LbConstruct(args) => {
            let (dist, eps, alpha, inst, _) = lb_inputs(cli, args)?;
            let instance = build_hard_instance(&dist, eps, alpha, &inst)?;
            let r = ConstructOutput {
                epsilon: eps,
                alpha,
                c: instance.c,
                w: instance.w,
                m: instance.m,
                l1_norm: instance.g.l1_norm(),
                truncation_k: instance.g.truncation_k,
                tail_bound: instance.g.tail_bound,
                instance: &instance,
            };
            deliver(&to_json(&r)?, out_path, out)
        }
        Command::LbTv(args) => {
            let (dist, eps, alpha, inst, tv) = lb_inputs(cli, args)?;
            let instance = build_hard_instance(&dist, eps, alpha, &inst)?;
            let r = tv_distance(&instance, &tv)?;
            deliver(&to_json(&r)?, out_path, out)
        }
        Command::Bench(args) => {
            let path = cli.config.as_ref().ok_or_else(|| Error::arg("bench needs --config"))?;
            let mut sweep: SweepConfig = read_config(path)?;
            if let Some(seed) = cli.seed {
                sweep.seed = seed;
            }
            let format = match (args.format, out_path) {
                (Some(FormatArg::Csv), _) => RecordFormat::Csv,
                (Some(FormatArg::Json), _) => RecordFormat::Json,
                (None, Some(p)) => RecordFormat::from_path(p),
                (None, None) => RecordFormat::Csv,
            };
            let (records, summary) = if matches!(sweep.n, NSpec::MinSearch { .. }) {
                let cells = run_min_n_sweep(&sweep)?;
                let mut records: Vec<_> = cells.iter().flat_map(|c| c.records.clone()).collect();
                super::sort_records(&mut records);
                let found: Vec<(f64, f64)> = cells
                    .iter()
                    .filter_map(|c| c.n_min.map(|n| (c.epsilon, (n as f64).ln())))
                    .collect();
                let ys: Vec<f64> = found.iter().map(|p| p.1).collect();
                let x_sq: Vec<f64> = found.iter().map(|p| (sweep.alpha / p.0).powi(2)).collect();
                let x_log: Vec<f64> = found.iter().map(|p| (1.0 / p.0).ln()).collect();
                let summary = MinNSummary {
                    cells,
                    fit_exp_square: linear_fit(&x_sq, &ys).ok(),
                    fit_log_inv_eps: linear_fit(&x_log, &ys).ok(),
                };
                (records, Some(summary))
            } else {
                (run_benchmark(&sweep)?, None)
            };
            let mut buf = Vec::new();
            match format {
                RecordFormat::Csv => write_csv(&records, &mut buf)?,
                RecordFormat::Json => write_json(&records, &mut buf)?,
            }
            match (out_path, summary) {
                (Some(p), summary) => {
                    deliver(&buf, Some(p), out)?;
                    if let Some(s) = summary {
                        deliver(&to_json(&s)?, None, out)?;
                    }
                    Ok(())
                }
                (None, _) => deliver(&buf, None, out),
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_infeasibility() {
                2
            } else {
                1
            }
        }
    }
}
