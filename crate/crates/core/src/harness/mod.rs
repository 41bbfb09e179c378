//! Batch experiments, persistence and the command-line front end.

pub mod cli;
pub mod records;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contamination::{AdversaryKind, ContaminationModel};
use crate::distributions::{BaseDistribution, DistKind};
use crate::error::{Error, Result};
use crate::estimator::{estimate, radial_min_cf, sample_budget, upper_preset, EstimatorConfig, UpperPreset};
use crate::rng::{seeded, trial_seed};
use crate::spectral::{predicted_cover_size, DEFAULT_COVER_CAP};

pub use records::{emit_records, load_records, sort_records, BenchmarkRecord, RecordFormat};

/// Per-trial sample cap for `"auto"` sizes.
pub const DEFAULT_N_CAP: u64 = 10_000_000;

/// How the witness thresholds `(A, delta)` are chosen per `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdRule {
    /// Per-distribution presets. `a` overrides `A` for the Gaussian and
    /// Laplace bases, with `delta` recomputed from it.
    Corollary {
        #[serde(default)]
        a: Option<f64>,
    },
    /// `delta = exp(-c (alpha/eps)^2)` with a fixed `A`.
    ExpSquare { c: f64, a: f64 },
    Fixed { a: f64, delta: f64 },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Corollary { a: None }
    }
}

impl ThresholdRule {
    pub fn resolve(&self, dist: &BaseDistribution, epsilon: f64, alpha: f64) -> Result<UpperPreset> {
        match *self {
            ThresholdRule::Corollary { a: None } => upper_preset(dist, epsilon, alpha),
            ThresholdRule::Corollary { a: Some(a) } => match dist.kind() {
                DistKind::Gaussian { .. } | DistKind::Laplace { .. } => {
                    if !(a > 0.0 && a <= 1.0) {
                        return Err(Error::arg(format!("A must lie in (0, 1], got {a}")));
                    }
                    let t = a.asin() / (std::f64::consts::PI * epsilon);
                    Ok(UpperPreset {
                        a,
                        delta: radial_min_cf(dist, t) * (1.0 - 1e-12),
                    })
                }
                _ => Err(Error::Unsupported(format!(
                    "an A override for the {} preset",
                    dist.kind().name()
                ))),
            },
            ThresholdRule::ExpSquare { c, a } => Ok(UpperPreset {
                a,
                delta: (-c * (alpha / epsilon).powi(2)).exp(),
            }),
            ThresholdRule::Fixed { a, delta } => Ok(UpperPreset { a, delta }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// Doubling-then-bisection search for the smallest `n` reaching the
/// success threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinNOptions {
    #[serde(default = "default_start")]
    pub start: u64,
    #[serde(default = "default_n_cap")]
    pub cap: u64,
    /// Bisection stops once the bracket ratio is at most this.
    #[serde(default = "default_refine_ratio")]
    pub refine_ratio: f64,
}

fn default_start() -> u64 {
    64
}

fn default_n_cap() -> u64 {
    DEFAULT_N_CAP
}

fn default_refine_ratio() -> f64 {
    1.25
}

impl Default for MinNOptions {
    fn default() -> Self {
        Self {
            start: default_start(),
            cap: default_n_cap(),
            refine_ratio: default_refine_ratio(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    Keyword(NKeyword),
    List(Vec<u64>),
    MinSearch { min_search: MinNOptions },
}

fn default_version() -> u32 {
    1
}

fn default_budget_constant() -> f64 {
    crate::estimator::DEFAULT_BUDGET_CONSTANT
}

fn default_cover_cap() -> u64 {
    DEFAULT_COVER_CAP
}

/// A benchmark sweep: the cross product of `epsilons` and sample sizes,
/// `trials` runs per cell. Trial `t` uses seed `seed + t` in every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub dist: BaseDistribution,
    pub adversary: AdversaryKind,
    pub alpha: f64,
    pub mu: Vec<f64>,
    /// Candidate radius around the pre-centering shift.
    pub radius: f64,
    pub epsilons: Vec<f64>,
    pub n: NSpec,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub thresholds: ThresholdRule,
    #[serde(default = "default_budget_constant")]
    pub budget_constant: f64,
    #[serde(default = "default_n_cap")]
    pub n_cap: u64,
    #[serde(default = "default_cover_cap")]
    pub cover_cap: u64,
    /// Wall-clock times are zeroed otherwise, keeping outputs reproducible.
    #[serde(default)]
    pub record_runtime: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::arg(format!("unsupported config version {}", self.version)));
        }
        if self.trials == 0 {
            return Err(Error::arg("trials must be at least 1"));
        }
        if self.epsilons.is_empty() {
            return Err(Error::arg("epsilons must be nonempty"));
        }
        if let NSpec::List(ns) = &self.n {
            if ns.is_empty() || ns.contains(&0) {
                return Err(Error::arg("n list must be nonempty and positive"));
            }
        }
        self.model()?;
        Ok(())
    }

    pub fn model(&self) -> Result<ContaminationModel> {
        ContaminationModel::new(self.alpha, self.mu.clone(), self.adversary.clone(), self.dist)
    }

    /// Estimator settings for one `epsilon`.
    pub fn estimator_config(&self, epsilon: f64) -> Result<EstimatorConfig> {
        let t = self.thresholds.resolve(&self.dist, epsilon, self.alpha)?;
        let mut cfg = EstimatorConfig::for_distribution(&self.dist, epsilon, self.alpha, self.radius, t.a, t.delta);
        cfg.budget_constant = self.budget_constant;
        cfg.cover_cap = self.cover_cap;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Checks that both covers fit under the cap before any sampling.
fn precheck(cfg: &EstimatorConfig, d: usize) -> Result<()> {
    let res = cfg.resolutions(d);
    for (what, radius, step) in [
        ("candidate cover", cfg.radius, res.eps_prime),
        ("frequency cover", res.b_delta, res.eta),
    ] {
        let size = predicted_cover_size(radius, step, d);
        if size > cfg.cover_cap {
            return Err(Error::Resource {
                what: what.into(),
                required: size,
                cap: cfg.cover_cap,
            });
        }
    }
    Ok(())
}

struct Cell<'a> {
    sweep: &'a SweepConfig,
    model: ContaminationModel,
    cfg: EstimatorConfig,
    epsilon: f64,
    adversary: String,
}

impl<'a> Cell<'a> {
    fn new(sweep: &'a SweepConfig, epsilon: f64) -> Result<Self> {
        let cfg = sweep.estimator_config(epsilon)?;
        precheck(&cfg, sweep.dist.dim())?;
        Ok(Self {
            sweep,
            model: sweep.model()?,
            cfg,
            epsilon,
            adversary: sweep.adversary.label(),
        })
    }

    fn trial(&self, n: u64, trial: usize, note: &str) -> Result<BenchmarkRecord> {
        let seed = trial_seed(self.sweep.seed, trial as u64);
        let start = Instant::now();
        let samples = self.model.draw(&mut seeded(seed), n as usize);
        let report = estimate(&self.cfg, &samples, &self.sweep.dist)?;
        let err: f64 = report
            .mu_hat
            .iter()
            .zip(self.model.mu())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let runtime_ms = if self.sweep.record_runtime {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        Ok(BenchmarkRecord {
            dist: self.sweep.dist.kind().name().to_string(),
            d: self.sweep.dist.dim(),
            alpha: self.sweep.alpha,
            epsilon: self.epsilon,
            n,
            seed,
            success: err <= self.epsilon,
            runtime_ms,
            score: Some(report.score),
            adversary: self.adversary.clone(),
            note: note.to_string(),
        })
    }

    /// Trials `range` in parallel, returned in trial order.
    fn trials(&self, n: u64, range: std::ops::Range<usize>, note: &str) -> Result<Vec<BenchmarkRecord>> {
        range
            .into_par_iter()
            .map(|t| self.trial(n, t, note))
            .collect()
    }
}

fn skipped(sweep: &SweepConfig, epsilon: f64, reason: &Error) -> BenchmarkRecord {
    BenchmarkRecord {
        dist: sweep.dist.kind().name().to_string(),
        d: sweep.dist.dim(),
        alpha: sweep.alpha,
        epsilon,
        n: 0,
        seed: sweep.seed,
        success: false,
        runtime_ms: 0,
        score: None,
        adversary: sweep.adversary.label(),
        note: format!("skipped: {reason}"),
    }
}

/// Runs every `(epsilon, n)` cell of a fixed-size or `"auto"` sweep.
/// Infeasible cells become a single skipped row. The result is sorted.
pub fn run_benchmark(sweep: &SweepConfig) -> Result<Vec<BenchmarkRecord>> {
    sweep.validate()?;
    let mut out = Vec::new();
    for &epsilon in &sweep.epsilons {
        let cell = match Cell::new(sweep, epsilon) {
            Ok(c) => c,
            Err(e) if e.is_infeasibility() => {
                out.push(skipped(sweep, epsilon, &e));
                continue;
            }
            Err(e) => return Err(e),
        };
        let sizes: Vec<(u64, String)> = match &sweep.n {
            NSpec::Keyword(NKeyword::Auto) => {
                let budget = sample_budget(&cell.cfg, sweep.dist.dim())?;
                if budget > sweep.n_cap {
                    vec![(sweep.n_cap, format!("budget {budget} capped"))]
                } else {
                    vec![(budget, String::new())]
                }
            }
            NSpec::List(ns) => ns.iter().map(|&n| (n, String::new())).collect(),
            NSpec::MinSearch { .. } => {
                return Err(Error::arg("min_search sweeps run through run_min_n_sweep"));
            }
        };
        for (n, note) in sizes {
            match cell.trials(n, 0..sweep.trials, &note) {
                Ok(rows) => out.extend(rows),
                Err(e) if e.is_infeasibility() => out.push(skipped(sweep, epsilon, &e)),
                Err(e) => return Err(e),
            }
        }
    }
    sort_records(&mut out);
    Ok(out)
}

/// Fraction of successful non-skipped trials per `(epsilon, n)` cell.
pub fn success_rates(records: &[BenchmarkRecord]) -> Vec<(f64, u64, f64)> {
    let mut cells: Vec<(f64, u64, usize, usize)> = Vec::new();
    for r in records.iter().filter(|r| !r.is_skipped()) {
        match cells.iter_mut().find(|c| c.0 == r.epsilon && c.1 == r.n) {
            Some(c) => {
                c.2 += usize::from(r.success);
                c.3 += 1;
            }
            None => cells.push((r.epsilon, r.n, usize::from(r.success), 1)),
        }
    }
    cells
        .into_iter()
        .map(|(e, n, s, t)| (e, n, s as f64 / t as f64))
        .collect()
}

/// One evaluated sample size of a minimal-n search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub n: u64,
    pub successes: usize,
    pub trials_run: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNResult {
    pub epsilon: f64,
    /// `None` when the cap was reached without passing, or the cell was
    /// infeasible.
    pub n_min: Option<u64>,
    pub probes: Vec<Probe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip)]
    pub records: Vec<BenchmarkRecord>,
}

/// Successes needed out of `trials` for a 2/3 success rate.
pub fn pass_threshold(trials: usize) -> usize {
    (2 * trials).div_ceil(3)
}

const TRIAL_BLOCK: usize = 10;

fn probe(cell: &Cell<'_>, n: u64, trials: usize, records: &mut Vec<BenchmarkRecord>) -> Result<Probe> {
    let need = pass_threshold(trials);
    let mut successes = 0;
    let mut run = 0;
    // blocks run in parallel; the stopping rule only looks at whole blocks
    while run < trials {
        let end = (run + TRIAL_BLOCK).min(trials);
        let rows = cell.trials(n, run..end, "")?;
        successes += rows.iter().filter(|r| r.success).count();
        records.extend(rows);
        run = end;
        if successes >= need || run - successes > trials - need {
            break;
        }
    }
    Ok(Probe {
        n,
        successes,
        trials_run: run,
        passed: successes >= need,
    })
}

/// Smallest `n` with at least 2/3 successes over `trials` runs: doubling
/// from `start`, then geometric bisection of the last bracket.
fn min_n_for_cell(cell: &Cell<'_>, trials: usize, opts: &MinNOptions) -> Result<MinNResult> {
    let mut records = Vec::new();
    let mut probes = Vec::new();
    let mut n = opts.start.max(1);
    let mut lo = None;
    let hi = loop {
        let p = probe(cell, n, trials, &mut records)?;
        probes.push(p);
        if p.passed {
            break Some(n);
        }
        lo = Some(n);
        if n >= opts.cap {
            break None;
        }
        n = (2 * n).min(opts.cap);
    };
    let n_min = match (lo, hi) {
        (Some(mut lo), Some(mut hi)) => {
            while hi as f64 > opts.refine_ratio * lo as f64 && hi - lo > 1 {
                let mid = ((lo as f64 * hi as f64).sqrt().round() as u64).clamp(lo + 1, hi - 1);
                let p = probe(cell, mid, trials, &mut records)?;
                probes.push(p);
                if p.passed {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(hi)
        }
        (_, hi) => hi,
    };
    Ok(MinNResult {
        epsilon: cell.epsilon,
        n_min,
        probes,
        skipped: None,
        records,
    })
}

/// Minimal-n search for every `epsilon` of a `min_search` sweep.
pub fn run_min_n_sweep(sweep: &SweepConfig) -> Result<Vec<MinNResult>> {
    sweep.validate()?;
    let opts = match &sweep.n {
        NSpec::MinSearch { min_search } => *min_search,
        _ => return Err(Error::arg("sweep does not request a min_search")),
    };
    let mut out = Vec::new();
    for &epsilon in &sweep.epsilons {
        let attempt = Cell::new(sweep, epsilon).and_then(|cell| min_n_for_cell(&cell, sweep.trials, &opts));
        match attempt {
            Ok(mut r) => {
                sort_records(&mut r.records);
                out.push(r);
            }
            Err(e) if e.is_infeasibility() => out.push(MinNResult {
                epsilon,
                n_min: None,
                probes: Vec::new(),
                skipped: Some(e.to_string()),
                records: vec![skipped(sweep, epsilon, &e)],
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::arg("a line fit needs at least two paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("a line fit needs distinct x values"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}
