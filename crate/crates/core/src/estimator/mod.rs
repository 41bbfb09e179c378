//! The frequency-witness tournament.
//!
//! For each candidate mean `theta` on an `eps'`-cover and each frequency
//! `omega` in the search set `{|phi_D| >= delta/2}` of an `eta`-cover, the
//! statistic `T(omega) = (1 - alpha) e^{2 pi i omega.theta} - phi_hat(omega)/phi_D(omega)`
//! is large when `theta` is far from the clean mean. The output is the
//! candidate whose largest `|T|` is smallest.

mod ecf;
mod presets;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contamination::{dot, ContaminationModel};
use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::samples::Samples;
use crate::special::unit_phase;
use crate::spectral::cover::{build_cover_capped, Cover, DEFAULT_COVER_CAP};
use crate::spectral::witness::witness_norm_bound;

pub use ecf::{ecf, ecf_grid_1d, ecf_lattice};
pub use presets::{radial_min_cf, upper_preset, UpperPreset};

pub const DEFAULT_BUDGET_CONSTANT: f64 = 64.0;

/// How `phi_D` is obtained at the search frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CfMode {
    /// Closed-form CF.
    #[default]
    Oracle,
    /// ECF of `m` clean draws from the base, seeded by `seed`. The search
    /// threshold is lowered by `5/sqrt(m)`.
    Empirical { m: usize, seed: u64 },
}

/// Shift removed from the samples before the tournament and added back to
/// the output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Centering {
    /// Coordinate-wise median.
    #[default]
    Median,
    None,
    Fixed { shift: Vec<f64> },
}

fn default_budget_constant() -> f64 {
    DEFAULT_BUDGET_CONSTANT
}

fn default_cover_cap() -> u64 {
    DEFAULT_COVER_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub alpha: f64,
    /// Bound on the distance between the clean mean and the centering shift.
    pub radius: f64,
    /// Witness sine threshold `A`.
    pub a: f64,
    /// Witness CF threshold.
    pub delta: f64,
    /// Lipschitz constant of `phi_D` on the frequency ball.
    pub lipschitz: f64,
    pub m1: f64,
    #[serde(default = "default_budget_constant")]
    pub budget_constant: f64,
    #[serde(default)]
    pub cf_mode: CfMode,
    #[serde(default)]
    pub centering: Centering,
    #[serde(default = "default_cover_cap")]
    pub cover_cap: u64,
    /// Keep every candidate's score in the report.
    #[serde(default)]
    pub trace: bool,
}

/// Cover resolutions derived from a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolutions {
    /// Radius of the frequency ball.
    pub b_delta: f64,
    /// Candidate cover resolution.
    pub eps_prime: f64,
    /// Frequency cover resolution.
    pub eta: f64,
}

impl EstimatorConfig {
    /// Configuration with `L` and `M1` taken from the base distribution.
    pub fn for_distribution(
        dist: &BaseDistribution,
        epsilon: f64,
        alpha: f64,
        radius: f64,
        a: f64,
        delta: f64,
    ) -> Self {
        let m1 = dist.constants().deriv_l1_m1;
        let b = witness_norm_bound(m1, delta, dist.dim());
        Self {
            epsilon,
            alpha,
            radius,
            a,
            delta,
            lipschitz: dist.lipschitz_on_ball(b),
            m1,
            budget_constant: DEFAULT_BUDGET_CONSTANT,
            cf_mode: CfMode::Oracle,
            centering: Centering::Median,
            cover_cap: DEFAULT_COVER_CAP,
            trace: false,
        }
    }

    /// `(1 - alpha) A - 2 alpha`.
    pub fn gap(&self) -> f64 {
        (1.0 - self.alpha) * self.a - 2.0 * self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::Argument(msg)) };
        check(
            self.epsilon > 0.0 && self.epsilon < 1.0,
            format!("epsilon must lie in (0, 1), got {}", self.epsilon),
        )?;
        check(
            self.alpha > 0.0 && self.alpha < 0.5,
            format!("alpha must lie in (0, 1/2), got {}", self.alpha),
        )?;
        check(self.radius > 1.0 && self.radius.is_finite(), format!("radius must exceed 1, got {}", self.radius))?;
        check(self.a > 0.0 && self.a <= 1.0, format!("A must lie in (0, 1], got {}", self.a))?;
        check(self.delta > 0.0 && self.delta <= 1.0, format!("delta must lie in (0, 1], got {}", self.delta))?;
        check(self.lipschitz > 0.0 && self.lipschitz.is_finite(), "L must be positive".into())?;
        check(self.m1 > 0.0 && self.m1.is_finite(), "M1 must be positive".into())?;
        check(self.budget_constant > 0.0, "budget constant must be positive".into())?;
        check(
            self.gap() > 0.0,
            format!("(1 - alpha) A - 2 alpha = {} must be positive", self.gap()),
        )?;
        if let CfMode::Empirical { m, .. } = self.cf_mode {
            check(m > 0, "empirical CF mode needs m > 0".into())?;
        }
        Ok(())
    }

    pub fn resolutions(&self, d: usize) -> Resolutions {
        let b = witness_norm_bound(self.m1, self.delta, d);
        let one_minus = 1.0 - self.alpha;
        let eps_prime = (self.alpha / (2.0 * one_minus * PI * b))
            .min(self.gap() / (4.0 * one_minus * PI * b))
            .min(self.epsilon);
        let eta = (self.delta / (2.0 * self.lipschitz)).min(self.a / (2.0 * PI * self.radius));
        Resolutions {
            b_delta: b,
            eps_prime,
            eta,
        }
    }
}

/// `ceil(C d log(B R L / (delta A)) / (gap delta)^2)`.
pub fn sample_budget(config: &EstimatorConfig, d: usize) -> Result<u64> {
    config.validate()?;
    let b = witness_norm_bound(config.m1, config.delta, d);
    let arg = b * config.radius * config.lipschitz / (config.delta * config.a);
    if !(arg > 1.0) {
        return Err(Error::arg(format!(
            "log argument B R L / (delta A) = {arg} is not above 1"
        )));
    }
    Ok(budget_from_parts(
        config.budget_constant,
        d,
        arg.ln(),
        config.gap(),
        config.delta,
    ))
}

/// The budget formula from its pieces.
pub fn budget_from_parts(c: f64, d: usize, log_term: f64, gap: f64, delta: f64) -> u64 {
    let n = c * d as f64 * log_term / (gap * delta).powi(2);
    n.ceil().min(u64::MAX as f64) as u64
}

/// Coordinate-wise median. Requires `alpha < 1/3`.
pub fn precenter(samples: &Samples, alpha: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::arg("cannot center an empty sample"));
    }
    if !(alpha < 1.0 / 3.0) {
        return Err(Error::arg(format!("median centering needs alpha < 1/3, got {alpha}")));
    }
    Ok((0..samples.dim())
        .map(|j| median(&mut samples.column(j)))
        .collect())
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// `(1 - alpha) e^{2 pi i omega.mu_hat} - psi_hat`.
pub fn test_statistic(mu_hat: &[f64], omega: &[f64], psi_hat: Complex64, alpha: f64) -> Complex64 {
    (1.0 - alpha) * unit_phase(dot(omega, mu_hat)) - psi_hat
}

/// The search set: frequencies of the cover's half-space
/// (first nonzero grid index positive, plus the origin) where the CF value
/// clears the threshold.
#[derive(Debug, Clone)]
pub struct SearchSet {
    pub frequencies: Vec<Vec<f64>>,
    pub indices: Vec<Vec<i64>>,
    /// `phi_D` (or its estimate) at each frequency.
    pub phi_d: Vec<Complex64>,
    pub pitch: f64,
}

impl SearchSet {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

fn in_half_space(idx: &[i64]) -> bool {
    match idx.iter().find(|&&k| k != 0) {
        Some(&k) => k > 0,
        None => true,
    }
}

/// Cover points with `|phi_D| >= threshold`. Because the data are real and
/// `phi_D` is real and even, `|T(-omega)| = |T(omega)|`, so only one
/// half-space of the symmetric cover is kept.
pub fn build_search_set(
    freq_cover: &Cover,
    dist: &BaseDistribution,
    threshold: f64,
    cf_mode: &CfMode,
) -> Result<SearchSet> {
    if freq_cover.dim() != dist.dim() {
        return Err(Error::Dimension {
            expected: dist.dim(),
            got: freq_cover.dim(),
        });
    }
    let half: Vec<usize> = (0..freq_cover.len())
        .filter(|&i| in_half_space(&freq_cover.grid_index(i)))
        .collect();
    let indices_all: Vec<Vec<i64>> = half.iter().map(|&i| freq_cover.grid_index(i)).collect();
    let values: Vec<Complex64> = match *cf_mode {
        CfMode::Oracle => half
            .iter()
            .map(|&i| Complex64::new(dist.cf_real(freq_cover.point(i)), 0.0))
            .collect(),
        CfMode::Empirical { m, seed } => {
            let mut rng = SimRng::seed_from_u64(seed);
            let clean = dist.sample(&mut rng, m);
            if freq_cover.pitch() == 0.0 {
                vec![Complex64::new(1.0, 0.0); half.len()]
            } else {
                ecf_lattice(&clean, freq_cover.pitch(), &indices_all)?
            }
        }
    };
    let threshold = match *cf_mode {
        CfMode::Oracle => threshold,
        CfMode::Empirical { m, .. } => threshold - 5.0 / (m as f64).sqrt(),
    };
    let mut set = SearchSet {
        frequencies: Vec::new(),
        indices: Vec::new(),
        phi_d: Vec::new(),
        pitch: freq_cover.pitch(),
    };
    for ((&i, idx), phi) in half.iter().zip(indices_all).zip(values) {
        if phi.norm() >= threshold && phi.norm() > 0.0 {
            set.frequencies.push(freq_cover.point(i).to_vec());
            set.indices.push(idx);
            set.phi_d.push(phi);
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub candidate: Vec<f64>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mu_hat: Vec<f64>,
    pub score: f64,
    pub n_used: usize,
    /// Sample budget for this configuration, when the formula is defined.
    pub required_n: Option<u64>,
    pub search_set_size: usize,
    pub candidate_count: usize,
    pub shift: Vec<f64>,
    pub resolutions: Resolutions,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_candidate_scores: Option<Vec<CandidateScore>>,
}

impl EstimateReport {
    pub fn empty_search_set(&self) -> bool {
        self.search_set_size == 0
    }
}

struct Prepared {
    candidates: Cover,
    search: SearchSet,
    resolutions: Resolutions,
}

fn prepare(config: &EstimatorConfig, dist: &BaseDistribution) -> Result<Prepared> {
    config.validate()?;
    let d = dist.dim();
    let res = config.resolutions(d);
    let candidates = build_cover_capped(config.radius, res.eps_prime, d, config.cover_cap)?;
    let freq_cover = build_cover_capped(res.b_delta, res.eta, d, config.cover_cap)?;
    let search = build_search_set(&freq_cover, dist, config.delta / 2.0, &config.cf_mode)?;
    Ok(Prepared {
        candidates,
        search,
        resolutions: res,
    })
}

/// `max_omega |T_theta(omega)|` for every candidate, in cover order.
fn score_all(prep: &Prepared, psi: &[Complex64], alpha: f64) -> Vec<f64> {
    let freqs = &prep.search.frequencies;
    (0..prep.candidates.len())
        .into_par_iter()
        .map(|i| {
            let theta = prep.candidates.point(i);
            freqs
                .iter()
                .zip(psi)
                .map(|(w, &p)| test_statistic(theta, w, p, alpha).norm())
                .fold(0.0, f64::max)
        })
        .collect()
}

fn finish(
    prep: Prepared,
    scores: Vec<f64>,
    shift: Vec<f64>,
    config: &EstimatorConfig,
    n_used: usize,
    required_n: Option<u64>,
    mut warnings: Vec<String>,
) -> EstimateReport {
    // first minimum in lexicographic cover order
    let (best, score) = scores
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bs), (i, &s)| if s < bs { (i, s) } else { (bi, bs) });
    let theta = prep.candidates.point(best);
    let mu_hat = theta.iter().zip(&shift).map(|(t, s)| t + s).collect();
    if prep.search.is_empty() {
        warnings.push("search set is empty; every candidate scores 0".into());
    }
    let per_candidate_scores = config.trace.then(|| {
        prep.candidates
            .points()
            .zip(&scores)
            .map(|(p, &s)| CandidateScore {
                candidate: p.iter().zip(&shift).map(|(t, c)| t + c).collect(),
                score: s,
            })
            .collect()
    });
    EstimateReport {
        mu_hat,
        score,
        n_used,
        required_n,
        search_set_size: prep.search.len(),
        candidate_count: prep.candidates.len(),
        shift,
        resolutions: prep.resolutions,
        warnings,
        per_candidate_scores,
    }
}

/// Runs the tournament on `samples`.
pub fn estimate(
    config: &EstimatorConfig,
    samples: &Samples,
    dist: &BaseDistribution,
) -> Result<EstimateReport> {
    let d = dist.dim();
    if samples.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            got: samples.dim(),
        });
    }
    if samples.is_empty() {
        return Err(Error::arg("estimate needs at least one sample"));
    }
    let prep = prepare(config, dist)?;
    let shift = match &config.centering {
        Centering::Median => precenter(samples, config.alpha)?,
        Centering::None => vec![0.0; d],
        Centering::Fixed { shift } => {
            if shift.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: shift.len(),
                });
            }
            shift.clone()
        }
    };
    let centered = if shift.iter().all(|&s| s == 0.0) {
        samples.clone()
    } else {
        samples.translated(&shift.iter().map(|s| -s).collect::<Vec<_>>())?
    };
    let mut warnings = Vec::new();
    let required_n = sample_budget(config, d).ok();
    if let Some(req) = required_n {
        if (samples.len() as u64) < req {
            warnings.push(format!(
                "{} samples is below the budget of {req}",
                samples.len()
            ));
        }
    }
    let phi_hat = if prep.search.is_empty() {
        Vec::new()
    } else if prep.search.pitch == 0.0 {
        prep.search
            .frequencies
            .iter()
            .map(|w| ecf(&centered, w))
            .collect::<Result<Vec<_>>>()?
    } else {
        ecf_lattice(&centered, prep.search.pitch, &prep.search.indices)?
    };
    let psi: Vec<Complex64> = phi_hat
        .iter()
        .zip(&prep.search.phi_d)
        .map(|(p, q)| p / q)
        .collect();
    let scores = score_all(&prep, &psi, config.alpha);
    Ok(finish(prep, scores, shift, config, samples.len(), required_n, warnings))
}

/// Runs the tournament with the exact population `psi` of `model` in place
/// of the empirical estimate. Centering is ignored.
pub fn estimate_population(
    config: &EstimatorConfig,
    model: &ContaminationModel,
) -> Result<EstimateReport> {
    let dist = model.base();
    let prep = prepare(config, dist)?;
    let psi: Vec<Complex64> = prep
        .search
        .frequencies
        .iter()
        .map(|w| model.shift_cf(w))
        .collect();
    let scores = score_all(&prep, &psi, config.alpha);
    let d = dist.dim();
    Ok(finish(prep, scores, vec![0.0; d], config, 0, None, Vec::new()))
}

/// The population statistic `T_theta(omega)` for `model`.
pub fn population_statistic(model: &ContaminationModel, theta: &[f64], omega: &[f64]) -> Complex64 {
    test_statistic(theta, omega, model.shift_cf(omega), model.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contamination::AdversaryKind;
    use crate::rng::seeded;
    use crate::spectral::cover::build_cover;
    use crate::spectral::witness::find_witness;
    use rand::Rng;

    fn gaussian_config(alpha: f64, epsilon: f64) -> EstimatorConfig {
        let g = BaseDistribution::gaussian(1);
        let p = upper_preset(&g, epsilon, alpha).unwrap();
        EstimatorConfig::for_distribution(&g, epsilon, alpha, 2.0, p.a, p.delta)
    }

    #[test]
    fn budget_direct_evaluation() {
        assert_eq!(budget_from_parts(1.0, 1, std::f64::consts::E.ln(), 0.1, 0.1), 10_000);
    }

    #[test]
    fn budget_scales_inverse_square_in_delta() {
        let mut c = gaussian_config(0.1, 0.5);
        let log_arg = |c: &EstimatorConfig| {
            (witness_norm_bound(c.m1, c.delta, 1) * c.radius * c.lipschitz / (c.delta * c.a)).ln()
        };
        let n1 = sample_budget(&c, 1).unwrap() as f64;
        let l1 = log_arg(&c);
        c.delta /= 2.0;
        let n2 = sample_budget(&c, 1).unwrap() as f64;
        let l2 = log_arg(&c);
        let ratio = (n2 / n1) / (l2 / l1);
        assert!((ratio - 4.0).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn budget_rejects_nonpositive_log() {
        let mut c = gaussian_config(0.1, 0.5);
        c.lipschitz = 1e-6;
        assert!(matches!(sample_budget(&c, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn gaussian_budget_grows_exponentially_in_ratio_squared() {
        let alpha = 0.05;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for eps in [0.5, 0.3, 0.2, 0.15, 0.12] {
            let c = gaussian_config(alpha, eps);
            xs.push((alpha / eps).powi(2));
            ys.push((sample_budget(&c, 1).unwrap() as f64).ln());
        }
        assert!(ys.windows(2).all(|w| w[1] > w[0]));
        // log n is close to linear in (alpha/eps)^2
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!(sxy / sxx > 0.0);
        assert!(sxy * sxy / (sxx * syy) > 0.95);
    }

    #[test]
    fn precenter_cases() {
        let s = Samples::new(1, vec![2.5; 7]).unwrap();
        assert_eq!(precenter(&s, 0.1).unwrap(), vec![2.5]);
        assert!(precenter(&Samples::with_capacity(1, 0), 0.1).is_err());
        let g = BaseDistribution::gaussian(2);
        let n = 40_000;
        let s = g.sample(&mut seeded(5), n).translated(&[1.0, -2.0]).unwrap();
        let c = precenter(&s, 0.1).unwrap();
        assert!((c[0] - 1.0).abs() <= 4.0 / (n as f64).sqrt());
        assert!((c[1] + 2.0).abs() <= 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn precenter_resists_far_outliers() {
        let g = BaseDistribution::gaussian(1);
        let model = ContaminationModel::new(
            0.2,
            vec![0.0],
            AdversaryKind::PointShift { z: vec![1e6] },
            g,
        )
        .unwrap();
        for seed in 0..30 {
            let s = model.draw(&mut seeded(seed), 10_000);
            let c = precenter(&s, 0.2).unwrap();
            assert!(c[0].abs() <= 0.5, "seed {seed}: {}", c[0]);
        }
    }

    #[test]
    fn search_set_examples() {
        let g = BaseDistribution::gaussian(1);
        let cover = build_cover(1.0, 0.01, 1).unwrap();
        let all = build_search_set(&cover, &g, 0.0, &CfMode::Oracle).unwrap();
        assert_eq!(all.len(), cover.len().div_ceil(2));
        let none = build_search_set(&cover, &g, 1.5, &CfMode::Oracle).unwrap();
        assert!(none.is_empty());
        let half = build_search_set(&cover, &g, 0.5, &CfMode::Oracle).unwrap();
        let cut = (2f64.ln() / (2.0 * PI * PI)).sqrt();
        let expected = cover.points().filter(|p| p[0] >= 0.0 && p[0] <= cut).count();
        assert_eq!(half.len(), expected);
        assert!(half.frequencies.iter().all(|w| w[0] <= cut));
    }

    #[test]
    fn statistic_examples() {
        let mu = [0.3];
        let w = [0.7];
        let psi = unit_phase(0.7 * 0.3);
        assert!(test_statistic(&mu, &w, psi, 0.0).norm() < 1e-15);
    }

    #[test]
    fn population_claims_on_random_instances() {
        let mut rng = seeded(99);
        let dists = [BaseDistribution::gaussian(1), BaseDistribution::laplace(1), BaseDistribution::gaussian(2)];
        for _ in 0..20 {
            let dist = dists[rng.random_range(0..3)];
            let d = dist.dim();
            let alpha = rng.random_range(0.02..0.2);
            let mu: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let z: Vec<f64> = (0..d).map(|_| rng.random_range(-6.0..6.0)).collect();
            let model =
                ContaminationModel::new(alpha, mu.clone(), AdversaryKind::PointShift { z }, dist).unwrap();
            // v = 0: |T| <= alpha
            for _ in 0..20 {
                let w: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                assert!(population_statistic(&model, &mu, &w).norm() <= alpha + 1e-12);
            }
            let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let v: Vec<f64> = theta.iter().zip(&mu).map(|(a, b)| a - b).collect();
            let a = rng.random_range(0.1..1.0);
            if let Some(w) = find_witness(&dist, &v, a, 1e-3, None).unwrap().omega {
                let t = population_statistic(&model, &theta, &w).norm();
                assert!(t >= 2.0 * (1.0 - alpha) * a - alpha - 1e-10);
            }
        }
    }

    #[test]
    fn population_tournament_separates_near_and_far() {
        let alpha = 0.1;
        let mut cfg = gaussian_config(alpha, 0.5);
        cfg.trace = true;
        let mu = 0.3;
        let model = ContaminationModel::new(
            alpha,
            vec![mu],
            AdversaryKind::PointShift { z: vec![5.0] },
            BaseDistribution::gaussian(1),
        )
        .unwrap();
        let rep = estimate_population(&cfg, &model).unwrap();
        assert!((rep.mu_hat[0] - mu).abs() <= cfg.epsilon);
        let scores = rep.per_candidate_scores.unwrap();
        let near = scores
            .iter()
            .min_by(|a, b| (a.candidate[0] - mu).abs().total_cmp(&(b.candidate[0] - mu).abs()))
            .unwrap()
            .score;
        let far = scores
            .iter()
            .filter(|s| (s.candidate[0] - mu).abs() >= cfg.epsilon)
            .map(|s| s.score)
            .fold(f64::INFINITY, f64::min);
        let res = rep.resolutions;
        // grid slack: the nearest candidate is within eps' and frequencies are within b_delta
        let slack = 2.0 * (1.0 - alpha) * PI * res.b_delta * res.eps_prime;
        let margin = (1.0 - alpha) * cfg.a / 2.0 - alpha - slack;
        assert!(far - near > margin.max(0.0), "far {far}, near {near}, margin {margin}");
    }

    #[test]
    fn estimate_recovers_mean_and_is_deterministic() {
        let alpha = 0.1;
        let cfg = gaussian_config(alpha, 0.5);
        let model = ContaminationModel::new(
            alpha,
            vec![0.3],
            AdversaryKind::PointShift { z: vec![5.0] },
            BaseDistribution::gaussian(1),
        )
        .unwrap();
        let s = model.draw(&mut seeded(12), 50_000);
        let a = estimate(&cfg, &s, model.base()).unwrap();
        let b = estimate(&cfg, &s, model.base()).unwrap();
        assert_eq!(a, b);
        assert!((a.mu_hat[0] - 0.3).abs() <= 0.5);
        assert!(!a.warnings.is_empty(), "below-budget warning expected");
    }

    #[test]
    fn null_adversary_at_origin() {
        let alpha = 0.1;
        let cfg = gaussian_config(alpha, 0.5);
        let model = ContaminationModel::new(
            alpha,
            vec![0.0],
            AdversaryKind::NullAdversary,
            BaseDistribution::gaussian(1),
        )
        .unwrap();
        let rep = estimate_population(&cfg, &model).unwrap();
        assert!(rep.mu_hat[0].abs() <= rep.resolutions.eps_prime + 1e-12);
    }

    #[test]
    fn translation_equivariance() {
        let alpha = 0.1;
        let mut cfg = gaussian_config(alpha, 0.5);
        let model = ContaminationModel::new(
            alpha,
            vec![0.0],
            AdversaryKind::PointShift { z: vec![4.0] },
            BaseDistribution::gaussian(1),
        )
        .unwrap();
        let s = model.draw(&mut seeded(3), 20_000);
        cfg.centering = Centering::None;
        let base = estimate(&cfg, &s, model.base()).unwrap();
        let c = 1.75;
        cfg.centering = Centering::Fixed { shift: vec![c] };
        let moved = estimate(&cfg, &s.translated(&[c]).unwrap(), model.base()).unwrap();
        assert!((moved.mu_hat[0] - (base.mu_hat[0] + c)).abs() < 1e-12);
    }

    #[test]
    fn empirical_cf_mode_runs() {
        let alpha = 0.1;
        let mut cfg = gaussian_config(alpha, 0.5);
        cfg.cf_mode = CfMode::Empirical { m: 200_000, seed: 4 };
        let model = ContaminationModel::new(
            alpha,
            vec![0.3],
            AdversaryKind::PointShift { z: vec![5.0] },
            BaseDistribution::gaussian(1),
        )
        .unwrap();
        let s = model.draw(&mut seeded(6), 100_000);
        let rep = estimate(&cfg, &s, model.base()).unwrap();
        assert!((rep.mu_hat[0] - 0.3).abs() <= 0.5);
        assert!(rep.search_set_size > 0);
    }

    #[test]
    fn config_validation() {
        let mut c = gaussian_config(0.1, 0.5);
        c.a = 0.2;
        assert!(c.validate().is_err());
        let mut c = gaussian_config(0.1, 0.5);
        c.radius = 0.5;
        assert!(c.validate().is_err());
        let json = serde_json::to_string(&gaussian_config(0.1, 0.5)).unwrap();
        let back: EstimatorConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, gaussian_config(0.1, 0.5));
    }

    #[test]
    fn two_dimensional_estimate() {
        let g = BaseDistribution::gaussian(2);
        let alpha = 0.05;
        let p = upper_preset(&g, 0.6, alpha).unwrap();
        let cfg = EstimatorConfig::for_distribution(&g, 0.6, alpha, 1.5, p.a, p.delta);
        let model = ContaminationModel::new(
            alpha,
            vec![0.2, -0.1],
            AdversaryKind::PointShift { z: vec![4.0, 4.0] },
            g,
        )
        .unwrap();
        let s = model.draw(&mut seeded(8), 50_000);
        let rep = estimate(&cfg, &s, &g).unwrap();
        let err = ((rep.mu_hat[0] - 0.2).powi(2) + (rep.mu_hat[1] + 0.1).powi(2)).sqrt();
        assert!(err <= 0.6, "{:?}", rep.mu_hat);
    }
}
