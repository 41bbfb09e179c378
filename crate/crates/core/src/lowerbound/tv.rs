//! Total variation between the two hard-instance distributions: a direct
//! quadrature of `|p_0 - p_1| / 2` and the Fourier-side upper bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::measure::{Atom, SignedAtomicMeasure};
use crate::quadrature::{adaptive_simpson, SimpsonOptions};
use crate::spectral::{band_l2_mass, cf_l2_norm, BandL2Options};

use super::construction::HardInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvOptions {
    /// Absolute tolerance of the half-L1 quadrature.
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Points of the geometric grid over which the bound is minimized in R.
    #[serde(default = "default_r_grid")]
    pub r_grid: usize,
    #[serde(default)]
    pub band: BandL2Options,
}

fn default_abs_tol() -> f64 {
    1e-8
}

fn default_r_grid() -> usize {
    256
}

impl Default for TvOptions {
    fn default() -> Self {
        Self {
            abs_tol: default_abs_tol(),
            r_grid: default_r_grid(),
            band: BandL2Options::default(),
        }
    }
}

/// Direct TV with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectTv {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// The Fourier-side bound at its best radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaBound {
    pub value: f64,
    pub r: f64,
    pub tail_term: f64,
    pub fourier_term: f64,
    /// `||phi_D 1{dist(eps omega, Z) > w eps}||_2`.
    pub band_l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvReport {
    pub epsilon: f64,
    pub alpha: f64,
    pub c: f64,
    pub direct: DirectTv,
    pub bound: LemmaBound,
    /// `None` when the direct TV is zero.
    pub sample_lower_bound: Option<u64>,
}

/// `ceil(ln(3/2) / tv)`; `None` (unbounded) for `tv = 0`.
pub fn sample_lower_bound_from_tv(tv: f64) -> Result<Option<u64>> {
    if !(0.0..=1.0).contains(&tv) {
        return Err(Error::arg(format!("total variation must lie in [0, 1], got {tv}")));
    }
    if tv == 0.0 {
        return Ok(None);
    }
    let q = 1.5f64.ln() / tv;
    // ln(1.5) / (ln(1.5) / n) may land a few ulps above n
    let r = q.round();
    let n = if (q - r).abs() <= 1e-12 * q.max(1.0) { r } else { q.ceil() };
    if n >= u64::MAX as f64 {
        return Ok(None);
    }
    Ok(Some(n.max(1.0) as u64))
}

/// `x -> sum_j c_j p_D(x - y_j)` with a windowed atom lookup.
struct MixtureDiff<'a> {
    base: &'a BaseDistribution,
    atoms: &'a [Atom],
    reach: f64,
}

impl MixtureDiff<'_> {
    fn eval(&self, x: f64) -> f64 {
        let lo = self.atoms.partition_point(|a| a.location < x - self.reach);
        let hi = self.atoms.partition_point(|a| a.location <= x + self.reach);
        self.atoms[lo..hi]
            .iter()
            .map(|a| a.weight * self.base.density(x - a.location).unwrap_or(0.0))
            .sum()
    }
}

/// Direct `TV(D * e0, D * e1)` by adaptive Simpson over the joint support,
/// split at every shifted density kink.
pub fn tv_between(
    base: &BaseDistribution,
    e0: &SignedAtomicMeasure,
    e1: &SignedAtomicMeasure,
    abs_tol: f64,
) -> Result<DirectTv> {
    if base.dim() != 1 {
        return Err(Error::Unsupported("direct TV needs a univariate base".into()));
    }
    base.density(0.0)?;
    let diff = e0.add_scaled(e1, -1.0);
    let atoms = diff.atoms();
    if atoms.is_empty() {
        return Ok(DirectTv {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let reach = base.effective_support();
    let h = MixtureDiff {
        base,
        atoms,
        reach,
    };
    let a = atoms[0].location - reach;
    let b = atoms[atoms.len() - 1].location + reach;
    let kinks = base.density_kinks();
    let mut breaks: Vec<f64> = atoms
        .iter()
        .flat_map(|at| kinks.iter().map(move |k| at.location + k))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    // fixed macro-panels integrated in parallel, summed in order
    let chunks = 64usize;
    let step = (b - a) / chunks as f64;
    let per_chunk = SimpsonOptions {
        abs_tol: abs_tol / chunks as f64,
        initial_panels: if breaks.len() > 256 { 2 } else { 16 },
        max_evaluations: 2_000_000,
        ..SimpsonOptions::default()
    };
    let parts: Vec<Result<_>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let lo = a + i as f64 * step;
            let hi = if i + 1 == chunks { b } else { lo + step };
            let first = breaks.partition_point(|&x| x <= lo);
            let last = breaks.partition_point(|&x| x < hi);
            adaptive_simpson(|x| h.eval(x).abs(), lo, hi, &breaks[first..last], &per_chunk)
        })
        .collect();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for part in parts {
        let part = part.map_err(|e| {
            Error::Quadrature(format!("{e}; try a looser abs_tol or a coarser instance"))
        })?;
        value += part.value;
        error += part.error;
        evaluations += part.evaluations;
    }
    // mass outside the lookup window is below the density at `reach`
    let clipped = diff.l1_norm() * base.tail_probability(reach)?;
    Ok(DirectTv {
        value: (0.5 * value).min(1.0),
        error: 0.5 * (error + clipped),
        evaluations,
    })
}

/// Direct TV between the two distributions of `instance`.
pub fn tv_direct(instance: &HardInstance, abs_tol: f64) -> Result<DirectTv> {
    tv_between(&instance.base, &instance.e0(), &instance.e1(), abs_tol)
}

/// `P(X > s)` for the symmetric univariate base.
fn upper_tail(base: &BaseDistribution, s: f64) -> Result<f64> {
    let t = 0.5 * base.tail_probability(s.abs())?;
    Ok(if s >= 0.0 { t } else { 1.0 - t })
}

/// `min_R { (1/2) ||h 1{|x| > R}||_1 + sqrt(R/2) ||phi_D Delta phi_E||_2 }`
/// with the spatial tail bounded atom by atom and the Fourier norm by
/// `2(1 - alpha)` times the band-gap L2 mass of `phi_D` plus the
/// truncation error on the bands.
pub fn lemma_tv_bound(instance: &HardInstance, opts: &TvOptions) -> Result<LemmaBound> {
    let base = &instance.base;
    let alpha = instance.alpha;
    let band_l2 = band_l2_mass(base, instance.epsilon, instance.w * instance.epsilon, &opts.band)?;
    let fourier =
        2.0 * (1.0 - alpha) * band_l2 + alpha * instance.g.tail_bound * cf_l2_norm(base)?;
    let diff = instance.delta_e();
    let atoms = diff.atoms();
    let far = atoms
        .iter()
        .map(|a| a.location.abs())
        .fold(0.0f64, f64::max)
        + 2.0 * base.effective_support();
    let near = (0.5 * instance.epsilon).max(1e-3);
    let n = opts.r_grid.max(2);
    let ratio = (far / near).ln() / (n - 1) as f64;
    let mut best: Option<LemmaBound> = None;
    for i in 0..n {
        let r = near * (ratio * i as f64).exp();
        let mut tail = 0.0;
        for a in atoms {
            let p = upper_tail(base, r - a.location)? + upper_tail(base, r + a.location)?;
            tail += a.weight.abs() * p.min(1.0);
        }
        let tail_term = 0.5 * tail;
        let fourier_term = (0.5 * r).sqrt() * fourier;
        let value = tail_term + fourier_term;
        if best.is_none_or(|b| value < b.value) {
            best = Some(LemmaBound {
                value,
                r,
                tail_term,
                fourier_term,
                band_l2,
            });
        }
    }
    Ok(best.expect("nonempty radius grid"))
}

/// Both TV numbers and the implied sample lower bound.
pub fn tv_distance(instance: &HardInstance, opts: &TvOptions) -> Result<TvReport> {
    let direct = tv_direct(instance, opts.abs_tol)?;
    let bound = lemma_tv_bound(instance, opts)?;
    Ok(TvReport {
        epsilon: instance.epsilon,
        alpha: instance.alpha,
        c: instance.c,
        direct,
        bound,
        sample_lower_bound: sample_lower_bound_from_tv(direct.value)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowerbound::construction::{build_hard_instance, InstanceOptions};
    use crate::special::normal_cdf;

    #[test]
    fn sample_bound_examples() {
        assert_eq!(sample_lower_bound_from_tv(0.5).unwrap(), Some(1));
        assert_eq!(sample_lower_bound_from_tv(1.5f64.ln() / 100.0).unwrap(), Some(100));
        assert_eq!(sample_lower_bound_from_tv(1.0).unwrap(), Some(1));
        assert_eq!(sample_lower_bound_from_tv(0.0).unwrap(), None);
        assert!(sample_lower_bound_from_tv(-0.1).is_err());
        assert_eq!(sample_lower_bound_from_tv(0.01).unwrap(), Some(41));
    }

    #[test]
    fn identical_measures_have_zero_tv() {
        let base = BaseDistribution::laplace(1);
        let e = SignedAtomicMeasure::from_atoms([(0.3, 0.5), (-1.0, 0.5)]).unwrap();
        assert_eq!(tv_between(&base, &e, &e, 1e-8).unwrap().value, 0.0);
    }

    #[test]
    fn shifted_gaussians_closed_form() {
        let base = BaseDistribution::gaussian(1);
        let e0 = SignedAtomicMeasure::dirac(0.5);
        let e1 = SignedAtomicMeasure::dirac(-0.5);
        let tv = tv_between(&base, &e0, &e1, 1e-10).unwrap();
        let want = 2.0 * normal_cdf(0.5) - 1.0;
        assert!((tv.value - want).abs() < 1e-9, "{} vs {want}", tv.value);
        assert!((want - 0.38292).abs() < 1e-5);
    }

    #[test]
    fn shifted_uniforms_closed_form() {
        let base = BaseDistribution::uniform();
        let e0 = SignedAtomicMeasure::dirac(0.25);
        let e1 = SignedAtomicMeasure::dirac(-0.25);
        let tv = tv_between(&base, &e0, &e1, 1e-10).unwrap();
        assert!((tv.value - 0.25).abs() < 1e-9, "{}", tv.value);
    }

    #[test]
    fn gaussian_instance_bound_dominates_direct() {
        let inst = build_hard_instance(
            &BaseDistribution::gaussian(1),
            0.2,
            0.3,
            &InstanceOptions::default(),
        )
        .unwrap();
        let report = tv_distance(&inst, &TvOptions::default()).unwrap();
        assert!(report.direct.value > 0.0);
        assert!(report.direct.value + report.direct.error <= report.bound.value);
        assert!(report.direct.error < 1e-6);
        assert!(report.sample_lower_bound.unwrap() >= 1);
    }
}
