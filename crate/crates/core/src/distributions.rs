//! Base distributions with closed-form characteristic functions.
//!
//! Characteristic functions use the `exp(2 pi i w.x)` convention throughout,
//! so a point mass at `a` has CF `exp(2 pi i w a)` and the Gaussian has CF
//! `exp(-2 pi^2 |w|^2)`. Every kind here is symmetric about the origin, so
//! the CF is real-valued.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samples::Samples;
use crate::special::{irwin_hall_pdf, sinc};

/// Largest supported number of convolved uniforms. The Irwin–Hall
/// alternating sum loses accuracy well before cancellation matters past this.
pub const MAX_CONV_ORDER: u32 = 8;

/// `sup_u |d/du (sin u / u)|`, attained near `u = 2.0816`.
const SIN_OVER_U_MAX_SLOPE: f64 = 0.436_181_817_271_458_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    /// Standard normal `N(0, I_d)`.
    Gaussian { d: usize },
    /// Product Laplace with unit variance per coordinate (scale `1/sqrt 2`).
    Laplace { d: usize },
    /// `U[-1, 1]`.
    Uniform,
    /// Sum of `m` independent `U[-1, 1]`.
    UniformConv { m: u32 },
}

impl DistKind {
    pub fn dim(&self) -> usize {
        match *self {
            DistKind::Gaussian { d } | DistKind::Laplace { d } => d,
            DistKind::Uniform | DistKind::UniformConv { .. } => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistKind::Gaussian { .. } => "gaussian",
            DistKind::Laplace { .. } => "laplace",
            DistKind::Uniform => "uniform",
            DistKind::UniformConv { .. } => "uniform_conv",
        }
    }
}

/// Constants consumed by the estimator and the lower-bound analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants {
    /// Global Lipschitz constant of the CF.
    pub lipschitz_l: f64,
    /// `max_j || d p / d x_j ||_{L1}`.
    pub deriv_l1_m1: f64,
    /// Tail constant: `Pr[|x| >= R] <= sigma / R`.
    pub tail_sigma: f64,
}

/// Regularity constants for a kind. The Laplace Lipschitz constant stored
/// here is the global one; see [`BaseDistribution::lipschitz_on_ball`] for
/// the radius-dependent bound.
pub fn preset_constants(kind: DistKind) -> RegularityConstants {
    match kind {
        DistKind::Gaussian { .. } => RegularityConstants {
            // sup_r 4 pi^2 r exp(-2 pi^2 r^2), attained at r = 1/(2 pi)
            lipschitz_l: 2.0 * PI * (-0.5f64).exp(),
            deriv_l1_m1: (2.0 / PI).sqrt(),
            tail_sigma: (2.0 / PI).sqrt(),
        },
        DistKind::Laplace { d } => RegularityConstants {
            // sup_w 4 pi^2 |w| / (1 + 2 pi^2 w^2)^2 = 9 pi / (4 sqrt 6) per coordinate
            lipschitz_l: (d as f64).sqrt() * 9.0 * PI / (4.0 * 6f64.sqrt()),
            deriv_l1_m1: SQRT_2,
            tail_sigma: 1.0,
        },
        DistKind::Uniform => RegularityConstants {
            lipschitz_l: 2.0 * PI * SIN_OVER_U_MAX_SLOPE,
            deriv_l1_m1: 1.0,
            tail_sigma: 1.0,
        },
        DistKind::UniformConv { m } => RegularityConstants {
            lipschitz_l: f64::from(m) * 2.0 * PI * SIN_OVER_U_MAX_SLOPE,
            // symmetric unimodal density: ||p'||_1 = 2 p(0)
            deriv_l1_m1: 2.0 * uniform_conv_density(m, 0.0),
            tail_sigma: (f64::from(m) / 3.0).sqrt(),
        },
    }
}

fn uniform_conv_density(m: u32, x: f64) -> f64 {
    0.5 * irwin_hall_pdf(m, (x + f64::from(m)) / 2.0)
}

/// A base distribution `D` with its regularity constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistSpec", into = "DistSpec")]
pub struct BaseDistribution {
    kind: DistKind,
    constants: RegularityConstants,
}

impl BaseDistribution {
    pub fn new(kind: DistKind) -> Result<Self> {
        match kind {
            DistKind::Gaussian { d } | DistKind::Laplace { d } if d == 0 => {
                return Err(Error::arg("dimension must be at least 1"));
            }
            DistKind::UniformConv { m } if m == 0 || m > MAX_CONV_ORDER => {
                return Err(Error::arg(format!(
                    "uniform_conv order must be in 1..={MAX_CONV_ORDER}, got {m}"
                )));
            }
            _ => {}
        }
        Ok(Self {
            kind,
            constants: preset_constants(kind),
        })
    }

    pub fn gaussian(d: usize) -> Self {
        Self::new(DistKind::Gaussian { d }).expect("d >= 1")
    }

    pub fn laplace(d: usize) -> Self {
        Self::new(DistKind::Laplace { d }).expect("d >= 1")
    }

    pub fn uniform() -> Self {
        Self::new(DistKind::Uniform).expect("valid")
    }

    pub fn uniform_conv(m: u32) -> Result<Self> {
        Self::new(DistKind::UniformConv { m })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn constants(&self) -> &RegularityConstants {
        &self.constants
    }

    /// Lipschitz constant of the CF restricted to the ball of `radius`.
    pub fn lipschitz_on_ball(&self, radius: f64) -> f64 {
        match self.kind {
            // |grad phi| <= 4 pi^2 |w| coordinatewise for the product Laplace
            DistKind::Laplace { .. } => self.constants.lipschitz_l.min(4.0 * PI * PI * radius),
            _ => self.constants.lipschitz_l,
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Characteristic function at `omega`.
    pub fn cf(&self, omega: &[f64]) -> Result<Complex64> {
        self.check_dim(omega.len())?;
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::arg("frequency must be finite"));
        }
        Ok(Complex64::new(self.cf_real(omega), 0.0))
    }

    /// Real value of the CF; the caller guarantees the dimension.
    pub(crate) fn cf_real(&self, omega: &[f64]) -> f64 {
        match self.kind {
            DistKind::Gaussian { .. } => {
                let r2: f64 = omega.iter().map(|w| w * w).sum();
                (-2.0 * PI * PI * r2).exp()
            }
            DistKind::Laplace { .. } => omega
                .iter()
                .map(|w| 1.0 / (1.0 + 2.0 * PI * PI * w * w))
                .product(),
            DistKind::Uniform => sinc(2.0 * omega[0]),
            DistKind::UniformConv { m } => sinc(2.0 * omega[0]).powi(m as i32),
        }
    }

    /// `|phi_D(omega)|`.
    pub fn cf_abs(&self, omega: &[f64]) -> Result<f64> {
        self.check_dim(omega.len())?;
        Ok(self.cf_real(omega).abs())
    }

    /// Pointwise density for the univariate kinds.
    pub fn density(&self, x: f64) -> Result<f64> {
        match self.kind {
            DistKind::Gaussian { d: 1 } => Ok((-0.5 * x * x).exp() / (2.0 * PI).sqrt()),
            DistKind::Laplace { d: 1 } => Ok((-SQRT_2 * x.abs()).exp() / SQRT_2),
            DistKind::Uniform => Ok(if x.abs() <= 1.0 { 0.5 } else { 0.0 }),
            DistKind::UniformConv { m } => Ok(uniform_conv_density(m, x)),
            _ => Err(Error::Unsupported(format!(
                "density of multivariate {} (d = {})",
                self.kind.name(),
                self.dim()
            ))),
        }
    }

    /// Points where the univariate density is not smooth (used to split
    /// quadrature panels).
    pub fn density_kinks(&self) -> Vec<f64> {
        match self.kind {
            DistKind::Laplace { d: 1 } => vec![0.0],
            DistKind::Uniform => vec![-1.0, 1.0],
            DistKind::UniformConv { m } => {
                let m = i64::from(m);
                (0..=m).map(|k| (2 * k - m) as f64).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Half-width of an interval holding all but a negligible (`< 1e-16`)
    /// amount of mass; exact support for the uniform kinds.
    pub fn effective_support(&self) -> f64 {
        match self.kind {
            DistKind::Gaussian { .. } => 8.6,
            DistKind::Laplace { .. } => 27.0,
            DistKind::Uniform => 1.0,
            DistKind::UniformConv { m } => f64::from(m),
        }
    }

    /// `Pr[|x| > r]` for the univariate kinds.
    pub fn tail_probability(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(1.0);
        }
        match self.kind {
            DistKind::Gaussian { d: 1 } => Ok(libm::erfc(r / SQRT_2)),
            DistKind::Laplace { d: 1 } => Ok((-SQRT_2 * r).exp()),
            DistKind::Uniform => Ok((1.0 - r).max(0.0)),
            DistKind::UniformConv { m } => {
                let s = (f64::from(m) - r) / 2.0;
                Ok(2.0 * crate::special::irwin_hall_cdf(m, s))
            }
            _ => Err(Error::Unsupported("tail probability of multivariate base".into())),
        }
    }

    /// Draw one point into `out`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.kind {
            DistKind::Gaussian { .. } => {
                for x in out.iter_mut() {
                    *x = StandardNormal.sample(rng);
                }
            }
            DistKind::Laplace { .. } => {
                for x in out.iter_mut() {
                    let e: f64 = Exp1.sample(rng);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *x = sign * e / SQRT_2;
                }
            }
            DistKind::Uniform => out[0] = rng.random_range(-1.0..1.0),
            DistKind::UniformConv { m } => {
                out[0] = (0..m).map(|_| rng.random_range(-1.0..1.0)).sum();
            }
        }
    }

    /// `n` i.i.d. draws; deterministic given the RNG state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Samples {
        let d = self.dim();
        let mut data = vec![0.0; n * d];
        for row in data.chunks_exact_mut(d) {
            self.draw_into(rng, row);
        }
        Samples::new(d, data).expect("rows of length d")
    }
}

/// JSON form: `{"kind": "gaussian", "d": 2}` / `{"kind": "uniform_conv", "m": 3}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

impl TryFrom<DistSpec> for BaseDistribution {
    type Error = Error;

    fn try_from(spec: DistSpec) -> Result<Self> {
        let d = spec.d.unwrap_or(1);
        let kind = match spec.kind.as_str() {
            "gaussian" => DistKind::Gaussian { d },
            "laplace" => DistKind::Laplace { d },
            "uniform" | "uniform_conv" if d != 1 => {
                return Err(Error::Unsupported(format!("{} with d = {d}", spec.kind)));
            }
            "uniform" => DistKind::Uniform,
            "uniform_conv" => DistKind::UniformConv {
                m: spec
                    .m
                    .ok_or_else(|| Error::arg("uniform_conv requires \"m\""))?,
            },
            other => return Err(Error::arg(format!("unknown distribution kind {other:?}"))),
        };
        BaseDistribution::new(kind)
    }
}

impl From<BaseDistribution> for DistSpec {
    fn from(dist: BaseDistribution) -> Self {
        let kind = dist.kind.name().to_string();
        match dist.kind {
            DistKind::Gaussian { d } | DistKind::Laplace { d } => DistSpec {
                kind,
                d: Some(d),
                m: None,
            },
            DistKind::Uniform => DistSpec {
                kind,
                d: Some(1),
                m: None,
            },
            DistKind::UniformConv { m } => DistSpec {
                kind,
                d: Some(1),
                m: Some(m),
            },
        }
    }
}

impl std::fmt::Display for BaseDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            DistKind::Gaussian { d } | DistKind::Laplace { d } => {
                write!(f, "{}(d={d})", self.kind.name())
            }
            DistKind::Uniform => write!(f, "uniform"),
            DistKind::UniformConv { m } => write!(f, "uniform_conv(m={m})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_relative_eq;

    fn all_kinds() -> Vec<BaseDistribution> {
        vec![
            BaseDistribution::gaussian(1),
            BaseDistribution::gaussian(2),
            BaseDistribution::laplace(1),
            BaseDistribution::laplace(3),
            BaseDistribution::uniform(),
            BaseDistribution::uniform_conv(2).unwrap(),
            BaseDistribution::uniform_conv(4).unwrap(),
        ]
    }

    #[test]
    fn cf_spot_values() {
        let g = BaseDistribution::gaussian(1);
        assert_eq!(g.cf(&[0.0]).unwrap(), Complex64::new(1.0, 0.0));
        assert_relative_eq!(
            g.cf(&[0.25]).unwrap().re,
            (-2.0 * PI * PI * 0.0625f64).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(g.cf(&[0.25]).unwrap().re, 0.291_21, epsilon = 1e-5);

        let u = BaseDistribution::uniform();
        assert_eq!(u.cf(&[0.5]).unwrap().re, 0.0);
        assert_eq!(u.cf(&[0.0]).unwrap().re, 1.0);

        let l = BaseDistribution::laplace(1);
        let w = 1.0 / (PI * SQRT_2);
        assert_relative_eq!(l.cf(&[w]).unwrap().re, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn cf_rejects_dimension_mismatch() {
        let g = BaseDistribution::gaussian(2);
        assert!(matches!(
            g.cf(&[0.1]),
            Err(Error::Dimension { expected: 2, got: 1 })
        ));
        assert!(BaseDistribution::uniform().cf(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn preset_m1_values() {
        assert_relative_eq!(
            preset_constants(DistKind::Gaussian { d: 1 }).deriv_l1_m1,
            0.797_88,
            epsilon = 1e-5
        );
        assert_eq!(preset_constants(DistKind::Laplace { d: 2 }).deriv_l1_m1, SQRT_2);
        assert_eq!(preset_constants(DistKind::Uniform).deriv_l1_m1, 1.0);
        for m in 1..=6 {
            let c = preset_constants(DistKind::UniformConv { m });
            assert!(c.deriv_l1_m1 <= 1.0 + 1e-15 && c.deriv_l1_m1 > 0.0);
        }
        for dist in all_kinds() {
            let c = dist.constants();
            assert!(c.lipschitz_l > 0.0 && c.deriv_l1_m1 > 0.0 && c.tail_sigma > 0.0);
        }
    }

    #[test]
    fn lipschitz_constants_bound_finite_differences() {
        let h = 1e-6;
        for dist in all_kinds().into_iter().filter(|d| d.dim() == 1) {
            let l = dist.constants().lipschitz_l;
            let mut w = 0.0;
            while w < 4.0 {
                let slope = (dist.cf_real(&[w + h]) - dist.cf_real(&[w])).abs() / h;
                assert!(slope <= l * (1.0 + 1e-6), "{dist} at {w}: {slope} > {l}");
                w += 0.001;
            }
        }
    }

    #[test]
    fn m1_matches_numerical_derivative_norm() {
        // ||p'||_1 by finite differences on a fine grid
        for dist in [
            BaseDistribution::gaussian(1),
            BaseDistribution::laplace(1),
            BaseDistribution::uniform_conv(2).unwrap(),
            BaseDistribution::uniform_conv(3).unwrap(),
        ] {
            let s = dist.effective_support();
            let n = 400_000;
            let h = 2.0 * s / n as f64;
            let tv: f64 = (0..n)
                .map(|i| {
                    let x = -s + i as f64 * h;
                    (dist.density(x + h).unwrap() - dist.density(x).unwrap()).abs()
                })
                .sum();
            assert_relative_eq!(tv, dist.constants().deriv_l1_m1, max_relative = 1e-4);
        }
    }

    #[test]
    fn density_values() {
        let u = BaseDistribution::uniform();
        assert_eq!(u.density(0.0).unwrap(), 0.5);
        assert_eq!(u.density(1.5).unwrap(), 0.0);
        let t = BaseDistribution::uniform_conv(2).unwrap();
        assert_relative_eq!(t.density(0.0).unwrap(), 0.5, max_relative = 1e-15);
        assert!(BaseDistribution::gaussian(2).density(0.0).is_err());
    }

    #[test]
    fn uniform_conv_density_matches_numerical_self_convolution() {
        let box_pdf = |x: f64| if x.abs() <= 1.0 { 0.5 } else { 0.0 };
        let n = 200_000;
        let h = 2.0 / n as f64;
        for x in [0.0, 0.3, -1.2, 1.9] {
            // midpoint rule for (box * box)(x)
            let conv: f64 = (0..n)
                .map(|i| {
                    let t = -1.0 + (i as f64 + 0.5) * h;
                    0.5 * box_pdf(x - t) * h
                })
                .sum();
            let exact = BaseDistribution::uniform_conv(2).unwrap().density(x).unwrap();
            assert!((conv - exact).abs() < 1e-5, "x={x}: {conv} vs {exact}");
        }
    }

    #[test]
    fn density_integrates_to_one() {
        for dist in all_kinds().into_iter().filter(|d| d.dim() == 1) {
            let s = dist.effective_support();
            let n = 200_000;
            let h = 2.0 * s / n as f64;
            let total: f64 = (0..n)
                .map(|i| dist.density(-s + (i as f64 + 0.5) * h).unwrap() * h)
                .sum();
            assert!((total - 1.0).abs() < 1e-6, "{dist}: {total}");
        }
    }

    #[test]
    fn density_cf_duality() {
        for dist in all_kinds().into_iter().filter(|d| d.dim() == 1) {
            let mut kinks = dist.density_kinks();
            let s = dist.effective_support();
            kinks.push(-s);
            kinks.push(s);
            kinks.sort_by(f64::total_cmp);
            kinks.dedup();
            for k in 0..10 {
                let w = 0.13 * k as f64;
                let mut re = 0.0;
                for pair in kinks.windows(2) {
                    re += crate::quadrature::gauss_legendre(
                        |x| dist.density(x).unwrap() * (2.0 * PI * w * x).cos(),
                        pair[0],
                        pair[1],
                        400,
                    );
                }
                assert!(
                    (re - dist.cf_real(&[w])).abs() < 1e-6,
                    "{dist} at {w}: {re} vs {}",
                    dist.cf_real(&[w])
                );
            }
        }
    }

    #[test]
    fn tail_probability_respects_markov_constant() {
        for dist in all_kinds().into_iter().filter(|d| d.dim() == 1) {
            for r in [0.5, 1.0, 2.0, 5.0, 10.0] {
                let p = dist.tail_probability(r).unwrap();
                assert!(p <= dist.constants().tail_sigma / r + 1e-15, "{dist} r={r}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = BaseDistribution::gaussian(2);
        let a = g.sample(&mut seeded(11), 50);
        let b = g.sample(&mut seeded(11), 50);
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_sample_mean_in_clt_band() {
        let n = 100_000;
        let s = BaseDistribution::uniform().sample(&mut seeded(3), n);
        let mean = s.as_flat().iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 4.0 * (1.0 / 3f64.sqrt()) / (n as f64).sqrt());
    }

    #[test]
    fn gaussian_sample_variance() {
        let n = 100_000;
        let s = BaseDistribution::gaussian(2).sample(&mut seeded(5), n);
        for j in 0..2 {
            let col = s.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((0.97..=1.03).contains(&var), "coordinate {j}: {var}");
        }
    }

    #[test]
    fn laplace_sample_has_unit_variance() {
        let n = 200_000;
        let s = BaseDistribution::laplace(1).sample(&mut seeded(9), n);
        let var = s.as_flat().iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.03, "{var}");
    }

    #[test]
    fn json_round_trip_and_validation() {
        let dist: BaseDistribution =
            serde_json::from_str(r#"{"kind": "uniform_conv", "m": 3}"#).unwrap();
        assert_eq!(dist.kind(), DistKind::UniformConv { m: 3 });
        let text = serde_json::to_string(&dist).unwrap();
        let back: BaseDistribution = serde_json::from_str(&text).unwrap();
        assert_eq!(dist, back);
        let g: BaseDistribution = serde_json::from_str(r#"{"kind": "gaussian", "d": 3}"#).unwrap();
        assert_eq!(g.dim(), 3);
        assert!(serde_json::from_str::<BaseDistribution>(r#"{"kind": "uniform", "d": 2}"#).is_err());
        assert!(serde_json::from_str::<BaseDistribution>(r#"{"kind": "cauchy"}"#).is_err());
    }
}
