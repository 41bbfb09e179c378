//! The spectral hardness quantities: the witness magnitude `delta(eps, alpha, D)`,
//! the band-restricted L2 mass of `phi_D`, and the L2-from-Linfty check.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::distributions::{BaseDistribution, DistKind};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::special::irwin_hall_pdf;

/// Scan resolution for [`delta_quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaScan {
    /// Sample points per feasible interval (endpoints included).
    pub points_per_interval: usize,
    /// Upper limit on `|omega|`.
    pub omega_max: f64,
    /// Directions in the net for `d >= 2` (used for both `v` and `omega`).
    pub directions: usize,
}

impl Default for DeltaScan {
    fn default() -> Self {
        Self {
            points_per_interval: 257,
            omega_max: 1e4,
            directions: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub value: f64,
    /// Achieving pair: the worst `v` on the `eps`-shell and its best `omega`.
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    /// No feasible frequency was found.
    pub empty: bool,
    /// True in one dimension, where only the grid resolution limits accuracy.
    pub exact_1d: bool,
}

/// `sup |f(t)|` over `t >= 0` with `dist(s t, Z) >= alpha`, scanning each
/// feasible interval and refining the best sample by golden-section search.
/// Intervals are skipped once `decay(t)` (an upper bound on `f` beyond `t`)
/// falls below the current best.
fn sup_on_feasible(
    f: &dyn Fn(f64) -> f64,
    decay: &dyn Fn(f64) -> f64,
    s: f64,
    alpha: f64,
    t_max: f64,
    points: usize,
) -> Option<(f64, f64)> {
    if alpha > 0.5 {
        return None;
    }
    let alpha = alpha.max(0.0);
    let points = points.max(2);
    let mut best: Option<(f64, f64)> = None;
    let mut k = 0.0f64;
    loop {
        let lo = (k + alpha) / s;
        let hi = ((k + 1.0 - alpha) / s).min(t_max);
        if lo > t_max {
            break;
        }
        if let Some((bv, _)) = best {
            if decay(lo) < bv {
                break;
            }
        }
        if hi <= lo {
            let v = f(lo);
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, lo));
            }
        } else {
            let h = (hi - lo) / (points - 1) as f64;
            let mut local: Option<(f64, usize)> = None;
            for i in 0..points {
                let t = if i + 1 == points { hi } else { lo + h * i as f64 };
                let v = f(t);
                if local.is_none_or(|(lv, _)| v > lv) {
                    local = Some((v, i));
                }
            }
            let (mut lv, li) = local.expect("at least two points");
            let mut lt = if li + 1 == points { hi } else { lo + h * li as f64 };
            // refine inside the neighbouring cells
            let (mut a, mut b) = ((lt - h).max(lo), (lt + h).min(hi));
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..60 {
                if b - a <= 1e-14 * b.abs().max(1.0) {
                    break;
                }
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if f(c) >= f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let mid = 0.5 * (a + b);
            let mv = f(mid);
            if mv > lv {
                lv = mv;
                lt = mid;
            }
            if best.is_none_or(|(bv, _)| lv > bv) {
                best = Some((lv, lt));
            }
        }
        k += 1.0;
    }
    best
}

fn direction_net(d: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    match d {
        2 => Ok((0..n)
            .map(|j| {
                let th = PI * j as f64 / n as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()),
        3 => {
            // Fibonacci points on the upper hemisphere
            let golden = PI * (3.0 - 5f64.sqrt());
            Ok((0..n)
                .map(|j| {
                    let z = 1.0 - (j as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * j as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::Unsupported(format!(
            "directional delta scan for d = {d}"
        ))),
    }
}

/// Numerical value of `inf_{|v| = eps} sup {|phi_D(omega)| : dist(v.omega, Z) >= alpha}`.
///
/// Exact up to scan resolution in one dimension. For `d = 2, 3` both `v` and
/// the direction of `omega` range over a finite direction net and only the
/// shell `|v| = eps` is examined.
pub fn delta_quantity(
    dist: &BaseDistribution,
    epsilon: f64,
    alpha: f64,
    scan: &DeltaScan,
) -> Result<DeltaResult> {
    if !(epsilon > 0.0) || !alpha.is_finite() {
        return Err(Error::arg("delta quantity needs epsilon > 0 and finite alpha"));
    }
    let d = dist.dim();
    let m1 = dist.constants().deriv_l1_m1;
    let decay = move |t: f64| (d as f64).sqrt() * m1 / (2.0 * PI * t);
    if d == 1 {
        let f = |t: f64| dist.cf_real(&[t]).abs();
        let found = sup_on_feasible(&f, &decay, epsilon, alpha, scan.omega_max, scan.points_per_interval);
        return Ok(match found {
            Some((value, t)) => DeltaResult {
                value,
                v: vec![epsilon],
                omega: vec![t],
                empty: false,
                exact_1d: true,
            },
            None => DeltaResult {
                value: 0.0,
                v: vec![epsilon],
                omega: vec![0.0],
                empty: true,
                exact_1d: true,
            },
        });
    }
    let net = direction_net(d, scan.directions.max(1))?;
    let mut worst: Option<DeltaResult> = None;
    for u in &net {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for w in &net {
            let c: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum::<f64>().abs();
            if c < 1e-9 {
                continue;
            }
            let f = |t: f64| {
                let omega: Vec<f64> = w.iter().map(|x| x * t).collect();
                dist.cf_real(&omega).abs()
            };
            if let Some((val, t)) =
                sup_on_feasible(&f, &decay, epsilon * c, alpha, scan.omega_max, scan.points_per_interval)
            {
                if best.as_ref().is_none_or(|(bv, _)| val > *bv) {
                    best = Some((val, w.iter().map(|x| x * t).collect()));
                }
            }
        }
        let v: Vec<f64> = u.iter().map(|x| x * epsilon).collect();
        let candidate = match best {
            Some((value, omega)) => DeltaResult {
                value,
                v,
                omega,
                empty: false,
                exact_1d: false,
            },
            None => DeltaResult {
                value: 0.0,
                v,
                omega: vec![0.0; d],
                empty: true,
                exact_1d: false,
            },
        };
        if worst.as_ref().is_none_or(|wr| candidate.value < wr.value) {
            worst = Some(candidate);
        }
    }
    Ok(worst.expect("nonempty direction net"))
}

/// `||phi_D||_{L2}` over the whole line (one-dimensional bases).
pub fn cf_l2_norm(dist: &BaseDistribution) -> Result<f64> {
    let sq = match dist.kind() {
        DistKind::Gaussian { d: 1 } => 1.0 / (2.0 * PI.sqrt()),
        DistKind::Laplace { d: 1 } => 1.0 / (2.0 * SQRT_2),
        DistKind::Uniform => 0.5,
        // Plancherel: the integral of p^2, a piecewise polynomial of degree
        // 2m - 2 on unit-width pieces of the Irwin–Hall variable
        DistKind::UniformConv { m } => {
            let rule = GaussLegendre::new(m as usize + 1);
            (0..m)
                .map(|j| {
                    let p = |s: f64| irwin_hall_pdf(m, s);
                    rule.integrate(|s| p(s) * p(s), f64::from(j), f64::from(j + 1))
                })
                .sum::<f64>()
                / 2.0
        }
        _ => return Err(Error::Unsupported("L2 norm of a multivariate CF".into())),
    };
    Ok(sq.sqrt())
}

/// Upper bound on `int_{|omega| > big} |phi_D|^2`, both sides.
fn l2_tail_bound(dist: &BaseDistribution, big: f64) -> f64 {
    match dist.kind() {
        DistKind::Gaussian { .. } => 2.0 * (1.0 / (2.0 * PI)) * (PI.sqrt() / 2.0) * libm::erfc(2.0 * PI * big),
        // (1 + 2 pi^2 w^2)^-2 <= (2 pi^2 w^2)^-2
        DistKind::Laplace { .. } => 2.0 / (12.0 * PI.powi(4) * big.powi(3)),
        DistKind::Uniform => uniform_conv_tail(1, big),
        DistKind::UniformConv { m } => uniform_conv_tail(m, big),
    }
}

// |sinc(2w)|^(2m) <= (2 pi w)^(-2m)
fn uniform_conv_tail(m: u32, big: f64) -> f64 {
    let m = f64::from(m);
    2.0 * (2.0 * PI).powf(-2.0 * m) / ((2.0 * m - 1.0) * big.powf(2.0 * m - 1.0))
}

/// Frequency cutoff after which the analytic tail is negligible.
fn default_omega_max(dist: &BaseDistribution) -> f64 {
    match dist.kind() {
        DistKind::Gaussian { .. } => 4.0,
        DistKind::Laplace { .. } => 2000.0,
        DistKind::Uniform | DistKind::UniformConv { .. } => {
            let m = match dist.kind() {
                DistKind::UniformConv { m } => m,
                _ => 1,
            };
            let mut big = 4.0;
            while uniform_conv_tail(m, big) > 1e-9 && big < 5e4 {
                big *= 1.25;
            }
            big
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandL2Options {
    /// Quadrature cutoff; beyond it an analytic bound is added. `None`
    /// picks a per-kind default.
    pub omega_max: Option<f64>,
    /// Largest Gauss–Legendre panel width.
    pub quad_step: f64,
}

impl Default for BandL2Options {
    fn default() -> Self {
        Self {
            omega_max: None,
            quad_step: 0.05,
        }
    }
}

const PANEL_ORDER: usize = 8;

/// `|| phi_D 1{dist(eps omega, Z) > halfwidth} ||_{L2}`: quadrature over the
/// gap intervals inside `[-omega_max, omega_max]` plus an analytic bound on
/// the rest, so the result is an upper bound up to quadrature error.
pub fn band_l2_mass(
    dist: &BaseDistribution,
    epsilon: f64,
    halfwidth: f64,
    opts: &BandL2Options,
) -> Result<f64> {
    if dist.dim() != 1 {
        return Err(Error::Unsupported("band L2 mass of a multivariate base".into()));
    }
    if !(epsilon > 0.0) || !(halfwidth >= 0.0) {
        return Err(Error::arg("band L2 mass needs epsilon > 0 and halfwidth >= 0"));
    }
    if halfwidth >= 0.5 {
        return Ok(0.0);
    }
    let gap = (1.0 - 2.0 * halfwidth) / epsilon;
    if !(opts.quad_step > 0.0) || opts.quad_step > gap {
        return Err(Error::arg(format!(
            "quad_step {} exceeds the gap width {gap}; gaps would be skipped",
            opts.quad_step
        )));
    }
    let big = opts.omega_max.unwrap_or_else(|| default_omega_max(dist));
    let rule = GaussLegendre::new(PANEL_ORDER);
    let sq = |w: f64| {
        let p = dist.cf_real(&[w]);
        p * p
    };
    let mut total = 0.0;
    let mut k = 0.0f64;
    loop {
        let lo = (k + halfwidth) / epsilon;
        if lo >= big {
            break;
        }
        let hi = ((k + 1.0 - halfwidth) / epsilon).min(big);
        let panels = ((hi - lo) / opts.quad_step).ceil().max(1.0) as usize;
        total += rule.integrate_composite(sq, lo, hi, panels);
        k += 1.0;
    }
    Ok((2.0 * total + l2_tail_bound(dist, big)).sqrt())
}

/// Frequency sets for [`l2_linfty_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum FrequencySet {
    Empty,
    /// `[-omega_max, omega_max]`.
    Truncated { omega_max: f64 },
    /// `{omega : dist(eps omega, Z) > halfwidth}`.
    BandGaps { epsilon: f64, halfwidth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2LinftyCheck {
    pub l2: f64,
    pub linfty: f64,
    /// `l2 / sqrt(linfty M1)`.
    pub ratio: f64,
    pub constant: f64,
    pub ratio_ok: bool,
}

/// Constant in `||phi 1_S||_2 <= K sqrt(||phi 1_S||_inf M1)`. The decay
/// `|phi| <= M1 / (2 pi |omega|)` gives `K = sqrt(2/pi)`; 4 leaves ample room.
pub const L2_LINFTY_CONSTANT: f64 = 4.0;

pub fn l2_linfty_check(dist: &BaseDistribution, set: FrequencySet) -> Result<L2LinftyCheck> {
    if dist.dim() != 1 {
        return Err(Error::Unsupported("L2/Linfty check of a multivariate base".into()));
    }
    let m1 = dist.constants().deriv_l1_m1;
    let (l2, linfty) = match set {
        FrequencySet::Empty => (0.0, 0.0),
        FrequencySet::Truncated { omega_max } => {
            let rule = GaussLegendre::new(PANEL_ORDER);
            let panels = (omega_max / 0.01).ceil().max(1.0) as usize;
            let half = rule.integrate_composite(
                |w| dist.cf_real(&[w]).powi(2),
                0.0,
                omega_max,
                panels,
            );
            ((2.0 * half).sqrt(), 1.0)
        }
        FrequencySet::BandGaps { epsilon, halfwidth } => {
            let gap = (1.0 - 2.0 * halfwidth) / epsilon;
            let opts = BandL2Options {
                quad_step: BandL2Options::default().quad_step.min(gap / 2.0),
                ..Default::default()
            };
            let l2 = band_l2_mass(dist, epsilon, halfwidth, &opts)?;
            let sup = delta_quantity(dist, epsilon, halfwidth, &DeltaScan::default())?;
            (l2, sup.value)
        }
    };
    let ratio = if l2 == 0.0 { 0.0 } else { l2 / (linfty * m1).sqrt() };
    Ok(L2LinftyCheck {
        l2,
        linfty,
        ratio,
        constant: L2_LINFTY_CONSTANT,
        ratio_ok: ratio <= L2_LINFTY_CONSTANT,
    })
}
