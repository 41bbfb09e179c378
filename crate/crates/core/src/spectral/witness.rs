use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::contamination::dot;
use crate::distributions::{BaseDistribution, DistKind};
use crate::error::{Error, Result};
use crate::special::sin_pi;
use crate::spectral::cover::Cover;

/// Relative slack applied to the sine threshold so that an exact analytic
/// candidate is not rejected by a last-bit rounding of `sin(asin(A))`.
const SIN_SLACK: f64 = 1e-12;

/// `sqrt(d) M1 / (2 pi delta)`: no frequency with `|phi_D| >= delta` lies
/// farther out than this.
pub fn witness_norm_bound(m1: f64, delta: f64, d: usize) -> f64 {
    (d as f64).sqrt() * m1 / (2.0 * PI * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    Trivial,
    Analytic,
    IntervalScan,
    GridScan,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub omega: Option<Vec<f64>>,
    /// `|sin(pi v.omega)|`.
    pub sin_value: f64,
    /// `|phi_D(omega)|`.
    pub cf_magnitude: f64,
    pub source: WitnessSource,
    /// `sqrt(d) M1 / (2 pi delta)` plus the grid resolution when the witness
    /// came from a grid.
    pub norm_limit: f64,
}

impl WitnessResult {
    pub fn norm(&self) -> Option<f64> {
        self.omega
            .as_ref()
            .map(|w| w.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    pub fn within_norm_limit(&self) -> bool {
        self.norm().is_none_or(|n| n <= self.norm_limit * (1.0 + 1e-12))
    }
}

/// Both witness conditions at `omega`.
pub fn is_witness(dist: &BaseDistribution, v: &[f64], omega: &[f64], a: f64, delta: f64) -> bool {
    sin_pi(dot(v, omega)).abs() >= a * (1.0 - SIN_SLACK) && dist.cf_real(omega).abs() >= delta
}

fn result(
    dist: &BaseDistribution,
    v: &[f64],
    omega: Option<Vec<f64>>,
    source: WitnessSource,
    norm_limit: f64,
) -> WitnessResult {
    match omega {
        Some(w) => WitnessResult {
            sin_value: sin_pi(dot(v, &w)).abs(),
            cf_magnitude: dist.cf_real(&w).abs(),
            omega: Some(w),
            source,
            norm_limit,
        },
        None => WitnessResult {
            omega: None,
            sin_value: 0.0,
            cf_magnitude: 0.0,
            source: WitnessSource::NotFound,
            norm_limit,
        },
    }
}

/// Searches for `omega` with `|sin(pi v.omega)| >= a` and `|phi_D(omega)| >= delta`.
///
/// Gaussian and Laplace bases try `omega = (asin(a)/pi) v/|v|^2` first. The
/// uniform kinds scan the intervals where the sine condition holds along the
/// direction of `v`. If neither succeeds and a grid is supplied, the grid is
/// scanned for the qualifying point of largest `|phi_D|`.
pub fn find_witness(
    dist: &BaseDistribution,
    v: &[f64],
    a: f64,
    delta: f64,
    grid: Option<&Cover>,
) -> Result<WitnessResult> {
    let d = dist.dim();
    if v.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: v.len(),
        });
    }
    let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
    if vnorm_sq == 0.0 || !vnorm_sq.is_finite() {
        return Err(Error::arg("witness search needs a nonzero finite v"));
    }
    if !(delta > 0.0) || !(a <= 1.0) {
        return Err(Error::arg(format!("need delta > 0 and A <= 1, got A={a}, delta={delta}")));
    }
    let bound = witness_norm_bound(dist.constants().deriv_l1_m1, delta, d);
    if a <= 0.0 {
        // omega = 0 has |sin| = 0 >= A and phi_D(0) = 1
        if delta <= 1.0 {
            return Ok(result(dist, v, Some(vec![0.0; d]), WitnessSource::Trivial, bound));
        }
        return Ok(result(dist, v, None, WitnessSource::NotFound, bound));
    }

    let candidate = match dist.kind() {
        DistKind::Gaussian { .. } | DistKind::Laplace { .. } => {
            let s = a.asin() / PI / vnorm_sq;
            Some((v.iter().map(|x| s * x).collect::<Vec<_>>(), WitnessSource::Analytic))
        }
        DistKind::Uniform | DistKind::UniformConv { .. } => {
            interval_scan(dist, v[0], a, bound).map(|w| (vec![w], WitnessSource::IntervalScan))
        }
    };
    if let Some((omega, source)) = candidate {
        if is_witness(dist, v, &omega, a, delta) {
            return Ok(result(dist, v, Some(omega), source, bound));
        }
    }
    if let Some(grid) = grid {
        if let Some(omega) = scan_grid_witness(dist, v, a, delta, grid) {
            return Ok(result(dist, v, Some(omega), WitnessSource::GridScan, bound + grid.eta()));
        }
    }
    Ok(result(dist, v, None, WitnessSource::NotFound, bound))
}

/// Among the intervals `{t : |sin(pi v t)| >= a}` with `|t| <= limit`, the
/// point of largest `|phi_D(t)|`, signed like `v`.
fn interval_scan(dist: &BaseDistribution, v: f64, a: f64, limit: f64) -> Option<f64> {
    const POINTS: usize = 512;
    let m1 = dist.constants().deriv_l1_m1;
    let s = a.asin() / PI;
    let av = v.abs();
    let mut best: Option<(f64, f64)> = None;
    let mut k = 0.0;
    loop {
        let lo = (k + s) / av;
        let hi = (k + 1.0 - s) / av;
        if lo > limit || hi < lo {
            break;
        }
        // |phi_D(t)| <= M1 / (2 pi t) bounds everything further out
        if best.is_some_and(|(bm, _)| m1 / (2.0 * PI * lo) < bm) {
            break;
        }
        let hi = hi.min(limit);
        for i in 0..=POINTS {
            let t = lo + (hi - lo) * i as f64 / POINTS as f64;
            let m = dist.cf_real(&[t]).abs();
            if best.is_none_or(|(bm, _)| m > bm) {
                best = Some((m, t));
            }
        }
        k += 1.0;
    }
    best.map(|(_, t)| t.copysign(v))
}

/// The qualifying grid point with the largest `|phi_D|`; ties go to the
/// earlier point in lexicographic order.
pub fn scan_grid_witness(
    dist: &BaseDistribution,
    v: &[f64],
    a: f64,
    delta: f64,
    grid: &Cover,
) -> Option<Vec<f64>> {
    let mut best: Option<(f64, usize)> = None;
    for (i, w) in grid.points().enumerate() {
        if is_witness(dist, v, w, a, delta) {
            let m = dist.cf_real(w).abs();
            if best.is_none_or(|(bm, _)| m > bm) {
                best = Some((m, i));
            }
        }
    }
    best.map(|(_, i)| grid.point(i).to_vec())
}
