//! Witness thresholds `(A, delta)` per base distribution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distributions::{BaseDistribution, DistKind};
use crate::error::{Error, Result};
use crate::spectral::witness::find_witness;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperPreset {
    pub a: f64,
    pub delta: f64,
}

/// Thresholds such that every `v` with `|v| >= epsilon` has a witness.
///
/// Gaussian and Laplace take `A = 4 alpha` and `delta` equal to the smallest
/// CF magnitude on the sphere of radius `asin(A) / (pi epsilon)`; this needs
/// `alpha <= 1/4`. The uniform base uses `A = 1/sqrt 2`, `delta = eps/(3 pi)`.
/// For the convolved uniforms `delta` is found numerically.
pub fn upper_preset(dist: &BaseDistribution, epsilon: f64, alpha: f64) -> Result<UpperPreset> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::arg(format!(
            "presets need epsilon in (0,1) and alpha in (0,1/2), got {epsilon}, {alpha}"
        )));
    }
    match dist.kind() {
        DistKind::Gaussian { .. } | DistKind::Laplace { .. } => {
            let a = 4.0 * alpha;
            if a > 1.0 {
                return Err(Error::Infeasible(format!(
                    "A = 4 alpha = {a} exceeds 1; supply A and delta explicitly"
                )));
            }
            let t = a.asin() / (PI * epsilon);
            // shaved by a few ulps so the analytic witness at |v| = epsilon
            // passes the comparison after rounding
            Ok(UpperPreset {
                a,
                delta: radial_min_cf(dist, t) * (1.0 - 1e-12),
            })
        }
        DistKind::Uniform => Ok(UpperPreset {
            a: std::f64::consts::FRAC_1_SQRT_2,
            delta: epsilon / (3.0 * PI),
        }),
        DistKind::UniformConv { .. } => {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            Ok(UpperPreset {
                a,
                delta: 0.99 * scanned_witness_floor(dist, epsilon, a)?,
            })
        }
    }
}

/// `min_{|omega| = t} |phi_D(omega)|`.
pub fn radial_min_cf(dist: &BaseDistribution, t: f64) -> f64 {
    match dist.kind() {
        DistKind::Gaussian { .. } => (-2.0 * PI * PI * t * t).exp(),
        // the product is smallest along the diagonal
        DistKind::Laplace { d } => {
            let df = d as f64;
            (1.0 + 2.0 * PI * PI * t * t / df).powf(-df)
        }
        _ => dist.cf_real(&[t]).abs(),
    }
}

/// Smallest best-witness magnitude over a geometric grid of `v` in
/// `[epsilon, 8]`. For `v > 8` the first sine interval sits inside
/// `[0, 3/32]`, where the CF is larger.
fn scanned_witness_floor(dist: &BaseDistribution, epsilon: f64, a: f64) -> Result<f64> {
    const POINTS: usize = 400;
    let hi: f64 = 8.0;
    let mut floor = dist.cf_real(&[1.0 / (4.0 * hi)]).abs();
    for i in 0..=POINTS {
        let v = epsilon * (hi / epsilon).powf(i as f64 / POINTS as f64);
        let w = find_witness(dist, &[v], a, 1e-12, None)?;
        floor = floor.min(w.cf_magnitude);
    }
    Ok(floor)
}
