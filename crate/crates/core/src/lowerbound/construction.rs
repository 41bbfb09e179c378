//! The atomic measure `g`, its Jordan split into adversaries and the
//! resulting hard-instance pair.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::measure::SignedAtomicMeasure;
use crate::special::sin_pi;

use super::window::{window_hat, window_time};

/// Largest truncation index accepted before a resource error.
pub const MAX_TRUNCATION: u64 = 10_000_000;

/// Default relative tolerance of the truncation tail against `||g||_1`.
pub const DEFAULT_TAIL_REL_TOL: f64 = 1e-6;

const BISECTION_STEPS: usize = 48;

/// Certified bound on the L1 mass of the atoms dropped by truncating at
/// `K = r / eps` (both sides).
pub fn g_tail_bound(epsilon: f64, alpha: f64, w: f64, r: f64) -> f64 {
    let pre = (1.0 - alpha) * epsilon / alpha;
    pre * 72.0 / (PI.powi(3) * w * w * r.powi(3)) * (1.0 + 3.0 / (4.0 * PI * w * r))
}

fn check_params(epsilon: f64, alpha: f64, w: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::arg(format!("window half-width must be positive, got {w}")));
    }
    Ok(())
}

fn min_truncation(epsilon: f64, w: f64) -> u64 {
    (2.0 / (w * epsilon)).ceil().max(1.0) as u64
}

/// Atoms at `(k + 1/2) eps` for `k` in `[-K-1, K]` with weight
/// `(1 - alpha)(eps / alpha)(b_w(k eps) - b_w((k+1) eps))`.
pub fn build_g(epsilon: f64, alpha: f64, w: f64, k: u64) -> Result<SignedAtomicMeasure> {
    check_params(epsilon, alpha, w)?;
    let required = min_truncation(epsilon, w);
    if k < required {
        return Err(Error::Resource {
            what: "truncation index K for the window tail".into(),
            required,
            cap: k,
        });
    }
    if k > MAX_TRUNCATION {
        return Err(Error::Resource {
            what: "truncation index K".into(),
            required: k,
            cap: MAX_TRUNCATION,
        });
    }
    let pre = (1.0 - alpha) * epsilon / alpha;
    let ki = k as i64;
    // b at k eps for k in [-K-1, K+1]; evenness makes the two halves exact
    // mirrors, so the weights are exactly antisymmetric
    let b: Vec<f64> = (0..=ki + 1).map(|j| window_time(w, j as f64 * epsilon)).collect();
    let b_at = |j: i64| b[j.unsigned_abs() as usize];
    let atoms = (-ki - 1..=ki).map(|j| {
        let loc = (j as f64 + 0.5) * epsilon;
        (loc, pre * (b_at(j) - b_at(j + 1)))
    });
    let mut g = SignedAtomicMeasure::from_atoms(atoms)?;
    g.truncation_k = k;
    g.tail_bound = g_tail_bound(epsilon, alpha, w, k as f64 * epsilon);
    Ok(g)
}

/// Smallest `K >= 2/(w eps)` whose tail bound is at most
/// `rel_tol * ||g_K||_1`.
pub fn default_truncation(epsilon: f64, alpha: f64, w: f64, rel_tol: f64) -> Result<u64> {
    check_params(epsilon, alpha, w)?;
    if !(rel_tol > 0.0) {
        return Err(Error::arg("tail tolerance must be positive"));
    }
    let floor = min_truncation(epsilon, w);
    let mut k = floor;
    // ||g_K||_1 grows with K, so each pass only raises the target
    for _ in 0..8 {
        let l1 = build_g(epsilon, alpha, w, k)?.l1_norm();
        let target = rel_tol * l1;
        let tail = |k: u64| g_tail_bound(epsilon, alpha, w, k as f64 * epsilon);
        if tail(k) <= target {
            return Ok(k);
        }
        let mut hi = k.max(1);
        while tail(hi) > target {
            hi = hi.saturating_mul(2);
            if hi > MAX_TRUNCATION {
                return Err(Error::Resource {
                    what: "truncation index K for the window tail".into(),
                    required: hi,
                    cap: MAX_TRUNCATION,
                });
            }
        }
        let mut lo = k;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if tail(mid) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        k = hi.max(floor);
    }
    Ok(k)
}

/// Periodized window `sum_j b_hat_w(omega - j/eps)`, images `|j - round(eps omega)| <= 3`.
pub fn rho_hat(epsilon: f64, w: f64, omega: f64) -> f64 {
    let k0 = (epsilon * omega).round();
    (-3..=3)
        .map(|j| window_hat(w, omega - (k0 + f64::from(j)) / epsilon))
        .sum()
}

/// Exact finite exponential sum of a measure.
pub fn atomic_cf(measure: &SignedAtomicMeasure, omega: f64) -> Complex64 {
    measure.cf(omega)
}

/// Splits `g` (zero total mass, `||g||_1 <= 2`) into probability measures
/// with `Q0 - Q1 = -g`.
pub fn jordan_split(g: &SignedAtomicMeasure) -> Result<(SignedAtomicMeasure, SignedAtomicMeasure)> {
    let pos = g.positive_part();
    let neg = g.negative_part();
    let (mp, mn) = (pos.total_mass(), neg.total_mass());
    let l1 = mp + mn;
    if l1 > 2.0 {
        return Err(Error::Infeasible(format!(
            "||g||_1 = {l1} exceeds 2; use a smaller window width"
        )));
    }
    if (mp - mn).abs() > 1e-10 * l1.max(1.0) {
        return Err(Error::arg(format!(
            "jordan split needs zero total mass, got {}",
            mp - mn
        )));
    }
    let m = l1 / 2.0;
    let rest = SignedAtomicMeasure::from_atoms([(0.0, 1.0 - m)])?;
    Ok((neg.add_scaled(&rest, 1.0), pos.add_scaled(&rest, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceOptions {
    /// Window constant in `w = c alpha / eps`; `None` bisects for the
    /// largest feasible value.
    #[serde(default)]
    pub c: Option<f64>,
    /// Truncation index; `None` uses [`default_truncation`].
    #[serde(default)]
    pub truncation: Option<u64>,
    #[serde(default = "default_tail_rel_tol")]
    pub tail_rel_tol: f64,
}

fn default_tail_rel_tol() -> f64 {
    DEFAULT_TAIL_REL_TOL
}

impl Default for InstanceOptions {
    fn default() -> Self {
        Self {
            c: None,
            truncation: None,
            tail_rel_tol: DEFAULT_TAIL_REL_TOL,
        }
    }
}

/// `||g||_1` at `w = c alpha / eps` with the default truncation.
pub fn l1_for_c(epsilon: f64, alpha: f64, c: f64, rel_tol: f64) -> Result<f64> {
    let w = c * alpha / epsilon;
    let k = default_truncation(epsilon, alpha, w, rel_tol)?;
    Ok(build_g(epsilon, alpha, w, k)?.l1_norm())
}

fn overlaps(epsilon: f64, w: f64) -> bool {
    4.0 * w * epsilon >= 1.0
}

/// Largest `c` in `(0, 1]` with `||g||_1 <= 2` and disjoint bands, by
/// bisection.
pub fn largest_feasible_c(epsilon: f64, alpha: f64, rel_tol: f64) -> Result<f64> {
    check_params(epsilon, alpha, 1.0)?;
    let mut hi = 1.0f64;
    if overlaps(epsilon, hi * alpha / epsilon) {
        hi = (1.0 - 1e-9) / (4.0 * alpha);
    }
    let feasible = |c: f64| -> Result<bool> { Ok(l1_for_c(epsilon, alpha, c, rel_tol)? <= 2.0) };
    if feasible(hi)? {
        return Ok(hi);
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Err(Error::Infeasible("no window constant keeps ||g||_1 <= 2".into()));
    }
    Ok(lo)
}

/// The pair `E_0 = (1-alpha) delta_{eps/2} + alpha Q0`,
/// `E_1 = (1-alpha) delta_{-eps/2} + alpha Q1`, each convolved with `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstance {
    pub epsilon: f64,
    pub alpha: f64,
    pub c: f64,
    pub w: f64,
    /// `||g||_1 / 2`.
    pub m: f64,
    pub g: SignedAtomicMeasure,
    pub q0: SignedAtomicMeasure,
    pub q1: SignedAtomicMeasure,
    pub base: BaseDistribution,
}

pub fn build_hard_instance(
    base: &BaseDistribution,
    epsilon: f64,
    alpha: f64,
    opts: &InstanceOptions,
) -> Result<HardInstance> {
    if base.dim() != 1 {
        return Err(Error::Unsupported(format!(
            "hard instances need a univariate base, got {base}"
        )));
    }
    if !(alpha < 0.5) {
        return Err(Error::arg(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    let c = match opts.c {
        Some(c) if c > 0.0 && c <= 1.0 => c,
        Some(c) => return Err(Error::arg(format!("window constant must lie in (0, 1], got {c}"))),
        None => largest_feasible_c(epsilon, alpha, opts.tail_rel_tol)?,
    };
    let w = c * alpha / epsilon;
    check_params(epsilon, alpha, w)?;
    if overlaps(epsilon, w) {
        return Err(Error::Infeasible(format!(
            "bands overlap: 4 w eps = {} >= 1; choose c < {}",
            4.0 * w * epsilon,
            1.0 / (4.0 * alpha)
        )));
    }
    let k = match opts.truncation {
        Some(k) => k,
        None => default_truncation(epsilon, alpha, w, opts.tail_rel_tol)?,
    };
    let g = build_g(epsilon, alpha, w, k)?;
    let (q0, q1) = jordan_split(&g)?;
    Ok(HardInstance {
        epsilon,
        alpha,
        c,
        w,
        m: g.l1_norm() / 2.0,
        g,
        q0,
        q1,
        base: *base,
    })
}

impl HardInstance {
    pub fn e0(&self) -> SignedAtomicMeasure {
        mixture(self.alpha, 0.5 * self.epsilon, &self.q0)
    }

    pub fn e1(&self) -> SignedAtomicMeasure {
        mixture(self.alpha, -0.5 * self.epsilon, &self.q1)
    }

    /// `E_0 - E_1`.
    pub fn delta_e(&self) -> SignedAtomicMeasure {
        self.e0().add_scaled(&self.e1(), -1.0)
    }
}

fn mixture(alpha: f64, loc: f64, q: &SignedAtomicMeasure) -> SignedAtomicMeasure {
    SignedAtomicMeasure::from_atoms([(loc, 1.0 - alpha)])
        .expect("finite atom")
        .add_scaled(q, alpha)
}

/// `phi_{E_0}(omega) - phi_{E_1}(omega)`.
pub fn delta_phi_e(instance: &HardInstance, omega: f64) -> Complex64 {
    let shift = Complex64::new(0.0, 2.0 * sin_pi(instance.epsilon * omega));
    (1.0 - instance.alpha) * shift
        + instance.alpha * (atomic_cf(&instance.q0, omega) - atomic_cf(&instance.q1, omega))
}
