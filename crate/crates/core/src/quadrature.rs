//! One-dimensional quadrature: adaptive Simpson with an error estimate, and
//! fixed-order Gauss–Legendre for smooth panels.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the per-panel Richardson error estimates.
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimpsonOptions {
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Each initial panel is split into this many pieces before adapting,
    /// which keeps narrow features from being missed entirely.
    pub initial_panels: usize,
    pub max_evaluations: usize,
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_depth: 40,
            initial_panels: 16,
            max_evaluations: 20_000_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

/// Adaptive Simpson over `[a, b]` split at `breaks` (points outside the
/// interval are ignored).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &SimpsonOptions,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::arg(format!("bad integration interval [{a}, {b}]")));
    }
    let mut nodes: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    nodes.push(a);
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let mut pieces = Vec::new();
    for pair in nodes.windows(2) {
        let n = opts.initial_panels.max(1);
        let h = (pair[1] - pair[0]) / n as f64;
        for i in 0..n {
            let lo = pair[0] + i as f64 * h;
            let hi = if i + 1 == n { pair[1] } else { lo + h };
            if hi > lo {
                pieces.push((lo, hi));
            }
        }
    }
    if pieces.is_empty() {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }

    let per_piece_tol = opts.abs_tol / pieces.len() as f64;
    let mut evaluations = 0usize;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut stack = Vec::new();
    // left-to-right processing keeps the summation order fixed
    for &(lo, hi) in pieces.iter().rev() {
        let fa = f(lo);
        let fm = f(0.5 * (lo + hi));
        let fb = f(hi);
        evaluations += 3;
        stack.push(Panel {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole: (hi - lo) / 6.0 * (fa + 4.0 * fm + fb),
            tol: per_piece_tol,
            depth: 0,
        });
    }
    let mut unconverged = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        evaluations += 2;
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        let est = delta.abs() / 15.0;
        if est <= p.tol || p.depth >= opts.max_depth || m <= p.a || m >= p.b {
            if est > p.tol {
                unconverged += 1;
            }
            value += left + right + delta / 15.0;
            error += est;
            continue;
        }
        if evaluations > opts.max_evaluations {
            return Err(Error::Quadrature(format!(
                "more than {} evaluations on [{a}, {b}]; raise abs_tol or split the interval at known kinks",
                opts.max_evaluations
            )));
        }
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
    }
    if unconverged > 0 && error > opts.abs_tol {
        return Err(Error::Quadrature(format!(
            "{unconverged} panels hit depth {} on [{a}, {b}] with error estimate {error:.3e}; split at kinks or raise abs_tol",
            opts.max_depth
        )));
    }
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal pieces.
    pub fn integrate_composite<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                self.integrate(&f, lo, lo + h)
            })
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One-shot `n`-point Gauss–Legendre on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    GaussLegendre::new(n).integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let v = rule.integrate(|x| x.powi(9) + x.powi(8), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let w: f64 = GaussLegendre::new(40).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_high_order_nodes_are_sorted() {
        let rule = GaussLegendre::new(400);
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
        let v = rule.integrate(|x| x.cos(), 0.0, 10.0);
        assert!((v - 10f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn simpson_handles_kinks() {
        let opts = SimpsonOptions::default();
        let r = adaptive_simpson(|x: f64| x.abs(), -1.0, 2.0, &[0.0], &opts).unwrap();
        assert!((r.value - 2.5).abs() < 1e-12);
        let r = adaptive_simpson(|x: f64| (x - 0.3).abs(), -1.0, 2.0, &[], &opts).unwrap();
        assert!((r.value - (0.5 * 1.69 + 0.5 * 2.89)).abs() < 1e-8);
    }

    #[test]
    fn simpson_smooth_integrand_error_estimate() {
        let opts = SimpsonOptions::default();
        let r = adaptive_simpson(|x: f64| (-x * x).exp(), -6.0, 6.0, &[], &opts).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-9);
        assert!(r.error <= opts.abs_tol);
    }

    #[test]
    fn simpson_reports_nonconvergence() {
        let opts = SimpsonOptions {
            abs_tol: 1e-14,
            max_depth: 4,
            initial_panels: 1,
            ..Default::default()
        };
        let r = adaptive_simpson(|x: f64| (50.0 * x).sin(), 0.0, 3.0, &[], &opts);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
