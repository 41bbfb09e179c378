//! Small numerical helpers shared across modules: reduced-argument
//! trigonometry, `sinc`, unit phases and Irwin–Hall pieces.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `sin(pi * x)`, exact zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `cos(pi * x)`, exact zero at half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Normalized sinc, `sin(pi x) / (pi x)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    let t = PI * x;
    if x.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        sin_pi(x) / t
    }
}

/// `exp(2 pi i t)` with the argument reduced to `[-1/2, 1/2]` first.
#[inline]
pub fn unit_phase(t: f64) -> Complex64 {
    let r = t - t.round();
    let (s, c) = (2.0 * PI * r).sin_cos();
    Complex64::new(c, s)
}

/// Distance from `t` to the nearest integer.
#[inline]
pub fn dist_to_integer(t: f64) -> f64 {
    (t - t.round()).abs()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * f64::from(i))
}

/// Irwin–Hall density: sum of `m` independent `U[0, 1]` at `s`.
pub fn irwin_hall_pdf(m: u32, s: f64) -> f64 {
    if !(0.0..=f64::from(m)).contains(&s) {
        return 0.0;
    }
    let s = s.min(f64::from(m) - s);
    if m == 1 {
        return 1.0;
    }
    let mut acc = 0.0;
    let top = s.floor() as u32;
    for k in 0..=top.min(m) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(m, k) * (s - f64::from(k)).powi(m as i32 - 1);
    }
    (acc / factorial(m - 1)).max(0.0)
}

/// Irwin–Hall CDF for the sum of `m` independent `U[0, 1]`.
pub fn irwin_hall_cdf(m: u32, s: f64) -> f64 {
    let mf = f64::from(m);
    if s <= 0.0 {
        return 0.0;
    }
    if s >= mf {
        return 1.0;
    }
    if s > mf / 2.0 {
        return 1.0 - irwin_hall_cdf(m, mf - s);
    }
    let mut acc = 0.0;
    let top = s.floor() as u32;
    for k in 0..=top.min(m) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(m, k) * (s - f64::from(k)).powi(m as i32);
    }
    (acc / factorial(m)).clamp(0.0, 1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
