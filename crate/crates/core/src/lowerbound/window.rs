//! The smooth window: `b_hat_w` equals 1 on `[-w, w]`, vanishes outside
//! `[-2w, 2w]`, and is the convolution of the indicator of
//! `[-3w/2, 3w/2]` with three normalized boxes of half-width `w/6`.

use crate::special::{irwin_hall_cdf, sinc};

/// CDF of the sum of three independent `U[-w/6, w/6]`.
fn triple_box_cdf(w: f64, t: f64) -> f64 {
    irwin_hall_cdf(3, t / (w / 3.0) + 1.5)
}

/// Frequency-domain window at `omega`.
pub fn window_hat(w: f64, omega: f64) -> f64 {
    let a = omega.abs();
    if a <= w {
        return 1.0;
    }
    if a >= 2.0 * w {
        return 0.0;
    }
    triple_box_cdf(w, a + 1.5 * w) - triple_box_cdf(w, a - 1.5 * w)
}

/// Points where `window_hat` changes polynomial piece (nonnegative side).
pub fn window_breakpoints(w: f64) -> [f64; 4] {
    [w, 4.0 * w / 3.0, 5.0 * w / 3.0, 2.0 * w]
}

/// Inverse transform of [`window_hat`]: `3w sinc(3wx) sinc(wx/3)^3`.
pub fn window_time(w: f64, x: f64) -> f64 {
    let x = x.abs();
    let s = sinc(w * x / 3.0);
    3.0 * w * sinc(3.0 * w * x) * s * s * s
}
