use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_COVER_CAP: u64 = 10_000_000;

/// Highest dimension for which covers are enumerated.
pub const MAX_COVER_DIM: usize = 3;

/// A finite `eta`-net of the centered ball of radius `radius`: an
/// axis-aligned grid of pitch `2 eta / sqrt(d)` clipped to the ball of
/// radius `radius + eta`. Points are stored row-major in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    dim: usize,
    radius: f64,
    eta: f64,
    /// Zero for the single-point cover used when `eta >= radius`.
    pitch: f64,
    points: Vec<f64>,
}

fn axis_extent(radius: f64, eta: f64, d: usize) -> (f64, i64) {
    let pitch = 2.0 * eta / (d as f64).sqrt();
    let k = ((radius + eta) / pitch).floor() as i64;
    (pitch, k)
}

/// Number of grid boxes enumerated before clipping to the ball.
pub fn predicted_cover_size(radius: f64, eta: f64, d: usize) -> u64 {
    if eta >= radius {
        return 1;
    }
    let (_, k) = axis_extent(radius, eta, d);
    let per_axis = (2 * k + 1) as f64;
    let total = per_axis.powi(d as i32);
    if total >= u64::MAX as f64 {
        u64::MAX
    } else {
        total as u64
    }
}

pub fn build_cover(radius: f64, eta: f64, d: usize) -> Result<Cover> {
    build_cover_capped(radius, eta, d, DEFAULT_COVER_CAP)
}

pub fn build_cover_capped(radius: f64, eta: f64, d: usize, cap: u64) -> Result<Cover> {
    if !(radius > 0.0 && radius.is_finite()) || !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::arg(format!(
            "cover needs positive finite radius and resolution, got R={radius}, eta={eta}"
        )));
    }
    if d == 0 || d > MAX_COVER_DIM {
        return Err(Error::Unsupported(format!(
            "covers are limited to 1 <= d <= {MAX_COVER_DIM}, got {d}"
        )));
    }
    if eta >= radius {
        return Ok(Cover {
            dim: d,
            radius,
            eta,
            pitch: 0.0,
            points: vec![0.0; d],
        });
    }
    let required = predicted_cover_size(radius, eta, d);
    if required > cap {
        return Err(Error::Resource {
            what: format!("cover of radius {radius} at resolution {eta} in d={d}"),
            required,
            cap,
        });
    }
    let (pitch, k) = axis_extent(radius, eta, d);
    let limit = radius + eta;
    let limit_sq = limit * limit * (1.0 + 1e-12);
    let mut points = Vec::new();
    let mut idx = vec![-k; d];
    let mut x = vec![0.0; d];
    'outer: loop {
        for (xi, &ki) in x.iter_mut().zip(&idx) {
            *xi = ki as f64 * pitch;
        }
        if x.iter().map(|v| v * v).sum::<f64>() <= limit_sq {
            points.extend_from_slice(&x);
        }
        // odometer increment, last coordinate fastest
        let mut j = d;
        loop {
            if j == 0 {
                break 'outer;
            }
            j -= 1;
            if idx[j] < k {
                idx[j] += 1;
                for later in idx.iter_mut().skip(j + 1) {
                    *later = -k;
                }
                break;
            }
        }
    }
    Ok(Cover {
        dim: d,
        radius,
        eta,
        pitch,
        points,
    })
}

impl Cover {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    /// Integer grid coordinates of point `i` (all zero for the one-point
    /// cover).
    pub fn grid_index(&self, i: usize) -> Vec<i64> {
        if self.pitch == 0.0 {
            return vec![0; self.dim];
        }
        self.point(i)
            .iter()
            .map(|x| (x / self.pitch).round() as i64)
            .collect()
    }

    /// The fixed `eta / radius` bound on cardinality, `(1 + 4R/eta)^d`.
    pub fn cardinality_bound(&self) -> f64 {
        (1.0 + 4.0 * self.radius / self.eta).powi(self.dim as i32)
    }

    /// Distance from `x` to the nearest point, by exhaustive search.
    pub fn nearest_distance(&self, x: &[f64]) -> f64 {
        self.points()
            .map(|p| {
                p.iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}
