//! Empirical characteristic functions.
//!
//! The lattice evaluators walk `exp(2 pi i k h x)` by repeated
//! multiplication, re-anchoring from an exact phase every
//! [`REANCHOR`] steps so rounding never accumulates past a few ulps.
//! Samples are processed in fixed-size blocks that are reduced pairwise in
//! block order, so results do not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::samples::Samples;
use crate::special::unit_phase;

const BLOCK: usize = 2048;
const REANCHOR: usize = 64;

/// `(1/n) sum_j exp(2 pi i omega.x_j)`.
pub fn ecf(samples: &Samples, omega: &[f64]) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::arg("empirical CF of an empty sample"));
    }
    if omega.len() != samples.dim() {
        return Err(Error::Dimension {
            expected: samples.dim(),
            got: omega.len(),
        });
    }
    let partial: Vec<Complex64> = samples
        .as_flat()
        .par_chunks(BLOCK * samples.dim())
        .map(|block| {
            block
                .chunks_exact(omega.len())
                .map(|x| unit_phase(x.iter().zip(omega).map(|(a, b)| a * b).sum()))
                .sum()
        })
        .collect();
    Ok(pairwise_sum_scalar(partial) / samples.len() as f64)
}

fn pairwise_sum_scalar(mut v: Vec<Complex64>) -> Complex64 {
    while v.len() > 1 {
        v = v
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
    }
    v.pop().unwrap_or_default()
}

fn pairwise_sum_vectors(mut v: Vec<Vec<Complex64>>) -> Vec<Complex64> {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        v = next;
    }
    v.pop().unwrap_or_default()
}

/// Accumulates `sum_x exp(2 pi i k h x)` for `k = 0..=kmax` into `acc`.
fn accumulate_1d(xs: &[f64], h: f64, acc: &mut [Complex64]) {
    let kmax = acc.len() - 1;
    let mut chunks = xs.chunks_exact(4);
    for c in &mut chunks {
        let z = [
            unit_phase(h * c[0]),
            unit_phase(h * c[1]),
            unit_phase(h * c[2]),
            unit_phase(h * c[3]),
        ];
        let mut p = [Complex64::new(1.0, 0.0); 4];
        let mut k = 0;
        while k <= kmax {
            let end = (k + REANCHOR).min(kmax + 1);
            if k > 0 {
                for (pi, &xi) in p.iter_mut().zip(c) {
                    *pi = unit_phase(k as f64 * h * xi);
                }
            }
            for slot in &mut acc[k..end] {
                *slot += (p[0] + p[1]) + (p[2] + p[3]);
                p[0] *= z[0];
                p[1] *= z[1];
                p[2] *= z[2];
                p[3] *= z[3];
            }
            k = end;
        }
    }
    for &x in chunks.remainder() {
        let z = unit_phase(h * x);
        let mut p = Complex64::new(1.0, 0.0);
        for (k, slot) in acc.iter_mut().enumerate() {
            if k % REANCHOR == 0 && k > 0 {
                p = unit_phase(k as f64 * h * x);
            }
            *slot += p;
            p *= z;
        }
    }
}

/// ECF of one-dimensional data at `omega = k h`, `k = 0..=kmax`.
pub fn ecf_grid_1d(xs: &[f64], h: f64, kmax: usize) -> Result<Vec<Complex64>> {
    if xs.is_empty() {
        return Err(Error::arg("empirical CF of an empty sample"));
    }
    let blocks: Vec<Vec<Complex64>> = xs
        .par_chunks(BLOCK)
        .map(|block| {
            let mut acc = vec![Complex64::default(); kmax + 1];
            accumulate_1d(block, h, &mut acc);
            acc
        })
        .collect();
    let n = xs.len() as f64;
    Ok(pairwise_sum_vectors(blocks)
        .into_iter()
        .map(|s| s / n)
        .collect())
}

/// ECF at lattice frequencies `omega = pitch * idx` for integer index
/// vectors `idx` (one per frequency, each of length `d`).
pub fn ecf_lattice(samples: &Samples, pitch: f64, indices: &[Vec<i64>]) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(Error::arg("empirical CF of an empty sample"));
    }
    let d = samples.dim();
    if indices.iter().any(|ix| ix.len() != d) {
        return Err(Error::arg("lattice index length differs from sample dimension"));
    }
    if indices.is_empty() {
        return Ok(Vec::new());
    }
    if d == 1 && indices.iter().all(|ix| ix[0] >= 0) {
        let kmax = indices.iter().map(|ix| ix[0]).max().unwrap_or(0) as usize;
        let grid = ecf_grid_1d(samples.as_flat(), pitch, kmax)?;
        return Ok(indices.iter().map(|ix| grid[ix[0] as usize]).collect());
    }
    let kmax = indices
        .iter()
        .flat_map(|ix| ix.iter().map(|k| k.unsigned_abs() as usize))
        .max()
        .unwrap_or(0);
    let width = kmax + 1;
    let blocks: Vec<Vec<Complex64>> = samples
        .as_flat()
        .par_chunks(BLOCK * d)
        .map(|block| {
            let mut acc = vec![Complex64::default(); indices.len()];
            // per-axis tables of exp(2 pi i k pitch x_a), k = 0..=kmax
            let mut table = vec![Complex64::default(); d * width];
            for x in block.chunks_exact(d) {
                for (a, &xa) in x.iter().enumerate() {
                    let z = unit_phase(pitch * xa);
                    let row = &mut table[a * width..(a + 1) * width];
                    let mut p = Complex64::new(1.0, 0.0);
                    for (k, slot) in row.iter_mut().enumerate() {
                        if k % REANCHOR == 0 && k > 0 {
                            p = unit_phase(k as f64 * pitch * xa);
                        }
                        *slot = p;
                        p *= z;
                    }
                }
                for (slot, ix) in acc.iter_mut().zip(indices) {
                    let mut prod = Complex64::new(1.0, 0.0);
                    for (a, &k) in ix.iter().enumerate() {
                        let t = table[a * width + k.unsigned_abs() as usize];
                        prod *= if k < 0 { t.conj() } else { t };
                    }
                    *slot += prod;
                }
            }
            acc
        })
        .collect();
    let n = samples.len() as f64;
    Ok(pairwise_sum_vectors(blocks)
        .into_iter()
        .map(|s| s / n)
        .collect())
}
