//! Mean-shift contamination: `x = mu + y` with probability `1 - alpha`,
//! otherwise `x = z + y` with `z ~ Q`, and `y` drawn from the base.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::BaseDistribution;
use crate::error::{Error, Result};
use crate::measure::SignedAtomicMeasure;
use crate::samples::Samples;
use crate::special::unit_phase;

/// The shift distribution `Q`. All variants are atomic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversaryKind {
    PointShift {
        z: Vec<f64>,
    },
    MixtureOfPoints {
        atoms: Vec<(Vec<f64>, f64)>,
    },
    /// A one-dimensional probability measure.
    AtomicMeasure {
        q: SignedAtomicMeasure,
    },
    /// `Q` is the point mass at the clean mean.
    NullAdversary,
}

impl AdversaryKind {
    fn validate(&self, d: usize) -> Result<()> {
        match self {
            AdversaryKind::PointShift { z } => check_point(z, d),
            AdversaryKind::MixtureOfPoints { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::arg("mixture of points needs at least one atom"));
                }
                let mut total = 0.0;
                for (z, p) in atoms {
                    check_point(z, d)?;
                    if !(p.is_finite() && *p >= 0.0) {
                        return Err(Error::arg(format!("mixture probability {p} is negative")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::arg(format!(
                        "mixture probabilities sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
            AdversaryKind::AtomicMeasure { q } => {
                if d != 1 {
                    return Err(Error::Dimension { expected: 1, got: d });
                }
                if !q.is_probability(1e-10) {
                    return Err(Error::arg(
                        "atomic adversary must have nonnegative weights summing to 1",
                    ));
                }
                Ok(())
            }
            AdversaryKind::NullAdversary => Ok(()),
        }
    }

    /// `phi_Q(omega)`; `mu` is needed only by the null adversary.
    pub fn cf(&self, omega: &[f64], mu: &[f64]) -> Complex64 {
        match self {
            AdversaryKind::PointShift { z } => unit_phase(dot(omega, z)),
            AdversaryKind::MixtureOfPoints { atoms } => atoms
                .iter()
                .map(|(z, p)| p * unit_phase(dot(omega, z)))
                .sum(),
            AdversaryKind::AtomicMeasure { q } => q.cf(omega[0]),
            AdversaryKind::NullAdversary => unit_phase(dot(omega, mu)),
        }
    }

    /// Writes one shift into `out`. Mixtures and atomic measures consume
    /// exactly one uniform; point shifts and the null adversary consume none.
    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, mu: &[f64], out: &mut [f64]) {
        match self {
            AdversaryKind::PointShift { z } => out.copy_from_slice(z),
            AdversaryKind::MixtureOfPoints { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &atoms[atoms.len() - 1].0;
                for (z, p) in atoms {
                    acc += p;
                    if u < acc {
                        chosen = z;
                        break;
                    }
                }
                out.copy_from_slice(chosen);
            }
            AdversaryKind::AtomicMeasure { q } => out[0] = q.quantile(rng.random()),
            AdversaryKind::NullAdversary => out.copy_from_slice(mu),
        }
    }

    /// Short description used in benchmark records.
    pub fn label(&self) -> String {
        serde_json::to_string(self).expect("adversary serializes")
    }
}

fn check_point(z: &[f64], d: usize) -> Result<()> {
    if z.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: z.len(),
        });
    }
    if z.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("shift must be finite"));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr")]
pub struct ContaminationModel {
    alpha: f64,
    mu: Vec<f64>,
    adversary: AdversaryKind,
    base: BaseDistribution,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRepr {
    alpha: f64,
    mu: Vec<f64>,
    adversary: AdversaryKind,
    base: BaseDistribution,
}

impl TryFrom<ModelRepr> for ContaminationModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        ContaminationModel::new(r.alpha, r.mu, r.adversary, r.base)
    }
}

impl ContaminationModel {
    /// Requires `alpha` in `(0, 1/2)`.
    pub fn new(
        alpha: f64,
        mu: Vec<f64>,
        adversary: AdversaryKind,
        base: BaseDistribution,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::arg(format!("alpha must lie in (0, 1/2), got {alpha}")));
        }
        Self::with_any_alpha(alpha, mu, adversary, base)
    }

    /// Like [`new`](Self::new) but also accepts `alpha = 0`, which switches
    /// contamination off.
    pub fn with_any_alpha(
        alpha: f64,
        mu: Vec<f64>,
        adversary: AdversaryKind,
        base: BaseDistribution,
    ) -> Result<Self> {
        if !(0.0..0.5).contains(&alpha) {
            return Err(Error::arg(format!("alpha must lie in [0, 1/2), got {alpha}")));
        }
        check_point(&mu, base.dim())?;
        adversary.validate(base.dim())?;
        Ok(Self {
            alpha,
            mu,
            adversary,
            base,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn adversary(&self) -> &AdversaryKind {
        &self.adversary
    }

    pub fn base(&self) -> &BaseDistribution {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Draws `n` samples. Per sample the stream is consumed in the order:
    /// one uniform for the contamination coin, then the shift (outliers
    /// only), then the base draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Samples {
        let d = self.dim();
        let mut data = vec![0.0; n * d];
        let mut shift = vec![0.0; d];
        let mut noise = vec![0.0; d];
        for row in data.chunks_exact_mut(d) {
            let coin: f64 = rng.random();
            if coin < self.alpha {
                self.adversary.draw_into(rng, &self.mu, &mut shift);
            } else {
                shift.copy_from_slice(&self.mu);
            }
            self.base.draw_into(rng, &mut noise);
            for ((x, s), y) in row.iter_mut().zip(&shift).zip(&noise) {
                *x = s + y;
            }
        }
        Samples::new(d, data).expect("rows of length d")
    }

    /// `phi_D(omega) ((1 - alpha) e^{2 pi i omega.mu} + alpha phi_Q(omega))`.
    pub fn population_cf(&self, omega: &[f64]) -> Result<Complex64> {
        let phi_d = self.base.cf(omega)?;
        Ok(phi_d * self.shift_cf(omega))
    }

    /// `psi(omega) = (1 - alpha) e^{2 pi i omega.mu} + alpha phi_Q(omega)`,
    /// the CF of the shift mixture.
    pub fn shift_cf(&self, omega: &[f64]) -> Complex64 {
        (1.0 - self.alpha) * unit_phase(dot(omega, &self.mu))
            + self.alpha * self.adversary.cf(omega, &self.mu)
    }
}

/// Convenience wrapper matching the free-function form.
pub fn draw_contaminated<R: Rng + ?Sized>(
    model: &ContaminationModel,
    rng: &mut R,
    n: usize,
) -> Samples {
    model.draw(rng, n)
}

/// Writes one sample per line with `#`-prefixed header lines recording the
/// seed and the model JSON.
pub fn write_dataset(
    path: &Path,
    samples: &Samples,
    seed: u64,
    model: &ContaminationModel,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_dataset_to(&mut out, samples, seed, model).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_dataset_to<W: Write>(
    out: &mut W,
    samples: &Samples,
    seed: u64,
    model: &ContaminationModel,
) -> std::io::Result<()> {
    writeln!(out, "# seed: {seed}")?;
    writeln!(
        out,
        "# model: {}",
        serde_json::to_string(model).expect("model serializes")
    )?;
    let mut line = String::new();
    for row in samples.rows() {
        line.clear();
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            // shortest representation that parses back to the same value
            line.push_str(&format!("{x:?}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// A dataset read back from disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Samples,
    pub seed: Option<u64>,
    pub model: Option<ContaminationModel>,
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut seed = None;
    let mut model = None;
    let mut samples: Option<Samples> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(s) = comment.strip_prefix("seed:") {
                seed = s.trim().parse().ok();
            } else if let Some(m) = comment.strip_prefix("model:") {
                model = Some(serde_json::from_str(m.trim())?);
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        match samples.as_mut() {
            None => {
                let mut s = Samples::with_capacity(row.len(), 1024);
                s.push(&row)?;
                samples = Some(s);
            }
            Some(s) => s.push(&row).map_err(|e| {
                Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?,
        }
    }
    let samples =
        samples.ok_or_else(|| Error::Parse(format!("{}: no sample rows", path.display())))?;
    Ok(Dataset {
        samples,
        seed,
        model,
    })
}
