//! Finite signed atomic measures on the real line.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::unit_phase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Atoms with strictly increasing locations and nonzero weights.
///
/// `truncation_k` and `tail_bound` describe how the measure was cut out of
/// an infinite one; both are zero for measures built from explicit atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr")]
pub struct SignedAtomicMeasure {
    atoms: Vec<Atom>,
    pub truncation_k: u64,
    pub tail_bound: f64,
}

#[derive(Deserialize)]
struct MeasureRepr {
    atoms: Vec<Atom>,
    #[serde(default)]
    truncation_k: u64,
    #[serde(default)]
    tail_bound: f64,
}

impl TryFrom<MeasureRepr> for SignedAtomicMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        let mut m = SignedAtomicMeasure::from_atoms(r.atoms.iter().map(|a| (a.location, a.weight)))?;
        m.truncation_k = r.truncation_k;
        m.tail_bound = r.tail_bound;
        Ok(m)
    }
}

impl SignedAtomicMeasure {
    pub fn zero() -> Self {
        Self {
            atoms: Vec::new(),
            truncation_k: 0,
            tail_bound: 0.0,
        }
    }

    pub fn dirac(location: f64) -> Self {
        Self {
            atoms: vec![Atom {
                location,
                weight: 1.0,
            }],
            truncation_k: 0,
            tail_bound: 0.0,
        }
    }

    /// Builds a measure from arbitrary `(location, weight)` pairs. Atoms at
    /// the same location are merged; zero weights are dropped.
    pub fn from_atoms<I: IntoIterator<Item = (f64, f64)>>(atoms: I) -> Result<Self> {
        let mut list: Vec<Atom> = Vec::new();
        for (location, weight) in atoms {
            if !location.is_finite() || !weight.is_finite() {
                return Err(Error::arg("atom location and weight must be finite"));
            }
            list.push(Atom { location, weight });
        }
        list.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(list.len());
        for atom in list {
            match merged.last_mut() {
                Some(last) if last.location == atom.location => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| a.weight != 0.0);
        Ok(Self {
            atoms: merged,
            truncation_k: 0,
            tail_bound: 0.0,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    /// `sum |w_k|` over atoms with `|x_k| > r`.
    pub fn l1_beyond(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location.abs() > r)
            .map(|a| a.weight.abs())
            .sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.weight > 0.0)
    }

    /// Nonnegative weights summing to one within `tol`.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.is_nonnegative() && (self.total_mass() - 1.0).abs() <= tol
    }

    /// Positive part of the Jordan decomposition.
    pub fn positive_part(&self) -> Self {
        self.filtered(|w| w > 0.0)
    }

    /// Magnitudes of the negative part of the Jordan decomposition.
    pub fn negative_part(&self) -> Self {
        let mut neg = self.filtered(|w| w < 0.0);
        for a in &mut neg.atoms {
            a.weight = -a.weight;
        }
        neg
    }

    fn filtered(&self, keep: impl Fn(f64) -> bool) -> Self {
        Self {
            atoms: self.atoms.iter().copied().filter(|a| keep(a.weight)).collect(),
            truncation_k: self.truncation_k,
            tail_bound: self.tail_bound,
        }
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Self, scale: f64) -> Self {
        let pairs = self
            .atoms
            .iter()
            .map(|a| (a.location, a.weight))
            .chain(other.atoms.iter().map(|a| (a.location, scale * a.weight)));
        let mut out = Self::from_atoms(pairs).expect("finite atoms");
        out.truncation_k = self.truncation_k.max(other.truncation_k);
        out.tail_bound = self.tail_bound + scale.abs() * other.tail_bound;
        out
    }

    pub fn scaled(&self, scale: f64) -> Self {
        Self::zero().add_scaled(self, scale)
    }

    /// `sum_k w_k exp(2 pi i omega x_k)`.
    pub fn cf(&self, omega: f64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| a.weight * unit_phase(omega * a.location))
            .sum()
    }

    /// Draws an atom location with probability proportional to its weight,
    /// given `u` uniform on `[0, 1)`. Only meaningful for nonnegative
    /// measures.
    pub fn quantile(&self, u: f64) -> f64 {
        let total = self.total_mass();
        let target = u * total;
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.weight;
            if target < acc {
                return a.location;
            }
        }
        self.atoms.last().map_or(0.0, |a| a.location)
    }
}
