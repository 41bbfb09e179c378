//! Mean estimation under mean-shift contamination.
//!
//! Samples follow `x = mu + y` with probability `1 - alpha` and `x = z + y`
//! otherwise, where `y` comes from a known base distribution and `z` from an
//! unknown shift distribution. The [`estimator`] module implements the
//! frequency-witness tournament; [`lowerbound`] builds the Fourier-matching
//! hard instances and certifies their properties numerically.

pub mod contamination;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod lowerbound;
pub mod measure;
pub mod quadrature;
pub mod rng;
pub mod samples;
pub mod special;
pub mod spectral;

pub use contamination::{AdversaryKind, ContaminationModel};
pub use distributions::{BaseDistribution, DistKind, RegularityConstants};
pub use error::{Error, Result};
pub use measure::SignedAtomicMeasure;
pub use samples::Samples;
