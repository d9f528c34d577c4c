//! The multivariate generalized hypergeometric distribution (MGH) and its
//! inverse counterpart (MIGH), both with real-valued color weights.
//!
//! Outcomes are tuples of color counts. MGH outcomes cover colors `0..=k`;
//! MIGH support sets list the full tuple `(gamma, x_1, ..., x_k)` while its
//! PMF and samplers work on the free part `(x_1, ..., x_k)`.

mod mgh;
mod migh;
mod sampler;

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

pub use mgh::{mgh_moments, mgh_pmf, mgh_sample, mgh_support, validate_mgh, MghParams};
pub use migh::{
    migh_mean, migh_pmf, migh_sample, migh_sample_with_cap, migh_support, validate_migh, MighParams,
};
pub use sampler::SupportSampler;

use crate::combinatorics::NO_CAP;
use crate::error::ValidationError;

/// Upper bound on the number of tuples any single enumeration may visit.
pub const ENUMERATION_BUDGET: usize = 20_000_000;

/// Default per-trial draw cap for sequential samplers.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

/// A tuple of nonnegative color counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(pub Vec<u32>);

impl Outcome {
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&v| u64::from(v)).sum()
    }
}

impl Deref for Outcome {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for Outcome {
    fn from(v: Vec<u32>) -> Self {
        Outcome(v)
    }
}

impl From<&[u32]> for Outcome {
    fn from(v: &[u32]) -> Self {
        Outcome(v.to_vec())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// An enumerated support together with the mass of each tuple.
///
/// When `truncated` is set the enumeration stopped early and
/// `tail_mass_bound = 1 - sum(masses)` bounds the mass left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub outcomes: Vec<Outcome>,
    pub masses: Vec<f64>,
    pub truncated: bool,
    pub tail_mass_bound: f64,
}

impl SupportSet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = crate::combinatorics::CompensatedSum::default();
        self.masses.iter().for_each(|&m| s.add(m));
        s.value()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, f64)> {
        self.outcomes.iter().zip(self.masses.iter().copied())
    }
}

/// Closed-form moments. `variances` is `None` where no closed form exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub means: Vec<f64>,
    pub variances: Option<Vec<f64>>,
}

fn check_weights(weights: &[f64]) -> Result<f64, ValidationError> {
    if weights.len() < 2 {
        return Err(ValidationError::LengthError(weights.len()));
    }
    if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
        return Err(ValidationError::NonFinite { index });
    }
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Err(ValidationError::ZeroTotal);
    }
    Ok(total)
}

/// Largest count a color of weight `c` can take when the total is positive:
/// the largest integer strictly below `1 + c`, i.e. `ceil(c)`.
pub(crate) fn count_cap(c: f64) -> u32 {
    let cap = c.ceil();
    if cap >= f64::from(NO_CAP) {
        NO_CAP
    } else {
        cap.max(0.0) as u32
    }
}
