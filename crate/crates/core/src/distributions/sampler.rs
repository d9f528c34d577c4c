use rand::Rng;

use super::{Outcome, SupportSet};
use crate::rng::{seeded, SampleRng};

/// Inverse-CDF sampler over an enumerated support.
///
/// Cumulative masses are normalized by the enumerated total, so a truncated
/// support is sampled conditionally on the enumerated part. The sampler owns
/// its generator; use one instance per thread.
#[derive(Debug, Clone)]
pub struct SupportSampler {
    outcomes: Vec<Outcome>,
    cumulative: Vec<f64>,
    rng: SampleRng,
}

impl SupportSampler {
    pub fn new(support: &SupportSet, seed: u64) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = support
            .masses
            .iter()
            .map(|&m| {
                acc += m.max(0.0);
                acc
            })
            .collect();
        if acc > 0.0 {
            cumulative.iter_mut().for_each(|c| *c /= acc);
        }
        SupportSampler {
            outcomes: support.outcomes.clone(),
            cumulative,
            rng: seeded(seed),
        }
    }

    pub fn sample(&mut self) -> &Outcome {
        let u: f64 = self.rng.random();
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.outcomes.len() - 1);
        &self.outcomes[idx]
    }
}
