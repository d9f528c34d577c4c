use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::{
    check_weights, count_cap, MomentReport, Outcome, SupportSampler, SupportSet, ENUMERATION_BUDGET,
};
use crate::combinatorics::{
    for_each_bounded_composition, gen_binom_scaled, FactorTable, Scaled, NO_CAP,
};
use crate::error::{DistributionError, ValidationError};

/// Validated parameters of the multivariate generalized hypergeometric
/// distribution: real weights `C_0..C_k` and a draw count `n`.
///
/// Holds `N = sum(C) != 0`, `(n - 1)/N < 1` and `C_i/N > 0` for every color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MghParams {
    weights: Vec<f64>,
    draws: u32,
    total: f64,
}

impl MghParams {
    pub fn new(weights: Vec<f64>, draws: u32) -> Result<Self, ValidationError> {
        let total = check_weights(&weights)?;
        if let Some(index) = weights.iter().position(|&c| c / total <= 0.0) {
            return Err(ValidationError::SignViolation { index });
        }
        if draws == 0 || (f64::from(draws) - 1.0) / total >= 1.0 {
            return Err(ValidationError::DrawCountViolation { draws, total });
        }
        Ok(MghParams {
            weights,
            draws,
            total,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn draws(&self) -> u32 {
        self.draws
    }

    /// `N`, the sum of the weights.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Number of colors, `k + 1`.
    pub fn colors(&self) -> usize {
        self.weights.len()
    }

    /// Per-color count caps; uncapped ([`NO_CAP`]) when `N < 0`.
    pub fn caps(&self) -> Vec<u32> {
        if self.total > 0.0 {
            self.weights.iter().map(|&c| count_cap(c)).collect()
        } else {
            vec![NO_CAP; self.weights.len()]
        }
    }

    pub fn in_support(&self, x: &[u32]) -> bool {
        x.len() == self.weights.len()
            && x.iter().map(|&v| u64::from(v)).sum::<u64>() == u64::from(self.draws)
            && x.iter().zip(self.caps()).all(|(&xi, cap)| xi <= cap)
    }
}

pub fn validate_mgh(weights: &[f64], draws: u32) -> Result<MghParams, ValidationError> {
    MghParams::new(weights.to_vec(), draws)
}

/// `prod_i gen_binom(C_i, x_i) / gen_binom(N, n)`, or 0 off the support.
pub fn mgh_pmf(params: &MghParams, x: &[u32]) -> Result<f64, DistributionError> {
    if x.len() != params.colors() {
        return Err(DistributionError::DimensionMismatch {
            expected: params.colors(),
            found: x.len(),
        });
    }
    if !params.in_support(x) {
        return Ok(0.0);
    }
    let numerator = params
        .weights
        .iter()
        .zip(x)
        .fold(Scaled::ONE, |acc, (&c, &xi)| {
            acc.mul(gen_binom_scaled(c, u64::from(xi)))
        });
    let denominator = gen_binom_scaled(params.total, u64::from(params.draws));
    Ok(numerator.div(denominator).to_f64()?)
}

/// Enumerates the support in ascending lexicographic order with masses.
pub fn mgh_support(params: &MghParams) -> Result<SupportSet, DistributionError> {
    let caps = params.caps();
    let mut tables: Vec<FactorTable> = params
        .weights
        .iter()
        .map(|&c| FactorTable::binomial(c))
        .collect();
    let denominator = FactorTable::binomial(params.total).get(params.draws);
    let mut outcomes = Vec::new();
    let mut masses = Vec::new();
    let flow = for_each_bounded_composition(params.draws, &caps, |x| {
        if outcomes.len() >= ENUMERATION_BUDGET {
            return ControlFlow::Break(DistributionError::EnumerationBudgetExceeded(
                ENUMERATION_BUDGET,
            ));
        }
        let numerator = tables
            .iter_mut()
            .zip(x)
            .fold(Scaled::ONE, |acc, (t, &xi)| acc.mul(t.get(xi)));
        match numerator.div(denominator).to_f64() {
            Ok(m) => {
                outcomes.push(Outcome::from(x));
                masses.push(m);
                ControlFlow::Continue(())
            }
            Err(e) => ControlFlow::Break(e.into()),
        }
    });
    if let ControlFlow::Break(e) = flow {
        return Err(e);
    }
    Ok(SupportSet {
        outcomes,
        masses,
        truncated: false,
        tail_mass_bound: 0.0,
    })
}

/// Closed-form means `n C_i / N` and variances
/// `n C_i (N - C_i)(N - n) / (N^2 (N - 1))`.
///
/// At `N = 1` the variance denominator vanishes; the error carries the means.
pub fn mgh_moments(params: &MghParams) -> Result<MomentReport, DistributionError> {
    let n = f64::from(params.draws);
    let total = params.total;
    let means: Vec<f64> = params.weights.iter().map(|&c| n * c / total).collect();
    if total == 1.0 {
        return Err(DistributionError::VarianceUndefined { means });
    }
    let variances = params
        .weights
        .iter()
        .map(|&c| n * c * (total - c) * (total - n) / (total * total * (total - 1.0)))
        .collect();
    Ok(MomentReport {
        means,
        variances: Some(variances),
    })
}

/// Exact i.i.d. sampling by inverse-CDF lookup over the enumerated support.
pub fn mgh_sample(
    params: &MghParams,
    seed: u64,
    trials: usize,
) -> Result<Vec<Outcome>, DistributionError> {
    let support = mgh_support(params)?;
    let mut sampler = SupportSampler::new(&support, seed);
    Ok((0..trials).map(|_| sampler.sample().clone()).collect())
}
