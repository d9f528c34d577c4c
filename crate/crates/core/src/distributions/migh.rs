use std::ops::ControlFlow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_weights, count_cap, MomentReport, Outcome, SupportSampler, SupportSet, DEFAULT_STEP_CAP,
    ENUMERATION_BUDGET,
};
use crate::combinatorics::{
    for_each_bounded_composition, gen_binom_scaled, CompensatedSum, FactorTable, NO_CAP,
};
use crate::error::{DistributionError, ValidationError};
use crate::rng::seeded;

/// Validated parameters of the multivariate generalized inverse
/// hypergeometric distribution: real weights `C_0..C_k` with color 0
/// distinguished, and the required color-0 count `gamma`.
///
/// Holds `N != 0`, `C_i/N > 0` for every color (including color 0) and
/// `C_0/N > (gamma - 1)/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MighParams {
    weights: Vec<f64>,
    gamma: u32,
    total: f64,
}

impl MighParams {
    pub fn new(weights: Vec<f64>, gamma: u32) -> Result<Self, ValidationError> {
        let total = check_weights(&weights)?;
        if let Some(index) = weights.iter().skip(1).position(|&c| c / total <= 0.0) {
            return Err(ValidationError::SignViolation { index: index + 1 });
        }
        if gamma == 0 || weights[0] / total <= (f64::from(gamma) - 1.0) / total {
            return Err(ValidationError::GammaViolation { gamma });
        }
        // With N < 0 the gamma constraint alone lets 0 <= C_0 < gamma - 1
        // through, where gen_binom(C_0, gamma) is zero or of the wrong sign.
        if weights[0] / total <= 0.0 {
            return Err(ValidationError::SignViolation { index: 0 });
        }
        Ok(MighParams {
            weights,
            gamma,
            total,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// `N`, the sum of the weights.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn colors(&self) -> usize {
        self.weights.len()
    }

    /// Whether the support is finite (`N > 0`).
    pub fn finite_support(&self) -> bool {
        self.total > 0.0
    }

    /// Largest total draw count with `(n - 1)/N < 1`; `None` when `N < 0`.
    pub fn max_total_draws(&self) -> Option<u32> {
        self.finite_support().then(|| count_cap(self.total))
    }

    /// Caps on `x_1..x_k`.
    pub fn caps(&self) -> Vec<u32> {
        if self.finite_support() {
            self.weights[1..].iter().map(|&c| count_cap(c)).collect()
        } else {
            vec![NO_CAP; self.weights.len() - 1]
        }
    }

    /// Membership of the free part `(x_1..x_k)` in the support.
    pub fn in_support(&self, x: &[u32]) -> bool {
        if x.len() + 1 != self.weights.len() {
            return false;
        }
        let n = u64::from(self.gamma) + x.iter().map(|&v| u64::from(v)).sum::<u64>();
        match self.max_total_draws() {
            None => true,
            Some(max) => {
                n <= u64::from(max) && x.iter().zip(self.caps()).all(|(&xi, cap)| xi <= cap)
            }
        }
    }
}

pub fn validate_migh(weights: &[f64], gamma: u32) -> Result<MighParams, ValidationError> {
    MighParams::new(weights.to_vec(), gamma)
}

/// `(gamma/n) prod_{i=0}^{k} gen_binom(C_i, x_i) / gen_binom(N, n)` with
/// `x_0 = gamma` and `n = gamma + sum(x)`, or 0 off the support.
pub fn migh_pmf(params: &MighParams, x: &[u32]) -> Result<f64, DistributionError> {
    let expected = params.colors() - 1;
    if x.len() != expected {
        return Err(DistributionError::DimensionMismatch {
            expected,
            found: x.len(),
        });
    }
    if !params.in_support(x) {
        return Ok(0.0);
    }
    let gamma = u64::from(params.gamma);
    let n = gamma + x.iter().map(|&v| u64::from(v)).sum::<u64>();
    let numerator = params.weights[1..].iter().zip(x).fold(
        gen_binom_scaled(params.weights[0], gamma),
        |acc, (&c, &xi)| acc.mul(gen_binom_scaled(c, u64::from(xi))),
    );
    let value = numerator
        .mul_f64(gamma as f64 / n as f64)
        .div(gen_binom_scaled(params.total, n));
    Ok(value.to_f64()?)
}

/// Enumerates the support by increasing total `n`, lexicographically within
/// each `n`. Outcomes are full tuples `(gamma, x_1, ..., x_k)`.
///
/// For `N > 0` the support is finite and returned complete. For `N < 0` the
/// walk stops at the first tuple where the accumulated mass reaches
/// `1 - tail_epsilon`; the remainder is reported as `tail_mass_bound`.
pub fn migh_support(
    params: &MighParams,
    tail_epsilon: f64,
) -> Result<SupportSet, DistributionError> {
    if !(0.0..1.0).contains(&tail_epsilon) {
        return Err(DistributionError::InvalidTailEpsilon(tail_epsilon));
    }
    if !params.finite_support() && tail_epsilon == 0.0 {
        return Err(DistributionError::TailEpsilonZeroOnInfiniteSupport);
    }
    let gamma = params.gamma;
    let caps = params.caps();
    let mut color_tables: Vec<FactorTable> = params.weights[1..]
        .iter()
        .map(|&c| FactorTable::binomial(c))
        .collect();
    let mut total_table = FactorTable::binomial(params.total);
    let lead = FactorTable::binomial(params.weights[0]).get(gamma);
    let target = 1.0 - tail_epsilon;

    let mut outcomes = Vec::new();
    let mut masses = Vec::new();
    let mut acc = CompensatedSum::default();
    let mut n = gamma;
    loop {
        if let Some(max) = params.max_total_draws() {
            if n > max {
                break;
            }
        }
        let level = lead
            .mul_f64(f64::from(gamma) / f64::from(n))
            .div(total_table.get(n));
        let flow = for_each_bounded_composition(n - gamma, &caps, |x| {
            if outcomes.len() >= ENUMERATION_BUDGET {
                return ControlFlow::Break(Err(DistributionError::EnumerationBudgetExceeded(
                    ENUMERATION_BUDGET,
                )));
            }
            let mass = color_tables
                .iter_mut()
                .zip(x)
                .fold(level, |m, (t, &xi)| m.mul(t.get(xi)));
            let mass = match mass.to_f64() {
                Ok(m) => m,
                Err(e) => return ControlFlow::Break(Err(e.into())),
            };
            let mut full = Vec::with_capacity(x.len() + 1);
            full.push(gamma);
            full.extend_from_slice(x);
            outcomes.push(Outcome(full));
            masses.push(mass);
            acc.add(mass);
            if !params.finite_support() && acc.value() >= target {
                return ControlFlow::Break(Ok(()));
            }
            ControlFlow::Continue(())
        });
        match flow {
            ControlFlow::Break(Ok(())) => {
                let tail = (1.0 - acc.value()).max(0.0);
                return Ok(SupportSet {
                    outcomes,
                    masses,
                    truncated: true,
                    tail_mass_bound: tail,
                });
            }
            ControlFlow::Break(Err(e)) => return Err(e),
            ControlFlow::Continue(()) => {}
        }
        n = n
            .checked_add(1)
            .ok_or(DistributionError::EnumerationBudgetExceeded(
                ENUMERATION_BUDGET,
            ))?;
    }
    Ok(SupportSet {
        outcomes,
        masses,
        truncated: false,
        tail_mass_bound: 0.0,
    })
}

/// Closed-form means `gamma C_i / C_0` for `i = 1..k`.
///
/// Brute-force enumeration (see [`crate::oracle::moment_check`]) does not
/// reproduce this closed form: on finite supports the enumerated means come
/// out as `gamma C_i / (C_0 + 1)`.
pub fn migh_mean(params: &MighParams) -> MomentReport {
    let gamma = f64::from(params.gamma);
    let c0 = params.weights[0];
    MomentReport {
        means: params.weights[1..]
            .iter()
            .map(|&c| gamma * c / c0)
            .collect(),
        variances: None,
    }
}

/// Samples the free part `(x_1..x_k)` i.i.d. with the default step cap.
pub fn migh_sample(
    params: &MighParams,
    seed: u64,
    trials: usize,
) -> Result<Vec<Outcome>, DistributionError> {
    migh_sample_with_cap(params, seed, trials, DEFAULT_STEP_CAP)
}

/// For `N > 0` draws by inverse CDF over the enumerated support. For `N < 0`
/// runs the sequential chain: with `m_i` draws of color `i` among `m` so far,
/// the next draw is color `i` with probability `(C_i - m_i)/(N - m)`, which
/// lies in (0, 1) because every weight is negative. The chain stops once
/// color 0 has been drawn `gamma` times.
pub fn migh_sample_with_cap(
    params: &MighParams,
    seed: u64,
    trials: usize,
    step_cap: u64,
) -> Result<Vec<Outcome>, DistributionError> {
    if params.finite_support() {
        let support = migh_support(params, 0.0)?;
        let mut sampler = SupportSampler::new(&support, seed);
        return Ok((0..trials)
            .map(|_| Outcome(sampler.sample()[1..].to_vec()))
            .collect());
    }
    let mut rng = seeded(seed);
    let colors = params.colors();
    // remaining weights -(C_i - m_i), all positive
    let base: Vec<f64> = params.weights.iter().map(|&c| -c).collect();
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut drawn = vec![0u32; colors];
        let mut steps = 0u64;
        while drawn[0] < params.gamma {
            if steps >= step_cap {
                return Err(DistributionError::StepCapExceeded(step_cap));
            }
            steps += 1;
            let total = -params.total + steps as f64 - 1.0;
            let mut u = rng.random::<f64>() * total;
            let mut pick = colors - 1;
            for (i, (&w, &m)) in base.iter().zip(&drawn).enumerate() {
                let weight = w + f64::from(m);
                if u < weight {
                    pick = i;
                    break;
                }
                u -= weight;
            }
            drawn[pick] += 1;
        }
        out.push(Outcome(drawn[1..].to_vec()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(w: &[f64], g: u32) -> MighParams {
        validate_migh(w, g).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_migh(&[1.0, 1.0], 1).is_ok());
        assert_eq!(
            validate_migh(&[0.5, 1.0], 2),
            Err(ValidationError::GammaViolation { gamma: 2 })
        );
        assert!(validate_migh(&[-2.0, -3.0], 4).is_ok());
        assert_eq!(
            validate_migh(&[1.0, 1.0], 3),
            Err(ValidationError::GammaViolation { gamma: 3 })
        );
        assert_eq!(
            validate_migh(&[1.0, 1.0], 0),
            Err(ValidationError::GammaViolation { gamma: 0 })
        );
        assert_eq!(
            validate_migh(&[2.0, -1.0], 1),
            Err(ValidationError::SignViolation { index: 1 })
        );
        assert_eq!(
            validate_migh(&[1.0, -1.0], 1),
            Err(ValidationError::ZeroTotal)
        );
    }

    #[test]
    fn nonnegative_color_zero_rejected_for_negative_total() {
        // C_0/N = -0.2 > (2-1)/N = -0.4 passes the gamma constraint, yet
        // gen_binom(0.5, 2) < 0 would make every mass negative
        assert_eq!(
            validate_migh(&[0.5, -3.0], 2),
            Err(ValidationError::SignViolation { index: 0 })
        );
        assert_eq!(
            validate_migh(&[0.0, -3.0], 2),
            Err(ValidationError::SignViolation { index: 0 })
        );
    }

    #[test]
    fn finite_support_example() {
        let s = migh_support(&params(&[1.0, 1.0], 1), 0.0).unwrap();
        assert_eq!(s.outcomes, vec![Outcome(vec![1, 0]), Outcome(vec![1, 1])]);
        assert!(!s.truncated);
        assert!((s.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_support_stops_at_exact_point() {
        // masses 1/(n(n+1)): 1/2, 1/6, 1/12 reach 3/4 >= 0.74 at the third tuple
        let s = migh_support(&params(&[-1.0, -1.0], 1), 0.26).unwrap();
        assert_eq!(
            s.outcomes,
            vec![
                Outcome(vec![1, 0]),
                Outcome(vec![1, 1]),
                Outcome(vec![1, 2])
            ]
        );
        assert!(s.truncated);
        assert!((s.tail_mass_bound - 0.25).abs() < 1e-15);
        assert!(s.tail_mass_bound <= 0.26);
    }

    #[test]
    fn tail_epsilon_errors() {
        assert_eq!(
            migh_support(&params(&[-1.0, -1.0], 1), 0.0),
            Err(DistributionError::TailEpsilonZeroOnInfiniteSupport)
        );
        assert_eq!(
            migh_support(&params(&[1.0, 1.0], 1), 1.0),
            Err(DistributionError::InvalidTailEpsilon(1.0))
        );
    }

    #[test]
    fn pmf_examples() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(migh_pmf(&params(&[1.0, 1.0], 1), &[0]).unwrap(), 0.5));
        assert!(close(migh_pmf(&params(&[1.0, 1.0], 1), &[1]).unwrap(), 0.5));
        assert!(close(
            migh_pmf(&params(&[-1.0, -1.0], 1), &[1]).unwrap(),
            1.0 / 6.0
        ));
        assert_eq!(migh_pmf(&params(&[1.0, 1.0], 1), &[2]).unwrap(), 0.0);
        assert!(matches!(
            migh_pmf(&params(&[1.0, 1.0], 1), &[0, 0]),
            Err(DistributionError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn support_masses_match_pmf() {
        let p = params(&[-2.5, -1.2, -0.7], 2);
        let s = migh_support(&p, 1e-3).unwrap();
        for (x, m) in s.iter() {
            let direct = migh_pmf(&p, &x[1..]).unwrap();
            assert!((direct - m).abs() <= 1e-13 * direct, "{x}");
        }
    }

    #[test]
    fn closed_form_means() {
        assert_eq!(migh_mean(&params(&[1.0, 1.0], 1)).means, vec![1.0]);
        // gamma = 3 sits on the boundary C_0/N = (gamma-1)/N and is rejected
        assert!(validate_migh(&[2.0, 4.0, 6.0], 3).is_err());
        assert_eq!(
            migh_mean(&params(&[2.0, 4.0, 6.0], 2)).means,
            vec![4.0, 6.0]
        );
        assert_eq!(migh_mean(&params(&[-2.0, -3.0], 2)).means, vec![3.0]);
        assert!(migh_mean(&params(&[1.0, 1.0], 1)).variances.is_none());
    }

    #[test]
    fn enumerated_mean_of_unit_weights() {
        // the finite support {(1,0), (1,1)} has masses 1/2, 1/2
        let s = migh_support(&params(&[1.0, 1.0], 1), 0.0).unwrap();
        let mean: f64 = s.iter().map(|(x, m)| f64::from(x[1]) * m).sum();
        assert!((mean - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampler_frequency_finite_support() {
        let trials = 100_000;
        let draws = migh_sample(&params(&[1.0, 1.0], 1), 11, trials).unwrap();
        let zeros = draws.iter().filter(|x| x[0] == 0).count() as f64 / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((zeros - 0.5).abs() <= 3.0 * sigma, "freq = {zeros}");
    }

    #[test]
    fn chain_terminates_and_is_deterministic() {
        let p = params(&[-1.0, -1.0], 1);
        let a = migh_sample(&p, 5, 2000).unwrap();
        assert_eq!(a.len(), 2000);
        assert_eq!(a, migh_sample(&p, 5, 2000).unwrap());
        // P(x_1 = 0) = 1/2
        let zeros = a.iter().filter(|x| x[0] == 0).count();
        assert!((800..1200).contains(&zeros));
    }

    #[test]
    fn chain_reports_step_cap() {
        let p = params(&[-1.0, -50.0], 1);
        assert_eq!(
            migh_sample_with_cap(&p, 1, 100, 3),
            Err(DistributionError::StepCapExceeded(3))
        );
    }

    proptest::proptest! {
        #[test]
        fn masses_are_nonnegative_on_the_support(
            c0 in 0.3f64..6.0,
            rest in proptest::collection::vec(0.3f64..6.0, 1..3),
            negative: bool,
            gamma in 1u32..4,
        ) {
            // heavier tails than C_0 = -2 need far more tuples to reach the target mass
            let w: Vec<f64> = if negative {
                std::iter::once(-2.0 - c0).chain(rest.iter().map(|v| -v)).collect()
            } else {
                std::iter::once(c0).chain(rest).collect()
            };
            if let Ok(p) = MighParams::new(w, gamma) {
                let eps = if p.finite_support() { 0.0 } else { 1e-2 };
                for (x, m) in migh_support(&p, eps).unwrap().iter() {
                    proptest::prop_assert!(m >= 0.0, "{x}: {m}");
                }
            }
        }
    }
}
