//! Integer Pólya-Eggenberger urns and the map from real weights to urns.
//!
//! An urn starts with `a_i` balls of color `i`. After each draw the ball goes
//! back together with `c` extra balls of its color (`c < 0` removes balls).
//! A color whose count drops to zero or below, i.e. whose remaining balls
//! after the draw are no more than `-(c + 1)`, is eliminated from the urn.
//!
//! Trace for `a = (5, 5)`, `c = -2`, drawing color 0 three times:
//! counts 5 → 3 → 1 → -1; the third draw is allowed because one ball was
//! present, and color 0 is eliminated afterwards. This matches the PMF
//! support condition `a_i + (x_i - 1) c > 0`.
//!
//! [`derive_urn_params`] builds the urn for a real parameter set at a given
//! scale `a`: `c = -ceil(a/N)`, `a_i = floor(a C_i / N)` for the non-residual
//! colors and the residual color takes `a - sum(others)`.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    for_each_bounded_composition, multinomial_scaled, CompensatedSum, FactorTable, Scaled, NO_CAP,
};
use crate::distributions::{
    mgh_support, migh_support, MghParams, MighParams, MomentReport, Outcome, SupportSet,
    DEFAULT_STEP_CAP, ENUMERATION_BUDGET,
};
use crate::error::{DistributionError, UrnError};
use crate::rng::seeded;

/// Scale cap for [`stabilize_support`].
pub const STABILIZATION_CAP: u64 = 1 << 40;

/// Draw counts beyond `gamma` compared when the inverse support is infinite.
pub const INFINITE_SUPPORT_WINDOW: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnParams {
    balls: Vec<i64>,
    reinforcement: i64,
    total: i64,
}

impl UrnParams {
    pub fn new(balls: Vec<i64>, reinforcement: i64) -> Result<Self, UrnError> {
        if balls.len() < 2 {
            return Err(UrnError::InvalidUrn(format!(
                "need at least two colors, got {}",
                balls.len()
            )));
        }
        if let Some(index) = balls.iter().position(|&b| b < 1) {
            return Err(UrnError::NonPositiveBallCount {
                index,
                count: balls[index],
            });
        }
        let total = balls
            .iter()
            .try_fold(0i64, |acc, &b| acc.checked_add(b))
            .ok_or_else(|| UrnError::InvalidUrn("ball total overflows".into()))?;
        Ok(UrnParams {
            balls,
            reinforcement,
            total,
        })
    }

    pub fn balls(&self) -> &[i64] {
        &self.balls
    }

    pub fn reinforcement(&self) -> i64 {
        self.reinforcement
    }

    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn colors(&self) -> usize {
        self.balls.len()
    }

    /// `a + (n - 1) c`, the ball count before the `n`-th draw.
    pub fn total_before_draw(&self, n: u64) -> i64 {
        self.total + (n as i64 - 1) * self.reinforcement
    }

    /// Whether color `i` still has balls before each of its first `x` draws.
    pub fn color_can_supply(&self, i: usize, x: u32) -> bool {
        x == 0 || self.balls[i] + (i64::from(x) - 1) * self.reinforcement > 0
    }

    /// Largest per-color count allowed by [`Self::color_can_supply`].
    fn color_cap(&self, i: usize) -> u32 {
        if self.reinforcement >= 0 {
            NO_CAP
        } else {
            let step = -self.reinforcement;
            u32::try_from((self.balls[i] - 1) / step + 1).unwrap_or(NO_CAP)
        }
    }

    /// Largest `n` with `a + (n - 1) c > 0`; `None` when unbounded.
    fn max_draws(&self) -> Option<u64> {
        (self.reinforcement < 0).then(|| ((self.total - 1) / -self.reinforcement + 1) as u64)
    }
}

fn check_len(urn: &UrnParams, expected: usize, found: usize) -> Result<(), UrnError> {
    let _ = urn;
    if expected != found {
        return Err(UrnError::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn rising(base: i64, step: i64, count: u64) -> Scaled {
    (0..count).fold(Scaled::ONE, |acc, l| {
        acc.mul_f64((base + l as i64 * step) as f64)
    })
}

/// Whether `x` has positive Pólya-Eggenberger mass for `n = sum(x)` draws.
pub fn pe_in_support(urn: &UrnParams, x: &[u32]) -> bool {
    x.len() == urn.colors()
        && urn.total_before_draw(x.iter().map(|&v| u64::from(v)).sum()) > 0
        && x.iter()
            .enumerate()
            .all(|(i, &xi)| urn.color_can_supply(i, xi))
}

/// Multivariate Pólya-Eggenberger PMF for `n` draws.
///
/// `multinomial(x) prod_i prod_{l=1}^{x_i} [a_i + (l-1)c] / prod_{l=1}^{n} [a + (l-1)c]`
/// when every drawn color can supply its draws, 0 otherwise.
pub fn pe_pmf(urn: &UrnParams, n: u32, x: &[u32]) -> Result<f64, UrnError> {
    check_len(urn, urn.colors(), x.len())?;
    let value = urn.total_before_draw(u64::from(n));
    if value <= 0 {
        return Err(UrnError::InfeasibleTotal { value });
    }
    let drawn: u64 = x.iter().map(|&v| u64::from(v)).sum();
    if drawn != u64::from(n) || !pe_in_support(urn, x) {
        return Ok(0.0);
    }
    let c = urn.reinforcement;
    let numerator = urn
        .balls
        .iter()
        .zip(x)
        .fold(multinomial_scaled(x), |acc, (&a, &xi)| {
            acc.mul(rising(a, c, u64::from(xi)))
        });
    Ok(numerator.div(rising(urn.total, c, u64::from(n))).to_f64()?)
}

/// Means `n a_i / a` and variances `n a_i (a - a_i)(a + n c) / (a^2 (a + c))`.
pub fn pe_moments(urn: &UrnParams, n: u32) -> Result<MomentReport, UrnError> {
    let value = urn.total_before_draw(u64::from(n));
    if value <= 0 {
        return Err(UrnError::InfeasibleTotal { value });
    }
    let (a, c, n) = (urn.total as f64, urn.reinforcement as f64, f64::from(n));
    let means: Vec<f64> = urn.balls.iter().map(|&ai| n * ai as f64 / a).collect();
    if a + c == 0.0 {
        return Err(DistributionError::VarianceUndefined { means }.into());
    }
    let variances = urn
        .balls
        .iter()
        .map(|&ai| {
            let ai = ai as f64;
            n * ai * (a - ai) * (a + n * c) / (a * a * (a + c))
        })
        .collect();
    Ok(MomentReport {
        means,
        variances: Some(variances),
    })
}

fn check_color_zero(urn: &UrnParams, gamma: u32) -> Result<(), UrnError> {
    let value = urn.balls[0] + urn.reinforcement * (i64::from(gamma) - 1);
    if gamma == 0 || value <= 0 {
        return Err(UrnError::InfeasibleColorZero { value });
    }
    Ok(())
}

/// Whether the free part `(x_1..x_k)` has positive inverse mass.
pub fn ipe_in_support(urn: &UrnParams, gamma: u32, x: &[u32]) -> bool {
    if x.len() + 1 != urn.colors() || check_color_zero(urn, gamma).is_err() {
        return false;
    }
    let n = u64::from(gamma) + x.iter().map(|&v| u64::from(v)).sum::<u64>();
    urn.total_before_draw(n) > 0
        && x.iter()
            .enumerate()
            .all(|(i, &xi)| urn.color_can_supply(i + 1, xi))
}

/// Inverse Pólya-Eggenberger PMF of `(x_1..x_k)` when drawing stops at the
/// `gamma`-th color-0 ball: `(gamma/n)` times the forward PMF at
/// `(gamma, x_1, ..., x_k)` with `n = gamma + sum(x)`.
pub fn ipe_pmf(urn: &UrnParams, gamma: u32, x: &[u32]) -> Result<f64, UrnError> {
    check_len(urn, urn.colors() - 1, x.len())?;
    check_color_zero(urn, gamma)?;
    let n = u64::from(gamma) + x.iter().map(|&v| u64::from(v)).sum::<u64>();
    let value = urn.total_before_draw(n);
    if value <= 0 {
        return Err(UrnError::InfeasibleTotal { value });
    }
    if !ipe_in_support(urn, gamma, x) {
        return Ok(0.0);
    }
    let c = urn.reinforcement;
    let mut full = Vec::with_capacity(x.len() + 1);
    full.push(gamma);
    full.extend_from_slice(x);
    let numerator = urn
        .balls
        .iter()
        .zip(&full)
        .fold(multinomial_scaled(&full), |acc, (&a, &xi)| {
            acc.mul(rising(a, c, u64::from(xi)))
        });
    Ok(numerator
        .mul_f64(f64::from(gamma) / n as f64)
        .div(rising(urn.total, c, n))
        .to_f64()?)
}

/// [`ipe_pmf`] over many free tuples at once, sharing the factor tables.
/// Tuples the urn cannot produce get mass 0.
pub fn ipe_masses(urn: &UrnParams, gamma: u32, tuples: &[Outcome]) -> Result<Vec<f64>, UrnError> {
    if let Some(x) = tuples.iter().find(|x| x.len() + 1 != urn.colors()) {
        return Err(UrnError::DimensionMismatch {
            expected: urn.colors() - 1,
            found: x.len(),
        });
    }
    if check_color_zero(urn, gamma).is_err() {
        return Ok(vec![0.0; tuples.len()]);
    }
    let c = urn.reinforcement as f64;
    let mut tables: Vec<FactorTable> = urn.balls[1..]
        .iter()
        .map(|&a| FactorTable::new(a as f64, c))
        .collect();
    let mut total_table = FactorTable::new(urn.total as f64, c);
    let lead = FactorTable::new(urn.balls[0] as f64, c).get(gamma);
    tuples
        .iter()
        .map(|x| {
            if !ipe_in_support(urn, gamma, x) {
                return Ok(0.0);
            }
            let n = gamma + x.iter().sum::<u32>();
            let level = lead
                .mul_f64(f64::from(gamma) / f64::from(n))
                .div(total_table.get(n));
            Ok(tables
                .iter_mut()
                .zip(x.iter())
                .fold(level, |m, (t, &xi)| m.mul(t.get(xi)))
                .to_f64()?)
        })
        .collect()
}

/// All compositions of `n` with positive mass, lexicographic, with masses.
pub fn pe_support(urn: &UrnParams, n: u32) -> Result<SupportSet, UrnError> {
    let value = urn.total_before_draw(u64::from(n));
    if value <= 0 {
        return Err(UrnError::InfeasibleTotal { value });
    }
    let caps: Vec<u32> = (0..urn.colors()).map(|i| urn.color_cap(i)).collect();
    let mut outcomes = Vec::new();
    let _ = for_each_bounded_composition::<()>(n, &caps, |x| {
        outcomes.push(Outcome::from(x));
        ControlFlow::Continue(())
    });
    let masses = outcomes
        .iter()
        .map(|x| pe_pmf(urn, n, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SupportSet {
        outcomes,
        masses,
        truncated: false,
        tail_mass_bound: 0.0,
    })
}

/// Inverse support by increasing total draws, full tuples `(gamma, x_1..x_k)`.
///
/// Finite when `c < 0`. Otherwise the walk stops once the accumulated mass
/// reaches `1 - tail_epsilon`.
pub fn ipe_support(urn: &UrnParams, gamma: u32, tail_epsilon: f64) -> Result<SupportSet, UrnError> {
    check_color_zero(urn, gamma)?;
    if !(0.0..1.0).contains(&tail_epsilon) {
        return Err(DistributionError::InvalidTailEpsilon(tail_epsilon).into());
    }
    let max_draws = urn.max_draws();
    if max_draws.is_none() && tail_epsilon == 0.0 {
        return Err(DistributionError::TailEpsilonZeroOnInfiniteSupport.into());
    }
    let c = urn.reinforcement as f64;
    let caps: Vec<u32> = (1..urn.colors()).map(|i| urn.color_cap(i)).collect();
    let mut tables: Vec<FactorTable> = urn.balls[1..]
        .iter()
        .map(|&a| FactorTable::new(a as f64, c))
        .collect();
    let mut total_table = FactorTable::new(urn.total as f64, c);
    let lead = FactorTable::new(urn.balls[0] as f64, c).get(gamma);
    let target = 1.0 - tail_epsilon;

    let mut outcomes = Vec::new();
    let mut masses = Vec::new();
    let mut acc = CompensatedSum::default();
    let mut n = gamma;
    while max_draws.is_none_or(|m| u64::from(n) <= m) {
        let level = lead
            .mul_f64(f64::from(gamma) / f64::from(n))
            .div(total_table.get(n));
        let flow = for_each_bounded_composition(n - gamma, &caps, |x| {
            if outcomes.len() >= ENUMERATION_BUDGET {
                return ControlFlow::Break(Err(UrnError::from(
                    DistributionError::EnumerationBudgetExceeded(ENUMERATION_BUDGET),
                )));
            }
            let mass = match tables
                .iter_mut()
                .zip(x)
                .fold(level, |m, (t, &xi)| m.mul(t.get(xi)))
                .to_f64()
            {
                Ok(m) => m,
                Err(e) => return ControlFlow::Break(Err(e.into())),
            };
            let mut full = Vec::with_capacity(x.len() + 1);
            full.push(gamma);
            full.extend_from_slice(x);
            outcomes.push(Outcome(full));
            masses.push(mass);
            acc.add(mass);
            if max_draws.is_none() && acc.value() >= target {
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
        n += 1;
    }
    Ok(SupportSet {
        outcomes,
        masses,
        truncated: false,
        tail_mass_bound: 0.0,
    })
}

/// Live urn state for the literal simulation.
struct UrnState<'a> {
    urn: &'a UrnParams,
    counts: Vec<i64>,
    drawn: Vec<u32>,
}

impl<'a> UrnState<'a> {
    fn new(urn: &'a UrnParams) -> Self {
        UrnState {
            urn,
            counts: urn.balls.clone(),
            drawn: vec![0; urn.colors()],
        }
    }

    fn draw(&mut self, rng: &mut impl Rng) -> Result<usize, UrnError> {
        let total: i64 = self.counts.iter().filter(|&&v| v > 0).sum();
        if total <= 0 {
            return Err(UrnError::InfeasibleTotal { value: total });
        }
        let mut r = rng.random_range(0..total as u64) as i64;
        let mut pick = 0;
        for (i, &v) in self.counts.iter().enumerate() {
            if v <= 0 {
                continue;
            }
            if r < v {
                pick = i;
                break;
            }
            r -= v;
        }
        self.drawn[pick] += 1;
        // a non-positive count means the color is eliminated
        self.counts[pick] += self.urn.reinforcement;
        Ok(pick)
    }
}

/// Simulates the urn for `n` draws per trial and returns the color counts.
///
/// With `c <= -2` and some `a_i` not a multiple of `|c|`, a color can be
/// over-drawn before further draws, and the simulated law then differs from
/// [`pe_pmf`]; the positive-mass tuples are the same.
pub fn pe_sample(
    urn: &UrnParams,
    n: u32,
    seed: u64,
    trials: usize,
) -> Result<Vec<Outcome>, UrnError> {
    let value = urn.total_before_draw(u64::from(n));
    if value <= 0 {
        return Err(UrnError::InfeasibleTotal { value });
    }
    let mut rng = seeded(seed);
    (0..trials)
        .map(|_| {
            let mut state = UrnState::new(urn);
            for _ in 0..n {
                state.draw(&mut rng)?;
            }
            Ok(Outcome(state.drawn))
        })
        .collect()
}

pub fn ipe_sample(
    urn: &UrnParams,
    gamma: u32,
    seed: u64,
    trials: usize,
) -> Result<Vec<Outcome>, UrnError> {
    ipe_sample_with_cap(urn, gamma, seed, trials, DEFAULT_STEP_CAP)
}

/// Simulates the urn until `gamma` color-0 balls have been drawn and returns
/// `(x_1..x_k)` per trial. A trial longer than `step_cap` draws is an error.
pub fn ipe_sample_with_cap(
    urn: &UrnParams,
    gamma: u32,
    seed: u64,
    trials: usize,
    step_cap: u64,
) -> Result<Vec<Outcome>, UrnError> {
    check_color_zero(urn, gamma)?;
    let mut rng = seeded(seed);
    (0..trials)
        .map(|_| {
            let mut state = UrnState::new(urn);
            let mut steps = 0u64;
            while state.drawn[0] < gamma {
                if steps >= step_cap {
                    return Err(UrnError::StepCapExceeded(step_cap));
                }
                steps += 1;
                state.draw(&mut rng)?;
            }
            Ok(Outcome(state.drawn[1..].to_vec()))
        })
        .collect()
}

/// A real parameter set an urn can be derived from.
#[derive(Debug, Clone, Copy)]
pub enum UrnSource<'a> {
    Mgh(&'a MghParams),
    Migh(&'a MighParams),
}

impl UrnSource<'_> {
    pub fn weights(&self) -> &[f64] {
        match self {
            UrnSource::Mgh(p) => p.weights(),
            UrnSource::Migh(p) => p.weights(),
        }
    }

    pub fn total(&self) -> f64 {
        match self {
            UrnSource::Mgh(p) => p.total(),
            UrnSource::Migh(p) => p.total(),
        }
    }

    /// Residual color for the support search: for MGH with `N > 0`, the first
    /// color with a non-integer weight; color 0 otherwise.
    pub fn preferred_residual(&self) -> usize {
        match self {
            UrnSource::Mgh(p) if p.total() > 0.0 => p
                .weights()
                .iter()
                .position(|c| c.fract() != 0.0)
                .unwrap_or(0),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnDerivation {
    pub a_scale: u64,
    pub urn: UrnParams,
    pub residual: usize,
    /// `a_0 + (gamma - 1) c > 0`; only reported for inverse sources.
    pub color_zero_feasible: Option<bool>,
}

/// Urn at scale `a` with color 0 as the residual color.
pub fn derive_urn_params(source: UrnSource<'_>, a_scale: u64) -> Result<UrnDerivation, UrnError> {
    derive_urn_params_with_residual(source, a_scale, 0)
}

pub fn derive_urn_params_with_residual(
    source: UrnSource<'_>,
    a_scale: u64,
    residual: usize,
) -> Result<UrnDerivation, UrnError> {
    let weights = source.weights();
    let total = source.total();
    if residual >= weights.len() {
        return Err(UrnError::InvalidUrn(format!(
            "residual color {residual} out of range"
        )));
    }
    let a = a_scale as f64;
    for (index, &c) in weights.iter().enumerate() {
        if index != residual && a <= total / c {
            return Err(UrnError::ScaleTooSmall {
                a_scale,
                index,
                bound: total / c,
            });
        }
    }
    let reinforcement = -((a / total).ceil() as i64);
    let mut balls: Vec<i64> = weights
        .iter()
        .map(|&c| (a * c / total).floor() as i64)
        .collect();
    let others: i64 = balls
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != residual)
        .map(|(_, &b)| b)
        .sum();
    balls[residual] = a_scale as i64 - others;
    if let Some(index) = balls.iter().position(|&b| b <= 0) {
        return Err(UrnError::NonPositiveBallCount {
            index,
            count: balls[index],
        });
    }
    let urn = UrnParams::new(balls, reinforcement)?;
    let color_zero_feasible = match source {
        UrnSource::Mgh(_) => None,
        UrnSource::Migh(p) => Some(check_color_zero(&urn, p.gamma()).is_ok()),
    };
    Ok(UrnDerivation {
        a_scale,
        urn,
        residual,
        color_zero_feasible,
    })
}

/// Target support of the real distribution. For an infinite inverse support
/// only tuples with `n <= gamma + INFINITE_SUPPORT_WINDOW` are listed.
pub fn target_support(source: UrnSource<'_>) -> Result<BTreeSet<Outcome>, UrnError> {
    Ok(match source {
        UrnSource::Mgh(p) => mgh_support(p)?.outcomes.into_iter().collect(),
        UrnSource::Migh(p) if p.finite_support() => {
            migh_support(p, 0.0)?.outcomes.into_iter().collect()
        }
        UrnSource::Migh(p) => {
            let mut out = BTreeSet::new();
            let free = vec![NO_CAP; p.colors() - 1];
            for extra in 0..=INFINITE_SUPPORT_WINDOW {
                let _ = for_each_bounded_composition::<()>(extra, &free, |x| {
                    out.insert(full_tuple(p.gamma(), x));
                    ControlFlow::Continue(())
                });
            }
            out
        }
    })
}

fn full_tuple(gamma: u32, x: &[u32]) -> Outcome {
    let mut full = Vec::with_capacity(x.len() + 1);
    full.push(gamma);
    full.extend_from_slice(x);
    Outcome(full)
}

/// The positive-mass set of the derived urn, on the same tuple universe as
/// [`target_support`]. `None` when the urn cannot run at all.
pub fn urn_support(source: UrnSource<'_>, urn: &UrnParams) -> Option<BTreeSet<Outcome>> {
    let mut out = BTreeSet::new();
    match source {
        UrnSource::Mgh(p) => {
            if urn.total_before_draw(u64::from(p.draws())) <= 0 {
                return None;
            }
            let free = vec![NO_CAP; p.colors()];
            let _ = for_each_bounded_composition::<()>(p.draws(), &free, |x| {
                if pe_in_support(urn, x) {
                    out.insert(Outcome::from(x));
                }
                ControlFlow::Continue(())
            });
        }
        UrnSource::Migh(p) => {
            check_color_zero(urn, p.gamma()).ok()?;
            let last = if p.finite_support() {
                urn.max_draws()? as u32
            } else {
                p.gamma() + INFINITE_SUPPORT_WINDOW
            };
            let free = vec![NO_CAP; p.colors() - 1];
            for n in p.gamma()..=last {
                let _ = for_each_bounded_composition::<()>(n - p.gamma(), &free, |x| {
                    if ipe_in_support(urn, p.gamma(), x) {
                        out.insert(full_tuple(p.gamma(), x));
                    }
                    ControlFlow::Continue(())
                });
            }
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizedSupport {
    pub derivation: UrnDerivation,
    pub doublings: u32,
}

fn smallest_feasible_scale(source: UrnSource<'_>, residual: usize) -> u64 {
    let total = source.total();
    let bound = source
        .weights()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != residual)
        .map(|(_, &c)| total / c)
        .fold(0.0f64, f64::max);
    let mut start = (bound.floor() as u64 + 1).max(1);
    if source.weights().iter().all(|c| c.fract() == 0.0) {
        // integer weights: stay on multiples of |N| where the urn is exact
        let step = total.abs() as u64;
        start = start.div_ceil(step) * step;
        if (start as f64) <= bound {
            start += step;
        }
    }
    start
}

/// Doubles the scale from the smallest feasible one until the urn support
/// equals the target support at three consecutive scales.
pub fn stabilize_support(source: UrnSource<'_>) -> Result<StabilizedSupport, UrnError> {
    let residual = source.preferred_residual();
    let target = target_support(source)?;
    let mut a_scale = smallest_feasible_scale(source, residual);
    let mut streak = 0;
    let mut doublings = 0;
    while a_scale <= STABILIZATION_CAP {
        let matches = match derive_urn_params_with_residual(source, a_scale, residual) {
            Ok(d) => urn_support(source, &d.urn).is_some_and(|s| s == target),
            Err(UrnError::NonPositiveBallCount { .. }) => false,
            Err(e) => return Err(e),
        };
        streak = if matches { streak + 1 } else { 0 };
        if streak == 3 {
            let derivation = derive_urn_params_with_residual(source, a_scale, residual)?;
            return Ok(StabilizedSupport {
                derivation,
                doublings,
            });
        }
        a_scale *= 2;
        doublings += 1;
    }
    Err(UrnError::StabilizationFailed(STABILIZATION_CAP))
}
