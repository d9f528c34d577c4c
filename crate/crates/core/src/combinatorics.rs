//! Real-argument combinatorial primitives.
//!
//! Everything here is evaluated through explicit products. The gamma-ratio
//! form of the generalized binomial coefficient is never used: it has poles
//! at the nonpositive integers where the product form is perfectly finite.
//!
//! Long products are carried as a mantissa plus a binary exponent
//! ([`Scaled`]), so intermediate values never overflow or underflow; only a
//! final result outside the `f64` range is reported as an error.

use std::ops::ControlFlow;

use crate::error::CombinatoricsError;

/// Upper bound on the order `k` accepted by the coefficient functions.
pub const MAX_ORDER: u64 = 10_000;

const RESCALE_BITS: i32 = 512;
const RESCALE_HI: f64 = 1.340_780_792_994_259_7e154; // 2^512
const RESCALE_LO: f64 = 7.458_340_731_200_207e-155; // 2^-512

/// A real number stored as `mantissa * 2^exponent`.
///
/// Rescaling is by exact powers of two, so multiplying a long chain of
/// factors through `Scaled` rounds exactly like the plain `f64` product
/// would have, minus the overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled {
    mantissa: f64,
    exponent: i64,
}

impl Scaled {
    pub(crate) const ONE: Scaled = Scaled {
        mantissa: 1.0,
        exponent: 0,
    };

    pub(crate) fn from_f64(value: f64) -> Self {
        Scaled {
            mantissa: value,
            exponent: 0,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return self;
        }
        while self.mantissa.abs() >= RESCALE_HI {
            self.mantissa *= RESCALE_LO;
            self.exponent += i64::from(RESCALE_BITS);
        }
        while self.mantissa.abs() <= RESCALE_LO {
            self.mantissa *= RESCALE_HI;
            self.exponent -= i64::from(RESCALE_BITS);
        }
        self
    }

    pub(crate) fn mul_f64(self, factor: f64) -> Self {
        Scaled {
            mantissa: self.mantissa * factor,
            exponent: self.exponent,
        }
        .normalized()
    }

    pub(crate) fn div_f64(self, divisor: f64) -> Self {
        Scaled {
            mantissa: self.mantissa / divisor,
            exponent: self.exponent,
        }
        .normalized()
    }

    pub(crate) fn mul(self, other: Scaled) -> Self {
        Scaled {
            mantissa: self.mantissa * other.mantissa,
            exponent: self.exponent + other.exponent,
        }
        .normalized()
    }

    pub(crate) fn div(self, other: Scaled) -> Self {
        Scaled {
            mantissa: self.mantissa / other.mantissa,
            exponent: self.exponent - other.exponent,
        }
        .normalized()
    }

    /// Collapses to a plain `f64`; values below the subnormal range become 0.
    pub(crate) fn to_f64(self) -> Result<f64, CombinatoricsError> {
        if self.mantissa == 0.0 {
            return Ok(0.0);
        }
        let mut value = self.mantissa;
        let mut exponent = self.exponent;
        while exponent > 0 {
            let step = exponent.min(1000);
            value *= 2f64.powi(step as i32);
            exponent -= step;
            if value.is_infinite() {
                return Err(CombinatoricsError::Overflow);
            }
        }
        while exponent < 0 {
            let step = (-exponent).min(1000);
            value *= 2f64.powi(-(step as i32));
            exponent += step;
            if value == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(value)
    }
}

fn check_args(t: f64, k: u64) -> Result<(), CombinatoricsError> {
    if !t.is_finite() {
        return Err(CombinatoricsError::NonFinite(t));
    }
    if k > MAX_ORDER {
        return Err(CombinatoricsError::OrderTooLarge {
            order: k,
            limit: MAX_ORDER,
        });
    }
    Ok(())
}

pub(crate) fn falling_factorial_scaled(t: f64, k: u64) -> Scaled {
    (1..=k).fold(Scaled::ONE, |acc, l| acc.mul_f64(t - (l as f64) + 1.0))
}

pub(crate) fn factorial_scaled(k: u64) -> Scaled {
    (2..=k).fold(Scaled::ONE, |acc, j| acc.mul_f64(j as f64))
}

/// `prod_{l=1}^{k} (t - l + 1)`, the falling factorial of a real `t`.
///
/// The empty product (`k = 0`) is 1.
pub fn falling_factorial(t: f64, k: u64) -> Result<f64, CombinatoricsError> {
    check_args(t, k)?;
    falling_factorial_scaled(t, k).to_f64()
}

/// Exact binomial coefficient of nonnegative integers, `None` on u128 overflow.
fn binom_u128(m: u64, k: u64) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let base = u128::from(m - k);
    let mut acc: u128 = 1;
    for j in 1..=u128::from(k) {
        acc = acc.checked_mul(base + j)? / j;
    }
    Some(acc)
}

/// Integer fast path: `Some((negative, |value|))` when `t` is an integer whose
/// coefficient fits in u128.
fn gen_binom_integer(t: f64, k: u64) -> Option<(bool, u128)> {
    const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53
    if t.fract() != 0.0 || t.abs() > EXACT_LIMIT {
        return None;
    }
    if t >= 0.0 {
        binom_u128(t as u64, k).map(|v| (false, v))
    } else {
        // C(-m, k) = (-1)^k C(m + k - 1, k)
        let m = (-t) as u64;
        let top = m.checked_add(k)? - 1;
        binom_u128(top, k).map(|v| (k % 2 == 1, v))
    }
}

pub(crate) fn gen_binom_scaled(t: f64, k: u64) -> Scaled {
    if let Some((negative, magnitude)) = gen_binom_integer(t, k) {
        let value = magnitude as f64;
        return Scaled::from_f64(if negative { -value } else { value });
    }
    falling_factorial_scaled(t, k).div(factorial_scaled(k))
}

/// Generalized binomial coefficient `falling_factorial(t, k) / k!`.
///
/// Integer `t` goes through exact integer arithmetic, so classical binomials
/// come out as the correctly rounded integer. For a nonnegative integer
/// `t < k` the result is exactly 0.
pub fn gen_binom(t: f64, k: u64) -> Result<f64, CombinatoricsError> {
    check_args(t, k)?;
    gen_binom_scaled(t, k).to_f64()
}

pub(crate) fn multinomial_scaled(x: &[u32]) -> Scaled {
    let mut exact: Option<u128> = Some(1);
    let mut partial: u64 = 0;
    for &xi in x {
        partial += u64::from(xi);
        exact = exact.and_then(|acc| acc.checked_mul(binom_u128(partial, u64::from(xi))?));
    }
    if let Some(value) = exact {
        return Scaled::from_f64(value as f64);
    }
    let mut acc = Scaled::ONE;
    let mut partial: u64 = 0;
    for &xi in x {
        partial += u64::from(xi);
        acc = acc.mul(gen_binom_scaled(partial as f64, u64::from(xi)));
    }
    acc
}

/// Multinomial coefficient `n! / (x_0! x_1! ... x_k!)` with `n = sum(x)`.
pub fn multinomial_coeff(x: &[u32]) -> Result<f64, CombinatoricsError> {
    let total: u64 = x.iter().map(|&v| u64::from(v)).sum();
    if total > MAX_ORDER {
        return Err(CombinatoricsError::OrderTooLarge {
            order: total,
            limit: MAX_ORDER,
        });
    }
    multinomial_scaled(x).to_f64()
}

/// Marker for an uncapped coordinate in [`for_each_bounded_composition`].
pub const NO_CAP: u32 = u32::MAX;

/// Visits every tuple of nonnegative integers of length `caps.len()` that sums
/// to `total` with `x[i] <= caps[i]`, in ascending lexicographic order.
///
/// The visitor can stop the walk early by returning `ControlFlow::Break`.
pub fn for_each_bounded_composition<B>(
    total: u32,
    caps: &[u32],
    mut visit: impl FnMut(&[u32]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if caps.is_empty() {
        return if total == 0 {
            visit(&[])
        } else {
            ControlFlow::Continue(())
        };
    }
    // suffix_cap[i] = sum of caps[i..], saturating
    let mut suffix_cap = vec![0u64; caps.len() + 1];
    for i in (0..caps.len()).rev() {
        suffix_cap[i] = suffix_cap[i + 1].saturating_add(u64::from(caps[i]));
    }
    if suffix_cap[0] < u64::from(total) {
        return ControlFlow::Continue(());
    }
    let mut x = vec![0u32; caps.len()];
    walk(0, total, caps, &suffix_cap, &mut x, &mut visit)
}

fn walk<B>(
    pos: usize,
    remaining: u32,
    caps: &[u32],
    suffix_cap: &[u64],
    x: &mut [u32],
    visit: &mut impl FnMut(&[u32]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if pos + 1 == caps.len() {
        if remaining > caps[pos] {
            return ControlFlow::Continue(());
        }
        x[pos] = remaining;
        return visit(x);
    }
    let rest_cap = suffix_cap[pos + 1];
    let lo = u64::from(remaining).saturating_sub(rest_cap) as u32;
    let hi = remaining.min(caps[pos]);
    for v in lo..=hi {
        x[pos] = v;
        walk(pos + 1, remaining - v, caps, suffix_cap, x, visit)?;
    }
    ControlFlow::Continue(())
}

/// Collects [`for_each_bounded_composition`] into a vector.
pub fn bounded_compositions(total: u32, caps: &[u32]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let _ = for_each_bounded_composition::<()>(total, caps, |x| {
        out.push(x.to_vec());
        ControlFlow::Continue(())
    });
    out
}

/// Lazily extended table of `prod_{j=1}^{x} (base + (j-1) step) / j`.
///
/// With `step = -1` entry `x` is `gen_binom(base, x)`; with an urn's
/// reinforcement as `step` it is the rising product over `x!`. Entries are
/// built by the multiplicative recurrence, so each costs one multiply.
#[derive(Debug, Clone)]
pub(crate) struct FactorTable {
    base: f64,
    step: f64,
    values: Vec<Scaled>,
}

impl FactorTable {
    pub(crate) fn new(base: f64, step: f64) -> Self {
        FactorTable {
            base,
            step,
            values: vec![Scaled::ONE],
        }
    }

    pub(crate) fn binomial(t: f64) -> Self {
        Self::new(t, -1.0)
    }

    pub(crate) fn get(&mut self, x: u32) -> Scaled {
        let x = x as usize;
        while self.values.len() <= x {
            let j = self.values.len() as f64;
            let last = *self.values.last().expect("table starts non-empty");
            let factor = self.base + (j - 1.0) * self.step;
            self.values.push(last.mul_f64(factor).div_f64(j));
        }
        self.values[x]
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
