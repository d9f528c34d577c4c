//! Brute-force verification reports: normalization, moments, convergence of
//! the urn construction and chi-square goodness of fit.
//!
//! For normalization and moment reports `pass` holds exactly when every row
//! satisfies `|deviation| <= tolerance`. Convergence and GOF reports carry
//! their own rule, described on [`convergence_table`] and [`gof_check`].

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::combinatorics::{for_each_bounded_composition, CompensatedSum, NO_CAP};
use crate::distributions::{
    mgh_moments, mgh_pmf, mgh_sample, mgh_support, migh_mean, migh_sample, migh_support, MghParams,
    MighParams, Outcome, SupportSet,
};
use crate::error::{OracleError, UrnError};
use crate::urn::{
    derive_urn_params_with_residual, ipe_masses, ipe_sample, ipe_support, pe_moments, pe_pmf,
    pe_sample, pe_support, UrnParams, UrnSource,
};

/// GOF reports pass when the p-value is at least this.
pub const GOF_THRESHOLD: f64 = 0.001;

/// Expected count below which GOF bins are pooled.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

/// Relative growth allowed between consecutive convergence rows.
pub const CONVERGENCE_SLACK: f64 = 1.1;

/// Absolute noise floor for the nonincreasing check.
pub const CONVERGENCE_NOISE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Normalization,
    Moments,
    Convergence,
    Gof,
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportKind::Normalization => "normalization",
            ReportKind::Moments => "moments",
            ReportKind::Convergence => "convergence",
            ReportKind::Gof => "gof",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub expected: f64,
    pub observed: f64,
    pub deviation: f64,
}

impl ReportRow {
    fn new(label: impl Into<String>, expected: f64, observed: f64, deviation: f64) -> Self {
        ReportRow {
            label: label.into(),
            expected,
            observed,
            deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: ReportKind,
    pub rows: Vec<ReportRow>,
    pub pass: bool,
    pub tolerance: f64,
}

impl VerificationReport {
    fn by_rows(kind: ReportKind, rows: Vec<ReportRow>, tolerance: f64) -> Self {
        let pass = rows.iter().all(|r| r.deviation.abs() <= tolerance);
        VerificationReport {
            kind,
            rows,
            pass,
            tolerance,
        }
    }

    pub fn max_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.deviation.abs())
            .fold(0.0, f64::max)
    }
}

/// A distribution the oracle can enumerate and sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Mgh(MghParams),
    Migh {
        params: MighParams,
        tail_epsilon: f64,
    },
    Pe {
        urn: UrnParams,
        draws: u32,
    },
    Ipe {
        urn: UrnParams,
        gamma: u32,
        tail_epsilon: f64,
    },
}

impl Target {
    fn is_inverse(&self) -> bool {
        matches!(self, Target::Migh { .. } | Target::Ipe { .. })
    }

    /// Enumerated support with full tuples.
    pub fn support(&self) -> Result<SupportSet, OracleError> {
        Ok(match self {
            Target::Mgh(p) => mgh_support(p)?,
            Target::Migh {
                params,
                tail_epsilon,
            } => migh_support(params, *tail_epsilon)?,
            Target::Pe { urn, draws } => pe_support(urn, *draws)?,
            Target::Ipe {
                urn,
                gamma,
                tail_epsilon,
            } => ipe_support(urn, *gamma, *tail_epsilon)?,
        })
    }

    /// Masses keyed like the samplers' output: inverse targets drop the
    /// fixed leading `gamma`.
    pub fn mass_table(&self) -> Result<MassTable, OracleError> {
        let support = self.support()?;
        let strip = usize::from(self.is_inverse());
        Ok(MassTable {
            outcomes: support
                .outcomes
                .iter()
                .map(|x| Outcome::from(&x[strip..]))
                .collect(),
            masses: support.masses,
            tail_mass: support.tail_mass_bound,
        })
    }

    pub fn sample(&self, seed: u64, trials: usize) -> Result<Vec<Outcome>, OracleError> {
        Ok(match self {
            Target::Mgh(p) => mgh_sample(p, seed, trials)?,
            Target::Migh { params, .. } => migh_sample(params, seed, trials)?,
            Target::Pe { urn, draws } => pe_sample(urn, *draws, seed, trials)?,
            Target::Ipe { urn, gamma, .. } => ipe_sample(urn, *gamma, seed, trials)?,
        })
    }
}

/// Analytic masses for a GOF test. `tail_mass` is the mass not listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassTable {
    pub outcomes: Vec<Outcome>,
    pub masses: Vec<f64>,
    pub tail_mass: f64,
}

impl MassTable {
    /// The same table with the masses of entries `i` and `j` exchanged.
    pub fn with_swapped(mut self, i: usize, j: usize) -> Self {
        self.masses.swap(i, j);
        self
    }
}

fn check_tolerance(tol: f64) -> Result<(), OracleError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(OracleError::InvalidTolerance(tol));
    }
    Ok(())
}

/// Sums the enumerated masses.
///
/// A complete support gives the row `|sum - 1|`. A truncated one gives three
/// rows: the shortfall against `1 - tail_epsilon`, consistency with
/// `1 - tail_mass_bound`, and the most negative mass (partial sums are
/// monotone exactly when no mass is negative).
pub fn verify_normalization(target: &Target, tol: f64) -> Result<VerificationReport, OracleError> {
    check_tolerance(tol)?;
    let support = target.support()?;
    let total = support.total_mass();
    let mut rows = Vec::new();
    if support.truncated {
        let epsilon = match target {
            Target::Migh { tail_epsilon, .. } | Target::Ipe { tail_epsilon, .. } => *tail_epsilon,
            _ => 0.0,
        };
        let goal = 1.0 - epsilon;
        rows.push(ReportRow::new(
            "accumulated mass",
            goal,
            total,
            (goal - total).max(0.0),
        ));
        let consistent = 1.0 - support.tail_mass_bound;
        rows.push(ReportRow::new(
            "tail bookkeeping",
            consistent,
            total,
            total - consistent,
        ));
        let lowest = support.masses.iter().copied().fold(0.0, f64::min);
        rows.push(ReportRow::new("monotone partial sums", 0.0, lowest, lowest));
    } else {
        rows.push(ReportRow::new("total mass", 1.0, total, total - 1.0));
    }
    Ok(VerificationReport::by_rows(
        ReportKind::Normalization,
        rows,
        tol,
    ))
}

fn relative(observed: f64, expected: f64) -> f64 {
    (observed - expected).abs() / expected.abs().max(1e-12)
}

fn enumerated_moments(
    support: &SupportSet,
    coords: std::ops::Range<usize>,
) -> (Vec<f64>, Vec<f64>) {
    let means: Vec<f64> = coords
        .clone()
        .map(|i| {
            let mut s = CompensatedSum::default();
            support.iter().for_each(|(x, m)| s.add(m * f64::from(x[i])));
            s.value()
        })
        .collect();
    let variances = coords
        .zip(&means)
        .map(|(i, &mu)| {
            let mut s = CompensatedSum::default();
            support
                .iter()
                .for_each(|(x, m)| s.add(m * (f64::from(x[i]) - mu).powi(2)));
            s.value()
        })
        .collect();
    (means, variances)
}

/// Closed-form moments against enumeration, relative deviation per
/// coordinate. MGH and PE report means and variances, MIGH means only.
pub fn moment_check(target: &Target, tol: f64) -> Result<VerificationReport, OracleError> {
    check_tolerance(tol)?;
    let (closed_means, closed_vars, first) = match target {
        Target::Mgh(p) => {
            let m = mgh_moments(p)?;
            (m.means, m.variances, 0)
        }
        Target::Pe { urn, draws } => {
            let m = pe_moments(urn, *draws)?;
            (m.means, m.variances, 0)
        }
        Target::Migh { params, .. } => (migh_mean(params).means, None, 1),
        Target::Ipe { .. } => {
            return Err(OracleError::Unsupported(
                "no closed-form moments for the inverse urn",
            ))
        }
    };
    let support = target.support()?;
    let colors = support.outcomes.first().map_or(0, |x| x.len());
    let (means, vars) = enumerated_moments(&support, first..colors);
    let mut rows: Vec<ReportRow> = closed_means
        .iter()
        .zip(&means)
        .enumerate()
        .map(|(i, (&e, &o))| ReportRow::new(format!("mean[{}]", i + first), e, o, relative(o, e)))
        .collect();
    if let Some(closed_vars) = closed_vars {
        rows.extend(
            closed_vars
                .iter()
                .zip(&vars)
                .enumerate()
                .map(|(i, (&e, &o))| {
                    ReportRow::new(format!("var[{}]", i + first), e, o, relative(o, e))
                }),
        );
    }
    Ok(VerificationReport::by_rows(ReportKind::Moments, rows, tol))
}

/// Max-abs deviation between the urn PMF and the real-weight PMF at a scale,
/// plus the first tuple where exactly one of them is zero.
fn urn_deviation(
    source: UrnSource<'_>,
    universe: &[Outcome],
    real: &[f64],
    a_scale: u64,
) -> Result<(f64, Option<Outcome>), OracleError> {
    let urn = derive_urn_params_with_residual(source, a_scale, source.preferred_residual())?.urn;
    let approx = match source {
        UrnSource::Mgh(p) => universe
            .iter()
            .map(|x| match pe_pmf(&urn, p.draws(), x) {
                Err(UrnError::InfeasibleTotal { .. }) => Ok(0.0),
                other => other,
            })
            .collect::<Result<Vec<_>, _>>()?,
        UrnSource::Migh(p) => ipe_masses(&urn, p.gamma(), universe)?,
    };
    let mut worst = 0.0f64;
    let mut mismatch = None;
    for ((x, &real), &approx) in universe.iter().zip(real).zip(&approx) {
        worst = worst.max((real - approx).abs());
        if mismatch.is_none() && (real == 0.0) != (approx == 0.0) {
            mismatch = Some(x.clone());
        }
    }
    Ok((worst, mismatch))
}

/// Tuples compared by [`convergence_table`]: every composition of `n` for
/// MGH; for MIGH every free tuple up to the largest total in the
/// real-weight support (truncated at `tail_epsilon` when infinite).
fn comparison_universe(
    source: UrnSource<'_>,
    tail_epsilon: f64,
) -> Result<Vec<Outcome>, OracleError> {
    let mut out = Vec::new();
    match source {
        UrnSource::Mgh(p) => {
            let _ = for_each_bounded_composition::<()>(p.draws(), &vec![NO_CAP; p.colors()], |x| {
                out.push(Outcome::from(x));
                ControlFlow::Continue(())
            });
        }
        UrnSource::Migh(p) => {
            let eps = if p.finite_support() {
                0.0
            } else {
                tail_epsilon
            };
            let support = migh_support(p, eps)?;
            let last = support
                .outcomes
                .iter()
                .map(|x| x.total())
                .max()
                .unwrap_or(0) as u32;
            let free = vec![NO_CAP; p.colors() - 1];
            for n in p.gamma()..=last {
                let _ = for_each_bounded_composition::<()>(n - p.gamma(), &free, |x| {
                    out.push(Outcome::from(x));
                    ControlFlow::Continue(())
                });
            }
        }
    }
    Ok(out)
}

/// One row per scale with `D(a) = max |P*_a(x) - P(x)|` over the comparison
/// tuples. Urns use the residual color of [`UrnSource::preferred_residual`]. Rows where the two supports differ are labelled with the first
/// offending tuple.
///
/// Passes when the final `D <= tol` and each `D` is at most
/// [`CONVERGENCE_SLACK`] times the previous one plus
/// [`CONVERGENCE_NOISE_FLOOR`].
pub fn convergence_table(
    source: UrnSource<'_>,
    a_scales: &[u64],
    tol: f64,
    tail_epsilon: f64,
) -> Result<VerificationReport, OracleError> {
    check_tolerance(tol)?;
    if a_scales.is_empty() {
        return Err(OracleError::Unsupported(
            "convergence table needs at least one scale",
        ));
    }
    let universe = comparison_universe(source, tail_epsilon)?;
    let real = match source {
        UrnSource::Mgh(p) => universe
            .iter()
            .map(|x| mgh_pmf(p, x))
            .collect::<Result<Vec<_>, _>>()?,
        UrnSource::Migh(p) => {
            let eps = if p.finite_support() {
                0.0
            } else {
                tail_epsilon
            };
            let support: HashMap<Outcome, f64> = migh_support(p, eps)?
                .iter()
                .map(|(x, m)| (Outcome::from(&x[1..]), m))
                .collect();
            universe
                .iter()
                .map(|x| support.get(x).copied().unwrap_or(0.0))
                .collect()
        }
    };
    let mut rows = Vec::with_capacity(a_scales.len());
    for &a in a_scales {
        let (d, mismatch) = urn_deviation(source, &universe, &real, a)?;
        let label = match mismatch {
            Some(x) => format!("a={a} support mismatch at {x}"),
            None => format!("a={a}"),
        };
        rows.push(ReportRow::new(label, 0.0, d, d));
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].deviation <= CONVERGENCE_SLACK * w[0].deviation + CONVERGENCE_NOISE_FLOOR);
    let pass = monotone && rows.last().is_some_and(|r| r.deviation <= tol);
    Ok(VerificationReport {
        kind: ReportKind::Convergence,
        rows,
        pass,
        tolerance: tol,
    })
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_p_value(statistic: f64, df: usize) -> f64 {
    if df == 0 || statistic <= 0.0 {
        return 1.0;
    }
    if statistic.is_infinite() {
        return 0.0;
    }
    gamma_ur(df as f64 / 2.0, statistic / 2.0)
}

/// Pearson chi-square test of `trials` draws from `sampler` against `pmf`.
///
/// Bins with expected count below [`MIN_EXPECTED_COUNT`], the unlisted tail
/// and any sampled tuple missing from the table share one pooled bin; a
/// pooled bin that is still sparse merges into the smallest regular bin.
/// Rows report the statistic (against its degrees of freedom) and the
/// p-value (against [`GOF_THRESHOLD`]); the report passes when
/// `p >= GOF_THRESHOLD`.
pub fn gof_check(
    sampler: &Target,
    pmf: &MassTable,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport, OracleError> {
    let required = 10 * pmf.outcomes.len();
    if trials < required {
        return Err(OracleError::InsufficientTrials {
            trials,
            support: pmf.outcomes.len(),
            required,
        });
    }
    let index: HashMap<&Outcome, usize> = pmf
        .outcomes
        .iter()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect();
    let mut counts = vec![0u64; pmf.outcomes.len()];
    let mut stray = 0u64;
    for x in sampler.sample(seed, trials)? {
        match index.get(&x) {
            Some(&i) => counts[i] += 1,
            None => stray += 1,
        }
    }
    let n = trials as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (n * pmf.tail_mass.max(0.0), stray as f64);
    for (&m, &k) in pmf.masses.iter().zip(&counts) {
        let expected = n * m;
        if expected >= MIN_EXPECTED_COUNT {
            bins.push((expected, k as f64));
        } else {
            pooled.0 += expected.max(0.0);
            pooled.1 += k as f64;
        }
    }
    if pooled.0 > 0.0 || pooled.1 > 0.0 {
        if pooled.0 < MIN_EXPECTED_COUNT && pooled.0 > 0.0 && !bins.is_empty() {
            let smallest = (0..bins.len())
                .min_by(|&i, &j| bins[i].0.total_cmp(&bins[j].0))
                .unwrap_or(0);
            bins[smallest].0 += pooled.0;
            bins[smallest].1 += pooled.1;
        } else {
            bins.push(pooled);
        }
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(e, o)| {
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let df = bins.len().saturating_sub(1);
    let p = chi_square_p_value(statistic, df);
    // keep the report finite so its JSON form round-trips
    let statistic = statistic.min(f64::MAX);
    let rows = vec![
        ReportRow::new("chi-square", df as f64, statistic, statistic - df as f64),
        ReportRow::new("p-value", GOF_THRESHOLD, p, p - GOF_THRESHOLD),
    ];
    Ok(VerificationReport {
        kind: ReportKind::Gof,
        rows,
        pass: p >= GOF_THRESHOLD,
        tolerance: GOF_THRESHOLD,
    })
}
