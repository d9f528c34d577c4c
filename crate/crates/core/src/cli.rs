//! Command-line front end.
//!
//! Exit codes: 0 on success or a passing report, 1 on a failing report,
//! 2 on usage or validation errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{
    mgh_moments, migh_mean, MghParams, MighParams, MomentReport, Outcome, SupportSet,
};
use crate::error::{DistributionError, OracleError, UrnError, ValidationError};
use crate::oracle::{
    convergence_table, gof_check, moment_check, verify_normalization, Target, VerificationReport,
};
use crate::urn::{derive_urn_params, pe_moments, UrnDerivation, UrnParams, UrnSource};

/// Tail epsilon used for infinite supports when none is given.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-6;

const DEFAULT_A_SCALES: [u64; 4] = [10, 100, 1000, 10_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Mgh,
    Migh,
    Pe,
    Ipe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// JSON parameter file accepted by `--params`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub distribution: Option<Dist>,
    pub weights: Option<Vec<f64>>,
    pub n: Option<u32>,
    pub gamma: Option<u32>,
    pub c: Option<i64>,
    pub tail_epsilon: Option<f64>,
    pub a_scales: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(
    name = "genhyper",
    version,
    about = "Generalized hypergeometric distributions and Polya urns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full support table with masses
    Pmf(DistArgs),
    /// Closed-form moments
    Moments(DistArgs),
    /// Seeded samples, one tuple per line
    Sample(DistArgs),
    /// Verification reports
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Deviation between urn and real-weight PMFs over a list of scales
    Converge(DistArgs),
    /// Urn ball counts and reinforcement at a scale
    DeriveUrn(DistArgs),
}

#[derive(Debug, Subcommand)]
enum Check {
    Normalization(DistArgs),
    Moments(DistArgs),
    Gof(DistArgs),
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    dist: Option<Dist>,
    /// Comma-separated weights, or ball counts for pe/ipe
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    gamma: Option<u32>,
    /// Reinforcement for pe/ipe
    #[arg(long, allow_hyphen_values = true)]
    c: Option<i64>,
    #[arg(long = "tail-eps")]
    tail_eps: Option<f64>,
    #[arg(long = "a-scales", value_delimiter = ',')]
    a_scales: Option<Vec<u64>>,
    #[arg(long = "a-scale")]
    a_scale: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Urn(#[from] UrnError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Fully merged inputs for one command.
#[derive(Debug, Clone, PartialEq)]
struct Inputs {
    dist: Dist,
    weights: Vec<f64>,
    n: Option<u32>,
    gamma: Option<u32>,
    c: Option<i64>,
    tail_epsilon: Option<f64>,
    a_scales: Option<Vec<u64>>,
    seed: Option<u64>,
    trials: Option<usize>,
}

fn prefer_file<T: PartialEq + Clone>(
    name: &str,
    cli: Option<T>,
    file: Option<T>,
    err: &mut dyn Write,
) -> Option<T> {
    match (cli, file) {
        (Some(c), Some(f)) => {
            if c != f {
                let _ = writeln!(
                    err,
                    "warning: {name} from the params file overrides the command line"
                );
            }
            Some(f)
        }
        (c, f) => f.or(c),
    }
}

fn merge(args: &DistArgs, err: &mut dyn Write) -> Result<Inputs, CliError> {
    let file = match &args.params {
        Some(path) => serde_json::from_str::<ParamFile>(&std::fs::read_to_string(path)?)?,
        None => ParamFile::default(),
    };
    let dist = prefer_file("distribution", args.dist, file.distribution, err)
        .ok_or_else(|| CliError::Usage("missing --dist".into()))?;
    let weights = prefer_file("weights", args.weights.clone(), file.weights, err)
        .ok_or_else(|| CliError::Usage("missing --weights".into()))?;
    let inputs = Inputs {
        dist,
        weights,
        n: prefer_file("n", args.n, file.n, err),
        gamma: prefer_file("gamma", args.gamma, file.gamma, err),
        c: prefer_file("c", args.c, file.c, err),
        tail_epsilon: prefer_file("tail_epsilon", args.tail_eps, file.tail_epsilon, err),
        a_scales: prefer_file("a_scales", args.a_scales.clone(), file.a_scales, err),
        seed: prefer_file("seed", args.seed, file.seed, err),
        trials: prefer_file("trials", args.trials, file.trials, err),
    };
    let (needs_n, needs_c) = match dist {
        Dist::Mgh => (true, false),
        Dist::Migh => (false, false),
        Dist::Pe => (true, true),
        Dist::Ipe => (false, true),
    };
    let check = |name: &str, present: bool, wanted: bool| match (present, wanted) {
        (false, true) => Err(CliError::Usage(
            format!("missing {name} for {dist:?}").to_lowercase(),
        )),
        (true, false) => Err(CliError::Usage(
            format!("{name} does not apply to {dist:?}").to_lowercase(),
        )),
        _ => Ok(()),
    };
    check("n", inputs.n.is_some(), needs_n)?;
    check("gamma", inputs.gamma.is_some(), !needs_n)?;
    check("c", inputs.c.is_some(), needs_c)?;
    Ok(inputs)
}

fn ball_counts(weights: &[f64]) -> Result<Vec<i64>, CliError> {
    weights
        .iter()
        .map(|&w| {
            if w.fract() == 0.0 && w.abs() < 9.0e15 {
                Ok(w as i64)
            } else {
                Err(UrnError::InvalidUrn(format!("ball count {w} is not an integer")).into())
            }
        })
        .collect()
}

fn build_target(inputs: &Inputs) -> Result<Target, CliError> {
    Ok(match inputs.dist {
        Dist::Mgh => Target::Mgh(MghParams::new(
            inputs.weights.clone(),
            inputs.n.unwrap_or_default(),
        )?),
        Dist::Migh => {
            let params = MighParams::new(inputs.weights.clone(), inputs.gamma.unwrap_or_default())?;
            let fallback = if params.finite_support() {
                0.0
            } else {
                DEFAULT_TAIL_EPSILON
            };
            Target::Migh {
                params,
                tail_epsilon: inputs.tail_epsilon.unwrap_or(fallback),
            }
        }
        Dist::Pe => Target::Pe {
            urn: UrnParams::new(ball_counts(&inputs.weights)?, inputs.c.unwrap_or_default())?,
            draws: inputs.n.unwrap_or_default(),
        },
        Dist::Ipe => {
            let urn = UrnParams::new(ball_counts(&inputs.weights)?, inputs.c.unwrap_or_default())?;
            let fallback = if urn.reinforcement() < 0 {
                0.0
            } else {
                DEFAULT_TAIL_EPSILON
            };
            Target::Ipe {
                urn,
                gamma: inputs.gamma.unwrap_or_default(),
                tail_epsilon: inputs.tail_epsilon.unwrap_or(fallback),
            }
        }
    })
}

fn with_source<R>(
    target: &Target,
    f: impl FnOnce(UrnSource<'_>) -> Result<R, CliError>,
) -> Result<R, CliError> {
    match target {
        Target::Mgh(p) => f(UrnSource::Mgh(p)),
        Target::Migh { params, .. } => f(UrnSource::Migh(params)),
        _ => Err(CliError::Usage(
            "this command needs --dist mgh or --dist migh".into(),
        )),
    }
}

/// Shortest round-trip form, in exponent notation for very small or large magnitudes.
fn real(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn tuple_header(prefix_zero: bool, width: usize) -> Vec<String> {
    let first = usize::from(!prefix_zero);
    (first..first + width).map(|i| format!("x{i}")).collect()
}

fn write_support(
    out: &mut dyn Write,
    support: &SupportSet,
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(support)?)?,
        Format::Csv => {
            let width = support.outcomes.first().map_or(0, |x| x.len());
            let mut w = csv::Writer::from_writer(out);
            let mut header = tuple_header(true, width);
            header.push("mass".into());
            w.write_record(&header)?;
            for (x, m) in support.iter() {
                let mut record: Vec<String> = x.iter().map(u32::to_string).collect();
                record.push(real(m));
                w.write_record(&record)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn write_samples(
    out: &mut dyn Write,
    samples: &[Outcome],
    inverse: bool,
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(samples)?)?,
        Format::Csv => {
            let width = samples.first().map_or(0, |x| x.len());
            let mut w = csv::Writer::from_writer(out);
            w.write_record(tuple_header(!inverse, width))?;
            for x in samples {
                w.write_record(x.iter().map(u32::to_string))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn write_moments(
    out: &mut dyn Write,
    moments: &MomentReport,
    first: usize,
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(moments)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["coordinate", "mean", "variance"])?;
            for (i, m) in moments.means.iter().enumerate() {
                let var = moments
                    .variances
                    .as_ref()
                    .map_or(String::new(), |v| real(v[i]));
                w.write_record([(i + first).to_string(), real(*m), var])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn write_report(
    out: &mut dyn Write,
    err: &mut dyn Write,
    report: &VerificationReport,
    format: Format,
) -> Result<i32, CliError> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(report)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["label", "expected", "observed", "deviation"])?;
            for r in &report.rows {
                w.write_record([
                    r.label.clone(),
                    real(r.expected),
                    real(r.observed),
                    real(r.deviation),
                ])?;
            }
            w.flush()?;
        }
    }
    let verdict = if report.pass { "pass" } else { "fail" };
    writeln!(
        err,
        "{}: {verdict} (tolerance {})",
        report.kind,
        real(report.tolerance)
    )?;
    Ok(if report.pass { 0 } else { 1 })
}

fn write_derivation(
    out: &mut dyn Write,
    d: &UrnDerivation,
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(d)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["a_scale".to_string(), "c".to_string()];
            header.extend((0..d.urn.colors()).map(|i| format!("a_{i}")));
            let mut record = vec![d.a_scale.to_string(), d.urn.reinforcement().to_string()];
            record.extend(d.urn.balls().iter().map(i64::to_string));
            if let Some(ok) = d.color_zero_feasible {
                header.push("color_zero_feasible".into());
                record.push(ok.to_string());
            }
            w.write_record(&header)?;
            w.write_record(&record)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Pmf(args) => {
            let target = build_target(&merge(&args, err)?)?;
            write_support(out, &target.support()?, args.format)?;
            Ok(0)
        }
        Command::Moments(args) => {
            let target = build_target(&merge(&args, err)?)?;
            let (moments, first) = match &target {
                Target::Mgh(p) => (mgh_moments(p)?, 0),
                Target::Migh { params, .. } => (migh_mean(params), 1),
                Target::Pe { urn, draws } => (pe_moments(urn, *draws)?, 0),
                Target::Ipe { .. } => {
                    return Err(OracleError::Unsupported(
                        "no closed-form moments for the inverse urn",
                    )
                    .into())
                }
            };
            write_moments(out, &moments, first, args.format)?;
            Ok(0)
        }
        Command::Sample(args) => {
            let inputs = merge(&args, err)?;
            let target = build_target(&inputs)?;
            let samples = target.sample(inputs.seed.unwrap_or(0), inputs.trials.unwrap_or(1))?;
            write_samples(
                out,
                &samples,
                matches!(inputs.dist, Dist::Migh | Dist::Ipe),
                args.format,
            )?;
            Ok(0)
        }
        Command::Verify { check } => match check {
            Check::Normalization(args) => {
                let target = build_target(&merge(&args, err)?)?;
                let report = verify_normalization(&target, args.tol.unwrap_or(1e-9))?;
                write_report(out, err, &report, args.format)
            }
            Check::Moments(args) => {
                let target = build_target(&merge(&args, err)?)?;
                let report = moment_check(&target, args.tol.unwrap_or(1e-8))?;
                write_report(out, err, &report, args.format)
            }
            Check::Gof(args) => {
                let inputs = merge(&args, err)?;
                let target = build_target(&inputs)?;
                let table = target.mass_table()?;
                let report = gof_check(
                    &target,
                    &table,
                    inputs.trials.unwrap_or(100_000),
                    inputs.seed.unwrap_or(0),
                )?;
                write_report(out, err, &report, args.format)
            }
        },
        Command::Converge(args) => {
            let inputs = merge(&args, err)?;
            let target = build_target(&inputs)?;
            let scales = inputs
                .a_scales
                .clone()
                .unwrap_or_else(|| DEFAULT_A_SCALES.to_vec());
            let eps = inputs.tail_epsilon.unwrap_or(DEFAULT_TAIL_EPSILON);
            let report = with_source(&target, |s| {
                Ok(convergence_table(
                    s,
                    &scales,
                    args.tol.unwrap_or(1e-3),
                    eps,
                )?)
            })?;
            write_report(out, err, &report, args.format)
        }
        Command::DeriveUrn(args) => {
            let target = build_target(&merge(&args, err)?)?;
            let a_scale = args
                .a_scale
                .ok_or_else(|| CliError::Usage("missing --a-scale".into()))?;
            let d = with_source(&target, |s| Ok(derive_urn_params(s, a_scale)?))?;
            write_derivation(out, &d, args.format)?;
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
