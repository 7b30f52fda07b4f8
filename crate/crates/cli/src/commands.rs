//! One function per subcommand; `main` only parses flags and prints.

use std::fmt::Write as _;
use std::path::Path;

use algapprox::approximator::{run, ApproxError};
use algapprox::metric::{
    check_equiv, estimate_lojasiewicz, profile_csv, sample_points, LojaEstimate, NoFilter,
    SamplerConfig,
};
use algapprox::polycore::{parse, Polynomial};
use algapprox::presentation::{
    drop_vanishing_inequalities, estimate_local_dimension, DimensionEstimate,
};

use crate::job::{read_job, read_set, Overrides};
use crate::report::{EffectiveConfig, EquivPair, Outcome, RunReport, VerifyReport};
use crate::CliError;

/// Nested radii sampled by `mesh`.
pub const MESH_RADII: usize = 32;

fn input<E: std::fmt::Display>(kind: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{kind}: {e}"))
}

fn error_kind(e: &ApproxError) -> &'static str {
    match e {
        ApproxError::CodimensionZero { .. } => "CodimensionZero",
        ApproxError::TooFewEquations { .. } => "TooFewEquations",
        ApproxError::ProjectionSearchExhausted { .. } => "ProjectionSearchExhausted",
        ApproxError::RegularityRejected { .. } => "RegularityRejected",
        ApproxError::ExponentSearchExhausted { .. } => "ExponentSearchExhausted",
        ApproxError::EvenExponent(_) => "EvenExponent",
        ApproxError::Presentation(_) => "Presentation",
        ApproxError::Metric(_) => "Metric",
        ApproxError::Poly(_) => "Poly",
    }
}

fn check_s(s: f64) -> Result<(), CliError> {
    if s >= 1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("s = {s} must be a real >= 1")))
    }
}

fn validated(cfg: SamplerConfig) -> Result<SamplerConfig, CliError> {
    cfg.validate().map_err(input("config"))?;
    Ok(cfg)
}

pub struct Approximation {
    pub report: RunReport,
    pub exit_code: i32,
}

/// Runs a job. Search exhaustion still yields a report; other failures of
/// the approximator are input errors.
pub fn approximate(job_path: &Path, o: &Overrides) -> Result<Approximation, CliError> {
    let job = read_job(job_path)?;
    check_s(job.s)?;
    let mut set = job.set()?;
    let cfg = o.approx_config(&job.options);
    validated(cfg.sampler.clone())?;
    let effective = EffectiveConfig {
        sampler: cfg.sampler.clone(),
        max_exponent: cfg.max_exponent,
        max_projection_tries: cfg.max_projection_tries,
    };
    let mut dropped = Vec::new();
    if job.options.drop_vanishing_inequalities {
        for (i, piece) in set.pieces.iter_mut().enumerate() {
            let (reduced, removed) =
                drop_vanishing_inequalities(piece, &cfg.sampler).map_err(input("Presentation"))?;
            if !removed.is_empty() {
                let exprs = removed
                    .iter()
                    .map(|&j| piece.inequalities[j].to_string())
                    .collect();
                dropped.push((i, exprs));
            }
            *piece = reduced;
        }
    }
    let report = match run(&set, job.s, &cfg) {
        Ok(out) => RunReport::from_output(job, effective, &out, dropped),
        Err(
            e @ (ApproxError::ExponentSearchExhausted { .. }
            | ApproxError::ProjectionSearchExhausted { .. }),
        ) => RunReport::exhausted(job, effective, &e, dropped),
        Err(e) => return Err(CliError::Input(format!("{}: {e}", error_kind(&e)))),
    };
    Ok(Approximation {
        exit_code: report.outcome.exit_code(),
        report,
    })
}

/// `A ∼_s B` for two set documents; exit code 0 on pass, 2 on failure.
pub fn verify(a: &Path, b: &Path, s: f64, o: &Overrides) -> Result<(VerifyReport, i32), CliError> {
    check_s(s)?;
    let (sa, sb) = (read_set(a)?, read_set(b)?);
    if sa.variables != sb.variables {
        return Err(CliError::Input(format!(
            "variables differ: {:?} and {:?}",
            sa.variables, sb.variables
        )));
    }
    let cfg = validated(o.sampler())?;
    let pair = check_equiv(&sa.target("A"), &sb.target("B"), s, &cfg).map_err(input("Metric"))?;
    let result = EquivPair::new(pair);
    let code = if result.pass {
        Outcome::Verified.exit_code()
    } else {
        Outcome::VerificationFailed.exit_code()
    };
    Ok((
        VerifyReport {
            s,
            sampler: cfg,
            result,
        },
        code,
    ))
}

pub fn dimension(set: &Path, o: &Overrides) -> Result<DimensionEstimate, CliError> {
    let cfg = validated(o.sampler())?;
    estimate_local_dimension(&read_set(set)?, &cfg).map_err(input("Presentation"))
}

/// Delta profile CSV of `A` against `B`.
pub fn profile(a: &Path, b: &Path, s: f64, o: &Overrides) -> Result<String, CliError> {
    let (report, _) = verify(a, b, s, o)?;
    Ok(profile_csv(&report.result.a_leq_b, &report.result.b_leq_a))
}

/// Polynomials separated by `;`.
pub fn parse_list(text: &str, vars: &[String]) -> Result<Vec<Polynomial>, CliError> {
    text.split(';')
        .map(|e| parse(e.trim(), vars).map_err(input(e.trim())))
        .collect()
}

pub fn loja(f: &str, g: &str, domain: &Path, o: &Overrides) -> Result<LojaEstimate, CliError> {
    let set = read_set(domain)?;
    let (f, g) = (
        parse_list(f, &set.variables)?,
        parse_list(g, &set.variables)?,
    );
    let cfg = validated(o.sampler())?;
    estimate_lojasiewicz(&f, &g, &set.target("domain"), &cfg).map_err(|e| match e {
        algapprox::metric::MetricError::HypothesisViolated { .. } => {
            CliError::Input(format!("HypothesisViolated: {e}"))
        }
        other => CliError::Input(format!("Metric: {other}")),
    })
}

/// `radius·k/32` for `k = 32, 31, …, 1`.
pub fn mesh_radii(radius: f64) -> Vec<f64> {
    (0..MESH_RADII)
        .map(|k| radius * (MESH_RADII - k) as f64 / MESH_RADII as f64)
        .collect()
}

/// CSV of samples of the set inside the ball of the given radius, with the
/// variable names as header.
pub fn mesh(set: &Path, radius: f64, o: &Overrides) -> Result<String, CliError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Input(format!("radius {radius} must be positive")));
    }
    let set = read_set(set)?;
    let cfg = validated(o.sampler())?;
    let target = set.target("mesh");
    let mut out = set.variables.join(",");
    out.push('\n');
    for r in mesh_radii(radius) {
        for x in sample_points(&target, r, &cfg, &NoFilter).points {
            let row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(",")).expect("writing to a String");
        }
    }
    Ok(out)
}
