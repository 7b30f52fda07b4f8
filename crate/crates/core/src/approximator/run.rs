//! End-to-end approximation of a finite union of presented pieces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kfilter::{build_k_filter, KFilterSummary};
use super::ops::{augment_ball_inequality, generic_projection, ProjectionRecord};
use super::search::{all_radii, exponent_hint, pick, sample_all, search, SearchContext};
use super::{ApproxConfig, ApproxError, Criterion, Stages, StepRecord, TrialFailure};
use crate::metric::{
    check_equiv, equiv_from_slices, lojasiewicz_from_pairs, sample_points, stream_seed, CloudIndex,
    Direction, MetricError, NoFilter, SEquivReport, SamplerConfig,
};
use crate::polycore::{PolyError, Polynomial};
use crate::presentation::{
    check_regularity, dimension_from_slices, estimate_target_dimension, DimensionEstimate,
    Presentation, RegularityReport, SetDescription,
};

/// Stream tag for projection matrices.
const PROJECTION_STREAM: u64 = 0x7072_6f6a;

/// Approximation of one piece.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationResult {
    pub piece: usize,
    /// `d = dim_O` of the piece.
    pub dimension: usize,
    /// The regular presentation that was approximated.
    pub presentation: Presentation,
    pub projection: Option<ProjectionRecord>,
    pub regularity: RegularityReport,
    pub k_filter: KFilterSummary,
    pub steps: Vec<StepRecord>,
    /// `F_q = (g_q, f_2, …, f_{n-d})`, expanded.
    pub equations: Vec<Polynomial>,
    /// `g_q` with the recursion kept.
    pub structured: String,
    /// `V(F_q) ≤_s A` and `A ≤_s V(F_q)`, both restricted to `K`.
    pub final_report: (SEquivReport, SEquivReport),
    pub final_dimension: DimensionEstimate,
    pub warnings: Vec<String>,
}

impl ApproximationResult {
    pub fn verified(&self) -> bool {
        self.final_report.0.pass
            && self.final_report.1.pass
            && self.final_dimension.dimension == self.dimension
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub pieces: Vec<ApproximationResult>,
    /// Pairwise products of the pieces' equations; `None` on degree overflow.
    pub combined: Option<Vec<Polynomial>>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn verified(&self) -> bool {
        self.pieces.iter().all(ApproximationResult::verified)
    }
}

/// Every product `e_1·…·e_k` with `e_j` taken from list `j`; their common
/// zero set is the union of the lists' zero sets.
pub fn union_equations(lists: &[Vec<Polynomial>]) -> Result<Vec<Polynomial>, PolyError> {
    let mut acc: Vec<Polynomial> = match lists.first() {
        Some(first) => first.clone(),
        None => return Ok(Vec::new()),
    };
    for list in &lists[1..] {
        let mut next = Vec::with_capacity(acc.len() * list.len());
        for a in &acc {
            for b in list {
                next.push(a.mul(b)?);
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Outcome of screening a candidate approximant by its local dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub estimate: DimensionEstimate,
    pub required: usize,
    pub accepted: bool,
}

/// Accepts `V(candidate)` only if its local dimension equals `required`.
pub fn screen_candidate(
    candidate: &[Polynomial],
    required: usize,
    cfg: &SamplerConfig,
) -> Result<ScreenResult, ApproxError> {
    let vars =
        candidate
            .first()
            .map(|p| p.vars().to_vec())
            .ok_or(ApproxError::TooFewEquations {
                piece: 0,
                got: 0,
                needed: 1,
            })?;
    let p = Presentation::new(vars, candidate.to_vec(), Vec::new(), None)?;
    let estimate = estimate_target_dimension(&p.target("candidate"), cfg, &NoFilter)?;
    Ok(ScreenResult {
        accepted: estimate.dimension == required,
        required,
        estimate,
    })
}

fn check_s(s: f64) -> Result<(), ApproxError> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(MetricError::InvalidConfig(format!("s = {s} must be a real >= 1")).into());
    }
    Ok(())
}

/// Łojasiewicz estimate `τ` with `‖f(x)‖ >= d(x, A)^τ` on `V(F_0) ∩ {h >= 0}`.
fn ball_tau(original: &Presentation, projected: &Presentation, cfg: &SamplerConfig) -> Option<f64> {
    let a = original.target("A");
    let v = projected.target("V(F0)");
    let f: Vec<_> = original
        .equations
        .iter()
        .map(crate::metric::Field::poly)
        .collect();
    let mut pairs = Vec::new();
    for &r in &cfg.radii {
        let idx = CloudIndex::new(sample_points(&a, r, cfg, &NoFilter));
        for x in &sample_points(&v, r, cfg, &NoFilter).points {
            let fx = f.iter().map(|q| q.value(x).powi(2)).sum::<f64>().sqrt();
            if fx <= cfg.on_set_tol {
                continue;
            }
            if let Some(d) = idx.free_distance(x, &a, cfg, &NoFilter) {
                pairs.push((fx, d, x.clone()));
            }
        }
    }
    lojasiewicz_from_pairs(&pairs, cfg.loja_safety)
        .ok()
        .map(|e| e.alpha_hat)
}

/// Projects `p` to `n - d` equations and adds the ball inequality with the
/// smallest `m > s·τ` whose augmented set passes the s-comparison with `p`.
fn project(
    p: &Presentation,
    piece: usize,
    d: usize,
    s: f64,
    cfg: &ApproxConfig,
) -> Result<(Presentation, ProjectionRecord), ApproxError> {
    let n = p.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
        cfg.sampler.seed,
        &[piece as u64, PROJECTION_STREAM],
    ));
    let (matrix, eqs, tries) = generic_projection(&p.equations, n - d, &mut rng, cfg)?;
    let projected = Presentation::new(p.variables.clone(), eqs, p.inequalities.clone(), Some(d))?;
    let tau = ball_tau(p, &projected, &cfg.sampler);
    let m_start = tau.map_or(s.floor() as u32 + 1, |t| (s * t).floor() as u32 + 1);
    let a = p.target("A");
    let mut failures = Vec::new();
    for m in m_start.max(1)..=cfg.max_exponent {
        let aug = augment_ball_inequality(&projected, &p.equations, m)?;
        let (x, y) = check_equiv(&aug.target("A~"), &a, s, &cfg.sampler)?;
        if x.pass && y.pass {
            let record = ProjectionRecord {
                matrix: matrix
                    .iter()
                    .map(|row| row.iter().map(|c| c.to_string()).collect())
                    .collect(),
                tries,
                ball_exponent: m,
                loja_tau: tau,
            };
            return Ok((aug, record));
        }
        failures.push(TrialFailure {
            m,
            criterion: Criterion::P1,
            detail: format!(
                "orders {} / {}",
                x.fitted_order.as_f64(),
                y.fitted_order.as_f64()
            ),
        });
    }
    Err(ApproxError::ExponentSearchExhausted {
        piece,
        step: 0,
        max_exponent: cfg.max_exponent,
        failures,
    })
}

/// Approximates piece number `piece` of a set at level `s`.
pub fn approximate_piece(
    p: &Presentation,
    piece: usize,
    s: f64,
    cfg: &ApproxConfig,
) -> Result<ApproximationResult, ApproxError> {
    let sc = &cfg.sampler;
    sc.validate()?;
    check_s(s)?;
    let n = p.nvars();
    if p.equations.is_empty() {
        return Err(ApproxError::CodimensionZero { piece });
    }
    let d = match p.declared_dimension {
        Some(d) => d,
        None => estimate_target_dimension(&p.target("A"), sc, &NoFilter)?.dimension,
    };
    if d >= n {
        return Err(ApproxError::CodimensionZero { piece });
    }
    if p.equations.len() < n - d {
        return Err(ApproxError::TooFewEquations {
            piece,
            got: p.equations.len(),
            needed: n - d,
        });
    }
    let (regular, projection) = if p.equations.len() > n - d {
        let (q, rec) = project(p, piece, d, s, cfg)?;
        (q, Some(rec))
    } else {
        let mut q = p.clone();
        q.declared_dimension = Some(d);
        (q, None)
    };
    let regularity = check_regularity(&regular, sc)?;
    if !regularity.verdict {
        return Err(ApproxError::RegularityRejected {
            piece,
            reasons: regularity.failures(),
        });
    }
    let mut warnings = regularity.warnings.clone();
    let filter = build_k_filter(&regular, s, sc)?;
    let k_filter = filter.summary();
    if k_filter.samples.iter().any(|&(_, c)| c > 0) {
        warnings.push(format!(
            "V(F_q) is certified outside the horn of exponent {} around X; components inside it are not checked",
            filter.sigma
        ));
    }
    let stages = Stages::new(regular.clone());
    let ctx = SearchContext {
        stages: &stages,
        filter: &filter,
        dimension: d,
        s,
        cfg,
    };
    let a0 = stages.stage(&[]);
    let a0_slices = sample_all(&a0, sc, &filter);
    let mut slices = a0_slices.clone();
    let mut ms: Vec<u32> = Vec::new();
    let mut steps = Vec::new();
    for _ in 0..stages.q() {
        let hint = exponent_hint(&stages, &ms, sc);
        let (rec, next) = search(&ctx, &ms, &slices, hint.as_ref()).map_err(|e| match e {
            ApproxError::ExponentSearchExhausted {
                step,
                max_exponent,
                failures,
                ..
            } => ApproxError::ExponentSearchExhausted {
                piece,
                step,
                max_exponent,
                failures,
            },
            other => other,
        })?;
        ms.push(rec.chosen_m);
        steps.push(rec);
        slices = next;
    }
    let equations = stages.expand(&ms)?;
    let final_report = if ms.is_empty() {
        (
            SEquivReport::trivial(Direction::ALeqB, s),
            SEquivReport::trivial(Direction::BLeqA, s),
        )
    } else {
        equiv_from_slices(
            &stages.stage(&ms),
            &pick(&slices, &sc.radii),
            &a0,
            &pick(&a0_slices, &sc.radii),
            s,
            sc,
        )?
    };
    let final_dimension = dimension_from_slices(&pick(&slices, &sc.dimension_radii), n)?;
    debug_assert_eq!(slices.len(), all_radii(sc).len());
    Ok(ApproximationResult {
        piece,
        dimension: d,
        structured: stages.structured(&ms),
        presentation: regular,
        projection,
        regularity,
        k_filter,
        steps,
        equations,
        final_report,
        final_dimension,
        warnings,
    })
}

/// Approximates every piece and combines the results by pairwise products.
pub fn run(set: &SetDescription, s: f64, cfg: &ApproxConfig) -> Result<RunOutput, ApproxError> {
    let pieces = set
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| approximate_piece(p, i, s, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut warnings = Vec::new();
    let lists: Vec<Vec<Polynomial>> = pieces.iter().map(|r| r.equations.clone()).collect();
    let combined = match union_equations(&lists) {
        Ok(c) => Some(c),
        Err(PolyError::DegreeOverflow(deg)) => {
            warnings.push(format!(
                "combined equations would reach degree {deg}; pieces are reported separately"
            ));
            None
        }
        Err(e) => return Err(e.into()),
    };
    Ok(RunOutput {
        pieces,
        combined,
        warnings,
    })
}
