//! Choice of the odd exponent of one squaring step.

use serde::{Deserialize, Serialize};

use super::{ApproxConfig, ApproxError, Stages};
use crate::metric::{
    equiv_from_slices, jacobian_full_rank, lojasiewicz_from_pairs, sample_points, CloudIndex,
    Field, LojaEstimate, NoFilter, PointCloud, PointFilter, SEquivReport, SamplerConfig, Target,
};
use crate::presentation::dimension_from_slices;

/// Points per radius used for the Łojasiewicz hint.
const HINT_POINTS: usize = 200;
/// Smallest exponent tried.
const MIN_EXPONENT: u32 = 3;

/// The check a candidate exponent failed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// The new stage is not s-equivalent to the previous one on `K`.
    P1,
    /// A later inequality is not strictly positive on the new stage.
    P2,
    /// The new equations are rank deficient at a sample with `h_i > 0`.
    P3,
    /// The new stage has the wrong local dimension on `K`.
    Dimension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub m: u32,
    pub criterion: Criterion,
    pub detail: String,
}

/// Outcome of one step `g_i = g_{i-1}^2 - h_i^{m_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index `i`.
    pub index: usize,
    pub inequality: String,
    /// Estimated exponent `α` with `|g_{i-1}| >= d(x, A_{i-1})^α` on `B_{i-1}`.
    pub hint_alpha: Option<f64>,
    pub m_start: u32,
    pub chosen_m: u32,
    pub tried_ms: Vec<u32>,
    pub failures: Vec<TrialFailure>,
    /// `A_i ≤_s A_{i-1}` and `A_{i-1} ≤_s A_i`, both restricted to `K`.
    pub verification: (SEquivReport, SEquivReport),
    /// Estimated local dimension of `A_i ∩ K`.
    pub dim_check: usize,
    pub p2_ok: bool,
    pub p3_ok: bool,
}

/// Everything fixed while the exponents of one piece are chosen.
pub struct SearchContext<'a> {
    pub stages: &'a Stages,
    pub filter: &'a dyn PointFilter,
    pub dimension: usize,
    pub s: f64,
    pub cfg: &'a ApproxConfig,
}

/// Radii of `cfg.radii` and `cfg.dimension_radii`, decreasing, without repeats.
pub(crate) fn all_radii(cfg: &SamplerConfig) -> Vec<f64> {
    let mut radii: Vec<f64> = cfg
        .radii
        .iter()
        .chain(&cfg.dimension_radii)
        .copied()
        .collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();
    radii
}

/// Slices of `target` at [`all_radii`].
pub(crate) fn sample_all(
    target: &Target,
    cfg: &SamplerConfig,
    filter: &dyn PointFilter,
) -> Vec<PointCloud> {
    all_radii(cfg)
        .iter()
        .map(|&r| sample_points(target, r, cfg, filter))
        .collect()
}

/// The slices of `slices` whose radius is in `radii`, in that order.
pub(crate) fn pick(slices: &[PointCloud], radii: &[f64]) -> Vec<PointCloud> {
    radii
        .iter()
        .filter_map(|&r| slices.iter().find(|c| c.radius == r).cloned())
        .collect()
}

/// Estimate of `α` with `|g_i(x)| >= d(x, A_i)^α` over samples of
/// `B_i = {f̃ = 0, h_j >= 0 for j > i}`, for `i = chosen.len()`.
pub fn exponent_hint(stages: &Stages, chosen: &[u32], cfg: &SamplerConfig) -> Option<LojaEstimate> {
    let i = chosen.len();
    let b = stages.residual(i);
    let a = stages.stage(chosen);
    let g = stages.chain(chosen);
    let mut pairs = Vec::new();
    for &r in &cfg.radii {
        let bs = sample_points(&b, r, cfg, &NoFilter);
        let idx = CloudIndex::new(sample_points(&a, r, cfg, &NoFilter));
        let stride = bs.len().div_ceil(HINT_POINTS).max(1);
        for x in bs.points.iter().step_by(stride) {
            if let Some(d) = idx.free_distance(x, &a, cfg, &NoFilter) {
                pairs.push((g.value(x).abs(), d, x.clone()));
            }
        }
    }
    lojasiewicz_from_pairs(&pairs, cfg.loja_safety).ok()
}

/// Smallest odd integer `>= max(3, 2·s·α)`.
pub(crate) fn start_exponent(alpha: Option<f64>, s: f64) -> u32 {
    let raw = alpha.map_or(MIN_EXPONENT as f64, |a| (2.0 * s * a).ceil());
    let m = if raw.is_finite() && raw < u32::MAX as f64 {
        (raw as u32).max(MIN_EXPONENT)
    } else {
        u32::MAX
    };
    if m % 2 == 0 {
        m.saturating_add(1)
    } else {
        m
    }
}

fn orders(r: &(SEquivReport, SEquivReport)) -> String {
    format!(
        "orders {} / {}",
        r.0.fitted_order.as_f64(),
        r.1.fitted_order.as_f64()
    )
}

struct Checked {
    verification: (SEquivReport, SEquivReport),
    dimension: usize,
    slices: Vec<PointCloud>,
}

fn check_candidate(
    ctx: &SearchContext,
    ms: &[u32],
    prev: &Target,
    prev_slices: &[PointCloud],
) -> Result<Checked, (Criterion, String)> {
    let cfg = &ctx.cfg.sampler;
    let i = ms.len();
    let h = &ctx.stages.presentation().inequalities;
    let cand = ctx.stages.stage(ms);
    let slices = sample_all(&cand, cfg, ctx.filter);
    let verification = equiv_from_slices(
        &cand,
        &pick(&slices, &cfg.radii),
        prev,
        &pick(prev_slices, &cfg.radii),
        ctx.s,
        cfg,
    )
    .map_err(|e| (Criterion::P1, e.to_string()))?;
    if !(verification.0.pass && verification.1.pass) {
        return Err((Criterion::P1, orders(&verification)));
    }
    let later: Vec<Field> = h[i..].iter().map(Field::poly).collect();
    let positive = slices
        .iter()
        .flat_map(|c| &c.points)
        .all(|x| later.iter().all(|f| f.value(x) > cfg.on_set_tol));
    if !positive {
        return Err((
            Criterion::P2,
            "a later inequality vanishes on the stage".into(),
        ));
    }
    let hi = Field::poly(&h[i - 1]);
    for c in &slices {
        for (x, &pi) in c.points.iter().zip(&c.pieces) {
            if hi.value(x) > cfg.on_set_tol {
                let eqs: Vec<&Field> = cand.pieces[pi].equations.iter().collect();
                if !jacobian_full_rank(&eqs, x, cfg) {
                    return Err((Criterion::P3, format!("rank deficient at {x:?}")));
                }
            }
        }
    }
    let dim = dimension_from_slices(&pick(&slices, &cfg.dimension_radii), cand.nvars)
        .map_err(|e| (Criterion::Dimension, e.to_string()))?;
    if dim.dimension != ctx.dimension {
        return Err((
            Criterion::Dimension,
            format!("dimension {} instead of {}", dim.dimension, ctx.dimension),
        ));
    }
    Ok(Checked {
        verification,
        dimension: dim.dimension,
        slices,
    })
}

/// Smallest admissible odd `m_{i+1}`, for `i = chosen.len()`, trying
/// `m_start, m_start + 2, …` up to `cfg.max_exponent`.
///
/// `prev_slices` are the `K`-filtered slices of `A_i` at [`all_radii`].
pub fn choose_exponent(
    ctx: &SearchContext,
    chosen: &[u32],
    prev_slices: &[PointCloud],
    hint: Option<&LojaEstimate>,
) -> Result<StepRecord, ApproxError> {
    search(ctx, chosen, prev_slices, hint).map(|(rec, _)| rec)
}

/// [`choose_exponent`] also returning the `K`-filtered slices of the
/// accepted stage at [`all_radii`].
pub(crate) fn search(
    ctx: &SearchContext,
    chosen: &[u32],
    prev_slices: &[PointCloud],
    hint: Option<&LojaEstimate>,
) -> Result<(StepRecord, Vec<PointCloud>), ApproxError> {
    let i = chosen.len();
    let alpha = hint.map(|h| h.alpha_hat);
    let m_start = start_exponent(alpha, ctx.s);
    let prev = ctx.stages.stage(chosen);
    let mut ms = chosen.to_vec();
    ms.push(m_start);
    let mut tried = Vec::new();
    let mut failures = Vec::new();
    let mut m = m_start;
    while m <= ctx.cfg.max_exponent {
        ms[i] = m;
        tried.push(m);
        match check_candidate(ctx, &ms, &prev, prev_slices) {
            Ok(ok) => {
                let rec = StepRecord {
                    index: i + 1,
                    inequality: ctx.stages.presentation().inequalities[i].to_string(),
                    hint_alpha: alpha,
                    m_start,
                    chosen_m: m,
                    tried_ms: tried,
                    failures,
                    verification: ok.verification,
                    dim_check: ok.dimension,
                    p2_ok: true,
                    p3_ok: true,
                };
                return Ok((rec, ok.slices));
            }
            Err((criterion, detail)) => failures.push(TrialFailure {
                m,
                criterion,
                detail,
            }),
        }
        m += 2;
    }
    Err(ApproxError::ExponentSearchExhausted {
        piece: 0,
        step: i + 1,
        max_exponent: ctx.cfg.max_exponent,
        failures,
    })
}
