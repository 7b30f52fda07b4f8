//! Exact polynomial operations of the construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ApproxConfig, ApproxError};
use crate::metric::{NoFilter, System, Target};
use crate::polycore::{compose_linear, jacobian_minors, rat, Polynomial, Rational};
use crate::presentation::{dimension_from_slices, Presentation};

/// How a piece with too many equations was reduced to `n - d` of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRecord {
    /// Rows of the rational matrix `M`; the new equations are `M·f`.
    pub matrix: Vec<Vec<String>>,
    pub tries: usize,
    /// Exponent `m` of the added inequality `(Σ x_k^2)^m - Σ f_k^2 >= 0`.
    pub ball_exponent: u32,
    /// Łojasiewicz exponent estimate used to pick `ball_exponent`.
    pub loja_tau: Option<f64>,
}

/// Matrix `M`, the equations `M·f` and the number of matrices drawn.
pub type Projection = (Vec<Vec<Rational>>, Vec<Polynomial>, usize);

/// `g^2 - h^m` for odd `m`.
pub fn step_combine(g: &Polynomial, h: &Polynomial, m: u32) -> Result<Polynomial, ApproxError> {
    if m.is_multiple_of(2) {
        return Err(ApproxError::EvenExponent(m));
    }
    Ok(g.pow(2)?.sub(&h.pow(m)?)?)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<Rational>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| rat(rng.random_range(-100..=100), 100))
                .collect()
        })
        .collect()
}

/// The critical locus of `equations` on `V(f)` is empty or of dimension
/// below `d` near the origin.
fn critical_locus_small(
    f: &[Polynomial],
    equations: &[Polynomial],
    d: usize,
    cfg: &ApproxConfig,
) -> Result<bool, ApproxError> {
    let minors = jacobian_minors(equations)?;
    if minors.iter().any(|m| m.degree() == 0 && !m.is_zero()) {
        return Ok(true);
    }
    let mut eqs = f.to_vec();
    eqs.extend(minors);
    let n = f[0].nvars();
    let target = Target::new(n, vec![System::from_polys(n, &eqs, &[])], "critical");
    let slices: Vec<_> = cfg
        .sampler
        .dimension_radii
        .iter()
        .map(|&r| crate::metric::sample_points(&target, r, &cfg.sampler, &NoFilter))
        .collect();
    let est = dimension_from_slices(&slices, n)?;
    Ok(est.empty_near_origin || est.dimension < d)
}

/// Random rational `(n - d) × p` matrix `M` with entries in `{-1, -0.99, …, 1}`
/// such that `M·f` has full rank and a critical locus of dimension `< d` on
/// `V(f)`. Returns the matrix, the projected equations and the number of
/// matrices drawn.
pub fn generic_projection(
    f: &[Polynomial],
    n_minus_d: usize,
    rng: &mut impl Rng,
    cfg: &ApproxConfig,
) -> Result<Projection, ApproxError> {
    let p = f.len();
    let Some(first) = f.first() else {
        return Err(ApproxError::TooFewEquations {
            piece: 0,
            got: 0,
            needed: n_minus_d,
        });
    };
    if p < n_minus_d {
        return Err(ApproxError::TooFewEquations {
            piece: 0,
            got: p,
            needed: n_minus_d,
        });
    }
    let d = first.nvars() - n_minus_d;
    for tries in 1..=cfg.max_projection_tries {
        let m = if p == n_minus_d && tries == 1 {
            (0..p)
                .map(|i| (0..p).map(|j| rat((i == j) as i64, 1)).collect())
                .collect()
        } else {
            random_matrix(n_minus_d, p, rng)
        };
        let Ok(eqs) = compose_linear(f, &m) else {
            continue;
        };
        if eqs.iter().any(Polynomial::is_zero) {
            continue;
        }
        if critical_locus_small(f, &eqs, d, cfg)? {
            return Ok((m, eqs, tries));
        }
    }
    Err(ApproxError::ProjectionSearchExhausted {
        tries: cfg.max_projection_tries,
    })
}

/// `(Σ x_k^2)^m - Σ f_k^2`.
pub fn ball_inequality(f: &[Polynomial], m: u32) -> Result<Polynomial, ApproxError> {
    let vars = f.first().map(|p| p.vars().to_vec()).unwrap_or_default();
    let mut sq = Polynomial::zero(&vars);
    for k in 0..vars.len() {
        sq = sq.add(&Polynomial::var(&vars, k).pow(2)?)?;
    }
    let mut out = sq.pow(m)?;
    for q in f {
        out = out.sub(&q.pow(2)?)?;
    }
    Ok(out)
}

/// `p` with the extra inequality `(Σ x_k^2)^m - Σ f_k^2 >= 0`; `m` is at least 1.
pub fn augment_ball_inequality(
    p: &Presentation,
    f: &[Polynomial],
    m: u32,
) -> Result<Presentation, ApproxError> {
    let h = ball_inequality(f, m.max(1))?;
    let mut inequalities = p.inequalities.clone();
    inequalities.push(h);
    Ok(Presentation::new(
        p.variables.clone(),
        p.equations.clone(),
        inequalities,
        p.declared_dimension,
    )?)
}
