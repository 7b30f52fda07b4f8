//! Small dense linear algebra on Jacobian rows, backed by nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

use super::{Field, SamplerConfig};

/// Singular values below this fraction of the largest are dropped when
/// solving or building row-space bases.
const SOLVE_RCOND: f64 = 1e-12;

fn to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Minimum-norm least-squares solution of `rows · d = rhs`.
pub(crate) fn min_norm_solve(rows: &[Vec<f64>], rhs: &[f64], ncols: usize) -> Vec<f64> {
    if rows.is_empty() {
        return vec![0.0; ncols];
    }
    let a = to_matrix(rows, ncols);
    let b = DVector::from_column_slice(rhs);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    match svd.solve(&b, smax * SOLVE_RCOND) {
        Ok(d) => d.iter().copied().collect(),
        Err(_) => vec![0.0; ncols],
    }
}

/// Orthonormal basis of the span of `rows`.
pub(crate) fn row_space_basis(rows: &[Vec<f64>], ncols: usize) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let a = to_matrix(rows, ncols);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > smax * SOLVE_RCOND && s > 0.0)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Removes from `v` its component in the span of `rows`.
pub(crate) fn project_out(v: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let basis = row_space_basis(rows, v.len());
    let mut t = v.to_vec();
    for u in &basis {
        let c: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        for (tk, uk) in t.iter_mut().zip(u) {
            *tk -= c * uk;
        }
    }
    t
}

/// Numeric rank of a matrix whose rows have been scaled to unit length.
pub fn unit_row_rank(rows: &[Vec<f64>], ncols: usize, rank_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let svd = to_matrix(rows, ncols).svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > smax * rank_tol)
        .count()
}

/// Whether the Jacobian of `fields` at `x` has full row rank.
///
/// A gradient whose norm is at most `cfg.zero_gradient_tol` times the
/// field's gradient scale at radius `‖x‖` counts as zero. The remaining rows
/// are normalized before the singular-value ratio test against
/// `cfg.rank_tol`.
pub fn jacobian_full_rank(fields: &[&Field], x: &[f64], cfg: &SamplerConfig) -> bool {
    let r = super::norm(x);
    let mut rows = Vec::with_capacity(fields.len());
    let mut g = vec![0.0; x.len()];
    for f in fields {
        f.value_grad(x, &mut g);
        let n = super::norm(&g);
        if n.is_nan() || n <= cfg.zero_gradient_tol * f.gradient_scale(r) {
            return false;
        }
        rows.push(g.iter().map(|v| v / n).collect());
    }
    unit_row_rank(&rows, x.len(), cfg.rank_tol) == fields.len()
}
