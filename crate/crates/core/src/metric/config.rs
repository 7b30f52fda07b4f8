use serde::{Deserialize, Serialize};

use super::MetricError;

/// Numerical knobs shared by every sampling-based estimate.
///
/// All randomness is derived from `seed`; two runs with the same config give
/// bit-identical clouds and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Sphere radii for delta profiles, strictly decreasing, all in (0, 1).
    pub radii: Vec<f64>,
    /// Newton starts per radius and per piece.
    pub samples_per_radius: usize,
    pub seed: u64,
    /// Convergence threshold on the normalized Gauss-Newton residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Bound on `|F|` and on inequality violation for accepted samples.
    pub on_set_tol: f64,
    /// Required excess of the fitted contact order over `s`.
    pub order_margin: f64,
    /// Deltas at or below this value count as zero.
    pub delta_floor: f64,
    /// Radii used by the box-counting dimension estimator.
    pub dimension_radii: Vec<f64>,
    /// Multiplicative safety added to Łojasiewicz estimates (`1 + loja_safety`).
    pub loja_safety: f64,
    /// Singular-value ratio below which unit-row Jacobians are rank deficient.
    pub rank_tol: f64,
    /// A gradient whose norm is below `zero_gradient_tol` times its scale on
    /// the sphere is treated as exactly zero.
    pub zero_gradient_tol: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            radii: vec![0.2, 0.1, 0.05, 0.025],
            samples_per_radius: 2000,
            seed: 0x5eed,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            on_set_tol: 1e-8,
            order_margin: 0.25,
            delta_floor: 1e-9,
            dimension_radii: vec![0.2, 0.1, 0.05],
            loja_safety: 0.1,
            rank_tol: 1e-8,
            zero_gradient_tol: 1e-60,
        }
    }
}

fn check_radii(name: &str, radii: &[f64]) -> Result<(), MetricError> {
    if radii.is_empty() {
        return Err(MetricError::InvalidConfig(format!("{name} is empty")));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(MetricError::InvalidConfig(format!(
            "{name} must lie in (0, 1)"
        )));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(MetricError::InvalidConfig(format!(
            "{name} must be strictly decreasing"
        )));
    }
    Ok(())
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        check_radii("radii", &self.radii)?;
        check_radii("dimension_radii", &self.dimension_radii)?;
        let positive = [
            ("newton_tol", self.newton_tol),
            ("on_set_tol", self.on_set_tol),
            ("order_margin", self.order_margin),
            ("delta_floor", self.delta_floor),
            ("rank_tol", self.rank_tol),
            ("zero_gradient_tol", self.zero_gradient_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MetricError::InvalidConfig(format!(
                    "{name} must be positive"
                )));
            }
        }
        if self.loja_safety < 0.0 {
            return Err(MetricError::InvalidConfig(
                "loja_safety must be >= 0".into(),
            ));
        }
        if self.samples_per_radius == 0 || self.newton_max_iter == 0 {
            return Err(MetricError::InvalidConfig(
                "samples_per_radius and newton_max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}
