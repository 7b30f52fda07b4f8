use num_traits::ToPrimitive;

use super::Polynomial;

#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    /// (variable index, exponent) pairs with exponent > 0.
    factors: Vec<(usize, i32)>,
    degree: u32,
}

/// Floating-point evaluation form of a [`Polynomial`].
///
/// Coefficients are rounded once at compile time; the exact polynomial is
/// never mutated.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<Term>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| Term {
                coef: c.to_f64().unwrap_or(f64::NAN),
                factors: m
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(k, &e)| (k, e as i32))
                    .collect(),
                degree: m.degree() as u32,
            })
            .collect();
        CompiledPoly {
            nvars: p.nvars(),
            terms,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .fold(t.coef, |acc, &(k, e)| acc * x[k].powi(e))
            })
            .sum()
    }

    /// Value and gradient in one pass; `grad` must have length `nvars`.
    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        for t in &self.terms {
            let v = t
                .factors
                .iter()
                .fold(t.coef, |acc, &(k, e)| acc * x[k].powi(e));
            value += v;
            for (i, &(k, e)) in t.factors.iter().enumerate() {
                let mut d = t.coef * e as f64 * x[k].powi(e - 1);
                for (j, &(k2, e2)) in t.factors.iter().enumerate() {
                    if j != i {
                        d *= x[k2].powi(e2);
                    }
                }
                grad[k] += d;
            }
        }
        value
    }

    /// Value, gradient and a bound on the rounding error of the value:
    /// `ε · Σ (|α| + 1) |c_α x^α|`.
    pub fn value_grad_err(&self, x: &[f64], grad: &mut [f64]) -> (f64, f64) {
        let value = self.value_grad(x, grad);
        let mag: f64 = self
            .terms
            .iter()
            .map(|t| {
                let v = t
                    .factors
                    .iter()
                    .fold(t.coef, |acc, &(k, e)| acc * x[k].powi(e));
                v.abs() * (t.degree + 1) as f64
            })
            .sum();
        (value, f64::EPSILON * mag)
    }

    /// Bound on `|p|` over the sphere of radius `r`: `Σ |c_α| r^{|α|}`.
    pub fn value_scale(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef.abs() * r.powi(t.degree as i32))
            .sum()
    }

    /// Bound on the gradient norm over the sphere of radius `r`:
    /// `Σ |c_α| |α| r^{|α|-1}`. Used to judge when a gradient is negligible.
    pub fn gradient_scale(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.degree > 0)
            .map(|t| t.coef.abs() * t.degree as f64 * r.powi(t.degree as i32 - 1))
            .sum()
    }
}
