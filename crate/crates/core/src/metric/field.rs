//! Scalar fields the sampler can solve for, and systems built from them.
//!
//! Besides plain polynomials there are two structured forms used for the
//! approximants produced by the squaring recursion `g_{k} = g_{k-1}^2 - h_k^{m_k}`:
//!
//! * [`ChainField`] evaluates `g_k` recursively instead of from its expanded
//!   monomials, which keeps tiny values such as `h^47` meaningful;
//! * [`BranchField`] is `g - σ·h^{m/2}` for `σ = ±1`. For odd `m` the real
//!   zero set of `g^2 - h^m` is exactly the union of the two branch zero sets
//!   intersected with `{h >= 0}`, and each branch has a nondegenerate
//!   gradient where the squared form has a double root.

use crate::polycore::{CompiledPoly, Polynomial};

#[derive(Debug, Clone)]
pub struct ChainField {
    base: CompiledPoly,
    steps: Vec<(CompiledPoly, u32)>,
}

impl ChainField {
    pub fn new(base: &Polynomial, steps: &[(Polynomial, u32)]) -> Self {
        ChainField {
            base: CompiledPoly::new(base),
            steps: steps
                .iter()
                .map(|(h, m)| (CompiledPoly::new(h), *m))
                .collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.base.nvars()
    }

    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut v = self.base.value_grad(x, grad);
        if self.steps.is_empty() {
            return v;
        }
        let mut hg = vec![0.0; x.len()];
        for (h, m) in &self.steps {
            let hv = h.value_grad(x, &mut hg);
            let m = *m as i32;
            let dh = m as f64 * hv.powi(m - 1);
            for (g, hgk) in grad.iter_mut().zip(&hg) {
                *g = 2.0 * v * *g - dh * hgk;
            }
            v = v * v - hv.powi(m);
        }
        v
    }

    /// Value, gradient and a bound on the rounding error of the value.
    pub fn value_grad_err(&self, x: &[f64], grad: &mut [f64]) -> (f64, f64) {
        let (mut v, mut err) = self.base.value_grad_err(x, grad);
        let mut hg = vec![0.0; x.len()];
        for (h, m) in &self.steps {
            let (hv, herr) = h.value_grad_err(x, &mut hg);
            let m = *m as i32;
            let dh = m as f64 * hv.powi(m - 1);
            for (g, hgk) in grad.iter_mut().zip(&hg) {
                *g = 2.0 * v * *g - dh * hgk;
            }
            let hm = hv.powi(m);
            err = 2.0 * v.abs() * err + dh.abs() * herr + 2.0 * f64::EPSILON * (v * v + hm.abs());
            v = v * v - hm;
        }
        (v, err)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.base.value(x);
        for (h, m) in &self.steps {
            v = v * v - h.value(x).powi(*m as i32);
        }
        v
    }

    fn scales(&self, r: f64) -> (f64, f64) {
        let mut val = self.base.value_scale(r);
        let mut grad = self.base.gradient_scale(r);
        for (h, m) in &self.steps {
            let m = *m as i32;
            let hv = h.value_scale(r);
            grad = 2.0 * val * grad + m as f64 * hv.powi(m - 1) * h.gradient_scale(r);
            val = val * val + hv.powi(m);
        }
        (val, grad)
    }
}

#[derive(Debug, Clone)]
pub struct BranchField {
    g: ChainField,
    h: CompiledPoly,
    m: u32,
    sign: f64,
}

impl BranchField {
    /// The branch `g - sign·h^{m/2}` with `sign` in `{+1, -1}`.
    pub fn new(g: ChainField, h: &Polynomial, m: u32, positive: bool) -> Self {
        BranchField {
            g,
            h: CompiledPoly::new(h),
            m,
            sign: if positive { 1.0 } else { -1.0 },
        }
    }

    fn half_power(&self, hv: f64) -> (f64, f64) {
        let h = hv.max(0.0);
        let e = self.m as f64 / 2.0;
        if h == 0.0 {
            let d = if self.m > 2 { 0.0 } else { f64::MAX.sqrt() };
            return (0.0, d);
        }
        (h.powf(e), e * h.powf(e - 1.0))
    }

    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let gv = self.g.value_grad(x, grad);
        let mut hg = vec![0.0; x.len()];
        let hv = self.h.value_grad(x, &mut hg);
        let (p, dp) = self.half_power(hv);
        for (g, hgk) in grad.iter_mut().zip(&hg) {
            *g -= self.sign * dp * hgk;
        }
        gv - self.sign * p
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.g.value(x) - self.sign * self.half_power(self.h.value(x)).0
    }

    /// Value, gradient and a bound on the rounding error of the value.
    pub fn value_grad_err(&self, x: &[f64], grad: &mut [f64]) -> (f64, f64) {
        let (gv, gerr) = self.g.value_grad_err(x, grad);
        let mut hg = vec![0.0; x.len()];
        let (hv, herr) = self.h.value_grad_err(x, &mut hg);
        let (p, dp) = self.half_power(hv);
        for (g, hgk) in grad.iter_mut().zip(&hg) {
            *g -= self.sign * dp * hgk;
        }
        let err = gerr + dp.min(f64::MAX.sqrt()) * herr + 2.0 * f64::EPSILON * (gv.abs() + p);
        (gv - self.sign * p, err)
    }

    fn gradient_scale(&self, r: f64) -> f64 {
        let e = self.m as f64 / 2.0;
        self.g.scales(r).1 + e * self.h.value_scale(r).powf(e - 1.0) * self.h.gradient_scale(r)
    }
}

/// A scalar function with gradient, evaluated in floating point.
#[derive(Debug, Clone)]
pub enum Field {
    Poly(CompiledPoly),
    Chain(ChainField),
    Branch(BranchField),
}

impl Field {
    pub fn poly(p: &Polynomial) -> Self {
        Field::Poly(CompiledPoly::new(p))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Field::Poly(p) => p.value(x),
            Field::Chain(c) => c.value(x),
            Field::Branch(b) => b.value(x),
        }
    }

    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            Field::Poly(p) => p.value_grad(x, grad),
            Field::Chain(c) => c.value_grad(x, grad),
            Field::Branch(b) => b.value_grad(x, grad),
        }
    }

    /// Value, gradient and a bound on the rounding error of the value.
    pub fn value_grad_err(&self, x: &[f64], grad: &mut [f64]) -> (f64, f64) {
        match self {
            Field::Poly(p) => p.value_grad_err(x, grad),
            Field::Chain(c) => c.value_grad_err(x, grad),
            Field::Branch(b) => b.value_grad_err(x, grad),
        }
    }

    /// Upper bound on the gradient norm over the sphere of radius `r`.
    pub fn gradient_scale(&self, r: f64) -> f64 {
        match self {
            Field::Poly(p) => p.gradient_scale(r),
            Field::Chain(c) => c.scales(r).1,
            Field::Branch(b) => b.gradient_scale(r),
        }
    }
}

/// `{equations = 0, inequalities >= 0}` in `R^nvars`.
#[derive(Debug, Clone)]
pub struct System {
    pub nvars: usize,
    pub equations: Vec<Field>,
    pub inequalities: Vec<Field>,
}

impl System {
    pub fn from_polys(nvars: usize, equations: &[Polynomial], inequalities: &[Polynomial]) -> Self {
        System {
            nvars,
            equations: equations.iter().map(Field::poly).collect(),
            inequalities: inequalities.iter().map(Field::poly).collect(),
        }
    }

    /// Same system with inequality `j` promoted to an equation.
    pub fn with_active(&self, j: usize) -> System {
        let mut s = self.clone();
        s.equations.push(self.inequalities[j].clone());
        s
    }

    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        self.inequalities.iter().all(|h| h.value(x) >= -tol)
    }
}

/// Finite union of systems: the set a sampler targets.
#[derive(Debug, Clone)]
pub struct Target {
    pub nvars: usize,
    pub pieces: Vec<System>,
    pub label: String,
}

impl Target {
    pub fn new(nvars: usize, pieces: Vec<System>, label: impl Into<String>) -> Self {
        Target {
            nvars,
            pieces,
            label: label.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse;

    fn xyz() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    fn numeric_grad(f: &Field, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|k| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[k] += h;
                b[k] -= h;
                (f.value(&a) - f.value(&b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn chain_matches_expanded_polynomial() {
        let v = xyz();
        let z = parse("z", &v).unwrap();
        let steps = vec![(parse("x", &v).unwrap(), 5), (parse("y", &v).unwrap(), 3)];
        let chain = Field::Chain(ChainField::new(&z, &steps));
        let expanded = Field::poly(&parse("((z^2 - x^5)^2 - y^3)", &v).unwrap());
        let pt = [0.7, -0.4, 0.3];
        assert!((chain.value(&pt) - expanded.value(&pt)).abs() < 1e-14);
        let mut g1 = [0.0; 3];
        let mut g2 = [0.0; 3];
        chain.value_grad(&pt, &mut g1);
        expanded.value_grad(&pt, &mut g2);
        for k in 0..3 {
            assert!((g1[k] - g2[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn branch_gradient_matches_finite_differences() {
        let v = xyz();
        let chain = ChainField::new(&parse("z^2 - x^7", &v).unwrap(), &[]);
        let b = Field::Branch(BranchField::new(chain, &parse("y", &v).unwrap(), 5, false));
        let pt = [0.3, 0.2, 0.1];
        let mut g = [0.0; 3];
        let val = b.value_grad(&pt, &mut g);
        assert!((val - (0.01 - 0.3f64.powi(7) + 0.2f64.powf(2.5))).abs() < 1e-15);
        for (a, e) in g.iter().zip(numeric_grad(&b, &pt)) {
            assert!((a - e).abs() < 1e-8);
        }
    }
}
