//! The intermediate sets `A_i` of the squaring recursion.

use super::{step_combine, ApproxError};
use crate::metric::{BranchField, ChainField, Field, System, Target};
use crate::polycore::Polynomial;
use crate::presentation::Presentation;

/// Stage sets of a regular presentation `{f_0 = 0, f̃ = 0, h_1.. h_q >= 0}`.
///
/// With exponents `m_1, …, m_i` chosen,
/// `A_i = {g_i = 0, f̃ = 0, h_j >= 0 for j > i}`. For `i >= 1` it is sampled
/// as two branch pieces `g_{i-1} = ±h_i^{m_i/2}` with `h_i >= 0`, each
/// followed by its ridges, the subsets where also `g_k = 0` for some
/// `k <= i - 2`. Ridges carry the thin tips of the set that Newton starts
/// on the branch alone do not reach.
#[derive(Debug, Clone)]
pub struct Stages {
    pres: Presentation,
}

fn wrap(s: &str) -> String {
    let bare = s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if bare {
        s.to_string()
    } else {
        format!("({s})")
    }
}

impl Stages {
    /// `pres` must have at least one equation.
    pub fn new(pres: Presentation) -> Self {
        assert!(!pres.equations.is_empty(), "stages need an equation");
        Stages { pres }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn nvars(&self) -> usize {
        self.pres.nvars()
    }

    /// Number of inequalities, i.e. of squaring steps.
    pub fn q(&self) -> usize {
        self.pres.inequalities.len()
    }

    fn rest(&self) -> &[Polynomial] {
        &self.pres.equations[1..]
    }

    fn steps(&self, ms: &[u32]) -> Vec<(Polynomial, u32)> {
        self.pres
            .inequalities
            .iter()
            .cloned()
            .zip(ms.iter().copied())
            .collect()
    }

    /// `g_i` for `i = ms.len()`.
    pub fn chain(&self, ms: &[u32]) -> ChainField {
        ChainField::new(&self.pres.equations[0], &self.steps(ms))
    }

    /// `A_i` for `i = ms.len()`.
    pub fn stage(&self, ms: &[u32]) -> Target {
        let n = self.nvars();
        let i = ms.len();
        let h = &self.pres.inequalities;
        let rest: Vec<Field> = self.rest().iter().map(Field::poly).collect();
        let tail: Vec<Field> = h[i..].iter().map(Field::poly).collect();
        let label = format!("A_{i}");
        if i == 0 {
            return Target::new(n, vec![self.pres.system()], label);
        }
        let prev = self.chain(&ms[..i - 1]);
        let mut inequalities = vec![Field::poly(&h[i - 1])];
        inequalities.extend(tail);
        let mut pieces = Vec::new();
        let steps = self.steps(&ms[..i - 1]);
        let mut chains = vec![(None, prev)];
        for k in 0..i - 1 {
            // On {g_k = 0} the chain restarts from g_{k+1} = -h_{k+1}^{m_{k+1}}.
            if let Ok(base) = steps[k].0.pow(steps[k].1) {
                let reduced = ChainField::new(&base.neg(), &steps[k + 1..]);
                chains.push((Some(Field::Chain(self.chain(&ms[..k]))), reduced));
            }
        }
        for positive in [true, false] {
            for (ridge, chain) in &chains {
                let mut equations = vec![Field::Branch(BranchField::new(
                    chain.clone(),
                    &h[i - 1],
                    ms[i - 1],
                    positive,
                ))];
                equations.extend(ridge.clone());
                equations.extend(rest.iter().cloned());
                pieces.push(System {
                    nvars: n,
                    equations,
                    inequalities: inequalities.clone(),
                });
            }
        }
        Target::new(n, pieces, label)
    }

    /// `{f̃ = 0, h_j >= 0 for j > i}`, the set on which `g_i` is compared with
    /// the distance to `A_i`.
    pub fn residual(&self, i: usize) -> Target {
        let n = self.nvars();
        let sys = System::from_polys(n, self.rest(), &self.pres.inequalities[i..]);
        Target::new(n, vec![sys], format!("B_{i}"))
    }

    /// `g_i` written with the recursion kept, e.g. `(z^2 - x^7)^2 - y^47`.
    pub fn structured(&self, ms: &[u32]) -> String {
        let mut s = self.pres.equations[0].to_string();
        for (h, m) in self.steps(ms) {
            s = format!("{}^2 - {}^{m}", wrap(&s), wrap(&h.to_string()));
        }
        s
    }

    /// `[g_i, f̃]` with `g_i` expanded exactly.
    pub fn expand(&self, ms: &[u32]) -> Result<Vec<Polynomial>, ApproxError> {
        let mut g = self.pres.equations[0].clone();
        for (h, m) in self.steps(ms) {
            g = step_combine(&g, &h, m)?;
        }
        let mut out = vec![g];
        out.extend(self.rest().iter().cloned());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse;

    fn quadrant() -> Stages {
        let v: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let p = |s: &str| parse(s, &v).unwrap();
        Stages::new(Presentation::new(v.clone(), vec![p("z")], vec![p("x"), p("y")], None).unwrap())
    }

    #[test]
    fn structured_form_nests_the_recursion() {
        let s = quadrant();
        assert_eq!(s.structured(&[]), "z");
        assert_eq!(s.structured(&[7]), "z^2 - x^7");
        assert_eq!(s.structured(&[7, 47]), "(z^2 - x^7)^2 - y^47");
    }

    #[test]
    fn expansion_matches_the_chain() {
        let s = quadrant();
        let e = s.expand(&[3, 5]).unwrap();
        let c = s.chain(&[3, 5]);
        let x = [0.3, 0.2, -0.1];
        assert!((e[0].eval_f64(&x).unwrap() - c.value(&x)).abs() < 1e-15);
    }

    #[test]
    fn branch_pieces_contain_the_stage_points() {
        let s = quadrant();
        let a1 = s.stage(&[7]);
        assert_eq!(a1.pieces.len(), 2);
        assert_eq!(s.stage(&[7, 47]).pieces.len(), 4);
        // z = x^{7/2} with y >= 0 lies on the positive branch.
        let x = [0.25f64, 0.1, 0.25f64.powf(3.5)];
        assert!(a1.pieces[0].equations[0].value(&x).abs() < 1e-15);
        assert!(a1.pieces[0].feasible(&x, 0.0));
        let b = s.residual(1);
        assert!(b.pieces[0].equations.is_empty());
        assert_eq!(b.pieces[0].inequalities.len(), 1);
    }
}
