use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{PolyError, Rational};

/// Upper bound on the total degree of any polynomial built by arithmetic.
pub const MAX_DEGREE: u64 = 512;

/// Exponent vector, one entry per declared variable.
///
/// Ordered graded-lexicographically: higher total degree is greater, ties are
/// broken by comparing exponents from the first declared variable onward.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored, so the zero polynomial has an empty
/// term map and structural equality coincides with polynomial equality.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    vars: Arc<[String]>,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(vars: &[String]) -> Self {
        Polynomial {
            vars: vars.into(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[String], c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    /// The coordinate function `x_k`.
    pub fn var(vars: &[String], k: usize) -> Self {
        let mut p = Self::zero(vars);
        p.terms
            .insert(Monomial::var(vars.len(), k), Rational::one());
        p
    }

    /// Looks up a variable by name.
    pub fn var_named(vars: &[String], name: &str) -> Result<Self, PolyError> {
        vars.iter()
            .position(|v| v == name)
            .map(|k| Self::var(vars, k))
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms(
        vars: &[String],
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        for (exps, c) in terms {
            if exps.len() != vars.len() {
                return Err(PolyError::DimensionMismatch {
                    expected: vars.len(),
                    got: exps.len(),
                });
            }
            let m = Monomial(exps);
            if m.degree() > MAX_DEGREE {
                return Err(PolyError::DegreeOverflow(m.degree()));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u64 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Coefficient of the constant monomial, i.e. the value at the origin.
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.nvars()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn check_vars(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VariableMismatch {
                left: self.vars.to_vec(),
                right: other.vars.to_vec(),
            })
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_vars(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Polynomial::zero(&self.vars));
        }
        let deg = self.degree() + other.degree();
        if deg > MAX_DEGREE {
            return Err(PolyError::DegreeOverflow(deg));
        }
        let mut out = Polynomial::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Repeated squaring; `pow(0)` is the constant one.
    pub fn pow(&self, k: u32) -> Result<Polynomial, PolyError> {
        let deg = self.degree() * k as u64;
        if deg > MAX_DEGREE {
            return Err(PolyError::DegreeOverflow(deg));
        }
        let mut result = Polynomial::constant(&self.vars, Rational::one());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Partial derivative with respect to variable `k`.
    pub fn derivative(&self, k: usize) -> Polynomial {
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[k];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[k] -= 1;
            out.add_term(dm, c * Rational::from_integer(e.into()));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars()).map(|k| self.derivative(k)).collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        self.check_point(point.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                let c = c.to_f64().unwrap_or(f64::NAN);
                m.0.iter()
                    .zip(point)
                    .fold(c, |acc, (&e, &x)| acc * x.powi(e as i32))
            })
            .sum())
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        self.check_point(point.len())?;
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (&e, x) in m.0.iter().zip(point) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    fn check_point(&self, len: usize) -> Result<(), PolyError> {
        if len == self.nvars() {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch {
                expected: self.nvars(),
                got: len,
            })
        }
    }

    /// Substitutes `x_k -> Σ_j m[k][j] x_j`, i.e. returns `p(M x)`.
    pub fn linear_substitution(&self, m: &[Vec<Rational>]) -> Result<Polynomial, PolyError> {
        let n = self.nvars();
        if m.len() != n || m.iter().any(|row| row.len() != n) {
            return Err(PolyError::MatrixShape(format!(
                "expected {n}x{n} substitution"
            )));
        }
        let forms: Vec<Polynomial> = m
            .iter()
            .map(|row| {
                let mut f = Polynomial::zero(&self.vars);
                for (j, c) in row.iter().enumerate() {
                    f.add_term(Monomial::var(n, j), c.clone());
                }
                f
            })
            .collect();
        let mut powers: Vec<Vec<Polynomial>> = forms
            .iter()
            .map(|f| vec![Polynomial::constant(&self.vars, Rational::one()), f.clone()])
            .collect();
        let mut out = Polynomial::zero(&self.vars);
        for (mono, c) in &self.terms {
            let mut t = Polynomial::constant(&self.vars, c.clone());
            for (k, &e) in mono.0.iter().enumerate() {
                let e = e as usize;
                while powers[k].len() <= e {
                    let next = powers[k].last().unwrap().mul(&forms[k])?;
                    powers[k].push(next);
                }
                if e > 0 {
                    t = t.mul(&powers[k][e])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Same polynomial over a different (equal-length) variable list.
    pub fn rename_vars(&self, vars: &[String]) -> Result<Polynomial, PolyError> {
        if vars.len() != self.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars(),
                got: vars.len(),
            });
        }
        Ok(Polynomial {
            vars: vars.into(),
            terms: self.terms.clone(),
        })
    }

    /// Reorders coordinates: the result `q` satisfies `q(y) = p(x)` where
    /// `y[perm[k]] = x[k]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Polynomial {
        let n = self.nvars();
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; n];
            for k in 0..n {
                e[perm[k]] = m.0[k];
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

/// Prints in the expression grammar accepted by [`super::parse`], terms in
/// descending graded-lex order.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(a.to_string());
            }
            for (k, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars[k].clone()),
                    _ => factors.push(format!("{}^{}", self.vars[k], e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Rank of a rational matrix by exact Gaussian elimination.
pub fn matrix_rank(matrix: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<Rational>> = matrix.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let factor = &a[r][col] / &a[rank][col];
                let pivot_row = a[rank][col..].to_vec();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Linear combinations of `polys`: output `j` is `Σ_k matrix[j][k] polys[k]`.
///
/// The matrix must have full row rank and no more rows than columns.
pub fn compose_linear(
    polys: &[Polynomial],
    matrix: &[Vec<Rational>],
) -> Result<Vec<Polynomial>, PolyError> {
    let p = polys.len();
    if matrix.iter().any(|row| row.len() != p) {
        return Err(PolyError::MatrixShape(format!(
            "every row must have {p} entries"
        )));
    }
    let Some(first) = polys.first() else {
        return Err(PolyError::MatrixShape("no polynomials".into()));
    };
    for q in polys {
        first.check_vars(q)?;
    }
    let rank = matrix_rank(matrix);
    if matrix.len() > p || rank < matrix.len() {
        return Err(PolyError::RankDeficientMatrix {
            rank,
            rows: matrix.len(),
        });
    }
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .zip(polys)
                .try_fold(Polynomial::zero(first.vars()), |acc, (c, q)| {
                    acc.add(&q.scale(c))
                })
        })
        .collect()
}

fn determinant(m: &[Vec<Polynomial>], vars: &[String]) -> Result<Polynomial, PolyError> {
    match m.len() {
        0 => Ok(Polynomial::constant(vars, Rational::one())),
        1 => Ok(m[0][0].clone()),
        k => {
            let mut acc = Polynomial::zero(vars);
            for col in 0..k {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Polynomial>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != col)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][col].mul(&determinant(&minor, vars)?)?;
                acc = if col % 2 == 0 {
                    acc.add(&term)?
                } else {
                    acc.sub(&term)?
                };
            }
            Ok(acc)
        }
    }
}

/// All maximal minors of the Jacobian of `polys`, one per choice of
/// `polys.len()` columns in increasing order, zero minors omitted. Their
/// common zero set is the critical locus `{rank dF < polys.len()}`.
pub fn jacobian_minors(polys: &[Polynomial]) -> Result<Vec<Polynomial>, PolyError> {
    let Some(first) = polys.first() else {
        return Ok(Vec::new());
    };
    for q in polys {
        first.check_vars(q)?;
    }
    let n = first.nvars();
    let k = polys.len();
    let grads: Vec<Vec<Polynomial>> = polys.iter().map(Polynomial::gradient).collect();
    let mut out = Vec::new();
    let mut cols: Vec<usize> = (0..k).collect();
    if k > n {
        return Ok(vec![Polynomial::zero(first.vars())]);
    }
    loop {
        let m: Vec<Vec<Polynomial>> = grads
            .iter()
            .map(|g| cols.iter().map(|&c| g[c].clone()).collect())
            .collect();
        let d = determinant(&m, first.vars())?;
        if !d.is_zero() {
            out.push(d);
        }
        let Some(i) = (0..k).rev().find(|&i| cols[i] < n - k + i) else {
            break;
        };
        cols[i] += 1;
        for j in i + 1..k {
            cols[j] = cols[j - 1] + 1;
        }
    }
    Ok(out)
}
