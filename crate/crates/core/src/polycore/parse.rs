//! Recursive-descent parser for the polynomial expression grammar:
//!
//! ```text
//! expr     := ['-'] term (('+' | '-') ['-'] term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' uint)?
//! base     := variable | rational | '(' expr ')'
//! rational := int ('/' posint)?
//! ```
//!
//! Whitespace is ignored and implicit multiplication is rejected.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{PolyError, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn syntax(pos: usize, msg: impl Into<String>) -> PolyError {
    PolyError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, PolyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(text[start..i].parse().unwrap())));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => return Err(syntax(start, format!("unexpected character `{other}`"))),
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].1
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].1.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.signed_term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.signed_term()?)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.signed_term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn signed_term(&mut self) -> Result<Polynomial, PolyError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.term()?.neg());
        }
        self.term()
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.factor()?)?;
        }
        match self.peek() {
            Tok::Ident(_) | Tok::Int(_) | Tok::LParen => Err(syntax(
                self.pos(),
                "implicit multiplication is not allowed; use `*`",
            )),
            _ => Ok(acc),
        }
    }

    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Int(k) => {
                let k: u32 = k
                    .try_into()
                    .map_err(|_| PolyError::DegreeOverflow(u64::MAX))?;
                base.pow(k)
            }
            _ => Err(syntax(pos, "expected a non-negative integer exponent")),
        }
    }

    fn base(&mut self) -> Result<Polynomial, PolyError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(name) => Polynomial::var_named(self.vars, &name),
            Tok::Int(num) => {
                let mut value = Rational::from_integer(num);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump() {
                        Tok::Int(den) if !den.is_zero() => {
                            value /= Rational::from_integer(den);
                        }
                        Tok::Int(_) => return Err(syntax(dpos, "zero denominator")),
                        _ => return Err(syntax(dpos, "expected a positive integer denominator")),
                    }
                }
                Ok(Polynomial::constant(self.vars, value))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                let cpos = self.pos();
                match self.bump() {
                    Tok::RParen => Ok(inner),
                    _ => Err(syntax(cpos, "expected `)`")),
                }
            }
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            other => Err(syntax(pos, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses `text` as a polynomial in the ordered variables `vars`.
pub fn parse(text: &str, vars: &[String]) -> Result<Polynomial, PolyError> {
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, idx: 0, vars };
    let p = parser.expr()?;
    match parser.peek() {
        Tok::End => Ok(p),
        _ => Err(syntax(parser.pos(), "unexpected trailing input")),
    }
}
