//! Presented semialgebraic sets `{F = 0, h_j >= 0}` and finite unions of
//! them, with the validators needed before approximation.

mod dimension;
mod regularity;

pub use dimension::{
    box_counting_slope, dimension_from_slices, estimate_local_dimension, estimate_target_dimension,
    DimensionEstimate,
};
pub use regularity::{
    check_regularity, drop_vanishing_inequalities, InequalityCheck, RegularityReport,
};

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricError, System, Target};
use crate::polycore::{parse, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresentationError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("piece {piece}: `{expr}` does not vanish at the origin")]
    OriginNotMember { piece: usize, expr: String },
    #[error("piece {piece}: cannot parse `{expr}`: {source}")]
    Parse {
        piece: usize,
        expr: String,
        source: PolyError,
    },
    #[error("presentation has {got} equations but codimension n - d = {expected}")]
    WrongCodimension { expected: usize, got: usize },
    #[error("box-counting slopes disagree across radii: {slopes:?}")]
    InconsistentVotes { slopes: Vec<f64> },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// One basic piece in a set document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDocument {
    #[serde(default)]
    pub equations: Vec<String>,
    #[serde(default)]
    pub inequalities: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_dimension: Option<usize>,
}

/// Serialized form of a [`SetDescription`]: polynomials are strings in the
/// expression grammar of [`crate::polycore::parse`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDocument {
    pub variables: Vec<String>,
    pub pieces: Vec<PieceDocument>,
    /// Default for pieces without their own `declared_dimension`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_dimension: Option<usize>,
}

/// `{x : equations(x) = 0, inequalities(x) >= 0}` containing the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    pub variables: Vec<String>,
    pub equations: Vec<Polynomial>,
    pub inequalities: Vec<Polynomial>,
    pub declared_dimension: Option<usize>,
}

impl Presentation {
    pub fn new(
        variables: Vec<String>,
        equations: Vec<Polynomial>,
        inequalities: Vec<Polynomial>,
        declared_dimension: Option<usize>,
    ) -> Result<Self, PresentationError> {
        let p = Presentation {
            variables,
            equations,
            inequalities,
            declared_dimension,
        };
        p.validate(0)?;
        Ok(p)
    }

    fn validate(&self, piece: usize) -> Result<(), PresentationError> {
        let n = self.nvars();
        for poly in self.equations.iter().chain(&self.inequalities) {
            if poly.vars() != self.variables.as_slice() {
                return Err(PolyError::VariableMismatch {
                    left: self.variables.clone(),
                    right: poly.vars().to_vec(),
                }
                .into());
            }
            if !poly.constant_term().is_zero() {
                return Err(PresentationError::OriginNotMember {
                    piece,
                    expr: poly.to_string(),
                });
            }
        }
        if let Some(d) = self.declared_dimension {
            if d >= n {
                return Err(PresentationError::Schema(format!(
                    "declared_dimension {d} must be below the number of variables {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn system(&self) -> System {
        System::from_polys(self.nvars(), &self.equations, &self.inequalities)
    }

    pub fn target(&self, label: impl Into<String>) -> Target {
        Target::new(self.nvars(), vec![self.system()], label)
    }

    /// `{F = 0, h_j = 0, h_k >= 0 for k != j}`.
    pub fn boundary(&self, j: usize) -> Presentation {
        let mut p = self.clone();
        let h = p.inequalities.remove(j);
        p.equations.push(h);
        p
    }

    /// Same equations, keeping only inequalities with index `>= keep_from`.
    pub fn keep_inequalities_from(&self, keep_from: usize) -> Presentation {
        let mut p = self.clone();
        p.inequalities = self.inequalities.iter().skip(keep_from).cloned().collect();
        p
    }

    pub fn to_document(&self) -> PieceDocument {
        PieceDocument {
            equations: self.equations.iter().map(|p| p.to_string()).collect(),
            inequalities: self.inequalities.iter().map(|p| p.to_string()).collect(),
            declared_dimension: self.declared_dimension,
        }
    }
}

/// Finite union of presentations sharing one variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct SetDescription {
    pub variables: Vec<String>,
    pub pieces: Vec<Presentation>,
}

impl SetDescription {
    pub fn new(pieces: Vec<Presentation>) -> Result<Self, PresentationError> {
        let first = pieces
            .first()
            .ok_or_else(|| PresentationError::Schema("a set needs at least one piece".into()))?;
        let variables = first.variables.clone();
        for (i, p) in pieces.iter().enumerate() {
            if p.variables != variables {
                return Err(PresentationError::Schema(format!(
                    "piece {i} uses variables {:?}, expected {variables:?}",
                    p.variables
                )));
            }
            p.validate(i)?;
        }
        Ok(SetDescription { variables, pieces })
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn target(&self, label: impl Into<String>) -> Target {
        Target::new(
            self.nvars(),
            self.pieces.iter().map(Presentation::system).collect(),
            label,
        )
    }

    pub fn to_document(&self) -> SetDocument {
        SetDocument {
            variables: self.variables.clone(),
            pieces: self.pieces.iter().map(Presentation::to_document).collect(),
            declared_dimension: None,
        }
    }
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses and checks a set document.
pub fn load(doc: &SetDocument) -> Result<SetDescription, PresentationError> {
    let vars = &doc.variables;
    if vars.is_empty() {
        return Err(PresentationError::Schema("`variables` is empty".into()));
    }
    if let Some(bad) = vars.iter().find(|v| !valid_identifier(v)) {
        return Err(PresentationError::Schema(format!(
            "invalid variable name `{bad}`"
        )));
    }
    if vars.iter().collect::<BTreeSet<_>>().len() != vars.len() {
        return Err(PresentationError::Schema("duplicate variable names".into()));
    }
    if doc.pieces.is_empty() {
        return Err(PresentationError::Schema("`pieces` is empty".into()));
    }
    let mut pieces = Vec::with_capacity(doc.pieces.len());
    for (i, pd) in doc.pieces.iter().enumerate() {
        let parse_all = |exprs: &[String]| -> Result<Vec<Polynomial>, PresentationError> {
            exprs
                .iter()
                .map(|e| {
                    parse(e, vars).map_err(|source| PresentationError::Parse {
                        piece: i,
                        expr: e.clone(),
                        source,
                    })
                })
                .collect()
        };
        let p = Presentation {
            variables: vars.clone(),
            equations: parse_all(&pd.equations)?,
            inequalities: parse_all(&pd.inequalities)?,
            declared_dimension: pd.declared_dimension.or(doc.declared_dimension),
        };
        p.validate(i)?;
        pieces.push(p);
    }
    SetDescription::new(pieces)
}
