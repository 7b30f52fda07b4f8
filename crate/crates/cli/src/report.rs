//! Run reports: the JSON written by `approximate` and `verify`.

use serde::{Deserialize, Serialize};

use algapprox::approximator::{
    ApproxError, ApproximationResult, KFilterSummary, RunOutput, StepRecord, TrialFailure,
};
use algapprox::metric::{SEquivReport, SamplerConfig};
use algapprox::polycore::parse;
use algapprox::presentation::{DimensionEstimate, PieceDocument, RegularityReport};

use crate::job::JobDocument;
use crate::CliError;

pub const CLOSURE_CAVEAT: &str =
    "the output is V(F_q) itself, not the Zariski closure of A_q ∩ K; \
                                  components of V(F_q) inside the horn around X are not certified";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Verified,
    VerificationFailed,
    SearchExhausted,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::VerificationFailed => 2,
            Outcome::SearchExhausted => 3,
        }
    }
}

/// Both directions of an s-equivalence check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivPair {
    pub a_leq_b: SEquivReport,
    pub b_leq_a: SEquivReport,
    pub pass: bool,
}

impl EquivPair {
    pub fn new((a_leq_b, b_leq_a): (SEquivReport, SEquivReport)) -> Self {
        EquivPair {
            pass: a_leq_b.pass && b_leq_a.pass,
            a_leq_b,
            b_leq_a,
        }
    }

    fn consistent(&self) -> bool {
        self.pass == (self.a_leq_b.pass && self.b_leq_a.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub sampler: SamplerConfig,
    pub max_exponent: u32,
    pub max_projection_tries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceReport {
    pub piece: usize,
    pub dimension: usize,
    /// The regular presentation that was approximated.
    pub presentation: PieceDocument,
    /// `F_q`, expanded, in the polynomial grammar.
    pub equations: Vec<String>,
    /// `g_q` with the recursion kept.
    pub structured: String,
    pub projection_matrix: Option<Vec<Vec<String>>>,
    pub ball_exponent: Option<u32>,
    pub regularity: RegularityReport,
    pub k_filter: KFilterSummary,
    pub steps: Vec<StepRecord>,
    /// `V(F_q)` against the piece, both restricted to `K`.
    pub final_report: EquivPair,
    pub final_dimension: DimensionEstimate,
    pub dimension_ok: bool,
    pub verified: bool,
    pub warnings: Vec<String>,
}

impl PieceReport {
    pub fn new(r: &ApproximationResult) -> Self {
        let final_report = EquivPair::new(r.final_report.clone());
        let dimension_ok = r.final_dimension.dimension == r.dimension;
        PieceReport {
            piece: r.piece,
            dimension: r.dimension,
            presentation: r.presentation.to_document(),
            equations: r.equations.iter().map(|p| p.to_string()).collect(),
            structured: r.structured.clone(),
            projection_matrix: r.projection.as_ref().map(|p| p.matrix.clone()),
            ball_exponent: r.projection.as_ref().map(|p| p.ball_exponent),
            regularity: r.regularity.clone(),
            k_filter: r.k_filter.clone(),
            steps: r.steps.clone(),
            verified: final_report.pass && dimension_ok,
            final_report,
            final_dimension: r.final_dimension.clone(),
            dimension_ok,
            warnings: r.warnings.clone(),
        }
    }
}

/// Why a run stopped before producing equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchError {
    pub message: String,
    pub piece: Option<usize>,
    pub step: Option<usize>,
    pub failures: Vec<TrialFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub job: JobDocument,
    pub effective: EffectiveConfig,
    pub outcome: Outcome,
    pub pieces: Vec<PieceReport>,
    /// Pairwise products of the pieces' equations, cutting out their union.
    pub combined_equations: Option<Vec<String>>,
    pub error: Option<SearchError>,
    pub dropped_inequalities: Vec<(usize, Vec<String>)>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn from_output(
        job: JobDocument,
        effective: EffectiveConfig,
        out: &RunOutput,
        dropped: Vec<(usize, Vec<String>)>,
    ) -> Self {
        let pieces: Vec<PieceReport> = out.pieces.iter().map(PieceReport::new).collect();
        let outcome = if pieces.iter().all(|p| p.verified) {
            Outcome::Verified
        } else {
            Outcome::VerificationFailed
        };
        let mut warnings = vec![CLOSURE_CAVEAT.to_string()];
        warnings.extend(out.warnings.iter().cloned());
        RunReport {
            job,
            effective,
            outcome,
            pieces,
            combined_equations: out
                .combined
                .as_ref()
                .map(|c| c.iter().map(|p| p.to_string()).collect()),
            error: None,
            dropped_inequalities: dropped,
            warnings,
        }
    }

    /// Report of a run that stopped in an exponent or projection search.
    pub fn exhausted(
        job: JobDocument,
        effective: EffectiveConfig,
        err: &ApproxError,
        dropped: Vec<(usize, Vec<String>)>,
    ) -> Self {
        let (piece, step, failures) = match err {
            ApproxError::ExponentSearchExhausted {
                piece,
                step,
                failures,
                ..
            } => (Some(*piece), Some(*step), failures.clone()),
            _ => (None, None, Vec::new()),
        };
        RunReport {
            job,
            effective,
            outcome: Outcome::SearchExhausted,
            pieces: Vec::new(),
            combined_equations: None,
            error: Some(SearchError {
                message: err.to_string(),
                piece,
                step,
                failures,
            }),
            dropped_inequalities: dropped,
            warnings: Vec::new(),
        }
    }

    /// Checks that verdicts agree with the embedded reports and that every
    /// equation parses under the job's variables.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Input(format!("invalid report: {msg}")));
        let vars = &self.job.variables;
        for p in &self.pieces {
            if !p.final_report.consistent() {
                return bad(format!(
                    "piece {}: final verdict disagrees with its reports",
                    p.piece
                ));
            }
            if p.dimension_ok != (p.final_dimension.dimension == p.dimension) {
                return bad(format!(
                    "piece {}: dimension verdict is inconsistent",
                    p.piece
                ));
            }
            if p.verified != (p.final_report.pass && p.dimension_ok) {
                return bad(format!("piece {}: verified flag is inconsistent", p.piece));
            }
            for s in &p.steps {
                let ok = s.verification.0.pass && s.verification.1.pass;
                if !ok || s.tried_ms.last() != Some(&s.chosen_m) {
                    return bad(format!(
                        "piece {} step {}: inconsistent record",
                        p.piece, s.index
                    ));
                }
            }
        }
        let equations = self.pieces.iter().flat_map(|p| &p.equations);
        for e in equations.chain(self.combined_equations.iter().flatten()) {
            parse(e, vars)
                .map_err(|err| CliError::Input(format!("invalid report: `{e}`: {err}")))?;
        }
        let expected = match (&self.error, self.pieces.iter().all(|p| p.verified)) {
            (Some(_), _) => Outcome::SearchExhausted,
            (None, true) => Outcome::Verified,
            (None, false) => Outcome::VerificationFailed,
        };
        if self.outcome != expected {
            return bad(format!(
                "outcome {:?} but reports give {expected:?}",
                self.outcome
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: RunReport = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("invalid report: {e}")))?;
        r.validate()?;
        Ok(r)
    }
}

/// Output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub s: f64,
    pub sampler: SamplerConfig,
    pub result: EquivPair,
}
