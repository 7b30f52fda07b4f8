//! Command-line front end: job documents, run reports and CSV output.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure, 3 search
//! exhaustion.

mod commands;
mod job;
mod report;

pub use commands::{
    approximate, dimension, loja, mesh, mesh_radii, parse_list, profile, verify, Approximation,
    MESH_RADII,
};
pub use job::{read_job, read_set, JobDocument, JobOptions, Overrides};
pub use report::{
    EffectiveConfig, EquivPair, Outcome, PieceReport, RunReport, SearchError, VerifyReport,
    CLOSURE_CAVEAT,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
        }
    }
}
