//! Job documents: a set, a level `s` and run options.

use std::path::Path;

use serde::{Deserialize, Serialize};

use algapprox::approximator::ApproxConfig;
use algapprox::metric::SamplerConfig;
use algapprox::presentation::{load, PieceDocument, SetDescription, SetDocument};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobOptions {
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_exponent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_projection_tries: Option<usize>,
    /// Remove inequalities that vanish on every sample of their piece.
    #[serde(default)]
    pub drop_vanishing_inequalities: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobDocument {
    pub variables: Vec<String>,
    pub pieces: Vec<PieceDocument>,
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_dimension: Option<usize>,
    #[serde(default)]
    pub options: JobOptions,
}

impl JobDocument {
    pub fn set_document(&self) -> SetDocument {
        SetDocument {
            variables: self.variables.clone(),
            pieces: self.pieces.clone(),
            declared_dimension: self.declared_dimension,
        }
    }

    pub fn set(&self) -> Result<SetDescription, CliError> {
        load(&self.set_document()).map_err(|e| CliError::Input(e.to_string()))
    }
}

/// Command-line values that take precedence over job options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub max_exponent: Option<u32>,
}

impl Overrides {
    pub fn apply_sampler(&self, cfg: &mut SamplerConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.samples {
            cfg.samples_per_radius = n;
        }
        if let Some(r) = &self.radii {
            cfg.radii = r.clone();
        }
    }

    pub fn sampler(&self) -> SamplerConfig {
        let mut cfg = SamplerConfig::default();
        self.apply_sampler(&mut cfg);
        cfg
    }

    /// Defaults, then job options, then these overrides.
    pub fn approx_config(&self, options: &JobOptions) -> ApproxConfig {
        let defaults = ApproxConfig::default();
        let mut sampler = options.sampler.clone();
        self.apply_sampler(&mut sampler);
        ApproxConfig {
            sampler,
            max_exponent: self
                .max_exponent
                .or(options.max_exponent)
                .unwrap_or(defaults.max_exponent),
            max_projection_tries: options
                .max_projection_tries
                .unwrap_or(defaults.max_projection_tries),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_job(path: &Path) -> Result<JobDocument, CliError> {
    parse_json(&read(path)?, path)
}

/// Reads a set document, or the set of a job document.
pub fn read_set(path: &Path) -> Result<SetDescription, CliError> {
    let text = read(path)?;
    let doc = match parse_json::<SetDocument>(&text, path) {
        Ok(doc) => doc,
        Err(e) => match serde_json::from_str::<JobDocument>(&text) {
            Ok(job) => job.set_document(),
            Err(_) => return Err(e),
        },
    };
    load(&doc).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
