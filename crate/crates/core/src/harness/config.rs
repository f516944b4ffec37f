//! Flat TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{spectrum_with_tail, SyntheticSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Synthetic,
    Libsvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Deepca,
    Depca,
    Centralized,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Deepca => "deepca",
            Algorithm::Depca => "depca",
            Algorithm::Centralized => "centralized",
        }
    }
}

fn default_true() -> bool {
    true
}

/// One experiment. Field names are the TOML keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SourceKind,
    /// Number of agents.
    pub m: usize,
    /// Feature dimension.
    pub d: usize,
    /// Samples per agent (libsvm only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_path: Option<PathBuf>,
    /// Full spectrum of the mean matrix (synthetic only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    /// Leading eigenvalues, completed by a linear tail (synthetic only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_eigenvalues: Option<Vec<f64>>,
    /// `[first, last]` of the linear tail.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_range: Option<[f64; 2]>,
    #[serde(default)]
    pub heterogeneity: f64,
    #[serde(default)]
    pub data_seed: u64,
    pub k: usize,
    pub graph_p: f64,
    pub graph_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub k_steps: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub init_seed: u64,
    pub output_path: PathBuf,
    #[serde(default = "default_true")]
    pub depca_use_fast_mix: bool,
    #[serde(default = "default_true")]
    pub depca_use_sign_adjust: bool,
}

/// Where the problem comes from, after validation.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Libsvm { path: PathBuf, m: usize, n: usize, d: usize },
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads, parses and validates a config file. Relative paths inside it are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(p) = &self.dataset_path {
            if p.is_relative() {
                self.dataset_path = Some(base.join(p));
            }
        }
        if self.output_path.is_relative() {
            self.output_path = base.join(&self.output_path);
        }
    }

    /// Sets all seeds from one value: data `s`, graph `s+1`, initial point `s+2`.
    pub fn override_seeds(&mut self, seed: u64) {
        self.data_seed = seed;
        self.graph_seed = seed.wrapping_add(1);
        self.init_seed = seed.wrapping_add(2);
    }

    pub fn data_source(&self) -> Result<DataSource, ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        match self.source {
            SourceKind::Libsvm => {
                let Some(path) = self.dataset_path.clone() else {
                    return invalid("libsvm source needs dataset_path".into());
                };
                let Some(n) = self.n else {
                    return invalid("libsvm source needs n".into());
                };
                if self.eigenvalues.is_some() || self.top_eigenvalues.is_some() {
                    return invalid("eigenvalues only apply to synthetic sources".into());
                }
                Ok(DataSource::Libsvm { path, m: self.m, n, d: self.d })
            }
            SourceKind::Synthetic => {
                let eigenvalues = match (&self.eigenvalues, &self.top_eigenvalues, self.tail_range) {
                    (Some(ev), None, None) => ev.clone(),
                    (None, Some(top), Some([hi, lo])) => {
                        if top.len() > self.d {
                            return invalid(format!("{} top eigenvalues exceed d = {}", top.len(), self.d));
                        }
                        spectrum_with_tail(top, self.d, hi, lo)
                    }
                    _ => {
                        return invalid(
                            "synthetic source needs either eigenvalues or top_eigenvalues with tail_range".into(),
                        )
                    }
                };
                if self.dataset_path.is_some() || self.n.is_some() {
                    return invalid("dataset_path and n only apply to libsvm sources".into());
                }
                let spec = SyntheticSpec {
                    d: self.d,
                    k: self.k,
                    m: self.m,
                    eigenvalues,
                    heterogeneity: self.heterogeneity,
                    seed: self.data_seed,
                };
                spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Ok(DataSource::Synthetic(spec))
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.m == 0 {
            return invalid("m must be at least 1".into());
        }
        if self.k == 0 || self.k >= self.d {
            return invalid(format!("need 1 <= k < d, got k = {}, d = {}", self.k, self.d));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return invalid(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.graph_p > 0.0 && self.graph_p <= 1.0) {
            return invalid(format!("graph_p must lie in (0, 1], got {}", self.graph_p));
        }
        if self.algorithms.is_empty() {
            return invalid("algorithms must not be empty".into());
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return invalid(format!("algorithm {} listed twice", a.name()));
            }
        }
        self.data_source()?;
        Ok(())
    }
}
