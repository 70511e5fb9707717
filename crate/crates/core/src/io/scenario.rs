use super::IoError;
use crate::bpi::BpiParams;
use crate::model::ModelParams;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(default)]
    pub seed: u64,
    pub horizon_logk: f64,
    pub grid_step: f64,
    #[serde(default = "one")]
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitBlock {
    pub t_max: f64,
    #[serde(default)]
    pub strict: bool,
    /// Number of equally spaced sample times in `[0, t_max]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    /// Sidecar JSON of a limit trajectory. Computed from `params` when absent.
    pub trajectory: Option<PathBuf>,
    /// Log-K window of the sup error. Defaults to the simulated horizon.
    pub window: Option<(f64, f64)>,
    pub tolerance: f64,
    pub crossing_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BpiMode {
    Mean,
    Variance,
    Limit,
    Survival,
    Simulate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpiBlock {
    pub params: BpiParams,
    pub mode: BpiMode,
    /// Evaluation times. Absolute for `mean`, `variance`, `survival`; log-K for `limit`.
    #[serde(default)]
    pub times: Vec<f64>,
    /// Ancestors for `survival`.
    #[serde(default = "one_u64")]
    pub ancestors: u64,
    /// Log-K horizon for `simulate`.
    pub t_end_logk: Option<f64>,
    pub grid_step: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub params: Option<ModelParams>,
    pub simulate: Option<SimulateBlock>,
    pub limit: Option<LimitBlock>,
    #[serde(default)]
    pub classify: bool,
    pub compare: Option<CompareBlock>,
    pub bpi: Option<BpiBlock>,
}

fn one() -> usize {
    1
}

fn one_u64() -> u64 {
    1
}

fn default_samples() -> usize {
    201
}

impl Scenario {
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Scenario, IoError> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| IoError::Scenario(e.to_string()))?;
        if let (Some(base), Some(c)) = (base, s.compare.as_mut()) {
            if let Some(p) = c.trajectory.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: &str| Err(IoError::Scenario(m.to_owned()));
        let model_blocks = self.simulate.is_some() || self.limit.is_some() || self.classify || self.compare.is_some();
        if !model_blocks && self.bpi.is_none() {
            return bad("no block present (need one of simulate, limit, classify, compare, bpi)");
        }
        if model_blocks && self.params.is_none() {
            return bad("missing \"params\"");
        }
        if let Some(s) = &self.simulate {
            if s.k < 2 {
                return bad("simulate.K must be >= 2");
            }
            if !(s.horizon_logk.is_finite() && s.horizon_logk >= 0.0) {
                return bad("simulate.horizon_logk must be finite and >= 0");
            }
            if !(s.grid_step > 0.0) {
                return bad("simulate.grid_step must be > 0");
            }
            if s.replicas == 0 {
                return bad("simulate.replicas must be >= 1");
            }
        }
        if let Some(l) = &self.limit {
            if !(l.t_max.is_finite() && l.t_max > 0.0) {
                return bad("limit.t_max must be finite and > 0");
            }
            if l.samples < 2 {
                return bad("limit.samples must be >= 2");
            }
        }
        if let Some(c) = &self.compare {
            if self.simulate.is_none() {
                return bad("compare needs a simulate block");
            }
            if !(c.tolerance >= 0.0) {
                return bad("compare.tolerance must be >= 0");
            }
            if let Some(p) = &c.trajectory {
                if !p.exists() {
                    return Err(IoError::Scenario(format!(
                        "compare.trajectory: file not found: {}",
                        p.display()
                    )));
                }
            }
            if let Some((a, b)) = c.window {
                if !(a < b) {
                    return bad("compare.window must be increasing");
                }
            }
        }
        if let Some(b) = &self.bpi {
            b.params.validate().map_err(|e| IoError::Scenario(format!("bpi.params: {e}")))?;
            if b.mode == BpiMode::Simulate && b.t_end_logk.is_none() {
                return bad("bpi.t_end_logk is required for mode \"simulate\"");
            }
            if b.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return bad("bpi.times must be finite and >= 0");
            }
        }
        Ok(())
    }

    /// The model parameters, required by every block except `bpi`.
    pub fn model(&self) -> Result<&ModelParams, IoError> {
        self.params.as_ref().ok_or_else(|| IoError::Scenario("missing \"params\"".into()))
    }
}

/// Reads and validates a scenario file. Relative paths inside it resolve
/// against the file's directory.
pub fn parse_scenario(path: &Path) -> Result<Scenario, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json(&text, path.parent())
}
