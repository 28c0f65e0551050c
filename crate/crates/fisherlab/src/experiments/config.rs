//! Schema-versioned experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::instance::{BumpInstance, Constants};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Game(GameConfig),
    Equivalence(EquivalenceConfig),
    Scaling(ScalingConfig),
}

/// How the instance family is specified: by `ε`, by radii, or by explicit centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
}

impl InstanceSpec {
    pub fn build(&self, constants: &Constants) -> Result<BumpInstance, ExperimentError> {
        let inst = match (self.eps, self.r, self.big_r, &self.centers) {
            (None, Some(r), Some(big_r), Some(c)) => BumpInstance::with_centers(self.d, r, big_r, c.clone(), 0)?,
            (Some(eps), None, None, None) => BumpInstance::from_eps(self.d, eps, constants)?,
            (None, Some(r), Some(big_r), None) => BumpInstance::from_radii(self.d, r, big_r)?,
            (None, None, Some(big_r), None) => BumpInstance::from_big_r(self.d, big_r)?,
            _ => {
                return Err(ExperimentError::Validation(
                    "instance needs exactly one of: eps; R; r and R; r, R and centers".into(),
                ))
            }
        };
        Ok(inst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Scan,
    AveragedLmc,
    RejectionWarm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub instance: InstanceSpec,
    pub strategy: Strategy,
    /// Query budget `N`.
    pub budget: u64,
    /// LMC step size for the averaged-LMC strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TestPotential {
    /// `x²/4 − cos(x)/2`.
    #[default]
    CosineWell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    #[serde(default)]
    pub potential: TestPotential,
    pub eps: f64,
    #[serde(default = "one_usize")]
    pub d: usize,
    /// Declared `Δ ≥ V(x₀) − inf V` for the averaged-LMC initialization.
    #[serde(default = "one")]
    pub delta: f64,
    /// `h = c_h·ε²/d`.
    #[serde(default = "half")]
    pub c_h: f64,
    /// `N = ⌈c_n·dΔ/ε²⌉`.
    #[serde(default = "one")]
    pub c_n: f64,
    /// Gradient-descent start.
    #[serde(default = "three")]
    pub x0: f64,
    /// `ε` values for the iteration-count sweep; empty to skip it.
    #[serde(default)]
    pub sweep: Vec<f64>,
    /// Trials per success estimate in the sweep.
    #[serde(default = "sweep_trials")]
    pub sweep_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum ScalingConfig {
    FiDecay(FiDecayConfig),
    RejectionAccuracy(RejectionAccuracyConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiDecayConfig {
    /// Parameter of the 1-D instance.
    pub eps: f64,
    pub ns: Vec<u64>,
    /// `h_N = c_h·√(K₀/(dN))/β`.
    #[serde(default = "half")]
    pub c_h: f64,
    #[serde(default = "grid_n")]
    pub grid_n: usize,
    #[serde(default = "two")]
    pub refinement: usize,
    #[serde(default = "mass_tol")]
    pub mass_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RejectionAccuracyConfig {
    pub m0: f64,
    pub eps: Vec<f64>,
    /// `t = c_t·ε²/d`.
    #[serde(default = "half")]
    pub c_t: f64,
    /// Width of the Gaussian dip in the warm start.
    #[serde(default = "half")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn three() -> f64 {
    3.0
}
fn one_usize() -> usize {
    1
}
fn two() -> usize {
    2
}
fn grid_n() -> usize {
    4096
}
fn mass_tol() -> f64 {
    crate::diagnostics::MASS_TOL
}
fn sweep_trials() -> u64 {
    400
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, trials: u64, seed: u64) -> Self {
        ExperimentConfig { schema_version: CONFIG_VERSION, experiment, trials, seed, constants: Constants::default(), output: None }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        match raw.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == CONFIG_VERSION as u64 => {}
            Some(v) => return Err(ExperimentError::Config(format!("config schema version {v} is not supported (expected {CONFIG_VERSION})"))),
            None => return Err(ExperimentError::Config("missing field `schema_version`".into())),
        }
        let cfg: ExperimentConfig = serde_json::from_value(raw).map_err(|e| ExperimentError::Config(e.to_string()))?;
        if cfg.trials == 0 {
            return Err(ExperimentError::Validation("trials must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Canonical JSON, used for hashing.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
