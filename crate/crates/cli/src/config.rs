//! Run configuration: one JSON object whose top-level keys mirror
//! [`SimConfig`], plus sections for the other subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use membrane_core::evolver::SimConfig;
use membrane_core::profile::WaveProfile;
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the output directory of the config.
pub const OUT_ENV: &str = "MEMBRANE_LAB_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(flatten)]
    pub sim: SimConfig,
    pub verify: VerifyConfig,
    pub inequalities: InequalityConfig,
    pub commutators: CommutatorConfig,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            seed: 42,
            output_dir: PathBuf::from("membrane-lab-out"),
            sim: SimConfig::default(),
            verify: VerifyConfig::default(),
            inequalities: InequalityConfig::default(),
            commutators: CommutatorConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    /// `affine`, `lightspeed`, `superluminal` or `all`.
    pub family: String,
    pub profile: String,
    pub profile_params: BTreeMap<String, f64>,
    pub a: f64,
    pub b: f64,
    pub affine_speed: f64,
    pub superluminal_speed: f64,
    pub sizes: Vec<usize>,
    pub half_width: f64,
    pub t: f64,
    pub dt_ratio: f64,
    pub scheme_order: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            family: "all".into(),
            profile: "sech".into(),
            profile_params: BTreeMap::from([("amplitude".to_string(), 0.5)]),
            a: 0.0,
            b: 1.0,
            affine_speed: 0.5,
            superluminal_speed: 1.5,
            sizes: vec![65, 129, 257, 513],
            half_width: 2.0,
            t: 0.3,
            dt_ratio: 0.7,
            scheme_order: 4,
        }
    }
}

impl VerifyConfig {
    pub fn profile(&self) -> membrane_core::Result<WaveProfile> {
        let params: Vec<(String, f64)> = self.profile_params.iter().map(|(k, v)| (k.clone(), *v)).collect();
        WaveProfile::from_name(&self.profile, &params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InequalityConfig {
    /// Estimate names, or `all`.
    pub which: Vec<String>,
    pub count: usize,
    pub refine: bool,
}

impl Default for InequalityConfig {
    fn default() -> Self {
        InequalityConfig {
            which: vec!["all".into()],
            count: 100,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommutatorConfig {
    pub count: usize,
    pub degree: usize,
}

impl Default for CommutatorConfig {
    fn default() -> Self {
        CommutatorConfig { count: 100, degree: 4 }
    }
}

impl LabConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}
