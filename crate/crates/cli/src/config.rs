//! JSON configuration files. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub source: Option<SourceConfig>,
    pub angles: Option<AnglesConfig>,
    pub inequalities: Option<Vec<String>>,
    /// Setting angle for the CH comparison, degrees.
    pub phi_setting: Option<f64>,
    pub run: Option<RunConfig>,
    pub optimize: Option<OptimizeConfig>,
}

/// `{"kind": "ideal"}` or `{"kind": "real", "eta": .., "phi_deg": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: SourceKind,
    pub eta: Option<f64>,
    pub phi_deg: Option<f64>,
    pub f_override: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Ideal,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesConfig {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pairs_per_setting: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub inequality: Option<String>,
    pub free: Option<Vec<String>>,
    pub grid_step: Option<f64>,
    pub tolerance: Option<f64>,
}

pub fn parse(text: &str) -> Result<Config, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn load(path: &Path) -> Result<Config, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}
