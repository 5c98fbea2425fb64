//! JSON run configuration.

use crate::model::{Family, ModelParams};
use crate::profiles::TableOptions;
use crate::residual::{Resolution, Window, DEFAULT_LATTICE};
use crate::scaling::IvpOptions;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config is missing the `{0}` section")]
    MissingSection(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_r_min() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
}

/// `n` evenly spaced values from `lo` to `hi`, both ends exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

impl GridConfig {
    pub fn t_values(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.n_t)
    }

    pub fn r_values(&self) -> Vec<f64> {
        linspace(self.r_min, self.r_max, self.n_r)
    }
}

fn default_lattice() -> usize {
    DEFAULT_LATTICE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub resolutions: Vec<Resolution>,
    pub window: Window,
    #[serde(default = "default_lattice")]
    pub lattice: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn default_z_max() -> f64 {
    TableOptions::default().z_max
}

fn default_dz() -> f64 {
    TableOptions::default().dz
}

fn default_samples() -> usize {
    101
}

/// Tabulation settings and the sample count of the `profile` output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_dz")]
    pub dz: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            z_max: default_z_max(),
            dz: default_dz(),
            samples: default_samples(),
        }
    }
}

fn default_rtol() -> f64 {
    IvpOptions::default().rtol
}

fn default_atol() -> f64 {
    IvpOptions::default().atol
}

fn default_h_max() -> f64 {
    IvpOptions::default().h_max
}

/// Settings of the scaling IVP. Without `t_end` the integration runs to
/// the last time any requested output needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_h_max")]
    pub h_max: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            t_end: None,
            rtol: default_rtol(),
            atol: default_atol(),
            h_max: default_h_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<&GridConfig, ConfigError> {
        self.grid.as_ref().ok_or(ConfigError::MissingSection("grid"))
    }

    pub fn verify(&self) -> Result<&VerifyConfig, ConfigError> {
        self.verify
            .as_ref()
            .ok_or(ConfigError::MissingSection("verify"))
    }

    pub fn profile_config(&self) -> ProfileConfig {
        self.profile.unwrap_or_default()
    }

    pub fn scaling_config(&self) -> ScalingConfig {
        self.scaling.unwrap_or_default()
    }

    pub fn table_options(&self) -> TableOptions {
        let p = self.profile_config();
        TableOptions {
            z_max: p.z_max,
            dz: p.dz,
            ..TableOptions::default()
        }
    }

    /// IVP settings integrating at least to `needed`.
    pub fn ivp_options(&self, needed: f64) -> IvpOptions {
        let s = self.scaling_config();
        IvpOptions {
            t_end: s.t_end.unwrap_or(needed),
            rtol: s.rtol,
            atol: s.atol,
            h_max: s.h_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "model": {"N": 1, "gamma": 2.0, "theta": 2.0, "K": 1.0, "kappa": 1.0, "delta": 1},
        "family": {"type": "with_pressure_polytropic", "alpha": 1.0, "a0": 1.0, "a1": 0.5},
        "grid": {"t_min": 0.0, "t_max": 1.0, "n_t": 3, "r_min": 0.1, "r_max": 2.0, "n_r": 4},
        "verify": {"resolutions": [{"h_t": 0.001, "h_r": 0.001}], "window": {"t_min": 0.1, "t_max": 0.3, "r_min": 0.1, "r_max": 2.0}},
        "output": {"format": "json", "path": "out.json"},
        "profile": {"z_max": 5.0},
        "scaling": {"t_end": 2.0}
    }"#;

    #[test]
    fn round_trip_is_lossless() {
        let cfg = RunConfig::from_json(FULL).unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        let v1: serde_json::Value = serde_json::from_str(&cfg.to_json()).unwrap();
        let v2: serde_json::Value = serde_json::from_str(&again.to_json()).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(cfg.verify().unwrap().lattice, DEFAULT_LATTICE);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = FULL.replace("\"gamma\"", "\"gamm\"");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = FULL.replace("\"n_t\"", "\"nt\"");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = FULL.replace("\"z_max\": 5.0", "\"z_max\": 5.0, \"extra\": 1");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn optional_sections() {
        let minimal = r#"{
            "model": {"N": 3, "gamma": 1.0, "theta": 1.0, "K": 1.0, "kappa": 1.0, "delta": 1},
            "family": {"type": "with_pressure_isothermal", "A": 1.0, "B": 1.0, "C": 0.0, "a0": 1.0, "a1": 0.0}
        }"#;
        let cfg = RunConfig::from_json(minimal).unwrap();
        assert!(matches!(cfg.grid(), Err(ConfigError::MissingSection("grid"))));
        assert_eq!(cfg.ivp_options(0.7).t_end, 0.7);
        assert_eq!(cfg.table_options(), TableOptions::default());
    }

    #[test]
    fn grid_axes() {
        let cfg = RunConfig::from_json(FULL).unwrap();
        let g = cfg.grid().unwrap();
        assert_eq!(g.t_values(), vec![0.0, 0.5, 1.0]);
        let r = g.r_values();
        assert_eq!((r[0], r[3], r.len()), (0.1, 2.0, 4));
    }
}
