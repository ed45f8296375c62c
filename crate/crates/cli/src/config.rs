//! Tool-wide configuration file and the per-run manifest.

use std::path::{Path, PathBuf};

use mrhe_core::clutch::{
    ClutchConfig, CoilElectrical, ForceVoltageModel, DEFAULT_COEFFS, DEFAULT_R_POWER, DEFAULT_SIGMA, DEFAULT_V_MAX,
};
use mrhe_core::control::Thresholds;
use mrhe_core::kinetics::LinkageGeometry;
use mrhe_core::{Result, TwinError};
use serde::{Deserialize, Serialize};

pub const OUT_DIR_ENV: &str = "MRHE_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "mrhe-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub coil: CoilElectrical,
    pub force_coeffs: [f64; 6],
    pub v_max: f64,
    pub r_power: f64,
    pub sigma: f64,
    pub geometry: LinkageGeometry,
    pub thresholds: Thresholds,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            coil: CoilElectrical::default(),
            force_coeffs: DEFAULT_COEFFS,
            v_max: DEFAULT_V_MAX,
            r_power: DEFAULT_R_POWER,
            sigma: DEFAULT_SIGMA,
            geometry: LinkageGeometry::default(),
            thresholds: Thresholds::default(),
        }
    }
}

impl ToolConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| TwinError::Io(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| TwinError::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        cfg.geometry.validate()?;
        cfg.thresholds.validate()?;
        cfg.coil.validate()?;
        Ok(cfg)
    }

    pub fn clutch(&self) -> Result<ClutchConfig> {
        let model = ForceVoltageModel::new(self.force_coeffs, self.v_max)?;
        ClutchConfig::new(self.coil.clone(), model, self.r_power, self.sigma)
    }
}

/// Precedence: flag, then environment, then the default directory.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT_DIR),
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub args: &'a [String],
    pub seed: Option<u64>,
    pub config: &'a ToolConfig,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| TwinError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| TwinError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| TwinError::Io(format!("{}: {e}", path.display())))
}
