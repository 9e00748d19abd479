//! Run configuration: a TOML file with dotted sections, overridable through
//! `CASIMIR_` environment variables.
//!
//! An override names the key in upper case with `__` between section and
//! field, so `CASIMIR_THEORY__TEMPERATURE_K=310` sets `theory.temperature_k`.
//! Values are read as TOML literals and fall back to plain strings.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corrections::{RoughnessHistogram, Surface};
use crate::error::{Error, Result};
use crate::instrument::{NoiseModel, OscillatorParams, OutlierPlant, SynthesisConfig};
use crate::lifshitz::SEPARATION_RANGE;
use crate::materials::{load_optical_table, DrudeParams, OpticalTable, TableFormat};
use crate::metrology::Neighbors;
use crate::pipeline::{AnalysisSettings, CanonicalSettings, TheorySettings};
use crate::units::{MPA, NM};

pub const ENV_PREFIX: &str = "CASIMIR_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub materials: MaterialsConfig,
    pub theory: TheoryConfig,
    pub synthesis: SynthesisSection,
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialsConfig {
    pub omega_p_ev: f64,
    pub gamma_ev: f64,
    /// Optical table (CSV or JSON); the bundled gold table when absent.
    pub optical_table: Option<PathBuf>,
    /// Histogram CSVs `h_nm,v_fraction`; bundled fixtures when absent.
    pub plate_histogram: Option<PathBuf>,
    pub sphere_histogram: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    pub temperature_k: f64,
    pub tolerance: f64,
    pub raw_min_nm: f64,
    pub raw_max_nm: f64,
    pub raw_step_nm: f64,
    pub corrected_min_nm: f64,
    pub corrected_max_nm: f64,
    pub corrected_step_nm: f64,
    pub roughness: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSection {
    pub sets: usize,
    pub z_min_nm: f64,
    pub z_max_nm: f64,
    pub min_points: usize,
    pub max_points: usize,
    pub sigma_pressure_mpa: f64,
    pub point_jitter_nm: f64,
    pub set_jitter_nm: f64,
    pub plant_outlier: bool,
    pub outlier_set: usize,
    pub outlier_shift_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Confidence of the comparison band; the experimental budget is always
    /// computed at 95% and widened when 99% is requested.
    pub confidence: f64,
    pub bin_width_nm: f64,
    /// Fixed number of pooled bins; adaptive when 0.
    pub neighbors: usize,
    pub delta_z_nm: f64,
    pub delta_c_rel: f64,
    pub delta_freq_mhz: f64,
    pub delta_radius_um: f64,
    pub band_min_nm: f64,
    pub band_max_nm: f64,
    pub band_step_nm: f64,
    pub window_nm: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            out_dir: PathBuf::from("out"),
            seed: CanonicalSettings::default().seed,
            materials: MaterialsConfig::default(),
            theory: TheoryConfig::default(),
            synthesis: SynthesisSection::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl Default for MaterialsConfig {
    fn default() -> Self {
        MaterialsConfig {
            omega_p_ev: 9.0,
            gamma_ev: 0.035,
            optical_table: None,
            plate_histogram: None,
            sphere_histogram: None,
        }
    }
}

impl Default for TheoryConfig {
    fn default() -> Self {
        let t = TheorySettings::default();
        TheoryConfig {
            temperature_k: t.temperature,
            tolerance: t.tolerance,
            raw_min_nm: t.raw_min / NM,
            raw_max_nm: t.raw_max / NM,
            raw_step_nm: t.raw_step / NM,
            corrected_min_nm: t.corrected_min / NM,
            corrected_max_nm: t.corrected_max / NM,
            corrected_step_nm: t.corrected_step / NM,
            roughness: t.roughness,
        }
    }
}

impl Default for SynthesisSection {
    fn default() -> Self {
        let c = CanonicalSettings::default().synthesis;
        let plant = c.outlier.expect("canonical run plants an outlier");
        SynthesisSection {
            sets: c.n_sets,
            z_min_nm: c.z_min / NM,
            z_max_nm: c.z_max / NM,
            min_points: c.min_points,
            max_points: c.max_points,
            sigma_pressure_mpa: c.noise.sigma_pressure / MPA,
            point_jitter_nm: c.noise.point_jitter / NM,
            set_jitter_nm: c.noise.set_jitter / NM,
            plant_outlier: true,
            outlier_set: plant.set_index,
            outlier_shift_sigma: plant.shift_sigma,
        }
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let a = AnalysisSettings::default();
        AnalysisConfig {
            confidence: a.confidence,
            bin_width_nm: a.bin_width / NM,
            neighbors: 0,
            delta_z_nm: a.delta_z / NM,
            delta_c_rel: a.delta_c_rel,
            delta_freq_mhz: a.delta_omega / (2.0 * PI) * 1e3,
            delta_radius_um: 0.2,
            band_min_nm: a.band_min / NM,
            band_max_nm: a.band_max / NM,
            band_step_nm: a.band_step / NM,
            window_nm: a.window / NM,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parse an override value as a TOML literal, or keep it as a string.
fn parse_env_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn apply_override(table: &mut toml::Table, path: &[&str], value: toml::Value) -> Result<()> {
    let (last, sections) = path.split_last().expect("non-empty key");
    let mut cur = table;
    for s in sections {
        let entry = cur
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("`{s}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parse TOML text and apply `CASIMIR_*` overrides from `env`.
    pub fn from_toml_str<I>(text: &str, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
        let mut overrides: Vec<(String, String)> = env
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        overrides.sort();
        for (key, raw) in overrides {
            let dotted = key[ENV_PREFIX.len()..].to_ascii_lowercase().replace("__", ".");
            let path: Vec<&str> = dotted.split('.').collect();
            if path.iter().any(|p| p.is_empty()) {
                return Err(config_err(format!("malformed override {key}")));
            }
            apply_override(&mut table, &path, parse_env_value(&raw))?;
        }
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read the file at `path` (defaults when `None`), then apply overrides.
    pub fn load<I>(path: Option<&Path>, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let text = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?;
                if text.trim().is_empty() {
                    return Err(config_err(format!("{}: config file is empty", p.display())));
                }
                text
            }
            None => String::new(),
        };
        RunConfig::from_toml_str(&text, env)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved configuration, hex encoded.
    pub fn sha256(&self) -> String {
        hex_digest(self.to_toml_string().as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        let (zlo, zhi) = (SEPARATION_RANGE.0 / NM, SEPARATION_RANGE.1 / NM);
        let m = &self.materials;
        if !(m.omega_p_ev > 0.0 && m.gamma_ev >= 0.0) {
            return Err(config_err("materials: need omega_p_ev > 0 and gamma_ev ≥ 0"));
        }
        for p in [&m.optical_table, &m.plate_histogram, &m.sphere_histogram]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(config_err(format!("{}: no such file", p.display())));
            }
        }
        let t = &self.theory;
        if !(t.temperature_k > 0.0 && t.temperature_k.is_finite()) {
            return Err(config_err("theory.temperature_k must be positive"));
        }
        if !(t.tolerance > 0.0 && t.tolerance < 1e-2) {
            return Err(config_err("theory.tolerance must lie in (0, 0.01)"));
        }
        let in_range = |lo: f64, hi: f64, step: f64| lo >= zlo && hi <= zhi && lo < hi && step > 0.0;
        if !in_range(t.raw_min_nm, t.raw_max_nm, t.raw_step_nm) {
            return Err(config_err(format!(
                "theory raw grid must satisfy {zlo} ≤ min < max ≤ {zhi} nm with a positive step"
            )));
        }
        if !in_range(t.corrected_min_nm, t.corrected_max_nm, t.corrected_step_nm)
            || t.corrected_min_nm < t.raw_min_nm
            || t.corrected_max_nm > t.raw_max_nm
        {
            return Err(config_err("theory corrected grid must lie inside the raw grid"));
        }
        let s = &self.synthesis;
        if s.sets == 0 || s.min_points < 2 || s.max_points < s.min_points {
            return Err(config_err("synthesis: need sets ≥ 1 and 2 ≤ min_points ≤ max_points"));
        }
        if !(s.z_min_nm < s.z_max_nm && s.z_min_nm >= t.corrected_min_nm && s.z_max_nm <= t.corrected_max_nm) {
            return Err(config_err("synthesis range must lie inside the corrected theory grid"));
        }
        if s.plant_outlier && s.outlier_set >= s.sets {
            return Err(config_err(format!(
                "synthesis.outlier_set = {} but only {} sets",
                s.outlier_set, s.sets
            )));
        }
        if s.sigma_pressure_mpa < 0.0 || s.point_jitter_nm < 0.0 || s.set_jitter_nm < 0.0 {
            return Err(config_err("synthesis noise levels must be non-negative"));
        }
        let a = &self.analysis;
        if a.confidence != 0.95 && a.confidence != 0.99 {
            return Err(config_err("analysis.confidence must be 0.95 or 0.99"));
        }
        if !(a.bin_width_nm > 0.0 && a.window_nm > 0.0 && a.band_step_nm > 0.0) {
            return Err(config_err("analysis widths and steps must be positive"));
        }
        if !(a.band_min_nm < a.band_max_nm
            && a.band_min_nm >= t.corrected_min_nm
            && a.band_max_nm <= t.corrected_max_nm)
        {
            return Err(config_err("analysis band range must lie inside the corrected theory grid"));
        }
        if a.delta_z_nm < 0.0 || a.delta_c_rel < 0.0 || a.delta_freq_mhz < 0.0 || a.delta_radius_um < 0.0 {
            return Err(config_err("analysis error inputs must be non-negative"));
        }
        Ok(())
    }

    pub fn drude(&self) -> Result<DrudeParams> {
        DrudeParams::from_ev(self.materials.omega_p_ev, self.materials.gamma_ev)
    }

    pub fn optical_table(&self) -> Result<Arc<OpticalTable>> {
        Ok(Arc::new(match &self.materials.optical_table {
            Some(p) => {
                let format = TableFormat::from_path(p).ok_or_else(|| {
                    config_err(format!("{}: unknown optical table format", p.display()))
                })?;
                load_optical_table(p, format)?
            }
            None => OpticalTable::bundled_gold(),
        }))
    }

    pub fn histograms(&self) -> Result<(RoughnessHistogram, RoughnessHistogram)> {
        let plate = match &self.materials.plate_histogram {
            Some(p) => RoughnessHistogram::load(p, Surface::Plate)?,
            None => RoughnessHistogram::bundled_plate(),
        };
        let sphere = match &self.materials.sphere_histogram {
            Some(p) => RoughnessHistogram::load(p, Surface::Sphere)?,
            None => RoughnessHistogram::bundled_sphere(),
        };
        Ok((plate, sphere))
    }

    pub fn theory_settings(&self) -> TheorySettings {
        let t = &self.theory;
        TheorySettings {
            temperature: t.temperature_k,
            tolerance: t.tolerance,
            raw_min: t.raw_min_nm * NM,
            raw_max: t.raw_max_nm * NM,
            raw_step: t.raw_step_nm * NM,
            corrected_min: t.corrected_min_nm * NM,
            corrected_max: t.corrected_max_nm * NM,
            corrected_step: t.corrected_step_nm * NM,
            roughness: t.roughness,
        }
    }

    pub fn synthesis_config(&self) -> SynthesisConfig {
        let s = &self.synthesis;
        SynthesisConfig {
            n_sets: s.sets,
            z_min: s.z_min_nm * NM,
            z_max: s.z_max_nm * NM,
            min_points: s.min_points,
            max_points: s.max_points,
            noise: NoiseModel {
                sigma_pressure: s.sigma_pressure_mpa * MPA,
                point_jitter: s.point_jitter_nm * NM,
                set_jitter: s.set_jitter_nm * NM,
            },
            outlier: s.plant_outlier.then_some(OutlierPlant {
                set_index: s.outlier_set,
                shift_sigma: s.outlier_shift_sigma,
            }),
        }
    }

    pub fn analysis_settings(&self) -> AnalysisSettings {
        let a = &self.analysis;
        AnalysisSettings {
            confidence: 0.95,
            bin_width: a.bin_width_nm * NM,
            neighbors: if a.neighbors == 0 {
                Neighbors::Adaptive
            } else {
                Neighbors::Fixed(a.neighbors)
            },
            delta_z: a.delta_z_nm * NM,
            delta_c_rel: a.delta_c_rel,
            delta_omega: 2.0 * PI * a.delta_freq_mhz * 1e-3,
            delta_radius: a.delta_radius_um * 1e-6,
            oscillator: OscillatorParams::default(),
            band_min: a.band_min_nm * NM,
            band_max: a.band_max_nm * NM,
            band_step: a.band_step_nm * NM,
            window: a.window_nm * NM,
        }
    }

    pub fn canonical_settings(&self) -> CanonicalSettings {
        CanonicalSettings {
            seed: self.seed,
            synthesis: self.synthesis_config(),
            theory: self.theory_settings(),
            analysis: self.analysis_settings(),
        }
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
