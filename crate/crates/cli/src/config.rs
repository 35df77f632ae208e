//! Run configuration: TOML with unit-suffixed keys.
//!
//! Temperatures are on the calibrated (experimental) scale unless
//! `temperature_scale = "model"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wgmopo_core::correlation::Family;
use wgmopo_core::phasematch::{Arm, Channel, TargetLine};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TemperatureScale {
    #[default]
    Calibrated,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    #[serde(rename = "R_mm")]
    pub r_mm: f64,
    pub rho_mm: f64,
    pub h_mm: f64,
    #[serde(rename = "reference_T_C")]
    pub reference_t_c: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            r_mm: 2.5,
            rho_mm: 0.58,
            h_mm: 0.5,
            reference_t_c: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pump {
    pub lambda_nm: f64,
}

impl Default for Pump {
    fn default() -> Self {
        Self { lambda_nm: 532.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Temperature {
    #[serde(rename = "T_min_C")]
    pub t_min_c: f64,
    #[serde(rename = "T_max_C")]
    pub t_max_c: f64,
    #[serde(rename = "T_step_C")]
    pub t_step_c: f64,
}

impl Default for Temperature {
    fn default() -> Self {
        Self {
            t_min_c: 100.0,
            t_max_c: 150.0,
            t_step_c: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub q_s: u32,
    pub q_i: u32,
    pub p_s: u32,
    pub p_i: u32,
}

impl From<ChannelSpec> for Channel {
    fn from(c: ChannelSpec) -> Self {
        Channel::new(c.q_s, c.q_i, c.p_s, c.p_i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Targets {
    File(PathBuf),
    Inline(Vec<TargetLine>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarizationSet {
    TE,
    TM,
    #[serde(rename = "both")]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Spectrum {
    #[serde(rename = "T_C")]
    pub t_c: f64,
    pub q_max: u32,
    pub p_max: u32,
    pub polarization: PolarizationSet,
}

impl Default for Spectrum {
    fn default() -> Self {
        Self {
            t_c: 100.0,
            q_max: 3,
            p_max: 3,
            polarization: PolarizationSet::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    #[default]
    Radius,
    PumpWavelength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Map {
    pub axis: MapKind,
    #[serde(rename = "R_mm", default)]
    pub r_mm: Vec<f64>,
    #[serde(default)]
    pub lambda_p_nm: Vec<f64>,
    /// Temperature window of the map; the model validity window when absent.
    #[serde(rename = "T_min_C")]
    pub t_min_c: Option<f64>,
    #[serde(rename = "T_max_C")]
    pub t_max_c: Option<f64>,
    #[serde(rename = "T_step_C")]
    pub t_step_c: f64,
}

impl Default for Map {
    fn default() -> Self {
        Self {
            axis: MapKind::Radius,
            r_mm: vec![0.4, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5],
            lambda_p_nm: Vec::new(),
            t_min_c: None,
            t_max_c: None,
            t_step_c: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Triplet {
    /// Name of a target line, or a bare wavelength via `lambda_nm`.
    pub line: Option<String>,
    pub lambda_nm: Option<f64>,
    pub arm: Arm,
    #[serde(rename = "step_window_C")]
    pub step_window_c: f64,
}

impl Default for Triplet {
    fn default() -> Self {
        Self {
            line: Some("Cs D1".into()),
            lambda_nm: None,
            arm: Arm::Signal,
            step_window_c: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Opo {
    #[serde(rename = "P0_uW")]
    pub p0_uw: f64,
    #[serde(rename = "P_min_uW")]
    pub p_min_uw: f64,
    #[serde(rename = "P_max_uW")]
    pub p_max_uw: f64,
    #[serde(rename = "P_points")]
    pub p_points: usize,
    pub delta_p: Vec<f64>,
    #[serde(rename = "mismatch_MHz")]
    pub mismatch_mhz: Vec<f64>,
    #[serde(rename = "gamma_s_MHz")]
    pub gamma_s_mhz: f64,
    #[serde(rename = "gamma_i_MHz")]
    pub gamma_i_mhz: f64,
    pub kappa_p: f64,
    pub kappa_s: f64,
    pub kappa_i: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
}

impl Default for Opo {
    fn default() -> Self {
        Self {
            p0_uw: 10.0,
            p_min_uw: 0.1,
            p_max_uw: 100.0,
            p_points: 100,
            delta_p: vec![0.0],
            mismatch_mhz: vec![0.0, 224.0],
            gamma_s_mhz: 6.6,
            gamma_i_mhz: 6.6,
            kappa_p: 0.5,
            kappa_s: 0.5,
            kappa_i: 0.5,
            lambda_s_nm: 894.6,
            lambda_i_nm: 1312.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tune {
    /// `substrate`, `electrooptic`, `none`, or a mechanism file path.
    pub mechanism: String,
    #[serde(rename = "target_MHz")]
    pub target_mhz: Vec<f64>,
    pub fringe_factor: f64,
    #[serde(rename = "max_voltage_V")]
    pub max_voltage_v: f64,
}

impl Default for Tune {
    fn default() -> Self {
        Self {
            mechanism: "substrate".into(),
            target_mhz: vec![-200.0, -100.0, 0.0, 100.0, 200.0],
            fringe_factor: 1.0,
            max_voltage_v: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Corrfit {
    pub histogram: Option<PathBuf>,
    pub family: Family,
    /// Synthetic histogram parameters used with `--simulate`.
    pub t1_ns: f64,
    pub t2_ns: Option<f64>,
    pub peak_counts: f64,
    pub background: f64,
    pub bin_ns: f64,
    pub t_min_ns: f64,
    pub t_max_ns: f64,
}

impl Default for Corrfit {
    fn default() -> Self {
        Self {
            histogram: None,
            family: Family::Heralded,
            t1_ns: 7.4,
            t2_ns: Some(37.0),
            peak_counts: 1e4,
            background: 20.0,
            bin_ns: 1.0,
            t_min_ns: -80.0,
            t_max_ns: 250.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub temperature_scale: TemperatureScale,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub pump: Pump,
    #[serde(default)]
    pub temperature: Temperature,
    #[serde(default = "default_channels", rename = "channel")]
    pub channels: Vec<ChannelSpec>,
    pub targets: Option<Targets>,
    #[serde(default)]
    pub spectrum: Spectrum,
    #[serde(default)]
    pub map: Map,
    #[serde(default)]
    pub triplet: Triplet,
    #[serde(default)]
    pub opo: Opo,
    #[serde(default)]
    pub tune: Tune,
    #[serde(default)]
    pub corrfit: Corrfit,
}

fn default_channels() -> Vec<ChannelSpec> {
    vec![ChannelSpec {
        q_s: 1,
        q_i: 1,
        p_s: 0,
        p_i: 0,
    }]
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config takes defaults")
    }
}

impl RunConfig {
    /// Parses `text`; relative paths inside it resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        if let Some(p) = c.material.as_mut() {
            resolve(p);
        }
        if let Some(Targets::File(p)) = c.targets.as_mut() {
            resolve(p);
        }
        if let Some(p) = c.corrfit.histogram.as_mut() {
            resolve(p);
        }
        if !matches!(c.tune.mechanism.as_str(), "substrate" | "electrooptic" | "none") {
            let mut p = PathBuf::from(&c.tune.mechanism);
            resolve(&mut p);
            c.tune.mechanism = p.to_string_lossy().into_owned();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let g = &self.geometry;
        if !(g.r_mm > 0.0 && g.rho_mm > 0.0 && g.rho_mm <= g.r_mm && g.h_mm >= 0.0) {
            return bad(format!("geometry needs R_mm > 0, 0 < rho_mm <= R_mm, h_mm >= 0 (got {g:?})"));
        }
        if !(self.pump.lambda_nm > 0.0) {
            return bad(format!("pump.lambda_nm must be positive (got {})", self.pump.lambda_nm));
        }
        let t = &self.temperature;
        if !(t.t_max_c >= t.t_min_c && t.t_step_c > 0.0) {
            return bad(format!("temperature window needs T_max_C >= T_min_C and T_step_C > 0 (got {t:?})"));
        }
        if self.channels.is_empty() {
            return bad("at least one [[channel]] is required".into());
        }
        for ch in &self.channels {
            Channel::from(*ch)
                .validate()
                .map_err(|e| CliError::Config(format!("channel {ch:?}: {e}")))?;
        }
        if self.spectrum.q_max < 1 {
            return bad("spectrum.q_max must be at least 1".into());
        }
        let m = &self.map;
        if !(m.t_step_c > 0.0) {
            return bad("map.T_step_C must be positive".into());
        }
        match m.axis {
            MapKind::Radius if m.r_mm.is_empty() => return bad("map.R_mm is empty".into()),
            MapKind::PumpWavelength if m.lambda_p_nm.is_empty() => return bad("map.lambda_p_nm is empty".into()),
            _ => {}
        }
        if self.triplet.line.is_none() && self.triplet.lambda_nm.is_none() {
            return bad("triplet needs `line` or `lambda_nm`".into());
        }
        let o = &self.opo;
        if !(o.p0_uw > 0.0 && o.p_min_uw >= 0.0 && o.p_max_uw >= o.p_min_uw && o.p_points >= 1) {
            return bad("opo needs P0_uW > 0, 0 <= P_min_uW <= P_max_uW and P_points >= 1".into());
        }
        if o.delta_p.is_empty() || o.mismatch_mhz.is_empty() {
            return bad("opo.delta_p and opo.mismatch_MHz must not be empty".into());
        }
        if !(o.gamma_s_mhz > 0.0 && o.gamma_i_mhz > 0.0 && o.lambda_s_nm > 0.0 && o.lambda_i_nm > 0.0) {
            return bad("opo bandwidths and wavelengths must be positive".into());
        }
        let c = &self.corrfit;
        if !(c.t1_ns > 0.0 && c.bin_ns > 0.0 && c.t_max_ns > c.t_min_ns && c.peak_counts > 0.0 && c.background >= 0.0) {
            return bad("corrfit simulation parameters out of range".into());
        }
        if c.family == Family::Heralded && c.t2_ns.is_none_or(|t| !(t > 0.0)) {
            return bad("corrfit.t2_ns must be positive for the heralded family".into());
        }
        Ok(())
    }

    pub fn family_name(&self) -> &'static str {
        match self.corrfit.family {
            Family::Pair => "pair",
            Family::Heralded => "heralded",
        }
    }
}
