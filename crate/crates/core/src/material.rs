//! Temperature- and wavelength-dependent optical properties of the resonator host.
//!
//! Indices follow a two-part Sellmeier model per crystal axis: a room-temperature
//! dispersion term plus a thermo-optic increment referenced to the temperature at
//! which the dispersion term was measured. The coefficient sets live in a TOML asset
//! (see `assets/mgo_lithium_niobate.toml`) so they can be swapped without rebuilding.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const DEFAULT_ASSET: &str = include_str!("../assets/mgo_lithium_niobate.toml");

/// Principal axis of the uniaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Ordinary,
    Extraordinary,
}

/// Sellmeier coefficients for one axis. Wavelengths in micrometres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierAxis {
    #[serde(rename = "B")]
    pub strengths: Vec<f64>,
    #[serde(rename = "C_um2")]
    pub poles_um2: Vec<f64>,
    #[serde(default)]
    pub offset_n2: f64,
    #[serde(rename = "base_temperature_C")]
    pub base_temperature_c: f64,
    #[serde(default = "one")]
    pub thermo_scale: f64,
    #[serde(rename = "thermo_t0_C")]
    pub thermo_t0_c: f64,
    #[serde(rename = "thermo_t1_C")]
    pub thermo_t1_c: f64,
    pub thermo_a: f64,
    pub thermo_c_um: f64,
    pub thermo_b1: f64,
    pub thermo_b2: f64,
    pub thermo_b3: f64,
}

fn one() -> f64 {
    1.0
}

/// n² and its partial derivatives, wavelength in µm.
#[derive(Debug, Clone, Copy)]
struct IndexSquared {
    value: f64,
    d_lambda_um: f64,
    d_temp: f64,
}

impl SellmeierAxis {
    fn thermal_f(&self, temp_c: f64) -> (f64, f64) {
        let f = (temp_c - self.thermo_t0_c) * (temp_c + self.thermo_t0_c + self.thermo_t1_c);
        let df = 2.0 * temp_c + self.thermo_t1_c;
        (f, df)
    }

    /// Temperature term g(λ, T) with ∂g/∂λ and ∂g/∂T.
    fn thermo(&self, lambda_um: f64, temp_c: f64) -> (f64, f64, f64) {
        let l2 = lambda_um * lambda_um;
        let (f, df) = self.thermal_f(temp_c);
        let num = self.thermo_a + self.thermo_b1 * f;
        let pole = self.thermo_c_um + self.thermo_b2 * f;
        let den = l2 - pole * pole;
        let g = num / den + self.thermo_b3 * f;
        let dg_dl = -num * 2.0 * lambda_um / (den * den);
        let dg_df = self.thermo_b1 / den + num * 2.0 * pole * self.thermo_b2 / (den * den) + self.thermo_b3;
        (g, dg_dl, dg_df * df)
    }

    fn index_squared(&self, lambda_um: f64, temp_c: f64) -> IndexSquared {
        let l2 = lambda_um * lambda_um;
        let mut value = 1.0 + self.offset_n2;
        let mut d_lambda_um = 0.0;
        for (&b, &c) in self.strengths.iter().zip(&self.poles_um2) {
            let den = l2 - c;
            value += b * l2 / den;
            d_lambda_um += -2.0 * b * lambda_um * c / (den * den);
        }
        let (g, dg_dl, dg_dt) = self.thermo(lambda_um, temp_c);
        let (g0, dg0_dl, _) = self.thermo(lambda_um, self.base_temperature_c);
        value += self.thermo_scale * (g - g0);
        d_lambda_um += self.thermo_scale * (dg_dl - dg0_dl);
        IndexSquared {
            value,
            d_lambda_um,
            d_temp: self.thermo_scale * dg_dt,
        }
    }

    fn validate(&self, label: &str) -> Result<()> {
        if self.strengths.is_empty() || self.strengths.len() != self.poles_um2.len() {
            return Err(Error::Asset(format!(
                "{label}: B and C_um2 must be non-empty and of equal length"
            )));
        }
        let all = self
            .strengths
            .iter()
            .chain(&self.poles_um2)
            .chain([
                &self.offset_n2,
                &self.base_temperature_c,
                &self.thermo_scale,
                &self.thermo_t0_c,
                &self.thermo_t1_c,
                &self.thermo_a,
                &self.thermo_c_um,
                &self.thermo_b1,
                &self.thermo_b2,
                &self.thermo_b3,
            ]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Asset(format!("{label}: non-finite coefficient")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierPair {
    pub ordinary: SellmeierAxis,
    pub extraordinary: SellmeierAxis,
}

/// Relative length change ε(T) = a·(T−T₀) + b·(T−T₀)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalExpansion {
    #[serde(rename = "reference_C")]
    pub reference_c: f64,
    #[serde(rename = "linear_per_K")]
    pub linear_per_k: f64,
    #[serde(default, rename = "quadratic_per_K2")]
    pub quadratic_per_k2: f64,
}

impl ThermalExpansion {
    pub fn strain(&self, temp_c: f64) -> f64 {
        let d = temp_c - self.reference_c;
        self.linear_per_k * d + self.quadratic_per_k2 * d * d
    }

    pub fn coefficient(&self, temp_c: f64) -> f64 {
        self.linear_per_k + 2.0 * self.quadratic_per_k2 * (temp_c - self.reference_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectroOptic {
    #[serde(rename = "r_extraordinary_pm_per_V")]
    pub r_extraordinary_pm_per_v: f64,
    #[serde(rename = "r_ordinary_pm_per_V")]
    pub r_ordinary_pm_per_v: f64,
}

/// Affine map from computed phase-matching temperatures to experimental ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureCalibration {
    pub slope: f64,
    #[serde(rename = "offset_C")]
    pub offset_c: f64,
}

impl Default for TemperatureCalibration {
    fn default() -> Self {
        Self {
            slope: 1.22,
            offset_c: 11.0,
        }
    }
}

impl TemperatureCalibration {
    pub const IDENTITY: Self = Self {
        slope: 1.0,
        offset_c: 0.0,
    };

    pub fn apply(&self, computed_c: f64) -> f64 {
        self.slope * computed_c + self.offset_c
    }

    pub fn invert(&self, experimental_c: f64) -> f64 {
        (experimental_c - self.offset_c) / self.slope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub wavelength_min_um: f64,
    pub wavelength_max_um: f64,
    #[serde(rename = "temperature_min_C")]
    pub temperature_min_c: f64,
    #[serde(rename = "temperature_max_C")]
    pub temperature_max_c: f64,
}

/// Optical and thermal properties of the resonator host crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub name: String,
    pub mgo_percent: f64,
    pub validity: Validity,
    pub sellmeier: SellmeierPair,
    pub expansion: ThermalExpansion,
    pub electrooptic: ElectroOptic,
    #[serde(default)]
    pub calibration: TemperatureCalibration,
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_ASSET).expect("bundled material asset is valid")
    }
}

impl MaterialModel {
    /// The bundled MgO:LiNbO₃ asset as text.
    pub fn default_asset() -> &'static str {
        DEFAULT_ASSET
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let model: Self = toml::from_str(text).map_err(|e| Error::Asset(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Asset(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<()> {
        self.sellmeier.ordinary.validate("sellmeier.ordinary")?;
        self.sellmeier.extraordinary.validate("sellmeier.extraordinary")?;
        let v = &self.validity;
        if !(v.wavelength_min_um > 0.0 && v.wavelength_max_um > v.wavelength_min_um) {
            return Err(Error::Asset("validity: empty wavelength window".into()));
        }
        if v.temperature_max_c <= v.temperature_min_c {
            return Err(Error::Asset("validity: empty temperature window".into()));
        }
        if !(self.calibration.slope > 0.0) || !self.calibration.offset_c.is_finite() {
            return Err(Error::Asset("calibration: slope must be positive".into()));
        }
        Ok(())
    }

    fn axis(&self, axis: Axis) -> &SellmeierAxis {
        match axis {
            Axis::Ordinary => &self.sellmeier.ordinary,
            Axis::Extraordinary => &self.sellmeier.extraordinary,
        }
    }

    pub fn check_temperature(&self, temp_c: f64) -> Result<()> {
        let v = &self.validity;
        if !(temp_c >= v.temperature_min_c && temp_c <= v.temperature_max_c) {
            return Err(domain(
                "temperature_C",
                temp_c,
                format!("[{}, {}] C", v.temperature_min_c, v.temperature_max_c),
            ));
        }
        Ok(())
    }

    pub fn check_wavelength(&self, wavelength_m: f64) -> Result<()> {
        let v = &self.validity;
        let um = wavelength_m * 1e6;
        if !(um >= v.wavelength_min_um && um <= v.wavelength_max_um) {
            return Err(domain(
                "wavelength_um",
                um,
                format!("[{}, {}] um", v.wavelength_min_um, v.wavelength_max_um),
            ));
        }
        Ok(())
    }

    fn index_squared(&self, axis: Axis, wavelength_m: f64, temp_c: f64) -> Result<IndexSquared> {
        self.check_wavelength(wavelength_m)?;
        self.check_temperature(temp_c)?;
        let n2 = self.axis(axis).index_squared(wavelength_m * 1e6, temp_c);
        if !(n2.value > 1.0) {
            return Err(domain("n^2", n2.value, "> 1"));
        }
        Ok(n2)
    }

    /// Refractive index n(λ, T), wavelength in metres, temperature in °C.
    pub fn refractive_index(&self, axis: Axis, wavelength_m: f64, temp_c: f64) -> Result<f64> {
        Ok(self.index_squared(axis, wavelength_m, temp_c)?.value.sqrt())
    }

    /// ∂n/∂λ in 1/m.
    pub fn dn_dwavelength(&self, axis: Axis, wavelength_m: f64, temp_c: f64) -> Result<f64> {
        let n2 = self.index_squared(axis, wavelength_m, temp_c)?;
        Ok(n2.d_lambda_um * 1e6 / (2.0 * n2.value.sqrt()))
    }

    /// ∂n/∂T in 1/K.
    pub fn dn_dtemperature(&self, axis: Axis, wavelength_m: f64, temp_c: f64) -> Result<f64> {
        let n2 = self.index_squared(axis, wavelength_m, temp_c)?;
        Ok(n2.d_temp / (2.0 * n2.value.sqrt()))
    }

    /// Group index n − λ ∂n/∂λ.
    pub fn group_index(&self, axis: Axis, wavelength_m: f64, temp_c: f64) -> Result<f64> {
        let n = self.refractive_index(axis, wavelength_m, temp_c)?;
        Ok(n - wavelength_m * self.dn_dwavelength(axis, wavelength_m, temp_c)?)
    }

    /// Radius at `temp_c` of a body whose radius is `radius_ref_m` at `ref_temp_c`.
    pub fn radius_at_temperature(&self, radius_ref_m: f64, ref_temp_c: f64, temp_c: f64) -> Result<f64> {
        self.check_temperature(temp_c)?;
        let e = &self.expansion;
        Ok(radius_ref_m * (1.0 + e.strain(temp_c)) / (1.0 + e.strain(ref_temp_c)))
    }

    /// Linear electro-optic coefficient of an axis, m/V.
    pub fn electrooptic_coefficient(&self, axis: Axis) -> f64 {
        1e-12
            * match axis {
                Axis::Extraordinary => self.electrooptic.r_extraordinary_pm_per_v,
                Axis::Ordinary => self.electrooptic.r_ordinary_pm_per_v,
            }
    }

    /// Index change Δn = −½ r n³ (U/h) · fringe for a bias `bias_v` across thickness `thickness_m`.
    pub fn electrooptic_index_shift(
        &self,
        axis: Axis,
        wavelength_m: f64,
        temp_c: f64,
        bias_v: f64,
        thickness_m: f64,
        fringe_factor: f64,
    ) -> Result<f64> {
        if !(thickness_m > 0.0) {
            return Err(domain("thickness_m", thickness_m, "> 0"));
        }
        if !(fringe_factor > 0.0 && fringe_factor <= 1.0) {
            return Err(domain("fringe_factor", fringe_factor, "(0, 1]"));
        }
        let n = self.refractive_index(axis, wavelength_m, temp_c)?;
        let r = self.electrooptic_coefficient(axis);
        Ok(-0.5 * r * n.powi(3) * (bias_v / thickness_m) * fringe_factor)
    }

    /// Maps a computed phase-matching temperature to the experimental scale.
    pub fn calibrate_temperature(&self, computed_c: f64) -> f64 {
        self.calibration.apply(computed_c)
    }

    pub fn uncalibrate_temperature(&self, experimental_c: f64) -> f64 {
        self.calibration.invert(experimental_c)
    }
}
