//! Whispering-gallery eigenfrequencies of a spheroidal resonator.
//!
//! For a mode with polar number ℓ = m + p, radial number q and angular number p,
//!
//! ```text
//! ν = c / (2π n R) · [ ℓ + α_q (ℓ/2)^{1/3} + p(√(R/ρ) − 1) − χ n / √(n² − 1) + ½ √(R/ρ) ]
//! ```
//!
//! with χ = 1 for TE and 1/n² for TM. The index n is evaluated at the mode's own
//! wavelength, so ν is found by fixed-point iteration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::material::{Axis, MaterialModel};
use crate::SPEED_OF_LIGHT;

const FIXED_POINT_TOL_HZ: f64 = 1e3;
const FIXED_POINT_MAX_ITER: usize = 100;

/// Field polarization relative to the equatorial plane. In a z-cut resonator TE
/// modes see the extraordinary index and TM modes the ordinary one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub fn axis(self) -> Axis {
        match self {
            Polarization::TE => Axis::Extraordinary,
            Polarization::TM => Axis::Ordinary,
        }
    }

    fn chi(self, n: f64) -> f64 {
        match self {
            Polarization::TE => 1.0,
            Polarization::TM => 1.0 / (n * n),
        }
    }
}

/// Major radius, rim curvature radius and thickness, given at `reference_temp_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorGeometry {
    pub radius_m: f64,
    pub rim_radius_m: f64,
    pub thickness_m: f64,
    pub reference_temp_c: f64,
}

impl ResonatorGeometry {
    pub fn new(radius_m: f64, rim_radius_m: f64, thickness_m: f64) -> Result<Self> {
        let g = Self {
            radius_m,
            rim_radius_m,
            thickness_m,
            reference_temp_c: 25.0,
        };
        g.validate()?;
        Ok(g)
    }

    /// The 2.5 mm / 0.58 mm device used for the phase-matching studies.
    pub fn reference_device() -> Self {
        Self {
            radius_m: 2.5e-3,
            rim_radius_m: 0.58e-3,
            thickness_m: 0.5e-3,
            reference_temp_c: 25.0,
        }
    }

    /// Same shape (R/ρ and h/R kept) at a different major radius.
    pub fn scaled_to_radius(&self, radius_m: f64) -> Self {
        let s = radius_m / self.radius_m;
        Self {
            radius_m,
            rim_radius_m: self.rim_radius_m * s,
            thickness_m: self.thickness_m * s,
            reference_temp_c: self.reference_temp_c,
        }
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.radius_m / self.rim_radius_m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return Err(domain("radius_m", self.radius_m, "> 0"));
        }
        if !(self.rim_radius_m > 0.0) {
            return Err(domain("rim_radius_m", self.rim_radius_m, "> 0"));
        }
        if !(self.aspect_ratio() >= 1.0) {
            return Err(domain("R/rho", self.aspect_ratio(), ">= 1"));
        }
        if !(self.thickness_m >= 0.0) {
            return Err(domain("thickness_m", self.thickness_m, ">= 0"));
        }
        Ok(())
    }
}

/// Mode labels (m, q, p) and polarization; ℓ = m + p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: u64,
    pub q: u32,
    pub p: u32,
    pub pol: Polarization,
}

impl ModeIndex {
    pub fn new(m: u64, q: u32, p: u32, pol: Polarization) -> Result<Self> {
        if m < 1 {
            return Err(domain("m", m as f64, ">= 1"));
        }
        if q < 1 {
            return Err(domain("q", q as f64, ">= 1"));
        }
        Ok(Self { m, q, p, pol })
    }

    pub fn ell(&self) -> u64 {
        self.m + self.p as u64
    }

    pub fn with_m(self, m: u64) -> Self {
        Self { m, ..self }
    }
}

/// How the Airy-zero factor α_q is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AiryRoots {
    /// [3π/2 (q − 1/4)]^{2/3}
    #[default]
    Asymptotic,
    /// Tabulated magnitudes of the zeros of Ai for q ≤ 20.
    Exact,
}

#[allow(clippy::excessive_precision)]
const AIRY_ZEROS: [f64; 20] = [
    2.338_107_410_459_767,
    4.087_949_444_130_971,
    5.520_559_828_095_551,
    6.786_708_090_071_759,
    7.944_133_587_120_853,
    9.022_650_853_340_981,
    10.040_174_341_558_086,
    11.008_524_303_733_262,
    11.936_015_563_236_262,
    12.828_776_752_865_757,
    13.691_489_035_210_717,
    14.527_829_951_775_335,
    15.340_755_135_977_997,
    16.132_685_156_945_772,
    16.905_633_997_429_942,
    17.661_300_105_697_058,
    18.401_132_599_207_116,
    19.126_380_474_246_954,
    19.838_129_891_721_5,
    20.537_332_907_677_566,
];

impl AiryRoots {
    pub fn root(self, q: u32) -> Result<f64> {
        if q < 1 {
            return Err(domain("q", q as f64, ">= 1"));
        }
        match self {
            AiryRoots::Asymptotic => Ok(airy_root(q)),
            AiryRoots::Exact => AIRY_ZEROS
                .get(q as usize - 1)
                .copied()
                .ok_or_else(|| domain("q", q as f64, "<= 20 for the exact table")),
        }
    }
}

/// Asymptotic magnitude of the q-th zero of the Airy function.
pub fn airy_root(q: u32) -> f64 {
    (1.5 * PI * (q as f64 - 0.25)).powf(2.0 / 3.0)
}

/// A resonator: geometry, host material and the Airy-root convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonator {
    pub geometry: ResonatorGeometry,
    pub material: MaterialModel,
    pub airy: AiryRoots,
}

impl Resonator {
    pub fn new(geometry: ResonatorGeometry, material: MaterialModel) -> Self {
        Self {
            geometry,
            material,
            airy: AiryRoots::default(),
        }
    }

    pub fn with_geometry(&self, geometry: ResonatorGeometry) -> Self {
        Self {
            geometry,
            ..self.clone()
        }
    }

    /// (R, ρ) at `temp_c`.
    pub fn radii_at(&self, temp_c: f64) -> Result<(f64, f64)> {
        let g = &self.geometry;
        let r = self
            .material
            .radius_at_temperature(g.radius_m, g.reference_temp_c, temp_c)?;
        Ok((r, r / g.aspect_ratio()))
    }

    /// Bracketed term of the dispersion relation for a given index.
    fn bracket(&self, ell: f64, alpha_q: f64, p: f64, pol: Polarization, n: f64, sqrt_ratio: f64) -> f64 {
        ell + alpha_q * (ell / 2.0).powf(1.0 / 3.0) + p * (sqrt_ratio - 1.0)
            - pol.chi(n) * n / (n * n - 1.0).sqrt()
            + 0.5 * sqrt_ratio
    }

    /// Frequency for a real-valued azimuthal number. Used by seeding, where m is
    /// treated as continuous; `mode_frequency` is the integer entry point.
    pub fn frequency_continuous(&self, m: f64, q: u32, p: u32, pol: Polarization, temp_c: f64) -> Result<f64> {
        if !(m >= 1.0) {
            return Err(domain("m", m, ">= 1"));
        }
        let alpha_q = self.airy.root(q)?;
        let (r, rho) = self.radii_at(temp_c)?;
        let sqrt_ratio = (r / rho).sqrt();
        let ell = m + p as f64;
        let axis = pol.axis();
        let scale = SPEED_OF_LIGHT / (2.0 * PI * r);

        // Start from the leading-order estimate at a typical index.
        let mut n = 2.2;
        let mut nu = scale * ell / n;
        let mut last_step = f64::INFINITY;
        // Intermediate iterates may stray outside the tabulated range; only the
        // converged wavelength has to lie inside it.
        let v = &self.material.validity;
        let (lam_lo, lam_hi) = (v.wavelength_min_um * 1e-6, v.wavelength_max_um * 1e-6);
        for _ in 0..FIXED_POINT_MAX_ITER {
            let lam = (SPEED_OF_LIGHT / nu).clamp(lam_lo, lam_hi);
            n = self.material.refractive_index(axis, lam, temp_c)?;
            let next = scale / n * self.bracket(ell, alpha_q, p as f64, pol, n, sqrt_ratio);
            last_step = (next - nu).abs();
            nu = next;
            if last_step < FIXED_POINT_TOL_HZ {
                self.material.check_wavelength(SPEED_OF_LIGHT / nu)?;
                return Ok(nu);
            }
        }
        Err(Error::NoConvergence {
            method: "dispersion fixed point",
            iterations: FIXED_POINT_MAX_ITER,
            residual: last_step,
        })
    }

    /// Resonance frequency of a mode at temperature `temp_c` (°C), in Hz.
    pub fn mode_frequency(&self, idx: &ModeIndex, temp_c: f64) -> Result<f64> {
        self.frequency_continuous(idx.m as f64, idx.q, idx.p, idx.pol, temp_c)
    }

    /// ν(m+1) − ν(m).
    pub fn free_spectral_range(&self, idx: &ModeIndex, temp_c: f64) -> Result<f64> {
        Ok(self.mode_frequency(&idx.with_m(idx.m + 1), temp_c)? - self.mode_frequency(idx, temp_c)?)
    }

    /// Real-valued m whose frequency equals `nu_target_hz`.
    pub fn continuous_azimuthal_number(
        &self,
        nu_target_hz: f64,
        q: u32,
        p: u32,
        pol: Polarization,
        temp_c: f64,
    ) -> Result<f64> {
        if !(nu_target_hz > 0.0) {
            return Err(domain("nu_target_hz", nu_target_hz, "> 0"));
        }
        let (r, _) = self.radii_at(temp_c)?;
        let n = self
            .material
            .refractive_index(pol.axis(), SPEED_OF_LIGHT / nu_target_hz, temp_c)?;
        let mut m = (2.0 * PI * r * n * nu_target_hz / SPEED_OF_LIGHT).max(2.0);
        // ν(m) is close to linear in m, so a secant on the local FSR converges in a few steps.
        for _ in 0..50 {
            let nu = self.frequency_continuous(m, q, p, pol, temp_c)?;
            let fsr = self.frequency_continuous(m + 1.0, q, p, pol, temp_c)? - nu;
            let step = (nu_target_hz - nu) / fsr;
            m = (m + step).max(1.0);
            if step.abs() < 1e-7 {
                return Ok(m);
            }
        }
        Err(Error::NoConvergence {
            method: "azimuthal inversion",
            iterations: 50,
            residual: nu_target_hz,
        })
    }

    /// Integer m minimizing |ν(m) − ν_target|, with the signed residual ν(m) − ν_target.
    pub fn find_azimuthal_number(
        &self,
        nu_target_hz: f64,
        q: u32,
        p: u32,
        pol: Polarization,
        temp_c: f64,
    ) -> Result<(u64, f64)> {
        let m_cont = self.continuous_azimuthal_number(nu_target_hz, q, p, pol, temp_c)?;
        let lo = (m_cont.floor() as u64).max(1);
        let mut best: Option<(u64, f64)> = None;
        for m in lo.saturating_sub(1).max(1)..=lo + 2 {
            let nu = self.frequency_continuous(m as f64, q, p, pol, temp_c)?;
            let res = nu - nu_target_hz;
            if best.is_none_or(|(_, b)| res.abs() < b.abs()) {
                best = Some((m, res));
            }
        }
        Ok(best.expect("non-empty candidate range"))
    }
}

/// n′ = c·m / (2πR·ν).
pub fn effective_index(m: f64, nu_hz: f64, radius_m: f64) -> Result<f64> {
    if !(nu_hz > 0.0) {
        return Err(domain("nu_hz", nu_hz, "> 0"));
    }
    if !(radius_m > 0.0) {
        return Err(domain("radius_m", radius_m, "> 0"));
    }
    Ok(SPEED_OF_LIGHT * m / (2.0 * PI * radius_m * nu_hz))
}
