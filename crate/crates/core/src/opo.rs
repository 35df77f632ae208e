//! Steady-state observables of a triply resonant OPO.
//!
//! Detunings δ and the mismatch Δ are in units of the respective (mean) bandwidth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Ratio P_th / P_p above which the below-threshold pair-rate formula is flagged.
pub const PAIR_RATE_VALIDITY_FACTOR: f64 = 10.0;

/// A cavity resonance with its coupling and intrinsic loss rates (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityMode {
    pub nu_res: f64,
    pub gamma_coupling: f64,
    pub gamma_loss: f64,
}

impl CavityMode {
    pub fn new(nu_res: f64, gamma_coupling: f64, gamma_loss: f64) -> Result<Self> {
        if !(gamma_coupling >= 0.0) {
            return Err(domain("gamma_coupling", gamma_coupling, ">= 0"));
        }
        if !(gamma_loss > 0.0) {
            return Err(domain("gamma_loss", gamma_loss, "> 0"));
        }
        Ok(Self {
            nu_res,
            gamma_coupling,
            gamma_loss,
        })
    }

    /// Mode with total bandwidth `gamma` and coupling ratio `kappa`.
    pub fn from_bandwidth(nu_res: f64, gamma: f64, kappa: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(domain("gamma", gamma, "> 0"));
        }
        if !(0.0..1.0).contains(&kappa) {
            return Err(domain("kappa", kappa, "in [0, 1)"));
        }
        Self::new(nu_res, kappa * gamma, (1.0 - kappa) * gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_coupling + self.gamma_loss
    }

    pub fn kappa(&self) -> f64 {
        self.gamma_coupling / self.gamma()
    }

    /// Detuning of `nu` from resonance in bandwidth units.
    pub fn detuning(&self, nu: f64) -> f64 {
        (nu - self.nu_res) / self.gamma()
    }
}

/// Pump and parametric detunings, mismatch and powers of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub delta_p: f64,
    pub delta_s: f64,
    pub delta_i: f64,
    pub mismatch: f64,
    pub p_pump: f64,
    pub p0: f64,
}

impl OperatingPoint {
    /// Above threshold the signal and idler share the detuning Δ/2.
    pub fn oscillating(delta_p: f64, mismatch: f64, p_pump: f64, p0: f64) -> Result<Self> {
        if !(p0 > 0.0) {
            return Err(domain("P_0", p0, "> 0"));
        }
        Ok(Self {
            delta_p,
            delta_s: mismatch / 2.0,
            delta_i: mismatch / 2.0,
            mismatch,
            p_pump,
            p0,
        })
    }

    pub fn threshold(&self) -> Result<f64> {
        threshold(self.p0, self.delta_p, self.mismatch)
    }
}

/// 1 / (1 + 4δ²)
pub fn lorentzian_response(delta: f64) -> f64 {
    1.0 / (1.0 + 4.0 * delta * delta)
}

/// P_th = P_0 (1 + 4δ_p²)(1 + Δ²)
pub fn threshold(p0: f64, delta_p: f64, mismatch: f64) -> Result<f64> {
    if !(p0 > 0.0) {
        return Err(domain("P_0", p0, "> 0"));
    }
    Ok(p0 * (1.0 + 4.0 * delta_p * delta_p) * (1.0 + mismatch * mismatch))
}

/// Δ = (ν_p − ν_s − ν_i) / ((γ_s + γ_i)/2)
pub fn pdc_mismatch(nu_p: f64, signal: &CavityMode, idler: &CavityMode) -> Result<f64> {
    raw_mismatch_to_normalized(nu_p - signal.nu_res - idler.nu_res, signal.gamma(), idler.gamma())
}

/// Normalizes a raw frequency mismatch (Hz) by the mean parametric bandwidth.
pub fn raw_mismatch_to_normalized(raw_hz: f64, gamma_s: f64, gamma_i: f64) -> Result<f64> {
    if !(gamma_s > 0.0) {
        return Err(domain("gamma_s", gamma_s, "> 0"));
    }
    if !(gamma_i > 0.0) {
        return Err(domain("gamma_i", gamma_i, "> 0"));
    }
    Ok(raw_hz / (0.5 * (gamma_s + gamma_i)))
}

/// Internal pair rate with a flag for operation outside the P_p ≪ P_th regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRate {
    pub rate: f64,
    pub near_threshold: bool,
}

/// r = 2π γ_sγ_i/(γ_s+γ_i) · P_p/P_th
pub fn pair_rate_internal(gamma_s: f64, gamma_i: f64, p_pump: f64, p_th: f64) -> Result<PairRate> {
    if !(gamma_s > 0.0) {
        return Err(domain("gamma_s", gamma_s, "> 0"));
    }
    if !(gamma_i > 0.0) {
        return Err(domain("gamma_i", gamma_i, "> 0"));
    }
    if !(p_th > 0.0) {
        return Err(domain("P_th", p_th, "> 0"));
    }
    if !(p_pump >= 0.0) {
        return Err(domain("P_p", p_pump, ">= 0"));
    }
    let rate = 2.0 * PI * gamma_s * gamma_i / (gamma_s + gamma_i) * p_pump / p_th;
    Ok(PairRate {
        rate,
        near_threshold: p_pump * PAIR_RATE_VALIDITY_FACTOR >= p_th,
    })
}

/// (R_s, R_i, R_si) = (κ_s r, κ_i r, κ_sκ_i r)
pub fn external_rates(r_si: f64, kappa_s: f64, kappa_i: f64) -> Result<(f64, f64, f64)> {
    for (name, k) in [("kappa_s", kappa_s), ("kappa_i", kappa_i)] {
        if !(k > 0.0 && k < 1.0) {
            return Err(domain(name, k, "in (0, 1)"));
        }
    }
    Ok((kappa_s * r_si, kappa_i * r_si, kappa_s * kappa_i * r_si))
}

/// Output power of one parametric wave; `below_threshold` marks a clamped zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputPower {
    pub power: f64,
    pub below_threshold: bool,
}

/// P = 4κ_pκ_si P_0 (ν_si/ν_p)(√(P_p/P_0 − (Δ+2δ_p)²) − 1 + 2δ_pΔ), clamped at 0.
#[allow(clippy::too_many_arguments)]
pub fn output_power(
    p_pump: f64,
    p0: f64,
    delta_p: f64,
    mismatch: f64,
    kappa_p: f64,
    kappa_si: f64,
    nu_si: f64,
    nu_p: f64,
) -> Result<OutputPower> {
    if !(p0 > 0.0) {
        return Err(domain("P_0", p0, "> 0"));
    }
    if !(nu_p > 0.0) {
        return Err(domain("nu_p", nu_p, "> 0"));
    }
    let p_th = threshold(p0, delta_p, mismatch)?;
    let radicand = p_pump / p0 - (mismatch + 2.0 * delta_p).powi(2);
    if p_pump < p_th || radicand < 0.0 {
        return Ok(OutputPower {
            power: 0.0,
            below_threshold: true,
        });
    }
    let bracket = radicand.sqrt() - 1.0 + 2.0 * delta_p * mismatch;
    let power = 4.0 * kappa_p * kappa_si * p0 * (nu_si / nu_p) * bracket;
    Ok(OutputPower {
        power: power.max(0.0),
        below_threshold: power <= 0.0,
    })
}
