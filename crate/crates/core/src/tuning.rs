//! Continuous tuning by combining temperature with a second shift mechanism.
//!
//! A mechanism adds `rate · u` to each resonance for a control value `u`. Retuning
//! solves for (T, u) such that energy conservation holds again and the signal sits
//! at a requested offset from its base frequency.

use serde::{Deserialize, Serialize};

use crate::dispersion::Resonator;
use crate::error::{domain, Error, Result};
use crate::phasematch::{evaluate, PhaseMatchSolution};
use crate::roots;

const ENERGY_TOL_HZ: f64 = 1e3;
const TARGET_TOL_HZ: f64 = 1e3;
const NEWTON_MAX_ITER: usize = 60;
const FD_TEMP_C: f64 = 1e-3;
const FD_CONTROL_REL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Electrooptic,
    Substrate,
    Custom,
}

/// Linear frequency shifts of pump, signal and idler per control unit (Hz/unit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftMechanism {
    pub kind: MechanismKind,
    /// Name of the control unit, e.g. "V".
    pub unit: String,
    pub rate_pump_hz: f64,
    pub rate_signal_hz: f64,
    pub rate_idler_hz: f64,
    pub control_min: f64,
    pub control_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MechanismFile {
    kind: MechanismKind,
    #[serde(default = "default_unit")]
    unit: String,
    #[serde(rename = "rate_pump_MHz")]
    rate_pump_mhz: f64,
    #[serde(rename = "rate_signal_MHz")]
    rate_signal_mhz: f64,
    #[serde(rename = "rate_idler_MHz")]
    rate_idler_mhz: f64,
    control_min: f64,
    control_max: f64,
}

fn default_unit() -> String {
    "arb".into()
}

impl ShiftMechanism {
    /// Illustrative substrate proximity shift. The rates are not derived from an
    /// electromagnetic model; they give a reachable signal span of about 400 MHz
    /// around the Cs D1 operating point of the 2.5 mm device.
    pub fn substrate_default() -> Self {
        Self {
            kind: MechanismKind::Substrate,
            unit: "arb".into(),
            rate_pump_hz: -100e6,
            rate_signal_hz: -300e6,
            rate_idler_hz: -250e6,
            control_min: -0.45,
            control_max: 0.45,
        }
    }

    /// No second mechanism: only temperature is free.
    pub fn null() -> Self {
        Self {
            kind: MechanismKind::Custom,
            unit: "arb".into(),
            rate_pump_hz: 0.0,
            rate_signal_hz: 0.0,
            rate_idler_hz: 0.0,
            control_min: -1.0,
            control_max: 1.0,
        }
    }

    /// Parses a mechanism file with keys `kind`, `unit`, `rate_{pump,signal,idler}_MHz`,
    /// `control_min` and `control_max`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: MechanismFile = toml::from_str(text).map_err(|e| Error::Asset(e.to_string()))?;
        let m = Self {
            kind: f.kind,
            unit: f.unit,
            rate_pump_hz: f.rate_pump_mhz * 1e6,
            rate_signal_hz: f.rate_signal_mhz * 1e6,
            rate_idler_hz: f.rate_idler_mhz * 1e6,
            control_min: f.control_min,
            control_max: f.control_max,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("rate_pump", self.rate_pump_hz),
            ("rate_signal", self.rate_signal_hz),
            ("rate_idler", self.rate_idler_hz),
        ] {
            if !r.is_finite() {
                return Err(domain(name, r, "finite"));
            }
        }
        if !(self.control_min <= 0.0 && self.control_max >= 0.0 && self.control_max > self.control_min) {
            return Err(domain("control range", self.control_min, "control_min <= 0 <= control_max, non-empty"));
        }
        Ok(())
    }

    fn span(&self) -> f64 {
        self.control_max - self.control_min
    }
}

/// Shift rates per volt across the resonator thickness, from the index change of
/// each mode's polarization axis.
pub fn electrooptic_mechanism(res: &Resonator, sol: &PhaseMatchSolution, fringe_factor: f64, max_voltage: f64) -> Result<ShiftMechanism> {
    let h = res.geometry.thickness_m;
    if !(h > 0.0) {
        return Err(domain("thickness_m", h, "> 0"));
    }
    if !(max_voltage > 0.0) {
        return Err(domain("max_voltage", max_voltage, "> 0"));
    }
    let t = &sol.triplet;
    let rate = |pol: crate::dispersion::Polarization, nu: f64| -> Result<f64> {
        electrooptic_rate(res, pol.axis(), nu, sol.temp_raw_c, fringe_factor)
    };
    Ok(ShiftMechanism {
        kind: MechanismKind::Electrooptic,
        unit: "V".into(),
        rate_pump_hz: rate(t.pump.pol, sol.nu_p)?,
        rate_signal_hz: rate(t.signal.pol, sol.nu_s)?,
        rate_idler_hz: rate(t.idler.pol, sol.nu_i)?,
        control_min: -max_voltage,
        control_max: max_voltage,
    })
}

/// −ν Δn(1 V)/n: frequency shift per volt of a resonance at `nu` on `axis`.
pub fn electrooptic_rate(res: &Resonator, axis: crate::material::Axis, nu: f64, temp_c: f64, fringe_factor: f64) -> Result<f64> {
    let lam = crate::SPEED_OF_LIGHT / nu;
    let n = res.material.refractive_index(axis, lam, temp_c)?;
    let dn = res
        .material
        .electrooptic_index_shift(axis, lam, temp_c, 1.0, res.geometry.thickness_m, fringe_factor)?;
    Ok(-nu * dn / n)
}

/// Result of a retune: control value, new temperature and shifted frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetuneResult {
    pub control: f64,
    pub temp_raw_c: f64,
    pub temp_cal_c: f64,
    /// Frequencies including the mechanism shifts; ν_p is the re-lock frequency.
    pub solution: PhaseMatchSolution,
    pub signal_offset_hz: f64,
    pub iterations: usize,
}

struct System<'a> {
    res: &'a Resonator,
    base: &'a PhaseMatchSolution,
    mech: &'a ShiftMechanism,
}

impl System<'_> {
    fn shifted(&self, temp_c: f64, u: f64) -> Result<PhaseMatchSolution> {
        let mut s = evaluate(self.res, &self.base.triplet, temp_c)?;
        s.nu_p += self.mech.rate_pump_hz * u;
        s.nu_s += self.mech.rate_signal_hz * u;
        s.nu_i += self.mech.rate_idler_hz * u;
        s.residual_hz = s.nu_p - s.nu_s - s.nu_i;
        Ok(s)
    }

    /// (energy residual, signal offset − target)
    fn eval(&self, temp_c: f64, u: f64, target: f64) -> Result<[f64; 2]> {
        let s = self.shifted(temp_c, u)?;
        Ok([s.residual_hz, s.nu_s - self.base.nu_s - target])
    }

    /// Temperature restoring energy conservation at fixed control `u`.
    fn temperature_at(&self, u: f64) -> Result<f64> {
        let f = |t: f64| Ok(self.shifted(t, u)?.residual_hz);
        let t0 = self.base.temp_raw_c;
        let v = &self.res.material.validity;
        let mut w = 0.05;
        while w < 50.0 {
            let (a, b) = ((t0 - w).max(v.temperature_min_c), (t0 + w).min(v.temperature_max_c));
            let (fa, fb) = (f(a)?, f(b)?);
            if fa.signum() != fb.signum() {
                return Ok(roots::bracketed(f, a, b, fa, fb, ENERGY_TOL_HZ * 0.1, 1e-12)?.0);
            }
            w *= 2.0;
        }
        Err(Error::NotFound(format!("no phase-matching temperature for control {u}")))
    }

    fn offset_at(&self, u: f64) -> Result<f64> {
        let t = self.temperature_at(u)?;
        Ok(self.shifted(t, u)?.nu_s - self.base.nu_s)
    }
}

/// Signal offsets reached at the two ends of the control range, (at min, at max).
pub fn reachable_offsets(res: &Resonator, base: &PhaseMatchSolution, mech: &ShiftMechanism) -> Result<(f64, f64)> {
    mech.validate()?;
    let sys = System { res, base, mech };
    Ok((sys.offset_at(mech.control_min)?, sys.offset_at(mech.control_max)?))
}

/// Solves energy conservation and ν_s − ν_s,base = `target_hz` for (T, u).
pub fn retune(res: &Resonator, base: &PhaseMatchSolution, mech: &ShiftMechanism, target_hz: f64) -> Result<RetuneResult> {
    retune_from(res, base, mech, 0.0, target_hz)
}

/// As [`retune`], for a base point already held at control value `control0`.
pub fn retune_from(
    res: &Resonator,
    base: &PhaseMatchSolution,
    mech: &ShiftMechanism,
    control0: f64,
    target_hz: f64,
) -> Result<RetuneResult> {
    mech.validate()?;
    if !(control0 >= mech.control_min && control0 <= mech.control_max) {
        return Err(domain("control0", control0, "within the mechanism control range"));
    }
    let sys = System { res, base, mech };

    let (lo, hi) = reachable_offsets(res, base, mech)?;
    let (reach_min, reach_max) = (lo.min(hi), lo.max(hi));
    let slack = TARGET_TOL_HZ;
    if target_hz < reach_min - slack || target_hz > reach_max + slack {
        let achievable = if target_hz >= 0.0 { reach_max } else { reach_min };
        return Err(Error::OutOfRange {
            requested: target_hz,
            achievable,
        });
    }

    let du = FD_CONTROL_REL * mech.span();
    let mut x = [base.temp_raw_c, control0];
    let mut f = sys.eval(x[0], x[1], target_hz)?;
    // With the null mechanism the system is singular; target 0 is the only solution.
    if mech.rate_pump_hz == 0.0 && mech.rate_signal_hz == 0.0 && mech.rate_idler_hz == 0.0 {
        return finish(&sys, x, f, 0);
    }
    let norm = |f: &[f64; 2]| f[0].hypot(f[1]);
    for it in 1..=NEWTON_MAX_ITER {
        if f[0].abs() < ENERGY_TOL_HZ && f[1].abs() < TARGET_TOL_HZ {
            return finish(&sys, x, f, it - 1);
        }
        let ft = sys.eval(x[0] + FD_TEMP_C, x[1], target_hz)?;
        let fu = sys.eval(x[0], x[1] + du, target_hz)?;
        let j = [
            [(ft[0] - f[0]) / FD_TEMP_C, (fu[0] - f[0]) / du],
            [(ft[1] - f[1]) / FD_TEMP_C, (fu[1] - f[1]) / du],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence {
                method: "retune Newton (singular Jacobian)",
                iterations: it,
                residual: norm(&f),
            });
        }
        let dx = [
            -(j[1][1] * f[0] - j[0][1] * f[1]) / det,
            -(-j[1][0] * f[0] + j[0][0] * f[1]) / det,
        ];
        let mut step = 1.0;
        loop {
            let trial = [x[0] + step * dx[0], (x[1] + step * dx[1]).clamp(mech.control_min, mech.control_max)];
            let ft = sys.eval(trial[0], trial[1], target_hz);
            if let Ok(ft) = ft {
                if norm(&ft) < norm(&f) || step < 1e-6 {
                    x = trial;
                    f = ft;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-9 {
                return Err(Error::NoConvergence {
                    method: "retune Newton (line search)",
                    iterations: it,
                    residual: norm(&f),
                });
            }
        }
    }
    if f[0].abs() < ENERGY_TOL_HZ && f[1].abs() < TARGET_TOL_HZ {
        return finish(&sys, x, f, NEWTON_MAX_ITER);
    }
    Err(Error::NoConvergence {
        method: "retune Newton",
        iterations: NEWTON_MAX_ITER,
        residual: norm(&f),
    })
}

fn finish(sys: &System, x: [f64; 2], f: [f64; 2], iterations: usize) -> Result<RetuneResult> {
    let s = sys.shifted(x[0], x[1])?;
    if f[0].abs() >= ENERGY_TOL_HZ {
        return Err(Error::NoConvergence {
            method: "retune verification",
            iterations,
            residual: f[0],
        });
    }
    Ok(RetuneResult {
        control: x[1],
        temp_raw_c: x[0],
        temp_cal_c: s.temp_cal_c,
        signal_offset_hz: s.nu_s - sys.base.nu_s,
        solution: s,
        iterations,
    })
}
