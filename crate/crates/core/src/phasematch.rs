//! Natural phase matching of TE pump and TM signal/idler modes.
//!
//! A triplet is phase matched at the temperature where ν_p = ν_s + ν_i with the
//! azimuthal numbers obeying m_p = m_s + m_i. Triplets are seeded by treating the
//! mode numbers as continuous, rounded, and then solved in temperature.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{ModeIndex, Polarization, Resonator};
use crate::error::{domain, Error, Result};
use crate::roots;
use crate::SPEED_OF_LIGHT;

pub use crate::opo::pdc_mismatch;

/// Energy residual accepted for a phase-matched triplet, Hz.
pub const RESIDUAL_TOL_HZ: f64 = 1e4;
/// Temperature sampling used to bracket roots, °C.
pub const BRACKET_STEP_C: f64 = 0.05;

const SOLVE_FTOL_HZ: f64 = 2e3;
const SOLVE_XTOL_C: f64 = 1e-11;

/// Pump, signal and idler mode labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeTriplet {
    pub pump: ModeIndex,
    pub signal: ModeIndex,
    pub idler: ModeIndex,
}

impl ModeTriplet {
    /// Requires a TE pump and TM signal and idler.
    pub fn new(pump: ModeIndex, signal: ModeIndex, idler: ModeIndex) -> Result<Self> {
        if pump.pol != Polarization::TE {
            return Err(Error::Asset("pump must be TE".into()));
        }
        if signal.pol != Polarization::TM || idler.pol != Polarization::TM {
            return Err(Error::Asset("signal and idler must be TM".into()));
        }
        Ok(Self { pump, signal, idler })
    }

    /// a = p_s + p_i − p_p
    pub fn cluster_number(&self) -> i64 {
        self.signal.p as i64 + self.idler.p as i64 - self.pump.p as i64
    }

    /// Signal and idler labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pump: self.pump,
            signal: self.idler,
            idler: self.signal,
        }
    }

    pub fn channel(&self) -> Channel {
        Channel {
            q_p: self.pump.q,
            p_p: self.pump.p,
            q_s: self.signal.q,
            q_i: self.idler.q,
            p_s: self.signal.p,
            p_i: self.idler.p,
        }
    }
}

/// Azimuthal momentum conservation, including the angular selection rules.
pub fn momentum_conserved(t: &ModeTriplet) -> bool {
    let (mp, ms, mi) = (t.pump.m as i128, t.signal.m as i128, t.idler.m as i128);
    let (pp, ps, pi) = (t.pump.p as i128, t.signal.p as i128, t.idler.p as i128);
    let azimuthal = mp == ms + mi;
    let lp = mp + pp;
    let triangle = (ms + ps - mi - pi).abs() <= lp && lp <= ms + ps + mi + pi;
    let parity = (mp + ms + mi + pp + ps + pi) % 2 == 0;
    azimuthal && triangle && parity
}

/// A conversion channel: radial and angular numbers of the three modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub q_p: u32,
    pub p_p: u32,
    pub q_s: u32,
    pub q_i: u32,
    pub p_s: u32,
    pub p_i: u32,
}

impl Channel {
    /// Channel pumped in the fundamental (q=1, p=0) pump mode.
    pub fn new(q_s: u32, q_i: u32, p_s: u32, p_i: u32) -> Self {
        Self {
            q_p: 1,
            p_p: 0,
            q_s,
            q_i,
            p_s,
            p_i,
        }
    }

    pub fn fundamental() -> Self {
        Self::new(1, 1, 0, 0)
    }

    pub fn cluster_number(&self) -> i64 {
        self.p_s as i64 + self.p_i as i64 - self.p_p as i64
    }

    /// With m_p = m_s + m_i enforced, the parity and triangle conditions only
    /// involve the angular numbers, so they are checked here once per channel.
    pub fn validate(&self) -> Result<()> {
        for (name, q) in [("q_p", self.q_p), ("q_s", self.q_s), ("q_i", self.q_i)] {
            if q < 1 {
                return Err(domain(name, q as f64, ">= 1"));
            }
        }
        let a = self.cluster_number();
        if a.rem_euclid(2) != 0 {
            return Err(domain("p_p + p_s + p_i", (self.p_p + self.p_s + self.p_i) as f64, "even"));
        }
        if a < 0 {
            return Err(domain("p_p", self.p_p as f64, "<= p_s + p_i"));
        }
        Ok(())
    }

    pub fn triplet(&self, m_p: u64, m_s: u64) -> Result<ModeTriplet> {
        if m_s == 0 || m_s >= m_p {
            return Err(domain("m_s", m_s as f64, "in (0, m_p)"));
        }
        Ok(ModeTriplet {
            pump: ModeIndex::new(m_p, self.q_p, self.p_p, Polarization::TE)?,
            signal: ModeIndex::new(m_s, self.q_s, self.p_s, Polarization::TM)?,
            idler: ModeIndex::new(m_p - m_s, self.q_i, self.p_i, Polarization::TM)?,
        })
    }

    /// Channels with the same q's and cluster number, differing in how the angular
    /// excitation is shared between signal and idler.
    pub fn cluster_members(&self) -> Vec<Channel> {
        let total = self.p_s + self.p_i;
        (0..=total)
            .map(|p_s| Channel {
                p_s,
                p_i: total - p_s,
                ..*self
            })
            .collect()
    }

    pub fn label(&self) -> String {
        format!(
            "q={},{},{} p={},{},{}",
            self.q_p, self.q_s, self.q_i, self.p_p, self.p_s, self.p_i
        )
    }
}

/// A triplet at its phase-matching temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSolution {
    pub triplet: ModeTriplet,
    pub temp_raw_c: f64,
    pub temp_cal_c: f64,
    pub nu_p: f64,
    pub nu_s: f64,
    pub nu_i: f64,
    /// ν_p − ν_s − ν_i, Hz.
    pub residual_hz: f64,
}

impl PhaseMatchSolution {
    pub fn lambda_p_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.nu_p
    }
    pub fn lambda_s_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.nu_s
    }
    pub fn lambda_i_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.nu_i
    }
}

/// ν_p − ν_s − ν_i of a fixed triplet at `temp_c`.
pub fn energy_residual(res: &Resonator, t: &ModeTriplet, temp_c: f64) -> Result<f64> {
    Ok(res.mode_frequency(&t.pump, temp_c)?
        - res.mode_frequency(&t.signal, temp_c)?
        - res.mode_frequency(&t.idler, temp_c)?)
}

/// Evaluates a triplet at `temp_c` without solving.
pub fn evaluate(res: &Resonator, t: &ModeTriplet, temp_c: f64) -> Result<PhaseMatchSolution> {
    let nu_p = res.mode_frequency(&t.pump, temp_c)?;
    let nu_s = res.mode_frequency(&t.signal, temp_c)?;
    let nu_i = res.mode_frequency(&t.idler, temp_c)?;
    Ok(PhaseMatchSolution {
        triplet: *t,
        temp_raw_c: temp_c,
        temp_cal_c: res.material.calibrate_temperature(temp_c),
        nu_p,
        nu_s,
        nu_i,
        residual_hz: nu_p - nu_s - nu_i,
    })
}

fn check_window(res: &Resonator, t_lo: f64, t_hi: f64) -> Result<()> {
    if !(t_lo <= t_hi) {
        return Err(domain("T_range", t_lo, format!("<= {t_hi}")));
    }
    res.material.check_temperature(t_lo)?;
    res.material.check_temperature(t_hi)
}

/// All phase-matching temperatures of `t` within [t_lo, t_hi] (raw °C), ascending.
pub fn find_phasematch_temperatures(res: &Resonator, t: &ModeTriplet, t_lo: f64, t_hi: f64) -> Result<Vec<PhaseMatchSolution>> {
    if !momentum_conserved(t) {
        return Err(Error::Domain {
            quantity: "triplet",
            value: f64::NAN,
            bound: "momentum conservation".into(),
        });
    }
    check_window(res, t_lo, t_hi)?;
    let grid = roots::grid(t_lo, t_hi, BRACKET_STEP_C);
    let temps = roots::all_roots(|x| energy_residual(res, t, x), &grid, SOLVE_FTOL_HZ, SOLVE_XTOL_C)?;
    let mut out = Vec::with_capacity(temps.len());
    for temp in temps {
        let sol = evaluate(res, t, temp)?;
        if sol.residual_hz.abs() >= RESIDUAL_TOL_HZ {
            return Err(Error::NoConvergence {
                method: "phase-matching temperature",
                iterations: 0,
                residual: sol.residual_hz,
            });
        }
        out.push(sol);
    }
    Ok(out)
}

/// Lowest phase-matching temperature of `t` in [t_lo, t_hi], if the residual changes sign there.
pub fn find_phasematch_temperature(res: &Resonator, t: &ModeTriplet, t_lo: f64, t_hi: f64) -> Result<Option<PhaseMatchSolution>> {
    Ok(find_phasematch_temperatures(res, t, t_lo, t_hi)?.into_iter().next())
}

/// Mode numbers and frequencies with m treated as continuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSolution {
    pub m_p: f64,
    pub m_s: f64,
    pub m_i: f64,
    pub nu_p: f64,
    pub nu_s: f64,
    pub nu_i: f64,
}

struct Split<'a> {
    res: &'a Resonator,
    ch: &'a Channel,
    m_p: f64,
    temp_c: f64,
}

impl Split<'_> {
    fn nu_s(&self, x: f64) -> Result<f64> {
        self.res
            .frequency_continuous(x, self.ch.q_s, self.ch.p_s, Polarization::TM, self.temp_c)
    }
    fn nu_i(&self, x: f64) -> Result<f64> {
        self.res
            .frequency_continuous(self.m_p - x, self.ch.q_i, self.ch.p_i, Polarization::TM, self.temp_c)
    }

    /// m_s at which ν_s = ν_i.
    fn degenerate_m_s(&self) -> Result<f64> {
        let h = |x: f64| Ok(self.nu_s(x)? - self.nu_i(x)?);
        let (a, b) = (0.35 * self.m_p, 0.65 * self.m_p);
        let (x, _) = roots::bracketed(h, a, b, h(a)?, h(b)?, 1e2, 1e-9)?;
        Ok(x)
    }

    /// Largest m_s keeping the idler inside the material's wavelength range.
    fn max_m_s(&self) -> Result<f64> {
        let nu_min = SPEED_OF_LIGHT / (self.res.material.validity.wavelength_max_um * 1e-6) * 1.005;
        let m_i = self
            .res
            .continuous_azimuthal_number(nu_min, self.ch.q_i, self.ch.p_i, Polarization::TM, self.temp_c)?;
        Ok(self.m_p - m_i.ceil())
    }
}

const SPLIT_SAMPLES: usize = 160;

/// Splits a pump of continuous mode number `m_p` and frequency `nu_p` into signal
/// and idler, choosing the energy-conserving root with ν_s ≥ ν_i closest to
/// degeneracy.
pub fn split_pump(res: &Resonator, ch: &Channel, m_p: f64, nu_p: f64, temp_c: f64) -> Result<ContinuousSolution> {
    ch.validate()?;
    let sp = Split { res, ch, m_p, temp_c };
    let g = |x: f64| Ok(nu_p - sp.nu_s(x)? - sp.nu_i(x)?);
    let x0 = sp.degenerate_m_s()?;
    let x_max = sp.max_m_s()?;
    let not_found = || Error::NotFound(format!("no energy-conserving split for {} at {temp_c} C", ch.label()));
    if !(x_max > x0) {
        return Err(not_found());
    }
    let mut xa = x0;
    let mut ga = g(xa)?;
    let step = (x_max - x0) / SPLIT_SAMPLES as f64;
    for k in 1..=SPLIT_SAMPLES {
        let xb = x0 + k as f64 * step;
        let gb = g(xb)?;
        if ga == 0.0 || ga.signum() != gb.signum() {
            let (x, _) = roots::bracketed(g, xa, xb, ga, gb, 50.0, 1e-9)?;
            let nu_s = sp.nu_s(x)?;
            let nu_i = sp.nu_i(x)?;
            return Ok(ContinuousSolution {
                m_p,
                m_s: x,
                m_i: m_p - x,
                nu_p,
                nu_s,
                nu_i,
            });
        }
        xa = xb;
        ga = gb;
    }
    Err(not_found())
}

/// Continuous solution for a pump held exactly at `lambda_p_m`.
pub fn continuous_solution(res: &Resonator, ch: &Channel, lambda_p_m: f64, temp_c: f64) -> Result<ContinuousSolution> {
    let nu_p = SPEED_OF_LIGHT / lambda_p_m;
    let m_p = res.continuous_azimuthal_number(nu_p, ch.q_p, ch.p_p, Polarization::TE, temp_c)?;
    split_pump(res, ch, m_p, nu_p, temp_c)
}

/// Integer triplet near phase matching at `temp_c` for a pump near `lambda_p_m`.
///
/// The pump mode is the one closest to c/λ_p, the signal number is the rounded
/// continuous solution and the idler takes the remainder.
pub fn seed_triplet(res: &Resonator, lambda_p_m: f64, temp_c: f64, ch: &Channel) -> Result<ModeTriplet> {
    ch.validate()?;
    if !(lambda_p_m > 0.0) {
        return Err(domain("lambda_p", lambda_p_m, "> 0"));
    }
    let (m_p, _) = res.find_azimuthal_number(SPEED_OF_LIGHT / lambda_p_m, ch.q_p, ch.p_p, Polarization::TE, temp_c)?;
    let pump = ModeIndex::new(m_p, ch.q_p, ch.p_p, Polarization::TE)?;
    let nu_p = res.mode_frequency(&pump, temp_c)?;
    let split = split_pump(res, ch, m_p as f64, nu_p, temp_c)?;
    let t = ch.triplet(m_p, split.m_s.round() as u64)?;
    debug_assert!(momentum_conserved(&t));
    Ok(t)
}

/// ν_p − ν_s − ν_i at the degenerate split, for a pump held at `lambda_p_m`.
/// Its zero is the temperature at which signal and idler coincide.
pub fn degeneracy_mismatch(res: &Resonator, ch: &Channel, lambda_p_m: f64, temp_c: f64) -> Result<f64> {
    ch.validate()?;
    let nu_p = SPEED_OF_LIGHT / lambda_p_m;
    let m_p = res.continuous_azimuthal_number(nu_p, ch.q_p, ch.p_p, Polarization::TE, temp_c)?;
    let sp = Split { res, ch, m_p, temp_c };
    let x0 = sp.degenerate_m_s()?;
    Ok(nu_p - sp.nu_s(x0)? - sp.nu_i(x0)?)
}

/// Raw temperatures in [t_lo, t_hi] where signal and idler are degenerate.
pub fn degeneracy_temperatures(res: &Resonator, ch: &Channel, lambda_p_m: f64, t_lo: f64, t_hi: f64, step_c: f64) -> Result<Vec<f64>> {
    check_window(res, t_lo, t_hi)?;
    let grid = roots::grid(t_lo, t_hi, step_c);
    roots::all_roots(|t| degeneracy_mismatch(res, ch, lambda_p_m, t), &grid, 1e3, 1e-7)
}

/// Which parametric wave crosses a target line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Signal,
    Idler,
}

/// Named reference wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetLine {
    pub name: String,
    pub wavelength_nm: f64,
}

impl TargetLine {
    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }
}

#[derive(Deserialize)]
struct TargetFile {
    line: Vec<TargetLine>,
}

/// Parses a target table with `[[line]]` entries holding `name` and `wavelength_nm`.
pub fn target_lines_from_toml(text: &str) -> Result<Vec<TargetLine>> {
    let f: TargetFile = toml::from_str(text).map_err(|e| Error::Asset(e.to_string()))?;
    for l in &f.line {
        if !(l.wavelength_nm > 0.0) {
            return Err(Error::Asset(format!("line {} has non-positive wavelength", l.name)));
        }
    }
    Ok(f.line)
}

/// The bundled table: Cs D1, Rb D1, Pr:YSO and the telecom O and C bands.
pub fn default_target_lines() -> Vec<TargetLine> {
    target_lines_from_toml(include_str!("../assets/target_lines.toml")).expect("bundled target table parses")
}

/// Temperature at which one arm of a continuous channel curve reaches a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub name: String,
    pub wavelength_nm: f64,
    pub arm: Arm,
    pub temp_raw_c: f64,
    pub temp_cal_c: f64,
}

/// Raw temperatures in [t_lo, t_hi] where the given arm passes `wavelength_m`.
#[allow(clippy::too_many_arguments)]
pub fn crossing_temperatures(
    res: &Resonator,
    ch: &Channel,
    lambda_p_m: f64,
    arm: Arm,
    wavelength_m: f64,
    t_lo: f64,
    t_hi: f64,
    step_c: f64,
) -> Result<Vec<f64>> {
    check_window(res, t_lo, t_hi)?;
    let f = |t: f64| {
        let s = continuous_solution(res, ch, lambda_p_m, t)?;
        let nu = match arm {
            Arm::Signal => s.nu_s,
            Arm::Idler => s.nu_i,
        };
        Ok(SPEED_OF_LIGHT / nu - wavelength_m)
    };
    let grid = roots::grid(t_lo, t_hi, step_c);
    roots::all_roots(f, &grid, 1e-15, 1e-8)
}

/// Sweep settings for channel scans; temperatures are raw model values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanWindow {
    pub lambda_p_m: f64,
    pub t_min_c: f64,
    pub t_max_c: f64,
    pub t_step_c: f64,
}

/// Solutions of one channel ordered by temperature, plus grid temperatures
/// where no solution was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelCurve {
    pub channel: Channel,
    pub samples: Vec<PhaseMatchSolution>,
    pub gaps_c: Vec<f64>,
}

impl ChannelCurve {
    /// Number of times the pump mode number changes along the curve.
    pub fn pump_mode_changes(&self) -> usize {
        self.samples
            .windows(2)
            .filter(|w| w[0].triplet.pump.m != w[1].triplet.pump.m)
            .count()
    }
}

fn solve_near(res: &Resonator, ch: &Channel, w: &ScanWindow, temp_c: f64) -> Result<Option<PhaseMatchSolution>> {
    let t = match seed_triplet(res, w.lambda_p_m, temp_c, ch) {
        Ok(t) => t,
        Err(Error::NotFound(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let lo = (temp_c - 4.0 * BRACKET_STEP_C).max(w.t_min_c);
    let hi = (temp_c + 4.0 * BRACKET_STEP_C).min(w.t_max_c);
    find_phasematch_temperature(res, &t, lo, hi)
}

/// Sweeps temperature for each channel, re-seeding at every grid point with the
/// pump mode nearest to c/λ_p, so m_p steps by one whenever the pump resonance
/// leaves the window of one FSR around the laser.
pub fn scan_channels(res: &Resonator, channels: &[Channel], w: &ScanWindow) -> Result<Vec<ChannelCurve>> {
    for ch in channels {
        ch.validate()?;
    }
    if !(w.t_step_c > 0.0) {
        return Err(domain("t_step_c", w.t_step_c, "> 0"));
    }
    check_window(res, w.t_min_c, w.t_max_c)?;
    let temps = roots::grid(w.t_min_c, w.t_max_c, w.t_step_c);
    let jobs: Vec<(usize, f64)> = (0..channels.len())
        .flat_map(|c| temps.iter().map(move |&t| (c, t)))
        .collect();
    let results: Vec<Result<Option<PhaseMatchSolution>>> = jobs
        .par_iter()
        .map(|&(c, t)| solve_near(res, &channels[c], w, t))
        .collect();

    let mut curves: Vec<ChannelCurve> = channels
        .iter()
        .map(|&channel| ChannelCurve {
            channel,
            samples: Vec::new(),
            gaps_c: Vec::new(),
        })
        .collect();
    let mut seen: Vec<HashSet<ModeTriplet>> = vec![HashSet::new(); channels.len()];
    for (&(c, t), r) in jobs.iter().zip(results) {
        match r? {
            Some(sol) => {
                if seen[c].insert(sol.triplet) {
                    curves[c].samples.push(sol);
                }
            }
            None => curves[c].gaps_c.push(t),
        }
    }
    for curve in &mut curves {
        curve.samples.sort_by(|a, b| a.temp_raw_c.total_cmp(&b.temp_raw_c));
    }
    Ok(curves)
}

/// Point of a continuous channel curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub temp_raw_c: f64,
    pub temp_cal_c: f64,
    pub lambda_s_m: f64,
    pub lambda_i_m: f64,
}

/// Which quantity a map varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MapAxis {
    Radius { lambda_p_m: f64, radii_m: Vec<f64> },
    PumpWavelength { radius_m: f64, lambdas_m: Vec<f64> },
}

/// Curve, degeneracy and target crossings for one radius / pump wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub radius_m: f64,
    pub lambda_p_m: f64,
    pub curve: Vec<CurvePoint>,
    /// (raw, calibrated) degeneracy temperatures.
    pub degeneracy_c: Vec<(f64, f64)>,
    pub crossings: Vec<Crossing>,
}

/// Raw temperature sampling of a map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapRange {
    pub t_min_c: f64,
    pub t_max_c: f64,
    pub t_step_c: f64,
}

fn map_entry(res: &Resonator, ch: &Channel, lambda_p_m: f64, targets: &[TargetLine], r: &MapRange) -> Result<MapEntry> {
    let cal = |t: f64| res.material.calibrate_temperature(t);
    let mut curve = Vec::new();
    for t in roots::grid(r.t_min_c, r.t_max_c, r.t_step_c) {
        match continuous_solution(res, ch, lambda_p_m, t) {
            Ok(s) => curve.push(CurvePoint {
                temp_raw_c: t,
                temp_cal_c: cal(t),
                lambda_s_m: SPEED_OF_LIGHT / s.nu_s,
                lambda_i_m: SPEED_OF_LIGHT / s.nu_i,
            }),
            Err(Error::NotFound(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let degeneracy_c = degeneracy_temperatures(res, ch, lambda_p_m, r.t_min_c, r.t_max_c, r.t_step_c)?
        .into_iter()
        .map(|t| (t, cal(t)))
        .collect();
    let mut crossings = Vec::new();
    for line in targets {
        for arm in [Arm::Signal, Arm::Idler] {
            let temps = crossing_temperatures(res, ch, lambda_p_m, arm, line.wavelength_m(), r.t_min_c, r.t_max_c, r.t_step_c)?;
            crossings.extend(temps.into_iter().map(|t| Crossing {
                name: line.name.clone(),
                wavelength_nm: line.wavelength_nm,
                arm,
                temp_raw_c: t,
                temp_cal_c: cal(t),
            }));
        }
    }
    Ok(MapEntry {
        radius_m: res.geometry.radius_m,
        lambda_p_m,
        curve,
        degeneracy_c,
        crossings,
    })
}

/// Continuous phase-matching curves over radius (shape R/ρ kept) or pump wavelength.
pub fn scan_radius_wavelength(res: &Resonator, axis: &MapAxis, ch: &Channel, targets: &[TargetLine], range: &MapRange) -> Result<Vec<MapEntry>> {
    ch.validate()?;
    check_window(res, range.t_min_c, range.t_max_c)?;
    if !(range.t_step_c > 0.0) {
        return Err(domain("t_step_c", range.t_step_c, "> 0"));
    }
    let points: Vec<(Resonator, f64)> = match axis {
        MapAxis::Radius { lambda_p_m, radii_m } => radii_m
            .iter()
            .map(|&r| (res.with_geometry(res.geometry.scaled_to_radius(r)), *lambda_p_m))
            .collect(),
        MapAxis::PumpWavelength { radius_m, lambdas_m } => {
            let scaled = res.with_geometry(res.geometry.scaled_to_radius(*radius_m));
            lambdas_m.iter().map(|&l| (scaled.clone(), l)).collect()
        }
    };
    for (r, l) in &points {
        r.geometry.validate()?;
        res.material.check_wavelength(*l)?;
    }
    points
        .par_iter()
        .map(|(r, l)| map_entry(r, ch, *l, targets, range))
        .collect()
}

/// Neighbor selection for stepwise tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMethod {
    /// Same pump mode, (m_s ± 1, m_i ∓ 1).
    Coarse,
    /// m_s fixed, (m_p ± 1, m_i ± 1).
    FineSignal,
    /// m_i fixed, (m_p ± 1, m_s ± 1).
    FineIdler,
}

/// A neighboring triplet and its frequency and temperature offsets from the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepNeighbor {
    pub direction: i32,
    pub triplet: ModeTriplet,
    pub solution: Option<PhaseMatchSolution>,
    pub dnu_s: Option<f64>,
    pub dnu_i: Option<f64>,
    pub dt_c: Option<f64>,
}

/// Re-solves the ±1 neighbors of `base` within ±`window_c` of its temperature.
pub fn step_tuning(res: &Resonator, base: &PhaseMatchSolution, method: StepMethod, window_c: f64) -> Result<Vec<StepNeighbor>> {
    let b = base.triplet;
    let mut out = Vec::with_capacity(2);
    for d in [1i64, -1] {
        let shift = |m: u64, k: i64| -> Result<u64> {
            let v = m as i64 + k;
            if v < 1 {
                return Err(domain("m", v as f64, ">= 1"));
            }
            Ok(v as u64)
        };
        let (mp, ms, mi) = match method {
            StepMethod::Coarse => (b.pump.m, shift(b.signal.m, d)?, shift(b.idler.m, -d)?),
            StepMethod::FineSignal => (shift(b.pump.m, d)?, b.signal.m, shift(b.idler.m, d)?),
            StepMethod::FineIdler => (shift(b.pump.m, d)?, shift(b.signal.m, d)?, b.idler.m),
        };
        let triplet = ModeTriplet {
            pump: b.pump.with_m(mp),
            signal: b.signal.with_m(ms),
            idler: b.idler.with_m(mi),
        };
        let lo = res.material.validity.temperature_min_c.max(base.temp_raw_c - window_c);
        let hi = res.material.validity.temperature_max_c.min(base.temp_raw_c + window_c);
        let found = find_phasematch_temperatures(res, &triplet, lo, hi)?
            .into_iter()
            .min_by(|x, y| (x.temp_raw_c - base.temp_raw_c).abs().total_cmp(&(y.temp_raw_c - base.temp_raw_c).abs()));
        out.push(StepNeighbor {
            direction: d as i32,
            triplet,
            solution: found,
            dnu_s: found.map(|s| s.nu_s - base.nu_s),
            dnu_i: found.map(|s| s.nu_i - base.nu_i),
            dt_c: found.map(|s| s.temp_raw_c - base.temp_raw_c),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::ResonatorGeometry;
    use crate::material::MaterialModel;

    fn idx(m: u64, p: u32, pol: Polarization) -> ModeIndex {
        ModeIndex::new(m, 1, p, pol).unwrap()
    }

    fn trip(m: (u64, u64, u64), p: (u32, u32, u32)) -> ModeTriplet {
        ModeTriplet {
            pump: idx(m.0, p.0, Polarization::TE),
            signal: idx(m.1, p.1, Polarization::TM),
            idler: idx(m.2, p.2, Polarization::TM),
        }
    }

    fn res() -> Resonator {
        Resonator::new(ResonatorGeometry::reference_device(), MaterialModel::default())
    }

    #[test]
    fn momentum_examples() {
        assert!(momentum_conserved(&trip((64756, 38000, 26756), (0, 0, 0))));
        assert!(!momentum_conserved(&trip((64756, 38000, 26756), (0, 1, 0))));
        let t = trip((64756, 38000, 26756), (0, 1, 1));
        assert!(momentum_conserved(&t));
        assert_eq!(t.cluster_number(), 2);
        assert!(!momentum_conserved(&trip((64757, 38000, 26756), (0, 0, 0))));
    }

    #[test]
    fn channel_validation() {
        assert!(Channel::fundamental().validate().is_ok());
        assert!(Channel::new(1, 1, 1, 0).validate().is_err());
        assert!(Channel::new(0, 1, 0, 0).validate().is_err());
        let c = Channel::new(1, 1, 2, 0);
        let members = c.cluster_members();
        assert_eq!(members.len(), 3);
        assert!(members.iter().all(|m| m.cluster_number() == 2));
        assert!(ModeTriplet::new(idx(3, 0, Polarization::TM), idx(2, 0, Polarization::TM), idx(1, 0, Polarization::TM)).is_err());
    }

    #[test]
    fn seed_is_momentum_conserving_and_near_match() {
        let r = res();
        let t = seed_triplet(&r, 532e-9, 110.0, &Channel::fundamental()).unwrap();
        assert!(momentum_conserved(&t));
        let sol = evaluate(&r, &t, 110.0).unwrap();
        assert!(sol.nu_s >= sol.nu_i);
        // Rounding m_s moves the residual by at most about half the FSR difference.
        assert!(sol.residual_hz.abs() < 1e9, "{}", sol.residual_hz);
    }

    #[test]
    fn solved_temperature_has_small_residual() {
        let r = res();
        let t = seed_triplet(&r, 532e-9, 110.0, &Channel::fundamental()).unwrap();
        let sol = find_phasematch_temperature(&r, &t, 109.5, 110.5).unwrap().unwrap();
        let again = energy_residual(&r, &t, sol.temp_raw_c).unwrap();
        assert!(again.abs() < RESIDUAL_TOL_HZ);
        let sw = find_phasematch_temperature(&r, &t.swapped(), 109.5, 110.5).unwrap().unwrap();
        assert!((sw.temp_raw_c - sol.temp_raw_c).abs() < 1e-9);
    }

    #[test]
    fn no_sign_change_is_none() {
        let r = res();
        let t = seed_triplet(&r, 532e-9, 110.0, &Channel::fundamental()).unwrap();
        assert!(find_phasematch_temperature(&r, &t, 60.0, 61.0).unwrap().is_none());
        assert!(find_phasematch_temperature(&r, &t, 61.0, 60.0).is_err());
    }

    #[test]
    fn target_table_loads() {
        let lines = default_target_lines();
        assert!(lines.iter().any(|l| l.name == "Cs D1" && (l.wavelength_nm - 894.593).abs() < 1e-9));
        assert!(target_lines_from_toml("[[line]]\nname='x'\nwavelength_nm=-1.0\n").is_err());
    }
}
