use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde_json::{json, Value};
use wgmopo_core::correlation::*;
use wgmopo_core::dispersion::{ModeIndex, Polarization, Resonator, ResonatorGeometry};
use wgmopo_core::material::MaterialModel;
use wgmopo_core::opo::*;
use wgmopo_core::phasematch::*;
use wgmopo_core::tuning::*;
use wgmopo_core::SPEED_OF_LIGHT as C;

use crate::config::{MapKind, PolarizationSet, RunConfig, Targets, TemperatureScale};
use crate::error::CliError;
use crate::output::{Cell, Emitter, Table};

pub struct Context {
    pub cfg: RunConfig,
    pub res: Resonator,
    pub targets: Vec<TargetLine>,
}

impl Context {
    pub fn new(cfg: RunConfig, material: MaterialModel) -> Result<Self, CliError> {
        let g = &cfg.geometry;
        let mut geometry = ResonatorGeometry::new(g.r_mm * 1e-3, g.rho_mm * 1e-3, g.h_mm * 1e-3)?;
        geometry.reference_temp_c = g.reference_t_c;
        material.check_wavelength(cfg.pump.lambda_nm * 1e-9)?;
        let targets = match &cfg.targets {
            None => default_target_lines(),
            Some(Targets::Inline(v)) => v.clone(),
            Some(Targets::File(p)) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                target_lines_from_toml(&text)?
            }
        };
        Ok(Self {
            res: Resonator::new(geometry, material),
            cfg,
            targets,
        })
    }

    fn lambda_p(&self) -> f64 {
        self.cfg.pump.lambda_nm * 1e-9
    }

    /// Configured temperature to the model scale.
    fn raw(&self, t: f64) -> f64 {
        match self.cfg.temperature_scale {
            TemperatureScale::Calibrated => self.res.material.uncalibrate_temperature(t),
            TemperatureScale::Model => t,
        }
    }

    fn cal(&self, raw: f64) -> f64 {
        self.res.material.calibrate_temperature(raw)
    }

    /// Configured temperature window as (lo, hi, step) on the model scale.
    fn window(&self, lo: f64, hi: f64, step: f64) -> Result<(f64, f64, f64), CliError> {
        let (a, b) = (self.raw(lo), self.raw(hi));
        let s = self.raw(lo + step) - a;
        let v = &self.res.material.validity;
        if a < v.temperature_min_c || b > v.temperature_max_c {
            return Err(CliError::Config(format!(
                "temperature window [{lo}, {hi}] °C maps to model [{a:.3}, {b:.3}] °C outside [{}, {}] °C",
                v.temperature_min_c, v.temperature_max_c
            )));
        }
        Ok((a, b, s))
    }

    fn channels(&self) -> Vec<Channel> {
        self.cfg.channels.iter().map(|&c| c.into()).collect()
    }
}

fn pol_label(p: Polarization) -> &'static str {
    match p {
        Polarization::TE => "TE",
        Polarization::TM => "TM",
    }
}

fn arm_label(a: Arm) -> &'static str {
    match a {
        Arm::Signal => "signal",
        Arm::Idler => "idler",
    }
}

pub fn spectrum(ctx: &Context, out: &mut Emitter) -> Result<(), CliError> {
    let s = &ctx.cfg.spectrum;
    let t = ctx.raw(s.t_c);
    ctx.res.material.check_temperature(t)?;
    let r = &ctx.res;
    let nu_p = C / ctx.lambda_p();
    let (m0, _) = r.find_azimuthal_number(nu_p, 1, 0, Polarization::TE, t)?;
    let fsr = r.free_spectral_range(&ModeIndex::new(m0, 1, 0, Polarization::TE)?, t)?;
    let (lo, hi) = (nu_p - 0.5 * fsr, nu_p + 0.5 * fsr);
    let pols: &[Polarization] = match s.polarization {
        PolarizationSet::TE => &[Polarization::TE],
        PolarizationSet::TM => &[Polarization::TM],
        PolarizationSet::Both => &[Polarization::TE, Polarization::TM],
    };
    let mut modes = Vec::new();
    for &pol in pols {
        for q in 1..=s.q_max {
            for p in 0..=s.p_max {
                let m_lo = r.continuous_azimuthal_number(lo, q, p, pol, t)?.ceil().max(1.0) as u64;
                let m_hi = r.continuous_azimuthal_number(hi, q, p, pol, t)?.floor() as u64;
                for m in m_lo.saturating_sub(1)..=m_hi + 1 {
                    if m == 0 {
                        continue;
                    }
                    let idx = ModeIndex::new(m, q, p, pol)?;
                    let nu = r.mode_frequency(&idx, t)?;
                    if nu >= lo && nu < hi {
                        modes.push((nu, idx));
                    }
                }
            }
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut table = Table::new(&["nu_Hz", "lambda_nm", "offset_MHz", "pol", "q", "p", "m", "ell"]);
    for (nu, idx) in &modes {
        table.push(vec![
            (*nu).into(),
            (C / nu * 1e9).into(),
            ((nu - nu_p) / 1e6).into(),
            pol_label(idx.pol).into(),
            idx.q.into(),
            idx.p.into(),
            idx.m.into(),
            idx.ell().into(),
        ]);
    }
    let extra = json!({
        "T_raw_C": t,
        "T_cal_C": ctx.cal(t),
        "pump_nu_Hz": nu_p,
        "fundamental_m": m0,
        "fsr_Hz": fsr,
        "window_lo_Hz": lo,
        "window_hi_Hz": hi,
    });
    out.table("spectrum", &table, Some(extra))
}

const CHANNEL_COLUMNS: [&str; 13] = [
    "channel", "q_s", "q_i", "p_s", "p_i", "m_p", "m_s", "m_i", "T_raw_C", "T_cal_C", "lambda_s_nm", "lambda_i_nm", "residual_Hz",
];

fn channel_row(ch: &Channel, s: &PhaseMatchSolution) -> Vec<Cell> {
    vec![
        ch.label().into(),
        ch.q_s.into(),
        ch.q_i.into(),
        ch.p_s.into(),
        ch.p_i.into(),
        s.triplet.pump.m.into(),
        s.triplet.signal.m.into(),
        s.triplet.idler.m.into(),
        s.temp_raw_c.into(),
        s.temp_cal_c.into(),
        (s.lambda_s_m() * 1e9).into(),
        (s.lambda_i_m() * 1e9).into(),
        s.residual_hz.into(),
    ]
}

pub fn channels(ctx: &Context, out: &mut Emitter) -> Result<(), CliError> {
    let t = &ctx.cfg.temperature;
    let (lo, hi, step) = ctx.window(t.t_min_c, t.t_max_c, t.t_step_c)?;
    let w = ScanWindow {
        lambda_p_m: ctx.lambda_p(),
        t_min_c: lo,
        t_max_c: hi,
        t_step_c: step,
    };
    let chans = ctx.channels();
    let curves = scan_channels(&ctx.res, &chans, &w)?;
    let mut table = Table::new(&CHANNEL_COLUMNS);
    let mut summary = Vec::new();
    for curve in &curves {
        for s in &curve.samples {
            table.push(channel_row(&curve.channel, s));
        }
        let mut crossings = Vec::new();
        for line in &ctx.targets {
            for arm in [Arm::Signal, Arm::Idler] {
                for tc in crossing_temperatures(&ctx.res, &curve.channel, w.lambda_p_m, arm, line.wavelength_m(), lo, hi, step.max(0.05))? {
                    crossings.push(json!({
                        "name": line.name,
                        "wavelength_nm": line.wavelength_nm,
                        "arm": arm_label(arm),
                        "T_raw_C": tc,
                        "T_cal_C": ctx.cal(tc),
                    }));
                }
            }
        }
        summary.push(json!({
            "channel": curve.channel.label(),
            "solutions": curve.samples.len(),
            "pump_mode_changes": curve.pump_mode_changes(),
            "gaps_T_raw_C": curve.gaps_c,
            "crossings": crossings,
        }));
    }
    if table.rows.is_empty() {
        eprintln!("wgmopo: warning: no phase-matched triplet in the temperature window");
    }
    out.table("channels", &table, Some(json!({ "channels": summary })))
}

pub fn map(ctx: &Context, out: &mut Emitter) -> Result<(), CliError> {
    let m = &ctx.cfg.map;
    let v = &ctx.res.material.validity;
    let (lo, hi, step) = match (m.t_min_c, m.t_max_c) {
        (Some(a), Some(b)) => ctx.window(a, b, m.t_step_c)?,
        (None, None) => (v.temperature_min_c, v.temperature_max_c, m.t_step_c),
        _ => return Err(CliError::Config("map needs both T_min_C and T_max_C or neither".into())),
    };
    if hi < lo {
        return Err(CliError::Config("map temperature window is empty".into()));
    }
    let axis = match m.axis {
        MapKind::Radius => MapAxis::Radius {
            lambda_p_m: ctx.lambda_p(),
            radii_m: m.r_mm.iter().map(|r| r * 1e-3).collect(),
        },
        MapKind::PumpWavelength => MapAxis::PumpWavelength {
            radius_m: ctx.res.geometry.radius_m,
            lambdas_m: m.lambda_p_nm.iter().map(|l| l * 1e-9).collect(),
        },
    };
    let ch = ctx.channels()[0];
    let range = MapRange {
        t_min_c: lo,
        t_max_c: hi,
        t_step_c: step,
    };
    let entries = scan_radius_wavelength(&ctx.res, &axis, &ch, &ctx.targets, &range)?;
    let mut curves = Table::new(&["R_mm", "lambda_p_nm", "T_raw_C", "T_cal_C", "lambda_s_nm", "lambda_i_nm"]);
    let mut features = Table::new(&["R_mm", "lambda_p_nm", "feature", "name", "arm", "wavelength_nm", "T_raw_C", "T_cal_C"]);
    for e in &entries {
        let (r_mm, lp_nm) = (e.radius_m * 1e3, e.lambda_p_m * 1e9);
        for p in &e.curve {
            curves.push(vec![
                r_mm.into(),
                lp_nm.into(),
                p.temp_raw_c.into(),
                p.temp_cal_c.into(),
                (p.lambda_s_m * 1e9).into(),
                (p.lambda_i_m * 1e9).into(),
            ]);
        }
        for &(raw, cal) in &e.degeneracy_c {
            features.push(vec![
                r_mm.into(),
                lp_nm.into(),
                "degeneracy".into(),
                Cell::Empty,
                Cell::Empty,
                (2.0 * e.lambda_p_m * 1e9).into(),
                raw.into(),
                cal.into(),
            ]);
        }
        for c in &e.crossings {
            features.push(vec![
                r_mm.into(),
                lp_nm.into(),
                "crossing".into(),
                c.name.clone().into(),
                arm_label(c.arm).into(),
                c.wavelength_nm.into(),
                c.temp_raw_c.into(),
                c.temp_cal_c.into(),
            ]);
        }
    }
    out.table("map", &curves, Some(json!({ "channel": ch.label() })))?;
    out.table("map_features", &features, Some(json!({ "channel": ch.label() })))
}

/// Phase-matched triplet nearest to where the configured arm crosses the target.
struct Located {
    name: String,
    wavelength_nm: f64,
    arm: Arm,
    crossing_raw_c: f64,
    solution: PhaseMatchSolution,
}

fn locate(ctx: &Context) -> Result<Located, CliError> {
    let tr = &ctx.cfg.triplet;
    let (name, wavelength_nm) = match (&tr.line, tr.lambda_nm) {
        (_, Some(l)) => (format!("{l} nm"), l),
        (Some(n), None) => {
            let line = ctx
                .targets
                .iter()
                .find(|t| &t.name == n)
                .ok_or_else(|| CliError::Config(format!("unknown target line '{n}'")))?;
            (line.name.clone(), line.wavelength_nm)
        }
        (None, None) => return Err(CliError::Config("triplet needs a line or a wavelength".into())),
    };
    let t = &ctx.cfg.temperature;
    let (lo, hi, step) = ctx.window(t.t_min_c, t.t_max_c, t.t_step_c)?;
    let ch = ctx.channels()[0];
    let lp = ctx.lambda_p();
    let crossings = crossing_temperatures(&ctx.res, &ch, lp, tr.arm, wavelength_nm * 1e-9, lo, hi, step.max(0.05))?;
    let Some(&tc) = crossings.first() else {
        return Err(CliError::NotFound(format!(
            "{} arm of {} does not reach {wavelength_nm} nm in the temperature window",
            arm_label(tr.arm),
            ch.label()
        )));
    };
    let seed = seed_triplet(&ctx.res, lp, tc, &ch)?;
    let v = &ctx.res.material.validity;
    let sol = find_phasematch_temperature(
        &ctx.res,
        &seed,
        (tc - 4.0 * BRACKET_STEP_C).max(v.temperature_min_c),
        (tc + 4.0 * BRACKET_STEP_C).min(v.temperature_max_c),
    )?
    .ok_or_else(|| CliError::NotFound(format!("no phase-matching temperature for the triplet seeded at {tc:.3} °C")))?;
    let sol = nearest_by_coarse_steps(ctx, sol, tr.arm, C / (wavelength_nm * 1e-9))?;
    Ok(Located {
        name,
        wavelength_nm,
        arm: tr.arm,
        crossing_raw_c: tc,
        solution: sol,
    })
}

fn arm_frequency(s: &PhaseMatchSolution, arm: Arm) -> f64 {
    match arm {
        Arm::Signal => s.nu_s,
        Arm::Idler => s.nu_i,
    }
}

/// Follows coarse steps while they bring the arm closer to `nu_target`.
fn nearest_by_coarse_steps(ctx: &Context, mut sol: PhaseMatchSolution, arm: Arm, nu_target: f64) -> Result<PhaseMatchSolution, CliError> {
    let miss = |s: &PhaseMatchSolution| (arm_frequency(s, arm) - nu_target).abs();
    for _ in 0..16 {
        let best = step_tuning(&ctx.res, &sol, StepMethod::Coarse, ctx.cfg.triplet.step_window_c)?
            .into_iter()
            .filter_map(|n| n.solution)
            .min_by(|a, b| miss(a).total_cmp(&miss(b)));
        match best {
            Some(b) if miss(&b) < miss(&sol) => sol = b,
            _ => break,
        }
    }
    Ok(sol)
}

fn solution_json(s: &PhaseMatchSolution) -> Value {
    let t = &s.triplet;
    json!({
        "channel": t.channel().label(),
        "m_p": t.pump.m,
        "m_s": t.signal.m,
        "m_i": t.idler.m,
        "q_p": t.pump.q,
        "q_s": t.signal.q,
        "q_i": t.idler.q,
        "p_p": t.pump.p,
        "p_s": t.signal.p,
        "p_i": t.idler.p,
        "T_raw_C": s.temp_raw_c,
        "T_cal_C": s.temp_cal_c,
        "nu_p_Hz": s.nu_p,
        "nu_s_Hz": s.nu_s,
        "nu_i_Hz": s.nu_i,
        "lambda_p_nm": s.lambda_p_m() * 1e9,
        "lambda_s_nm": s.lambda_s_m() * 1e9,
        "lambda_i_nm": s.lambda_i_m() * 1e9,
        "residual_Hz": s.residual_hz,
    })
}

fn target_json(l: &Located) -> Value {
    json!({
        "name": l.name,
        "wavelength_nm": l.wavelength_nm,
        "arm": arm_label(l.arm),
        "crossing_T_raw_C": l.crossing_raw_c,
    })
}

pub fn triplet(ctx: &Context, out: &mut Emitter) -> Result<(), CliError> {
    let l = locate(ctx)?;
    let base = l.solution;
    let nu_arm = arm_frequency(&base, l.arm);
    let mut table = Table::new(&[
        "method", "direction", "m_p", "m_s", "m_i", "T_raw_C", "T_cal_C", "dT_mK", "dnu_s_MHz", "dnu_i_MHz", "lambda_s_nm", "lambda_i_nm",
    ]);
    for (method, label) in [
        (StepMethod::Coarse, "coarse"),
        (StepMethod::FineSignal, "fine-signal"),
        (StepMethod::FineIdler, "fine-idler"),
    ] {
        for n in step_tuning(&ctx.res, &base, method, ctx.cfg.triplet.step_window_c)? {
            let s = n.solution;
            table.push(vec![
                label.into(),
                n.direction.into(),
                n.triplet.pump.m.into(),
                n.triplet.signal.m.into(),
                n.triplet.idler.m.into(),
                s.map(|s| s.temp_raw_c).into(),
                s.map(|s| s.temp_cal_c).into(),
                n.dt_c.map(|d| d * 1e3).into(),
                n.dnu_s.map(|d| d / 1e6).into(),
                n.dnu_i.map(|d| d / 1e6).into(),
                s.map(|s| s.lambda_s_m() * 1e9).into(),
                s.map(|s| s.lambda_i_m() * 1e9).into(),
            ]);
        }
    }
    let extra = json!({
        "target": target_json(&l),
        "solution": solution_json(&base),
        "target_detuning_Hz": nu_arm - C / (l.wavelength_nm * 1e-9),
    });
    out.table("triplet", &table, Some(extra))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

pub fn opo(ctx: &Context, out: &mut Emitter) -> Result<(), CliError> {
    let o = &ctx.cfg.opo;
    let (gs, gi) = (o.gamma_s_mhz * 1e6, o.gamma_i_mhz * 1e6);
    let (nu_s, nu_i) = (C / (o.lambda_s_nm * 1e-9), C / (o.lambda_i_nm * 1e-9));
    let nu_p = nu_s + nu_i;
    let p0 = o.p0_uw / 1e6;
    let mut table = Table::new(&[
        "delta_p",
        "mismatch_MHz",
        "mismatch",
        "P_pump_W",
        "P_th_W",
        "pair_rate_Hz",
        "near_threshold",
        "R_s_Hz",
        "R_i_Hz",
        "R_si_Hz",
        "P_s_W",
        "P_i_W",
        "oscillating",
    ]);
    for &dp in &o.delta_p {
        for &mm in &o.mismatch_mhz {
            let d = raw_mismatch_to_normalized(mm * 1e6, gs, gi)?;
            let p_th = threshold(p0, dp, d)?;
            for p in linspace(o.p_min_uw / 1e6, o.p_max_uw / 1e6, o.p_points) {
                let pr = pair_rate_internal(gs, gi, p, p_th)?;
                let (rs, ri, rsi) = external_rates(pr.rate, o.kappa_s, o.kappa_i)?;
                let ps = output_power(p, p0, dp, d, o.kappa_p, o.kappa_s, nu_s, nu_p)?;
                let pi = output_power(p, p0, dp, d, o.kappa_p, o.kappa_i, nu_i, nu_p)?;
                table.push(vec![
                    dp.into(),
                    mm.into(),
                    d.into(),
                    p.into(),
                    p_th.into(),
                    pr.rate.into(),
                    pr.near_threshold.into(),
                    rs.into(),
                    ri.into(),
                    rsi.into(),
                    ps.power.into(),
                    pi.power.into(),
                    (!ps.below_threshold).into(),
                ]);
            }
        }
    }
    out.table("opo", &table, None)
}

fn mechanism(ctx: &Context, base: &PhaseMatchSolution) -> Result<ShiftMechanism, CliError> {
    let t = &ctx.cfg.tune;
    Ok(match t.mechanism.as_str() {
        "substrate" => ShiftMechanism::substrate_default(),
        "electrooptic" => electrooptic_mechanism(&ctx.res, base, t.fringe_factor, t.max_voltage_v)?,
        "none" => ShiftMechanism::null(),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            ShiftMechanism::from_toml_str(&text)?
        }
    })
}

pub fn tune(ctx: &Context, out: &mut Emitter) -> Result<(), CliError> {
    let l = locate(ctx)?;
    let base = l.solution;
    let mech = mechanism(ctx, &base)?;
    let (at_min, at_max) = reachable_offsets(&ctx.res, &base, &mech)?;
    let mut table = Table::new(&[
        "target_MHz",
        "status",
        "control",
        "T_raw_C",
        "T_cal_C",
        "signal_offset_MHz",
        "nu_p_Hz",
        "nu_s_Hz",
        "nu_i_Hz",
        "residual_Hz",
        "iterations",
        "achievable_MHz",
    ]);
    let mut first_error = None;
    for &target in &ctx.cfg.tune.target_mhz {
        match retune(&ctx.res, &base, &mech, target * 1e6) {
            Ok(r) => {
                let s = &r.solution;
                table.push(vec![
                    target.into(),
                    "ok".into(),
                    r.control.into(),
                    r.temp_raw_c.into(),
                    r.temp_cal_c.into(),
                    (r.signal_offset_hz / 1e6).into(),
                    s.nu_p.into(),
                    s.nu_s.into(),
                    s.nu_i.into(),
                    s.residual_hz.into(),
                    r.iterations.into(),
                    Cell::Empty,
                ]);
            }
            Err(e) => {
                let (status, achievable) = match &e {
                    wgmopo_core::Error::OutOfRange { achievable, .. } => ("out_of_range", Some(achievable / 1e6)),
                    _ => ("failed", None),
                };
                let mut row = vec![target.into(), status.into()];
                row.extend(std::iter::repeat_n(Cell::Empty, 9));
                row.push(achievable.into());
                table.push(row);
                first_error.get_or_insert(CliError::from(e));
            }
        }
    }
    let extra = json!({
        "target": target_json(&l),
        "base": solution_json(&base),
        "mechanism": {
            "kind": mech.kind,
            "unit": mech.unit,
            "rate_pump_Hz": mech.rate_pump_hz,
            "rate_signal_Hz": mech.rate_signal_hz,
            "rate_idler_Hz": mech.rate_idler_hz,
            "control_min": mech.control_min,
            "control_max": mech.control_max,
        },
        "reachable_offset_MHz": [at_min.min(at_max) / 1e6, at_min.max(at_max) / 1e6],
    });
    out.table("tune", &table, Some(extra))?;
    first_error.map_or(Ok(()), Err)
}

/// Poisson histogram drawn from the configured model with the run seed.
pub fn simulate_histogram(ctx: &Context) -> Result<Histogram, CliError> {
    let c = &ctx.cfg.corrfit;
    let ns = 1e-9;
    let (t1, t2) = (c.t1_ns * ns, c.t2_ns.map(|t| t * ns));
    let t2 = if c.family == Family::Pair { None } else { t2 };
    let unit = CorrelationModel {
        t1,
        t2,
        amplitude: 1.0,
        background: 0.0,
        t0: 0.0,
    };
    let span = c.t_max_ns - c.t_min_ns;
    let peak = (0..=10_000)
        .map(|k| unit.density((c.t_min_ns + span * k as f64 / 10_000.0) * ns))
        .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))?;
    let model = CorrelationModel {
        amplitude: c.peak_counts / (peak * c.bin_ns * ns),
        background: c.background,
        ..unit
    };
    let n = (span / c.bin_ns).round() as usize;
    let centers: Vec<f64> = (0..n).map(|k| (c.t_min_ns + (k as f64 + 0.5) * c.bin_ns) * ns).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut counts = Vec::with_capacity(n);
    for &x in &centers {
        let mu = model.expected_counts(x, c.bin_ns * ns)?;
        counts.push(if mu > 0.0 {
            Poisson::new(mu)
                .map_err(|e| CliError::Numerical(e.to_string()))?
                .sample(&mut rng) as u64
        } else {
            0
        });
    }
    Ok(Histogram::new(centers, counts)?)
}

pub fn corrfit(ctx: &Context, hist: &Histogram, out: &mut Emitter) -> Result<(), CliError> {
    let family = ctx.cfg.corrfit.family;
    let fit = fit_histogram(hist, family, None)?;
    let m = &fit.model;
    let ns = 1e-9;
    let mut table = Table::new(&["time_ns", "counts", "model_counts", "residual"]);
    for (&x, &c) in hist.bin_centers.iter().zip(&hist.counts) {
        let mu = if fit.flat { f64::NAN } else { m.expected_counts(x, hist.bin_width)? };
        table.push(vec![(x / ns).into(), c.into(), mu.into(), (c as f64 - mu).into()]);
    }
    let se = |name: &str, scale: f64| fit.std_error(name).map(|v| v * scale);
    let gamma = |t: f64| bandwidth_from_time(t).ok().map(|g| g / 1e6);
    let extra = json!({
        "family": ctx.cfg.family_name(),
        "t1_ns": m.t1 / ns,
        "t2_ns": m.t2.map(|t| t / ns),
        "gamma_s_MHz": gamma(m.t1),
        "gamma_2_MHz": m.t2.and_then(gamma),
        "amplitude": m.amplitude,
        "background": m.background,
        "t0_ns": m.t0 / ns,
        "errors": {
            "t1_ns": se("t1", 1.0 / ns),
            "t2_ns": se("t2", 1.0 / ns),
            "amplitude": se("amplitude", 1.0),
            "background": se("background", 1.0),
            "t0_ns": se("t0", 1.0 / ns),
        },
        "chi2": fit.chi2,
        "rss": fit.rss,
        "n_bins": fit.n_bins,
        "iterations": fit.iterations,
        "flat": fit.flat,
    });
    out.table("corrfit", &table, Some(extra))
}
