//! Signal–idler correlation densities and least-squares fits of coincidence histograms.
//!
//! The pair density is a two-sided exponential with the cavity ring-down time t1.
//! Heralding through an atomic transition of lifetime t2 convolves it with a
//! one-sided exponential.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative |t1 − t2| / t1 below which the coincident-time limit is used.
pub const EQUAL_TIMES_REL: f64 = 1e-6;
/// Minimum number of nonzero bins for a fit.
pub const MIN_NONZERO_BINS: usize = 20;

fn check_time(name: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(name, t, "> 0"));
    }
    Ok(())
}

/// f(t) = exp(−|t|/t1) / (2 t1)
pub fn pair_density(t: f64, t1: f64) -> Result<f64> {
    check_time("t1", t1)?;
    Ok((-t.abs() / t1).exp() / (2.0 * t1))
}

/// (e^{−x/t1} − e^{−x/t2}) / (t1 − t2) for x ≥ 0, without cancellation.
fn exp_difference(x: f64, t1: f64, t2: f64) -> f64 {
    if ((t1 - t2) / t1).abs() < EQUAL_TIMES_REL {
        let t = 0.5 * (t1 + t2);
        return x * (-x / t).exp() / (t * t);
    }
    let (tl, ts) = if t1 > t2 { (t1, t2) } else { (t2, t1) };
    // e^{−x/tl} (1 − e^{−x(1/ts − 1/tl)}) / (tl − ts)
    -(-x / tl).exp() * (-x * (tl - ts) / (tl * ts)).exp_m1() / (tl - ts)
}

/// Density of the idler delay behind a heralding event through a decay of lifetime t2.
///
/// Δt < 0: e^{Δt/t1} / (2(t1+t2));
/// Δt ≥ 0: [e^{−Δt/t2}/(t1+t2) + (e^{−Δt/t1} − e^{−Δt/t2})/(t1−t2)] / 2.
pub fn heralded_density(dt: f64, t1: f64, t2: f64) -> Result<f64> {
    check_time("t1", t1)?;
    check_time("t2", t2)?;
    let s = t1 + t2;
    if dt < 0.0 {
        return Ok(0.5 * (dt / t1).exp() / s);
    }
    Ok(0.5 * ((-dt / t2).exp() / s + exp_difference(dt, t1, t2)))
}

/// γ = 1 / (2π t)
pub fn bandwidth_from_time(t: f64) -> Result<f64> {
    check_time("t", t)?;
    Ok(1.0 / (2.0 * PI * t))
}

/// t = 1 / (2π γ)
pub fn time_from_bandwidth(gamma: f64) -> Result<f64> {
    check_time("gamma", gamma)?;
    Ok(1.0 / (2.0 * PI * gamma))
}

/// Which density a histogram is fitted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pair,
    Heralded,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair" => Ok(Family::Pair),
            "heralded" => Ok(Family::Heralded),
            other => Err(Error::Asset(format!("unknown fit family '{other}'"))),
        }
    }
}

/// Correlation shape plus the histogram nuisance parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    pub t1: f64,
    /// Absent for the pair family.
    pub t2: Option<f64>,
    /// Total number of correlated events.
    pub amplitude: f64,
    /// Accidental counts per bin.
    pub background: f64,
    /// Time origin of the histogram axis.
    pub t0: f64,
}

impl CorrelationModel {
    pub fn family(&self) -> Family {
        if self.t2.is_some() {
            Family::Heralded
        } else {
            Family::Pair
        }
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        match self.t2 {
            None => pair_density(t - self.t0, self.t1),
            Some(t2) => heralded_density(t - self.t0, self.t1, t2),
        }
    }

    /// Probability mass of the correlation density inside [lo, hi].
    pub fn bin_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        check_time("t1", self.t1)?;
        let (a, b) = (lo - self.t0, hi - self.t0);
        Ok(match self.t2 {
            None => mass(a, b, |x| 0.5 * (x / self.t1).exp(), |x| 0.5 * (-x / self.t1).exp()),
            Some(t2) => {
                check_time("t2", t2)?;
                let (t1, s) = (self.t1, self.t1 + t2);
                mass(
                    a,
                    b,
                    |x| 0.5 * t1 / s * (x / t1).exp(),
                    |x| 0.5 * (t2 / s * (-x / t2).exp() + (-x / t1).exp() + t2 * exp_difference(x, t1, t2)),
                )
            }
        })
    }

    /// Expected counts in a bin of the given center and width.
    pub fn expected_counts(&self, center: f64, width: f64) -> Result<f64> {
        Ok(self.amplitude * self.bin_mass(center - 0.5 * width, center + 0.5 * width)? + self.background)
    }
}

/// Mass in [a, b] from the left-tail CDF (x < 0) and right-tail survival (x ≥ 0).
fn mass(a: f64, b: f64, cdf_neg: impl Fn(f64) -> f64, surv_pos: impl Fn(f64) -> f64) -> f64 {
    if b <= 0.0 {
        cdf_neg(b) - cdf_neg(a)
    } else if a >= 0.0 {
        surv_pos(a) - surv_pos(b)
    } else {
        (cdf_neg(0.0) - cdf_neg(a)) + (surv_pos(0.0) - surv_pos(b))
    }
}

/// Uniformly binned coincidence counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub bin_centers: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bin_centers: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if bin_centers.len() != counts.len() {
            return Err(Error::Asset(format!(
                "{} bin centers but {} counts",
                bin_centers.len(),
                counts.len()
            )));
        }
        if bin_centers.len() < 2 {
            return Err(domain("bins", bin_centers.len() as f64, ">= 2"));
        }
        let w = bin_centers[1] - bin_centers[0];
        if !(w > 0.0) {
            return Err(domain("bin_width", w, "> 0"));
        }
        for (k, pair) in bin_centers.windows(2).enumerate() {
            if ((pair[1] - pair[0]) - w).abs() > 1e-6 * w {
                return Err(Error::Asset(format!("non-uniform bin spacing at bin {}", k + 1)));
            }
        }
        Ok(Self {
            bin_width: w,
            bin_centers,
            counts,
        })
    }

    /// Reads `time_ns,counts` CSV or two whitespace-separated columns. Lines starting
    /// with `#` and a non-numeric header line are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut centers = Vec::new();
        let mut counts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() < 2 {
                return Err(Error::Asset(format!("line {}: expected two columns", lineno + 1)));
            }
            let (t, c) = match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(t), Ok(c)) => (t, c),
                _ if centers.is_empty() => continue,
                _ => return Err(Error::Asset(format!("line {}: not numeric", lineno + 1))),
            };
            if !(c >= 0.0) || c.fract() != 0.0 {
                return Err(Error::Asset(format!("line {}: counts must be non-negative integers", lineno + 1)));
            }
            centers.push(t * 1e-9);
            counts.push(c as u64);
        }
        Self::new(centers, counts)
    }

    pub fn nonzero_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Fit outcome with standard errors in natural units (s, counts, counts/bin, s).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: CorrelationModel,
    /// Parameter names in covariance order.
    pub parameters: Vec<&'static str>,
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    /// Σ (counts − expected)².
    pub rss: f64,
    /// Σ (counts − expected)² / max(expected, 1).
    pub chi2: f64,
    pub n_bins: usize,
    pub iterations: usize,
    /// All counts equal; no shape information.
    pub flat: bool,
}

impl FitResult {
    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .position(|p| *p == name)
            .map(|k| self.std_errors[k])
    }
}

// Fit parameters: [ln t1, (ln t2), amplitude, background, t0].
struct Problem<'a> {
    hist: &'a Histogram,
    family: Family,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        match self.family {
            Family::Pair => 4,
            Family::Heralded => 5,
        }
    }

    fn model(&self, p: &DVector<f64>) -> CorrelationModel {
        match self.family {
            Family::Pair => CorrelationModel {
                t1: p[0].exp(),
                t2: None,
                amplitude: p[1],
                background: p[2],
                t0: p[3],
            },
            Family::Heralded => CorrelationModel {
                t1: p[0].exp(),
                t2: Some(p[1].exp()),
                amplitude: p[2],
                background: p[3],
                t0: p[4],
            },
        }
    }

    fn params(&self, m: &CorrelationModel) -> DVector<f64> {
        match self.family {
            Family::Pair => DVector::from_vec(vec![m.t1.ln(), m.amplitude, m.background, m.t0]),
            Family::Heralded => DVector::from_vec(vec![
                m.t1.ln(),
                m.t2.unwrap_or(m.t1).ln(),
                m.amplitude,
                m.background,
                m.t0,
            ]),
        }
    }

    fn expected(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.model(p);
        let w = self.hist.bin_width;
        let mut out = DVector::zeros(self.hist.counts.len());
        for (k, &c) in self.hist.bin_centers.iter().enumerate() {
            out[k] = m.expected_counts(c, w)?;
        }
        Ok(out)
    }

    fn residuals(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let mu = self.expected(p)?;
        Ok(DVector::from_iterator(
            mu.len(),
            self.hist.counts.iter().zip(mu.iter()).map(|(&y, &m)| y as f64 - m),
        ))
    }

    fn steps(&self, p: &DVector<f64>) -> DVector<f64> {
        let w = self.hist.bin_width;
        let n = self.hist.total().max(1) as f64;
        DVector::from_iterator(
            p.len(),
            (0..p.len()).map(|j| {
                let kind = self.kind(j);
                match kind {
                    Kind::LogTime => 1e-6,
                    Kind::Amplitude => 1e-6 * p[j].abs().max(n * 1e-3),
                    Kind::Background => 1e-6 * p[j].abs().max(1.0),
                    Kind::Origin => 1e-4 * w,
                }
            }),
        )
    }

    fn kind(&self, j: usize) -> Kind {
        match (self.family, j) {
            (Family::Pair, 0) | (Family::Heralded, 0) | (Family::Heralded, 1) => Kind::LogTime,
            (Family::Pair, 1) | (Family::Heralded, 2) => Kind::Amplitude,
            (Family::Pair, 2) | (Family::Heralded, 3) => Kind::Background,
            _ => Kind::Origin,
        }
    }

    /// Jacobian of the expected counts, central differences.
    fn jacobian(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let h = self.steps(p);
        let n = self.hist.counts.len();
        let mut jac = DMatrix::zeros(n, p.len());
        for j in 0..p.len() {
            let mut a = p.clone();
            let mut b = p.clone();
            a[j] += h[j];
            b[j] -= h[j];
            let col = (self.expected(&a)? - self.expected(&b)?) / (2.0 * h[j]);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }
}

#[derive(Clone, Copy)]
enum Kind {
    LogTime,
    Amplitude,
    Background,
    Origin,
}

struct LmOutcome {
    p: DVector<f64>,
    rss: f64,
    iterations: usize,
    converged: bool,
}

const LM_MAX_ITER: usize = 400;

fn levenberg_marquardt(prob: &Problem, start: DVector<f64>) -> Result<LmOutcome> {
    let mut p = start;
    let mut r = prob.residuals(&p)?;
    let mut rss = r.norm_squared();
    let mut lambda = 1e-3;
    for it in 1..=LM_MAX_ITER {
        let jac = prob.jacobian(&p)?;
        let jtj = jac.transpose() * &jac;
        // residual = y − μ, so the Gauss–Newton step is +(JᵀJ)⁻¹Jᵀr.
        let g = jac.transpose() * &r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &p + &step;
            let trial_r = match prob.residuals(&trial) {
                Ok(v) => v,
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial_rss = trial_r.norm_squared();
            if trial_rss.is_finite() && trial_rss <= rss {
                let rel = (rss - trial_rss) / rss.max(1e-300);
                let small_step = step
                    .iter()
                    .zip(prob.steps(&p).iter())
                    .all(|(s, h)| s.abs() < 1e-2 * h);
                p = trial;
                r = trial_r;
                rss = trial_rss;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if rel < 1e-12 || small_step {
                    return Ok(LmOutcome {
                        p,
                        rss,
                        iterations: it,
                        converged: true,
                    });
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // No downhill step at any damping: a (local) minimum.
            return Ok(LmOutcome {
                p,
                rss,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(LmOutcome {
        p,
        rss,
        iterations: LM_MAX_ITER,
        converged: false,
    })
}

fn initial_guesses(hist: &Histogram, family: Family) -> Vec<CorrelationModel> {
    let n = hist.counts.len();
    let y: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    let edge = (n / 20).max(3).min(n / 2);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let background = mean(&y[..edge]).min(mean(&y[n - edge..]));
    let (k_peak, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty histogram");
    let height = (peak - background).max(1.0);
    let amplitude = y.iter().map(|v| (v - background).max(0.0)).sum::<f64>().max(1.0);
    let w = hist.bin_width;
    let half = background + 0.5 * height;
    let left = (0..k_peak).rev().find(|&k| y[k] < half).unwrap_or(0);
    let right = (k_peak..n).find(|&k| y[k] < half).unwrap_or(n - 1);
    let d_left = ((k_peak - left) as f64 * w).max(w);
    let d_right = ((right - k_peak) as f64 * w).max(w);
    let t_peak = hist.bin_centers[k_peak];

    match family {
        Family::Pair => {
            let t1_area = amplitude * w / (2.0 * height);
            let t1_width = 0.5 * (d_left + d_right) / std::f64::consts::LN_2;
            let mut out = Vec::new();
            for t1 in [t1_area, t1_width, 0.5 * t1_width, 2.0 * t1_width] {
                for t0 in [t_peak, t_peak - 0.5 * w, t_peak + 0.5 * w] {
                    out.push(CorrelationModel {
                        t1: t1.max(0.1 * w),
                        t2: None,
                        amplitude,
                        background,
                        t0,
                    });
                }
            }
            out
        }
        Family::Heralded => {
            let a = (d_left / std::f64::consts::LN_2).max(0.1 * w);
            let b = (d_right / std::f64::consts::LN_2).max(0.1 * w);
            let mut out = Vec::new();
            for (t1, t2) in [(a, b), (b, a), (a, 2.0 * b), (0.5 * a, b)] {
                for t0 in [t_peak - a, t_peak - 0.5 * a, t_peak] {
                    out.push(CorrelationModel {
                        t1,
                        t2: Some(t2),
                        amplitude,
                        background,
                        t0,
                    });
                }
            }
            out
        }
    }
}

/// Unweighted least-squares fit of the expected bin counts
/// amplitude·∫bin density + background over (t1[, t2], amplitude, background, t0).
///
/// With `init` the fit starts there; otherwise several starts derived from the
/// histogram shape are tried and the lowest residual kept.
pub fn fit_histogram(hist: &Histogram, family: Family, init: Option<CorrelationModel>) -> Result<FitResult> {
    let nonzero = hist.nonzero_bins();
    if nonzero < MIN_NONZERO_BINS {
        return Err(domain("nonzero bins", nonzero as f64, format!(">= {MIN_NONZERO_BINS}")));
    }
    let prob = Problem { hist, family };
    let k = prob.dim();
    let n = hist.counts.len();

    let first = hist.counts[0];
    if hist.counts.iter().all(|&c| c == first) {
        let model = CorrelationModel {
            t1: f64::NAN,
            t2: (family == Family::Heralded).then_some(f64::NAN),
            amplitude: 0.0,
            background: first as f64,
            t0: f64::NAN,
        };
        return Ok(FitResult {
            model,
            parameters: parameter_names(family),
            covariance: vec![vec![f64::NAN; k]; k],
            std_errors: vec![f64::NAN; k],
            rss: 0.0,
            chi2: 0.0,
            n_bins: n,
            iterations: 0,
            flat: true,
        });
    }

    let starts = match init {
        Some(m) => {
            if m.family() != family {
                return Err(Error::Asset("initial model does not match the fit family".into()));
            }
            check_time("t1", m.t1)?;
            if let Some(t2) = m.t2 {
                check_time("t2", t2)?;
            }
            let mut v = vec![m];
            if let Some(t2) = m.t2 {
                v.push(CorrelationModel { t1: t2, t2: Some(m.t1), ..m });
            }
            v
        }
        None => initial_guesses(hist, family),
    };

    let mut best: Option<LmOutcome> = None;
    for s in starts {
        let out = levenberg_marquardt(&prob, prob.params(&s))?;
        if best.as_ref().is_none_or(|b| out.rss < b.rss) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    if !best.converged {
        return Err(Error::FitNoConvergence {
            iterations: best.iterations,
            rss: best.rss,
            params: best.p.iter().copied().collect(),
        });
    }

    let model = prob.model(&best.p);
    let jac = prob.jacobian(&best.p)?;
    let dof = (n as f64 - k as f64).max(1.0);
    let s2 = best.rss / dof;
    let inv = (jac.transpose() * &jac)
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(k, k, f64::NAN));
    // Log-time parameters back to seconds.
    let mut scale = DVector::from_element(k, 1.0);
    scale[0] = model.t1;
    if let Some(t2) = model.t2 {
        scale[1] = t2;
    }
    let cov = DMatrix::from_fn(k, k, |i, j| s2 * inv[(i, j)] * scale[i] * scale[j]);
    let mu = prob.expected(&best.p)?;
    let chi2 = hist
        .counts
        .iter()
        .zip(mu.iter())
        .map(|(&y, &m)| (y as f64 - m).powi(2) / m.max(1.0))
        .sum();
    Ok(FitResult {
        model,
        parameters: parameter_names(family),
        covariance: (0..k).map(|i| (0..k).map(|j| cov[(i, j)]).collect()).collect(),
        std_errors: (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect(),
        rss: best.rss,
        chi2,
        n_bins: n,
        iterations: best.iterations,
        flat: false,
    })
}

fn parameter_names(family: Family) -> Vec<&'static str> {
    match family {
        Family::Pair => vec!["t1", "amplitude", "background", "t0"],
        Family::Heralded => vec!["t1", "t2", "amplitude", "background", "t0"],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn pair_density_basics() {
        let t1 = 24e-9;
        assert_eq!(pair_density(0.0, t1).unwrap(), 1.0 / (2.0 * t1));
        assert_eq!(pair_density(5e-9, t1).unwrap(), pair_density(-5e-9, t1).unwrap());
        let i = simpson(|t| pair_density(t, t1).unwrap(), -20.0 * t1, 0.0, 20000)
            + simpson(|t| pair_density(t, t1).unwrap(), 0.0, 20.0 * t1, 20000);
        assert!((i - 1.0).abs() < 1e-6, "{i}");
        assert!(pair_density(0.0, 0.0).is_err());
    }

    #[test]
    fn heralded_continuity_and_limit() {
        let (t1, t2) = (7.4e-9, 37e-9);
        let left = 0.5 * (0.0f64 / t1).exp() / (t1 + t2);
        let at0 = heralded_density(0.0, t1, t2).unwrap();
        assert!((at0 - left).abs() <= 1e-12 * left);
        assert!((at0 - 1.0 / (2.0 * (t1 + t2))).abs() <= 1e-12 * at0);
        // The coincident-time branch joins the general one smoothly.
        let t = 10e-9;
        for x in [0.0, 1e-9, 10e-9, 80e-9] {
            let exact = heralded_density(x, t, t).unwrap();
            let near = heralded_density(x, t, t * (1.0 + 3e-6)).unwrap();
            assert!((exact - near).abs() < 1e-5 * exact.max(1e-3 / t), "{x}");
        }
        assert!(heralded_density(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn bandwidth_conversions() {
        assert!((bandwidth_from_time(7.4e-9).unwrap() / 1e6 - 21.5).abs() < 0.1);
        assert!((bandwidth_from_time(37e-9).unwrap() / 1e6 - 4.3).abs() < 0.1);
        let t = time_from_bandwidth(bandwidth_from_time(3e-9).unwrap()).unwrap();
        assert!((t - 3e-9).abs() < 1e-21);
    }

    #[test]
    fn bin_mass_sums_to_one() {
        for t2 in [None, Some(37e-9), Some(7.4e-9)] {
            let m = CorrelationModel {
                t1: 7.4e-9,
                t2,
                amplitude: 1.0,
                background: 0.0,
                t0: 3e-9,
            };
            let total: f64 = (-2000..2000)
                .map(|k| m.bin_mass(k as f64 * 1e-9, (k + 1) as f64 * 1e-9).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
            let direct = m.bin_mass(-5e-9, 20e-9).unwrap();
            let quad = simpson(|t| m.density(t).unwrap(), -5e-9, 3e-9, 2000)
                + simpson(|t| m.density(t).unwrap(), 3e-9, 20e-9, 2000);
            assert!((direct - quad).abs() < 1e-9);
        }
    }

    #[test]
    fn histogram_parsing() {
        let h = Histogram::parse("# run\ntime_ns,counts\n-1,3\n0,5\n1,2\n").unwrap();
        assert_eq!(h.counts, vec![3, 5, 2]);
        assert!((h.bin_width - 1e-9).abs() < 1e-21);
        let h = Histogram::parse("0 1\n2 2\n4 3\n").unwrap();
        assert!((h.bin_width - 2e-9).abs() < 1e-21);
        assert!(Histogram::parse("0,1\n1,1.5\n").is_err());
        assert!(Histogram::parse("0,1\n1,2\n3,3\n").is_err());
        assert!(Histogram::parse("0,1\n").is_err());
    }

    #[test]
    fn noiseless_pair_fit_recovers_parameters() {
        let truth = CorrelationModel {
            t1: 24e-9,
            t2: None,
            amplitude: 2e5,
            background: 12.0,
            t0: 0.3e-9,
        };
        let centers: Vec<f64> = (-150..150).map(|k| k as f64 * 1e-9).collect();
        let counts = centers
            .iter()
            .map(|&c| truth.expected_counts(c, 1e-9).unwrap().round() as u64)
            .collect();
        let h = Histogram::new(centers, counts).unwrap();
        let fit = fit_histogram(&h, Family::Pair, None).unwrap();
        assert!((fit.model.t1 / truth.t1 - 1.0).abs() < 1e-3, "{:?}", fit.model);
        assert!((fit.model.t0 - truth.t0).abs() < 0.05e-9);
        assert!(!fit.flat);
    }

    #[test]
    fn flat_and_sparse_inputs() {
        let centers: Vec<f64> = (0..50).map(|k| k as f64 * 1e-9).collect();
        let flat = Histogram::new(centers.clone(), vec![7; 50]).unwrap();
        assert!(fit_histogram(&flat, Family::Heralded, None).unwrap().flat);
        let mut sparse = vec![0; 50];
        sparse[10] = 100;
        let sparse = Histogram::new(centers, sparse).unwrap();
        assert!(fit_histogram(&sparse, Family::Pair, None).is_err());
    }
}
