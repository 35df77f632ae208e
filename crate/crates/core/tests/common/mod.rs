//! Independent re-implementation of the index model and the WGM dispersion
//! relation, read straight from the bundled asset text.
#![allow(dead_code)]

use std::f64::consts::PI;

pub const C: f64 = 299_792_458.0;
pub const ASSET: &str = include_str!("../../assets/mgo_lithium_niobate.toml");

pub struct AxisCoeffs {
    b: Vec<f64>,
    c: Vec<f64>,
    offset: f64,
    base_t: f64,
    scale: f64,
    t0: f64,
    t1: f64,
    a: f64,
    cc: f64,
    b1: f64,
    b2: f64,
    b3: f64,
}

pub struct Oracle {
    pub ord: AxisCoeffs,
    pub ext: AxisCoeffs,
    alpha: f64,
    beta: f64,
    t_ref: f64,
}

fn num(v: &toml::Value, k: &str) -> f64 {
    let x = &v[k];
    x.as_float().or_else(|| x.as_integer().map(|i| i as f64)).unwrap()
}

fn list(v: &toml::Value, k: &str) -> Vec<f64> {
    v[k].as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)).unwrap())
        .collect()
}

fn axis(v: &toml::Value) -> AxisCoeffs {
    AxisCoeffs {
        b: list(v, "B"),
        c: list(v, "C_um2"),
        offset: num(v, "offset_n2"),
        base_t: num(v, "base_temperature_C"),
        scale: num(v, "thermo_scale"),
        t0: num(v, "thermo_t0_C"),
        t1: num(v, "thermo_t1_C"),
        a: num(v, "thermo_a"),
        cc: num(v, "thermo_c_um"),
        b1: num(v, "thermo_b1"),
        b2: num(v, "thermo_b2"),
        b3: num(v, "thermo_b3"),
    }
}

impl AxisCoeffs {
    fn g(&self, l: f64, t: f64) -> f64 {
        let f = (t - self.t0) * (t + self.t0 + self.t1);
        (self.a + self.b1 * f) / (l * l - (self.cc + self.b2 * f).powi(2)) + self.b3 * f
    }

    pub fn n(&self, lambda_m: f64, t: f64) -> f64 {
        let l = lambda_m * 1e6;
        let mut n2 = 1.0 + self.offset;
        for k in 0..self.b.len() {
            n2 += self.b[k] * l * l / (l * l - self.c[k]);
        }
        n2 += self.scale * (self.g(l, t) - self.g(l, self.base_t));
        n2.sqrt()
    }
}

impl Oracle {
    pub fn new() -> Self {
        let v: toml::Value = toml::from_str(ASSET).unwrap();
        let s = &v["sellmeier"];
        let e = &v["expansion"];
        Self {
            ord: axis(&s["ordinary"]),
            ext: axis(&s["extraordinary"]),
            alpha: num(e, "linear_per_K"),
            beta: num(e, "quadratic_per_K2"),
            t_ref: num(e, "reference_C"),
        }
    }

    pub fn radius(&self, r_ref: f64, t_ref_geom: f64, t: f64) -> f64 {
        let strain = |x: f64| self.alpha * (x - self.t_ref) + self.beta * (x - self.t_ref).powi(2);
        r_ref * (1.0 + strain(t)) / (1.0 + strain(t_ref_geom))
    }

    /// Right-hand side of the dispersion relation evaluated at frequency `nu`
    /// (the index is taken at λ = c/ν). `te` selects TE (extraordinary, χ = 1).
    #[allow(clippy::too_many_arguments)]
    pub fn rhs(&self, nu: f64, m: f64, q: u32, p: u32, te: bool, r_ref: f64, rho_ref: f64, t: f64) -> f64 {
        let r = self.radius(r_ref, 25.0, t);
        let rho = r * rho_ref / r_ref;
        let n = if te { self.ext.n(C / nu, t) } else { self.ord.n(C / nu, t) };
        let chi = if te { 1.0 } else { 1.0 / (n * n) };
        let ell = m + p as f64;
        let alpha_q = (1.5 * PI * (q as f64 - 0.25)).powf(2.0 / 3.0);
        let ratio = (r / rho).sqrt();
        let terms = ell + alpha_q * (ell / 2.0).cbrt() + p as f64 * (ratio - 1.0) - chi * n / (n * n - 1.0).sqrt() + 0.5 * ratio;
        C / (2.0 * PI * n * r) * terms
    }

    /// Self-consistent solution by plain iteration to machine precision.
    #[allow(clippy::too_many_arguments)]
    pub fn frequency(&self, m: f64, q: u32, p: u32, te: bool, r: f64, rho: f64, t: f64) -> f64 {
        let mut nu = C * m / (2.0 * PI * r * 2.2);
        for _ in 0..200 {
            let next = self.rhs(nu.clamp(C / 2.6e-6, C / 0.4e-6), m, q, p, te, r, rho, t);
            if (next - nu).abs() < 1e-3 {
                return next;
            }
            nu = next;
        }
        nu
    }
}
