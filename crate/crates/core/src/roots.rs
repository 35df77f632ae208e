use crate::error::{Error, Result};

/// Root of `f` inside a sign-changing bracket [a, b].
///
/// Regula falsi steps, replaced by bisection when the step lands too close to an
/// endpoint or every fourth iteration. Stops when |f| < `ftol` or the bracket is
/// narrower than `xtol`.
pub(crate) fn bracketed<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, ftol: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa.abs() < ftol {
        return Ok((a, fa));
    }
    if fb.abs() < ftol {
        return Ok((b, fb));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Stagnation { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    for it in 0..300 {
        let w = b - a;
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a + 0.02 * w && x < b - 0.02 * w) || it % 4 == 3 {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() < ftol {
            return Ok((x, fx));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a).abs() <= xtol {
            break;
        }
    }
    let (x, fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    if fx.abs() < ftol {
        Ok((x, fx))
    } else {
        Err(Error::Stagnation { lo: a, hi: b, f_lo: fa, f_hi: fb })
    }
}

/// Evenly spaced samples `lo, lo+step, ..., hi` (the last one clamped to `hi`).
pub(crate) fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(0.0) as usize;
    let mut v: Vec<f64> = (0..n).map(|k| lo + k as f64 * step).collect();
    v.push(hi);
    v
}

/// All sign-change intervals of `f` on `xs`, refined to roots.
pub(crate) fn all_roots<F>(mut f: F, xs: &[f64], ftol: f64, xtol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in xs {
        let fx = match f(x) {
            Ok(v) => v,
            Err(Error::NotFound(_)) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((xp, fp)) = prev {
            if fp == 0.0 {
                out.push(xp);
            } else if fp.signum() != fx.signum() && fx != 0.0 {
                let (r, _) = bracketed(&mut f, xp, x, fp, fx, ftol, xtol)?;
                out.push(r);
            }
        }
        prev = Some((x, fx));
    }
    if let Some((xp, 0.0)) = prev {
        out.push(xp);
    }
    Ok(out)
}
