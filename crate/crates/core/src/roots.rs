//! Scalar root finding and one-dimensional minimisation.

use crate::error::{Error, Result};

/// Root of `f` in `[a, b]` by the Illinois variant of regula falsi, falling
/// back to bisection when the interpolant stalls. `f(a)` and `f(b)` must
/// differ in sign.
pub fn illinois(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket(format!(
            "f({a}) = {fa}, f({b}) = {fb} do not bracket a root"
        )));
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let width = (b - a).abs();
        let mut c = (a * fb - b * fa) / (fb - fa);
        // keep the iterate well inside the bracket
        let lo = a.min(b) + 0.01 * width;
        let hi = a.max(b) - 0.01 * width;
        if !(c > lo && c < hi) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= xtol * (1.0 + a.abs().max(b.abs())) {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

/// Minimiser of a unimodal `f` on `[a, b]` by golden-section search.
/// Returns `(x, f(x))`.
pub fn golden_section(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > xtol * (1.0 + c.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
