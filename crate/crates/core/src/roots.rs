//! One-dimensional root finding for monotone functions.

use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootError {
    /// No sign change could be found while expanding the bracket.
    NoBracket,
    /// The iteration budget ran out; `residual` is the best `|f(x)|` seen.
    Budget { x: f64, residual: f64 },
    /// The function returned NaN.
    NotANumber,
}

impl fmt::Display for RootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootError::NoBracket => f.write_str("no sign change found"),
            RootError::Budget { x, residual } => {
                write!(f, "root finding budget exhausted at x={x}, residual {residual:e}")
            }
            RootError::NotANumber => f.write_str("function returned NaN"),
        }
    }
}

/// Brent's method on a bracket `[a, b]` with `f(a)·f(b) ≤ 0`. Stops when
/// `|f(x)| ≤ ftol` or the bracket is narrower than `xtol`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(RootError::NotANumber);
    }
    if fa.abs() <= ftol {
        return Ok(a);
    }
    if fb.abs() <= ftol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket);
    }
    if fa.abs() < fb.abs() {
        core::mem::swap(&mut a, &mut b);
        core::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..max_iter {
        if fb.abs() <= ftol || (b - a).abs() <= xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let out_of_range = !((s > lo.min(b)) && (s < lo.max(b)));
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0
        };
        let tiny = if bisected {
            (b - c).abs() < xtol
        } else {
            (c - d).abs() < xtol
        };
        if out_of_range || slow || tiny || !s.is_finite() {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        if fs.is_nan() {
            return Err(RootError::NotANumber);
        }
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            core::mem::swap(&mut a, &mut b);
            core::mem::swap(&mut fa, &mut fb);
        }
    }
    Err(RootError::Budget {
        x: b,
        residual: fb.abs(),
    })
}

/// Finds a root of an increasing function `f`, starting from a guess and
/// expanding a bracket geometrically by `step` until a sign change appears.
pub fn increasing_root<F: FnMut(f64) -> f64>(
    mut f: F,
    guess: f64,
    step: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64, RootError> {
    let f0 = f(guess);
    if f0.is_nan() {
        return Err(RootError::NotANumber);
    }
    if f0.abs() <= ftol {
        return Ok(guess);
    }
    let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
    let mut inner = guess;
    let mut width = step;
    for _ in 0..200 {
        let outer = guess + dir * width;
        let fo = f(outer);
        if fo.is_nan() {
            return Err(RootError::NotANumber);
        }
        if fo.signum() != f0.signum() || fo.abs() <= ftol {
            let (a, b) = if dir > 0.0 { (inner, outer) } else { (outer, inner) };
            return brent(f, a, b, xtol, ftol, 300);
        }
        inner = outer;
        width *= 2.0;
    }
    Err(RootError::NoBracket)
}
