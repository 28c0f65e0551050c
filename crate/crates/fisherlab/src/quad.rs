//! One-dimensional adaptive quadrature and root bracketing.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge on [{a}, {b}]: achieved error estimate {achieved:e}")]
    NoConvergence { a: f64, b: f64, achieved: f64 },
    #[error("integrand is not finite on [{a}, {b}]")]
    NonFinite { a: f64, b: f64 },
    #[error("no sign change on bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
}

const MAX_DEPTH: u32 = 50;

struct Simpson<'f, F> {
    f: &'f F,
    abs_tol: f64,
    worst: f64,
    failed: bool,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= MAX_DEPTH || h.abs() < 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            if delta.abs() > 15.0 * tol {
                self.failed = true;
                self.worst = self.worst.max(delta.abs() / 15.0);
            }
            return left + right + delta / 15.0;
        }
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        let t = (0.5 * tol).max(self.abs_tol * 1e-3);
        self.recurse(a, m, fa, flm, fm, left, t, depth + 1) + self.recurse(m, b, fm, frm, fb, right, t, depth + 1)
    }
}

fn coarse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    // composite Simpson with 64 panels, used only to scale the tolerance
    let n = 64;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Adaptive Simpson integral of `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, QuadError> {
    integrate_pieces(f, &[a, b], rel_tol)
}

/// Integral over consecutive breakpoints, each piece refined independently.
/// Breakpoints should sit on kinks of the integrand.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64) -> Result<f64, QuadError> {
    let scale: f64 = breaks.windows(2).map(|w| coarse(&f, w[0], w[1]).abs()).sum();
    if !scale.is_finite() {
        return Err(QuadError::NonFinite { a: breaks[0], b: breaks[breaks.len() - 1] });
    }
    let abs_tol = (rel_tol * scale).max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let mut s = Simpson { f: &f, abs_tol, worst: 0.0, failed: false };
        let piece = s.recurse(a, b, fa, fm, fb, whole, abs_tol, 0);
        if !piece.is_finite() {
            return Err(QuadError::NonFinite { a, b });
        }
        if s.failed && s.worst > abs_tol.max(rel_tol * piece.abs()) {
            return Err(QuadError::NoConvergence { a, b, achieved: s.worst / piece.abs().max(f64::MIN_POSITIVE) });
        }
        total += piece;
    }
    Ok(total)
}

/// Bisection for a root of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must have opposite signs.
/// Stops when the bracket is below `rel_tol` relative to its upper end.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64, QuadError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(QuadError::Bracket { lo, hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()) || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dx * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}
