//! Fisher information, KL, TV and χ² between grid densities, plus KS distance to samples.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{check_1d, GridDensity1D, DENSITY_FLOOR};
use super::DiagnosticsError;
use crate::potential::SmoothPotential;
use crate::quad::trapezoid;

/// Points where `μ` is below this fraction of its peak are left out of the FI integrand.
pub const FI_WINDOW: f64 = 1e-12;

fn safe_ln(v: f64) -> f64 {
    v.max(DENSITY_FLOOR).ln()
}

/// Centered differences, one-sided at both ends.
pub(crate) fn derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| match i {
            0 => (f[1] - f[0]) / dx,
            i if i == n - 1 => (f[n - 1] - f[n - 2]) / dx,
            i => (f[i + 1] - f[i - 1]) / (2.0 * dx),
        })
        .collect()
}

/// `∫ μ·((ln μ/π)′)²`.
pub fn fisher_information(mu: &GridDensity1D, pi: &GridDensity1D) -> Result<f64, DiagnosticsError> {
    mu.check_same(pi)?;
    let l: Vec<f64> = mu.values().iter().zip(pi.values()).map(|(m, p)| safe_ln(*m) - safe_ln(*p)).collect();
    let dl = derivative(&l, mu.spacing());
    let cut = FI_WINDOW * mu.peak();
    let integrand: Vec<f64> = mu.values().iter().zip(&dl).map(|(m, d)| if *m > cut { m * d * d } else { 0.0 }).collect();
    Ok(trapezoid(&integrand, mu.spacing()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceKind {
    Kl,
    Tv,
    Chi2,
}

impl FromStr for DivergenceKind {
    type Err = DiagnosticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kl" => Ok(DivergenceKind::Kl),
            "tv" => Ok(DivergenceKind::Tv),
            "chi2" => Ok(DivergenceKind::Chi2),
            _ => Err(DiagnosticsError::UnknownKind(s.to_string())),
        }
    }
}

pub fn divergence(mu: &GridDensity1D, pi: &GridDensity1D, kind: DivergenceKind) -> Result<f64, DiagnosticsError> {
    mu.check_same(pi)?;
    let pairs = mu.values().iter().zip(pi.values());
    let integrand: Vec<f64> = match kind {
        DivergenceKind::Kl => pairs.map(|(m, p)| if *m > 0.0 { m * (safe_ln(*m) - safe_ln(*p)) } else { 0.0 }).collect(),
        DivergenceKind::Tv => pairs.map(|(m, p)| 0.5 * (m - p).abs()).collect(),
        DivergenceKind::Chi2 => pairs.map(|(m, p)| if *m > 0.0 { m * m / p.max(DENSITY_FLOOR) } else { 0.0 }).collect(),
    };
    let v = trapezoid(&integrand, mu.spacing());
    Ok(match kind {
        DivergenceKind::Chi2 => v - 1.0,
        _ => v,
    })
}

/// Kolmogorov–Smirnov distance between the grid law and the empirical law of `samples`.
pub fn ks_distance(law: &GridDensity1D, samples: &[f64]) -> Result<f64, DiagnosticsError> {
    if samples.is_empty() {
        return Err(DiagnosticsError::Empty);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let cdf = law.cdf();
    let dx = law.spacing();
    let n = s.len() as f64;
    let at = |x: f64| {
        if x <= law.lo() {
            return 0.0;
        }
        if x >= law.hi() {
            return 1.0;
        }
        let t = (x - law.lo()) / dx;
        let i = (t.floor() as usize).min(law.n() - 2);
        let u = (t - i as f64) * dx;
        // exact integral of the linear interpolant over [x_i, x]
        let (a, b) = (law.values()[i], law.values()[i + 1]);
        cdf[i] + a * u + 0.5 * (b - a) / dx * u * u
    };
    Ok(s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = at(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max))
}

/// Coarse and fine grid values with their Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Richardson {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    /// `|fine − coarse| / |fine|`.
    pub rel_change: f64,
}

/// Extrapolates two estimates on grids of spacing `2h` and `h` for an error of order `order`.
pub fn richardson(coarse: f64, fine: f64, order: i32) -> Richardson {
    let k = 2f64.powi(order);
    let rel_change = if fine == 0.0 { (fine - coarse).abs() } else { ((fine - coarse) / fine).abs() };
    Richardson { coarse, fine, extrapolated: (k * fine - coarse) / (k - 1.0), rel_change }
}

/// `E_μ[V′²]` against `FI(μ‖π) + 2β` with `π ∝ e^{−V}` on the grid of `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBound {
    pub moment: f64,
    pub bound: f64,
    pub slack: f64,
}

pub fn grad_second_moment_bound<P: SmoothPotential>(
    mu: &GridDensity1D,
    potential: &P,
    beta: f64,
    d: usize,
) -> Result<MomentBound, DiagnosticsError> {
    check_1d(potential)?;
    let vals: Vec<f64> = mu.xs().map(|x| -potential.value(&[x])).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pi = GridDensity1D::from_values(mu.lo(), mu.hi(), vals.iter().map(|v| (v - top).exp()).collect())?;
    let moment = mu.expect(|x| potential.grad(&[x])[0].powi(2));
    let bound = fisher_information(mu, &pi)? + 2.0 * beta * d as f64;
    Ok(MomentBound { moment, bound, slack: bound - moment })
}

/// Largest value of `|(ln π/πQ_t)′| − 6β√t − 2βt|V′|` over the grid interior, with
/// `V = −ln π`. Nodes within `10√t` of the boundary or below `1e−10` of the peak are skipped,
/// since the truncated convolution is unreliable there.
pub fn score_perturbation_check(pi: &GridDensity1D, t: f64, beta: f64) -> Result<f64, DiagnosticsError> {
    if !(t >= 0.0) || !(beta > 0.0) {
        return Err(DiagnosticsError::Parameter(format!("need t ≥ 0 and β > 0, got t={t}, β={beta}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if beta > 1.0 / (2.0 * t) {
        return Err(DiagnosticsError::Precondition(format!("t = {t} is too large for β = {beta}")));
    }
    let smoothed = pi.convolve_gaussian(t)?;
    let dx = pi.spacing();
    let ln_pi: Vec<f64> = pi.values().iter().map(|v| safe_ln(*v)).collect();
    let ln_q: Vec<f64> = smoothed.values().iter().map(|v| safe_ln(*v)).collect();
    let v_prime: Vec<f64> = derivative(&ln_pi, dx).into_iter().map(|g| -g).collect();
    let diff: Vec<f64> = ln_pi.iter().zip(&ln_q).map(|(a, b)| a - b).collect();
    let d_diff = derivative(&diff, dx);
    let margin = 10.0 * t.sqrt();
    let cut = 1e-10 * pi.peak();
    let mut worst = f64::NEG_INFINITY;
    for (i, x) in pi.xs().enumerate() {
        if x - pi.lo() < margin || pi.hi() - x < margin || pi.values()[i] < cut {
            continue;
        }
        let v = d_diff[i].abs() - 6.0 * beta * t.sqrt() - 2.0 * beta * t * v_prime[i].abs();
        worst = worst.max(v);
    }
    if worst == f64::NEG_INFINITY {
        return Err(DiagnosticsError::Parameter("no interior grid points for the score check".into()));
    }
    Ok(worst)
}
