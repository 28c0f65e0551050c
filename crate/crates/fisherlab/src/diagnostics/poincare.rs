//! Poincaré constants: the Muckenhoupt estimate on grids and closed-form bound evaluators.

use serde::Serialize;

use super::grid::{GridDensity1D, DENSITY_FLOOR};
use super::DiagnosticsError;
use crate::instance::Constants;

/// Muckenhoupt functional of a 1-D density: `B ≤ C_PI ≤ 4B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Muckenhoupt {
    pub b: f64,
    pub median: f64,
    pub left: f64,
    pub right: f64,
    /// True if some nodes were skipped because `π` underflowed there.
    pub trimmed: bool,
}

impl Muckenhoupt {
    /// Upper estimate `4B` of the Poincaré constant.
    pub fn cpi_upper(&self) -> f64 {
        4.0 * self.b
    }
}

/// `max(sup_{x<m} π(−∞,x]·∫_x^m 1/π, sup_{x>m} π[x,∞)·∫_m^x 1/π)` with `m` the median.
///
/// Both inner integrals are accumulated outward from the median and the upper tail mass is a
/// reverse cumulative sum, so neither side suffers cancellation.
pub fn muckenhoupt_b(pi: &GridDensity1D) -> Result<Muckenhoupt, DiagnosticsError> {
    let p = pi.values();
    let n = pi.n();
    let dx = pi.spacing();
    if p[1..n - 1].iter().any(|v| !(*v > 0.0)) {
        return Err(DiagnosticsError::Precondition("density must be positive on the grid interior".into()));
    }
    let cdf = pi.cdf();
    let total = cdf[n - 1];
    let mut upper = vec![0.0; n];
    for i in (0..n - 1).rev() {
        upper[i] = upper[i + 1] + 0.5 * dx * (p[i] + p[i + 1]);
    }
    let half = 0.5 * total;
    let k = cdf.windows(2).position(|w| w[0] <= half && half <= w[1]).unwrap_or(n / 2).min(n - 2);
    let frac = if cdf[k + 1] > cdf[k] { (half - cdf[k]) / (cdf[k + 1] - cdf[k]) } else { 0.5 };
    let median = pi.x(k) + frac * dx;
    let inv = |v: f64| 1.0 / v.max(DENSITY_FLOOR);
    let mut trimmed = false;

    // left side: nodes k, k−1, …, 0
    let mut left = 0.0;
    let mut acc = inv(p[k]) * frac * dx;
    for i in (0..=k).rev() {
        if i < k {
            acc += 0.5 * dx * (inv(p[i]) + inv(p[i + 1]));
        }
        if p[i] <= DENSITY_FLOOR {
            trimmed = true;
            break;
        }
        left = f64::max(left, cdf[i] * acc);
    }
    // right side: nodes k+1, …, n−1
    let mut right = 0.0;
    let mut acc = inv(p[k + 1]) * (1.0 - frac) * dx;
    for i in k + 1..n {
        if i > k + 1 {
            acc += 0.5 * dx * (inv(p[i - 1]) + inv(p[i]));
        }
        if p[i] <= DENSITY_FLOOR {
            trimmed = true;
            break;
        }
        right = f64::max(right, upper[i] * acc);
    }
    Ok(Muckenhoupt { b: left.max(right) / total, median, left: left / total, right: right / total, trimmed })
}

fn check_nonneg(name: &str, v: f64) -> Result<(), DiagnosticsError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DiagnosticsError::Parameter(format!("{name} must be finite and non-negative, got {v}")))
    }
}

/// `C_PI(μ) ≤ e^{osc}·C_PI(π)` when `ln(μ/π)` has oscillation at most `osc`.
pub fn holley_stroock_bound(cpi_base: f64, log_ratio_bound: f64) -> Result<f64, DiagnosticsError> {
    check_nonneg("base Poincaré constant", cpi_base)?;
    check_nonneg("log-ratio bound", log_ratio_bound)?;
    Ok(cpi_base * log_ratio_bound.exp())
}

/// `√(C_PI·FI/4)`, the total-variation bound implied by a Poincaré inequality.
pub fn fi_tv_bound(cpi: f64, fi: f64) -> Result<f64, DiagnosticsError> {
    check_nonneg("Poincaré constant", cpi)?;
    check_nonneg("Fisher information", fi)?;
    Ok((cpi * fi / 4.0).sqrt())
}

/// Poincaré constant used for the hard instance: `4c_PI R²` in one dimension, where the bump
/// perturbation costs only a constant factor, and the perturbation bound
/// `2c_PI R² e^{r²φ(0)}/d` otherwise.
pub fn instance_poincare_bound(d: usize, r: f64, big_r: f64, constants: &Constants) -> Result<f64, DiagnosticsError> {
    if d == 0 || !(big_r > 0.0) || !(r >= 0.0) {
        return Err(DiagnosticsError::Parameter(format!("need d ≥ 1, R > 0, r ≥ 0; got d={d}, R={big_r}, r={r}")));
    }
    let phi0 = crate::bump::BumpProfile::default().phi0;
    Ok(if d == 1 {
        4.0 * constants.c_pi * big_r * big_r
    } else {
        2.0 * constants.c_pi * big_r * big_r * (r * r * phi0).exp() / d as f64
    })
}

/// `Δ + d·max(1, ln(βm²))`, the initial-KL bound for `N(0, β⁻¹I)` started near a minimizer.
pub fn kl_init_bound(delta: f64, beta: f64, d: usize, m: f64) -> Result<f64, DiagnosticsError> {
    if !(m > 0.0) || !(beta > 0.0) || delta < 0.0 {
        return Err(DiagnosticsError::Parameter(format!("need m > 0, β > 0, Δ ≥ 0; got m={m}, β={beta}, Δ={delta}")));
    }
    Ok(delta + d as f64 * f64::max(1.0, (beta * m * m).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::divergence::{divergence, fisher_information, DivergenceKind};
    use crate::diagnostics::grid::grid_from_potential;
    use crate::instance::BumpInstance;
    use crate::potential::{CosineWell, Quadratic, Tilted};

    #[test]
    fn gaussian_b_in_range() {
        let g = grid_from_potential(&Quadratic::standard(1), -12.0, 12.0, 8001).unwrap();
        let m = muckenhoupt_b(&g).unwrap();
        assert!((0.25..=1.0).contains(&m.b), "{}", m.b);
        assert!(m.median.abs() < 1e-9);
        assert!((m.left - m.right).abs() < 1e-3);
    }

    #[test]
    fn uniform_b_is_one_sixteenth() {
        let g = GridDensity1D::from_values(0.0, 1.0, vec![1.0; 4001]).unwrap();
        let m = muckenhoupt_b(&g).unwrap();
        assert!((m.b - 1.0 / 16.0).abs() < 1e-6);
        let cpi = 1.0 / std::f64::consts::PI.powi(2);
        assert!(m.b <= cpi && cpi <= 4.0 * m.b);
    }

    #[test]
    fn scale_covariance() {
        // B(σX) = σ²B(X)
        let a = muckenhoupt_b(&GridDensity1D::from_log_density(-12.0, 12.0, 8001, |x| -0.5 * x * x).unwrap()).unwrap();
        let b = muckenhoupt_b(&GridDensity1D::from_log_density(-36.0, 36.0, 8001, |x| -x * x / 18.0).unwrap()).unwrap();
        assert!((b.b / a.b - 9.0).abs() < 1e-3);
    }

    #[test]
    fn bump_instance_below_perturbation_bound() {
        let inst = BumpInstance::from_big_r(1, 10.0).unwrap();
        let g = grid_from_potential(&inst, -22.0, 22.0, 8192).unwrap();
        let m = muckenhoupt_b(&g).unwrap();
        let bound = holley_stroock_bound(2.0 * 100.0, inst.bump_depth()).unwrap();
        assert!(m.cpi_upper() <= bound);
        assert!(m.cpi_upper() <= instance_poincare_bound(1, inst.r(), 10.0, &Constants::default()).unwrap());
    }

    #[test]
    fn bound_evaluators() {
        assert_eq!(holley_stroock_bound(3.5, 0.0).unwrap(), 3.5);
        assert!(holley_stroock_bound(-1.0, 0.0).is_err());
        assert_eq!(fi_tv_bound(2.0, 0.0).unwrap(), 0.0);
        assert!((fi_tv_bound(4.0, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(fi_tv_bound(1.0, -1.0).is_err());
        let c = Constants::default();
        let (r, big_r) = (2.0, 5.0);
        let want = 2.0 * 25.0 * (4.0 * 11.0 / 64.0f64).exp() / 2.0;
        assert!((instance_poincare_bound(2, r, big_r, &c).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn kl_bound_shape_and_monotone() {
        assert_eq!(kl_init_bound(0.0, 1.0, 1, 1.0).unwrap(), 1.0);
        assert!(kl_init_bound(1.0, 1.0, 1, 1.0).unwrap() > kl_init_bound(0.5, 1.0, 1, 1.0).unwrap());
        assert!(kl_init_bound(0.0, 1.0, 1, 10.0).unwrap() >= kl_init_bound(0.0, 1.0, 1, 2.0).unwrap());
        assert!(kl_init_bound(0.0, 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn kl_at_init_for_standard_normal() {
        let g = grid_from_potential(&Quadratic::standard(1), -12.0, 12.0, 4001).unwrap();
        assert!(divergence(&g, &g, DivergenceKind::Kl).unwrap() <= kl_init_bound(0.0, 1.0, 1, 1.0).unwrap());
    }

    #[test]
    fn kl_at_init_for_cosine_well() {
        // π_β ∝ e^{−βV} for V = x²/4 − cos(x)/2, initialized at N(0, 1/β); Δ = V(0) − inf V = 0
        let eps: f64 = 0.1;
        let beta = 1.0 / (eps * eps);
        let (lo, hi) = (-3.0, 3.0);
        let pi = grid_from_potential(&Tilted { inner: CosineWell, factor: beta }, lo, hi, 8001).unwrap();
        let mu0 = GridDensity1D::from_log_density(lo, hi, 8001, |x| -0.5 * beta * x * x).unwrap();
        let kl = divergence(&mu0, &pi, DivergenceKind::Kl).unwrap();
        assert!(kl.is_finite() && kl <= 10.0 * kl_init_bound(0.0, beta, 1, 1.0).unwrap());
        assert!(fisher_information(&mu0, &pi).unwrap().is_finite());
    }
}
