//! The bump profile φ and its radial Hessian.
//!
//! The shipped profile is
//!
//! ```text
//! φ(s) = 11/64 − s²/2                          0 ≤ s ≤ 1/4
//! φ(s) = (4 + 8s − 48s² + 56s³ − 20s⁴)/27      1/4 ≤ s ≤ 1
//! φ(s) = 0                                     s ≥ 1
//! ```
//!
//! It is C¹ with |φ″| ≤ 1, which makes `x ↦ −r²φ(‖x−ω‖/r)` 1-smooth for every `r`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BumpError {
    #[error("φ is defined for s ≥ 0, got {0}")]
    NegativeArgument(f64),
    #[error("radial Hessian is singular at the bump center")]
    AtCenter,
    #[error("dimension mismatch: point has {got} coordinates, center has {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Value and first two derivatives of φ at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

/// Piecewise profile: a quadratic cap `φ(0) − s²/2` on `[0, alpha]`, then a quartic
/// `Σ coeffs[k]·s^k` on `[alpha, 1]`, then zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub alpha: f64,
    pub phi0: f64,
    pub coeffs: [f64; 5],
}

impl Default for BumpProfile {
    fn default() -> Self {
        let c = 1.0 / 27.0;
        BumpProfile { alpha: 0.25, phi0: 11.0 / 64.0, coeffs: [4.0 * c, 8.0 * c, -48.0 * c, 56.0 * c, -20.0 * c] }
    }
}

/// Identifier written into instance files for the profile above.
pub const PROFILE_TAG: &str = "corrected-footnote-v1";

impl BumpProfile {
    /// φ, φ′, φ″ at `s ≥ 0`. Branch points take the left branch.
    pub fn eval(&self, s: f64) -> Result<PhiValue, BumpError> {
        if s < 0.0 || s.is_nan() {
            return Err(BumpError::NegativeArgument(s));
        }
        Ok(self.at(s))
    }

    /// Same as [`eval`](Self::eval) for a radius already known to be non-negative.
    #[inline]
    pub(crate) fn at(&self, s: f64) -> PhiValue {
        if s <= self.alpha {
            PhiValue { phi: self.phi0 - 0.5 * s * s, dphi: -s, ddphi: -1.0 }
        } else if s <= 1.0 {
            let [c0, c1, c2, c3, c4] = self.coeffs;
            PhiValue {
                phi: c0 + s * (c1 + s * (c2 + s * (c3 + s * c4))),
                dphi: c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * 4.0 * c4)),
                ddphi: 2.0 * c2 + s * (6.0 * c3 + s * 12.0 * c4),
            }
        } else {
            PhiValue { phi: 0.0, dphi: 0.0, ddphi: 0.0 }
        }
    }

    /// Eigenvalues of the Hessian of `z ↦ r²φ(‖z−center‖/r)` at `x`:
    /// `(tangential, radial)`, the tangential one with multiplicity `d − 1`.
    pub fn radial_hessian_eigs(&self, x: &[f64], center: &[f64], r: f64) -> Result<(f64, f64), BumpError> {
        if x.len() != center.len() {
            return Err(BumpError::Dimension { expected: center.len(), got: x.len() });
        }
        let dist = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist == 0.0 {
            return Err(BumpError::AtCenter);
        }
        let v = self.at(dist / r);
        Ok((r * v.dphi / dist, v.ddphi))
    }
}

/// φ and its derivatives for the shipped profile.
pub fn phi_eval(s: f64) -> Result<PhiValue, BumpError> {
    BumpProfile::default().eval(s)
}

/// Hessian eigenvalues for the shipped profile.
pub fn radial_hessian_eigs(x: &[f64], center: &[f64], r: f64) -> Result<(f64, f64), BumpError> {
    BumpProfile::default().radial_hessian_eigs(x, center, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn value_at_zero() {
        let v = phi_eval(0.0).unwrap();
        assert_eq!(v.phi, 11.0 / 64.0);
        assert_eq!(v.dphi, 0.0);
        assert_eq!(v.ddphi, -1.0);
    }

    #[test]
    fn value_at_one() {
        let v = phi_eval(1.0).unwrap();
        assert!(close(v.phi, 0.0, 1e-15));
        assert!(close(v.dphi, 0.0, 1e-15));
    }

    #[test]
    fn branches_agree_at_quarter() {
        let p = BumpProfile::default();
        let quad = p.phi0 - 0.5 * 0.0625;
        assert!(close(quad, 9.0 / 64.0, 1e-16));
        let [c0, c1, c2, c3, c4] = p.coeffs;
        let s: f64 = 0.25;
        let poly = c0 + c1 * s + c2 * s * s + c3 * s.powi(3) + c4 * s.powi(4);
        let dpoly = c1 + 2.0 * c2 * s + 3.0 * c3 * s * s + 4.0 * c4 * s.powi(3);
        assert!(close(poly, 9.0 / 64.0, 1e-15));
        assert!(close(dpoly, -0.25, 1e-15));
    }

    #[test]
    fn outside_support() {
        assert_eq!(phi_eval(2.0).unwrap(), PhiValue { phi: 0.0, dphi: 0.0, ddphi: 0.0 });
    }

    #[test]
    fn negative_is_domain_error() {
        assert!(matches!(phi_eval(-0.1), Err(BumpError::NegativeArgument(_))));
    }

    #[test]
    fn branch_continuity() {
        // extrapolate each side to the branch point to first order; a jump would survive
        let d = 1e-6;
        for s0 in [0.25, 1.0] {
            let a = phi_eval(s0 - d).unwrap();
            let b = phi_eval(s0 + d).unwrap();
            assert!(close(a.phi + d * a.dphi, b.phi - d * b.dphi, 1e-8));
            assert!(close(a.dphi + d * a.ddphi, b.dphi - d * b.ddphi, 1e-8));
        }
    }

    #[test]
    fn dense_monotone_and_curvature() {
        let n = 100_000;
        let mut max_dd: f64 = 0.0;
        for i in 0..=n {
            let s = i as f64 / n as f64;
            let v = phi_eval(s).unwrap();
            assert!(v.dphi <= 1e-15, "φ′({s}) = {}", v.dphi);
            max_dd = max_dd.max(v.ddphi.abs());
        }
        assert!(max_dd <= 1.0 + 1e-12);
    }

    #[test]
    fn hessian_inside_cap() {
        let (t, r) = radial_hessian_eigs(&[0.1, 0.0], &[0.0, 0.0], 1.0).unwrap();
        assert!(close(t, -1.0, 1e-15) && close(r, -1.0, 1e-15));
    }

    #[test]
    fn hessian_outside_support() {
        assert_eq!(radial_hessian_eigs(&[3.0, 0.0], &[0.0, 0.0], 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn hessian_at_center_errors() {
        assert_eq!(radial_hessian_eigs(&[1.0], &[1.0], 1.0), Err(BumpError::AtCenter));
    }

    #[test]
    fn hessian_mid_radius_3d() {
        let (t, r) = radial_hessian_eigs(&[0.5, 0.0, 0.0], &[0.0; 3], 1.0).unwrap();
        assert!(t.abs() <= 1.0 && r.abs() <= 1.0);
    }

    proptest! {
        #[test]
        fn hessian_eigs_bounded(
            x in prop::collection::vec(-5.0f64..5.0, 3),
            c in prop::collection::vec(-5.0f64..5.0, 3),
            r in 0.05f64..6.0,
        ) {
            if let Ok((t, rad)) = radial_hessian_eigs(&x, &c, r) {
                prop_assert!(t.abs() <= 1.0 + 1e-12);
                prop_assert!(rad.abs() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn slope_bounded_by_radius(s in 0.0f64..2.0) {
            let v = phi_eval(s).unwrap();
            prop_assert!(v.dphi.abs() <= s + 1e-15);
            prop_assert!(v.phi >= 0.0 && v.phi <= 11.0 / 64.0);
        }
    }
}
