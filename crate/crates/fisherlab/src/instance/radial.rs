//! Radial integrals of the bump family and the `(r, R)` solvers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::InstanceError;
use crate::bump::BumpProfile;
use crate::quad::{bisect, integrate_pieces};

/// Default relative tolerance for radial quadrature.
pub const QUAD_TOL: f64 = 1e-10;

/// Gaussian tails are truncated this many standard deviations out.
pub const TAIL_SIGMAS: f64 = 12.0;

/// Volume of the unit ball in ℝᵈ.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// Surface area of the unit sphere in ℝᵈ (`A_{d−1} = d·V_d`).
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// `I_r = ∫_{B_1} exp(r²φ(‖x‖)) dx`.
pub fn radial_bump_integral(d: usize, r: f64, tol: f64) -> Result<f64, InstanceError> {
    radial_bump_integral_with(&BumpProfile::default(), d, r, tol)
}

pub fn radial_bump_integral_with(profile: &BumpProfile, d: usize, r: f64, tol: f64) -> Result<f64, InstanceError> {
    check_dim(d)?;
    if !(r >= 0.0) || !(tol > 0.0) {
        return Err(InstanceError::Domain(format!("radial integral needs r ≥ 0 and tol > 0, got r={r}, tol={tol}")));
    }
    let r2 = r * r;
    let k = d as i32 - 1;
    let f = |s: f64| s.powi(k) * (r2 * profile.at(s).phi).exp();
    let v = integrate_pieces(f, &[0.0, profile.alpha, 1.0], tol)?;
    Ok(unit_sphere_area(d) * v)
}

/// Mass of `exp(−½(‖x‖−R)₊²)` outside `B_R`.
pub fn tail_mass(d: usize, big_r: f64, tol: f64) -> Result<f64, InstanceError> {
    check_dim(d)?;
    if !(big_r >= 0.0) {
        return Err(InstanceError::Domain(format!("tail mass needs R ≥ 0, got {big_r}")));
    }
    let k = d as i32 - 1;
    let f = |s: f64| (s + big_r).powi(k) * (-0.5 * s * s).exp();
    let v = integrate_pieces(f, &[0.0, 1.0, 4.0, TAIL_SIGMAS], tol)?;
    Ok(unit_sphere_area(d) * v)
}

/// Normalizers of `π_ω` and `π_init` together with their building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegrals {
    pub i_r: f64,
    pub v_d: f64,
    pub a_d: f64,
    pub tail: f64,
    pub z_omega: f64,
    pub z_init: f64,
}

impl RadialIntegrals {
    pub fn compute(d: usize, r: f64, big_r: f64, tol: f64) -> Result<Self, InstanceError> {
        let i_r = radial_bump_integral(d, r, tol)?;
        let tail = tail_mass(d, big_r, tol)?;
        let v_d = unit_ball_volume(d);
        let rd = r.powi(d as i32);
        let bd = big_r.powi(d as i32);
        Ok(RadialIntegrals {
            i_r,
            v_d,
            a_d: unit_sphere_area(d),
            tail,
            z_omega: tail + (bd - rd) * v_d + rd * i_r,
            z_init: tail + v_d * bd,
        })
    }

    /// `π_ω(ω + B_r) = r^d I_r / Z_ω`.
    pub fn bump_mass(&self, d: usize, r: f64) -> f64 {
        r.powi(d as i32) * self.i_r / self.z_omega
    }
}

/// `f(r) = (I_r + V_d)·r^d`, the left side of the equation linking `r` and `R`.
pub fn f_of_r(d: usize, r: f64) -> Result<f64, InstanceError> {
    Ok((radial_bump_integral(d, r, QUAD_TOL)? + unit_ball_volume(d)) * r.powi(d as i32))
}

/// `g(R) = tail + V_d·R^d`, the right side.
pub fn g_of_r(d: usize, big_r: f64) -> Result<f64, InstanceError> {
    Ok(tail_mass(d, big_r, QUAD_TOL)? + unit_ball_volume(d) * big_r.powi(d as i32))
}

/// Solution of `f(r) = g(R)` with the evaluations made along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct RSolve {
    pub r: f64,
    pub residual: f64,
    /// `(r, f(r))` at each bisection probe.
    pub trace: Vec<(f64, f64)>,
}

/// Relative residual `|f(r) − g(R)|/g(R)`.
pub fn r_residual(d: usize, r: f64, big_r: f64) -> Result<f64, InstanceError> {
    let g = g_of_r(d, big_r)?;
    Ok((f_of_r(d, r)? - g).abs() / g)
}

// Above this r the integrand exp(r²φ(0)) overflows; f is astronomically large well before.
const R_CAP: f64 = 50.0;

/// Bisection for the bump radius `r` that gives the bump exactly half the mass.
pub fn solve_r_given_big_r(d: usize, big_r: f64) -> Result<RSolve, InstanceError> {
    check_dim(d)?;
    if !(big_r > 0.0) || !big_r.is_finite() {
        return Err(InstanceError::Domain(format!("R must be positive, got {big_r}")));
    }
    let g = g_of_r(d, big_r)?;
    let mut hi = big_r.min(R_CAP);
    let mut widenings = 0;
    while f_of_r(d, hi)? < g {
        if hi >= R_CAP || widenings >= 8 {
            return Err(InstanceError::Solver(format!("no root of f(r) = g(R) below r = {hi} for R = {big_r}")));
        }
        hi = (2.0 * hi).min(R_CAP);
        widenings += 1;
    }
    let mut trace = Vec::new();
    let mut err = None;
    let r = bisect(
        |r| match f_of_r(d, r) {
            Ok(f) => {
                trace.push((r, f));
                f - g
            }
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        hi,
        1e-13,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let residual = (f_of_r(d, r)? - g).abs() / g;
    Ok(RSolve { r, residual, trace })
}

/// Solves for `(R, r)` from the target accuracy `eps`.
///
/// `d = 1`: `R² = 1/(9·c_pi·eps²)`. `d ≥ 2`: `R²·exp(r(R)²φ(0)) = 2d/(9·c_pi·eps²)`.
/// Fails when the solved `R` is below `c_r·√d`.
pub fn solve_big_r_given_eps(d: usize, eps: f64, c_pi: f64, c_r: f64) -> Result<(f64, f64), InstanceError> {
    check_dim(d)?;
    if !(eps > 0.0) || !(c_pi > 0.0) {
        return Err(InstanceError::Domain(format!("eps and c_pi must be positive, got {eps}, {c_pi}")));
    }
    let phi0 = BumpProfile::default().phi0;
    let big_r = if d == 1 {
        1.0 / (3.0 * eps * c_pi.sqrt())
    } else {
        let log_target = (2.0 * d as f64 / (9.0 * c_pi * eps * eps)).ln();
        let h = |big_r: f64| -> Result<f64, InstanceError> {
            let r = solve_r_given_big_r(d, big_r)?.r;
            Ok(2.0 * big_r.ln() + r * r * phi0 - log_target)
        };
        let mut lo = 1.0;
        while h(lo)? > 0.0 {
            lo *= 0.5;
            if lo < 1e-6 {
                return Err(InstanceError::EpsTooLarge { d, eps, big_r: lo, min_big_r: c_r * (d as f64).sqrt() });
            }
        }
        let mut hi = 2.0;
        while h(hi)? < 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(InstanceError::Solver(format!("R bracket for eps={eps} exceeded 1e12")));
            }
        }
        let mut err = None;
        let v = bisect(
            |x| match h(x) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            1e-13,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        v
    };
    let min_big_r = c_r * (d as f64).sqrt();
    if big_r < min_big_r {
        return Err(InstanceError::EpsTooLarge { d, eps, big_r, min_big_r });
    }
    let r = solve_r_given_big_r(d, big_r)?.r;
    Ok((big_r, r))
}

fn check_dim(d: usize) -> Result<(), InstanceError> {
    if d == 0 {
        Err(InstanceError::Domain("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}
