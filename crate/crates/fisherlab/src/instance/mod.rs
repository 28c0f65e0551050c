//! The hard-instance family `π_ω ∝ exp(−V_ω)` and the null measure `π_init`.
//!
//! ```text
//! V_ω(x)    = −r²φ(‖x−ω‖/r) + ½(‖x‖−R)₊²
//! V_init(x) =                 ½(‖x‖−R)₊²
//! ```
//!
//! `r` and `R` are tied together so that the bump carries exactly half of the mass of `π_ω`.

mod io;
mod packing;
mod radial;

pub use io::{load_instance, save_instance, InstanceFile, LoadReport, SCHEMA_VERSION};
pub use packing::{build_packing, validate_packing};
pub use radial::{
    f_of_r, g_of_r, r_residual, radial_bump_integral, solve_big_r_given_eps, solve_r_given_big_r, tail_mass,
    unit_ball_volume, unit_sphere_area, RSolve, RadialIntegrals, QUAD_TOL, TAIL_SIGMAS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bump::BumpProfile;
use crate::potential::{norm, SmoothPotential};
use crate::quad::QuadError;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate instance: r = {r} does not fit inside R = {big_r}")]
    Degenerate { r: f64, big_r: f64 },
    #[error("epsilon {eps} too large for d = {d}: solved R = {big_r:.4} is below c_R·√d = {min_big_r:.4}")]
    EpsTooLarge { d: usize, eps: f64, big_r: f64, min_big_r: f64 },
    #[error("invalid packing: {0}")]
    Packing(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("instance schema error: {0}")]
    Schema(String),
    #[error("instance file version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Universal constants left free by the theory, with calibrated defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Poincaré-constant prefactor used when solving `R` from `ε`.
    pub c_pi: f64,
    /// Smallest admissible `R/√d`.
    pub c_r: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c_pi: 1.0, c_r: 7.0 }
    }
}

/// A solved hard instance: dimension, radii, packing, and the selected center.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpInstance {
    d: usize,
    r: f64,
    big_r: f64,
    centers: Vec<Vec<f64>>,
    omega_index: usize,
    profile: BumpProfile,
}

impl BumpInstance {
    /// Solves `(R, r)` from `eps`, builds the packing and selects the center closest to the origin.
    pub fn from_eps(d: usize, eps: f64, constants: &Constants) -> Result<Self, InstanceError> {
        let (big_r, r) = solve_big_r_given_eps(d, eps, constants.c_pi, constants.c_r)?;
        Self::from_radii(d, r, big_r)
    }

    /// Instance with given `R`, `r` solved so that the bump holds half the mass.
    pub fn from_big_r(d: usize, big_r: f64) -> Result<Self, InstanceError> {
        let r = solve_r_given_big_r(d, big_r)?.r;
        Self::from_radii(d, r, big_r)
    }

    /// Instance with the given radii and the greedy packing. The radii are not checked
    /// against the mass equation; see [`residual`](Self::residual).
    pub fn from_radii(d: usize, r: f64, big_r: f64) -> Result<Self, InstanceError> {
        let centers = build_packing(d, r, big_r)?;
        let omega_index = closest_to_origin(&centers);
        Self::with_centers(d, r, big_r, centers, omega_index)
    }

    /// Instance with an explicit, validated set of centers.
    pub fn with_centers(d: usize, r: f64, big_r: f64, centers: Vec<Vec<f64>>, omega_index: usize) -> Result<Self, InstanceError> {
        if d == 0 {
            return Err(InstanceError::Domain("dimension must be at least 1".into()));
        }
        if !(r > 0.0) || !(big_r >= r) {
            return Err(InstanceError::Degenerate { r, big_r });
        }
        validate_packing(&centers, d, r, big_r)?;
        if omega_index >= centers.len() {
            return Err(InstanceError::Domain(format!("omega_index {omega_index} out of range for {} centers", centers.len())));
        }
        Ok(BumpInstance { d, r, big_r, centers, omega_index, profile: BumpProfile::default() })
    }

    /// The same family with a different selected center.
    pub fn with_omega(&self, omega_index: usize) -> Result<Self, InstanceError> {
        if omega_index >= self.centers.len() {
            return Err(InstanceError::Domain(format!("omega_index {omega_index} out of range for {} centers", self.centers.len())));
        }
        Ok(BumpInstance { omega_index, ..self.clone() })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn big_r(&self) -> f64 {
        self.big_r
    }
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }
    pub fn omega_index(&self) -> usize {
        self.omega_index
    }
    pub fn omega(&self) -> &[f64] {
        &self.centers[self.omega_index]
    }
    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }
    pub fn num_centers(&self) -> usize {
        self.centers.len()
    }

    /// Depth of the bump, `r²φ(0)`; also the sup of `ln(π̃_ω/π̃_init)`.
    pub fn bump_depth(&self) -> f64 {
        self.r * self.r * self.profile.phi0
    }

    pub fn radial_integrals(&self, tol: f64) -> Result<RadialIntegrals, InstanceError> {
        RadialIntegrals::compute(self.d, self.r, self.big_r, tol)
    }

    /// Relative residual of the mass equation `(I_r + V_d)r^d = tail + V_d R^d`.
    pub fn residual(&self) -> Result<f64, InstanceError> {
        r_residual(self.d, self.r, self.big_r)
    }

    /// `(V_ω(x), ∇V_ω(x))`.
    pub fn potential_eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>), InstanceError> {
        if x.len() != self.d {
            return Err(InstanceError::Dimension { expected: self.d, got: x.len() });
        }
        let mut g = vec![0.0; self.d];
        let v = self.value_grad(x, &mut g);
        Ok((v, g))
    }

    /// The null potential with the same `d` and `R`.
    pub fn init_potential(&self) -> InitPotential {
        InitPotential { d: self.d, big_r: self.big_r }
    }

    /// Index of the center closest to `x` (lowest index on ties).
    pub fn nearest_center(&self, x: &[f64]) -> usize {
        nearest(&self.centers, x)
    }
}

impl SmoothPotential for BumpInstance {
    fn dim(&self) -> usize {
        self.d
    }
    fn beta(&self) -> f64 {
        1.0
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let tail = tail_value_grad(x, self.big_r, grad);
        let omega = &self.centers[self.omega_index];
        let dist = x.iter().zip(omega).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist >= self.r {
            return tail;
        }
        let p = self.profile.at(dist / self.r);
        if dist > 0.0 {
            let k = -self.r * p.dphi / dist;
            for ((g, xi), oi) in grad.iter_mut().zip(x).zip(omega) {
                *g += k * (xi - oi);
            }
        }
        tail - self.r * self.r * p.phi
    }
}

/// `V_init(x) = ½(‖x‖ − R)₊²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitPotential {
    pub d: usize,
    pub big_r: f64,
}

impl InitPotential {
    pub fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>), InstanceError> {
        if x.len() != self.d {
            return Err(InstanceError::Dimension { expected: self.d, got: x.len() });
        }
        let mut g = vec![0.0; self.d];
        let v = tail_value_grad(x, self.big_r, &mut g);
        Ok((v, g))
    }
}

impl SmoothPotential for InitPotential {
    fn dim(&self) -> usize {
        self.d
    }
    fn beta(&self) -> f64 {
        1.0
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        tail_value_grad(x, self.big_r, grad)
    }
}

/// Writes the gradient of `½(‖x‖−R)₊²` into `grad` (overwriting) and returns its value.
fn tail_value_grad(x: &[f64], big_r: f64, grad: &mut [f64]) -> f64 {
    let n = norm(x);
    if n <= big_r {
        grad.iter_mut().for_each(|g| *g = 0.0);
        return 0.0;
    }
    let excess = n - big_r;
    let k = excess / n;
    for (g, xi) in grad.iter_mut().zip(x) {
        *g = k * xi;
    }
    0.5 * excess * excess
}

pub(crate) fn nearest(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn closest_to_origin(centers: &[Vec<f64>]) -> usize {
    nearest(centers, &vec![0.0; centers.first().map_or(0, |c| c.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::smoothness_audit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inst_1d() -> BumpInstance {
        BumpInstance::with_centers(1, 1.0, 5.0, vec![vec![-2.0], vec![0.0], vec![2.0]], 1).unwrap()
    }

    #[test]
    fn value_at_center() {
        let inst = BumpInstance::from_big_r(2, 10.0).unwrap();
        let (v, g) = inst.potential_eval(inst.omega()).unwrap();
        assert!((v + 11.0 / 64.0 * inst.r() * inst.r()).abs() < 1e-14);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn flat_region_is_zero() {
        let inst = inst_1d();
        assert_eq!(inst.potential_eval(&[3.5]).unwrap(), (0.0, vec![0.0]));
    }

    #[test]
    fn tail_value() {
        let inst = inst_1d();
        let (v, g) = inst.potential_eval(&[6.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15 && (g[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn init_potential_examples() {
        let p = InitPotential { d: 1, big_r: 3.0 };
        assert_eq!(p.eval(&[-4.0]).unwrap(), (0.5, vec![-1.0]));
        assert_eq!(p.eval(&[2.0]).unwrap(), (0.0, vec![0.0]));
        let q = InitPotential { d: 2, big_r: 1.0 };
        assert_eq!(q.eval(&[2.0, 0.0]).unwrap(), (0.5, vec![1.0, 0.0]));
        assert!(matches!(q.eval(&[1.0]), Err(InstanceError::Dimension { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(inst_1d().potential_eval(&[0.0, 1.0]), Err(InstanceError::Dimension { .. })));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let inst = BumpInstance::from_big_r(2, 12.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..2000 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-15.0..15.0)).collect();
            let (_, g) = inst.potential_eval(&x).unwrap();
            for i in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (inst.value(&xp) - inst.value(&xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "coord {i} at {x:?}");
            }
        }
    }

    #[test]
    fn instance_is_one_smooth() {
        for d in 1..=2 {
            let inst = BumpInstance::from_big_r(d, 10.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let lim = 2.0 * inst.big_r();
            let pairs: Vec<_> = (0..10_000)
                .map(|_| {
                    // half the pairs are local so the bump curvature is actually probed
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-lim..lim)).collect();
                    let y: Vec<f64> = if rng.random_bool(0.5) {
                        x.iter().map(|v| v + rng.random_range(-0.5..0.5)).collect()
                    } else {
                        (0..d).map(|_| rng.random_range(-lim..lim)).collect()
                    };
                    (x, y)
                })
                .collect();
            let rep = smoothness_audit(&inst, &pairs, 1.0);
            assert!(rep.passed(), "d={d} max ratio {}", rep.max_ratio);
        }
    }

    #[test]
    fn nearest_center_ties_take_lowest() {
        let inst = inst_1d();
        assert_eq!(inst.nearest_center(&[-1.0]), 0);
        assert_eq!(inst.nearest_center(&[0.4]), 1);
    }
}
