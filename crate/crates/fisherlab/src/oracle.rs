//! Query accounting: counting local oracles and free initialization oracles.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{tail_mass, unit_ball_volume, InstanceError, QUAD_TOL};
use crate::potential::SmoothPotential;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64, count: u64 },
    #[error("query point has {got} coordinates, potential has dimension {expected}")]
    Dimension { expected: usize, got: usize },
}

/// A local oracle returning `(V(x), ∇V(x))` and counting every call.
#[derive(Debug, Clone)]
pub struct CountingOracle<P> {
    potential: P,
    count: u64,
    budget: Option<u64>,
    trace: Option<Vec<Vec<f64>>>,
}

impl<P: SmoothPotential> CountingOracle<P> {
    pub fn new(potential: P) -> Self {
        CountingOracle { potential, count: 0, budget: None, trace: None }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Record every query point (off by default).
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn beta(&self) -> f64 {
        self.potential.beta()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Queries left under the budget, if one is set.
    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b - self.count)
    }

    /// Writes `∇V(x)` into `grad`, returns `V(x)`, and charges one query.
    pub fn query_into(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64, OracleError> {
        let d = self.potential.dim();
        if x.len() != d || grad.len() != d {
            return Err(OracleError::Dimension { expected: d, got: x.len().min(grad.len()) });
        }
        if let Some(b) = self.budget {
            if self.count >= b {
                return Err(OracleError::BudgetExhausted { budget: b, count: self.count });
            }
        }
        self.count += 1;
        if let Some(t) = self.trace.as_mut() {
            t.push(x.to_vec());
        }
        Ok(self.potential.value_grad(x, grad))
    }

    pub fn query(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>), OracleError> {
        let mut g = vec![0.0; self.potential.dim()];
        let v = self.query_into(x, &mut g)?;
        Ok((v, g))
    }

    pub fn report(&self) -> BudgetReport {
        BudgetReport { count: self.count, budget: self.budget, trace: self.trace.clone() }
    }

    /// The wrapped potential, for diagnostics only. Samplers never call this.
    pub fn potential(&self) -> &P {
        &self.potential
    }

    pub fn into_inner(self) -> P {
        self.potential
    }
}

/// Snapshot of an oracle's accounting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub count: u64,
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<f64>>>,
}

/// Read-only accounting snapshot.
pub fn budget_report<P: SmoothPotential>(oracle: &CountingOracle<P>) -> BudgetReport {
    oracle.report()
}

type DrawFn = dyn Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync;
type LogDensityFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Free samples from `μ₀`, with the declared bounds `K₀ ≥ KL(μ₀‖π)` and optionally
/// `M₀ ≥ sup|ln(μ₀/π)|`. The density is exposed for envelopes and diagnostics.
pub struct InitOracle {
    dim: usize,
    sampler: Box<DrawFn>,
    log_density: Option<Box<LogDensityFn>>,
    k0: f64,
    m0: Option<f64>,
}

impl std::fmt::Debug for InitOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitOracle")
            .field("dim", &self.dim)
            .field("k0", &self.k0)
            .field("m0", &self.m0)
            .field("has_density", &self.log_density.is_some())
            .finish_non_exhaustive()
    }
}

impl InitOracle {
    pub fn new(dim: usize, k0: f64, sampler: impl Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static) -> Self {
        InitOracle { dim, sampler: Box::new(sampler), log_density: None, k0, m0: None }
    }

    /// Attach the normalized log-density `ln μ₀`.
    pub fn with_log_density(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.log_density = Some(Box::new(f));
        self
    }

    pub fn with_m0(mut self, m0: f64) -> Self {
        self.m0 = Some(m0);
        self
    }

    /// `N(mean, var·I)`.
    pub fn gaussian(mean: Vec<f64>, var: f64, k0: f64) -> Self {
        let d = mean.len();
        let sd = var.sqrt();
        let m2 = mean.clone();
        let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI * var).ln();
        InitOracle::new(d, k0, move |rng| mean.iter().map(|m| m + sd * rng.sample::<f64, _>(StandardNormal)).collect())
            .with_log_density(move |x| log_norm - 0.5 * x.iter().zip(&m2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / var)
    }

    /// `π_init` for the given `(d, R)`, with the declared `K₀ = ln 2`.
    pub fn pi_init(d: usize, big_r: f64) -> Result<Self, InstanceError> {
        let s = PiInitSampler::new(d, big_r)?;
        let log_z = s.z_init.ln();
        let s2 = s.clone();
        Ok(InitOracle::new(d, std::f64::consts::LN_2, move |rng| s2.sample(rng)).with_log_density(move |x| {
            let n = crate::potential::norm(x);
            let e = (n - big_r).max(0.0);
            -0.5 * e * e - log_z
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn m0(&self) -> Option<f64> {
        self.m0
    }

    /// A sample from `μ₀`. Never touches any query counter.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut adapter = RngAdapter(rng);
        (self.sampler)(&mut adapter)
    }

    pub fn log_density(&self, x: &[f64]) -> Option<f64> {
        self.log_density.as_ref().map(|f| f(x))
    }

    pub fn has_density(&self) -> bool {
        self.log_density.is_some()
    }
}

/// Free draw from the initialization oracle.
pub fn draw_init<R: Rng + ?Sized>(init: &InitOracle, rng: &mut R) -> Vec<f64> {
    init.draw(rng)
}

struct RngAdapter<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Exact sampler for `π_init ∝ exp(−½(‖x‖−R)₊²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiInitSampler {
    pub d: usize,
    pub big_r: f64,
    pub z_init: f64,
    /// `V_d R^d / Z_init`, the mass of `B_R`.
    pub ball_mass: f64,
}

impl PiInitSampler {
    pub fn new(d: usize, big_r: f64) -> Result<Self, InstanceError> {
        if !(big_r > 0.0) {
            return Err(InstanceError::Domain(format!("R must be positive, got {big_r}")));
        }
        let ball = unit_ball_volume(d) * big_r.powi(d as i32);
        let z_init = ball + tail_mass(d, big_r, QUAD_TOL)?;
        Ok(PiInitSampler { d, big_r, z_init, ball_mass: ball / z_init })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let dir = random_direction(self.d, rng);
        let radius = if rng.random::<f64>() < self.ball_mass {
            self.big_r * rng.random::<f64>().powf(1.0 / self.d as f64)
        } else {
            self.big_r + self.tail_radius(rng)
        };
        dir.into_iter().map(|u| u * radius).collect()
    }

    /// A draw from `π_init` conditioned on `‖x‖ > R`.
    pub fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let dir = random_direction(self.d, rng);
        let radius = self.big_r + self.tail_radius(rng);
        dir.into_iter().map(|u| u * radius).collect()
    }

    /// Draws `s ≥ 0` with density `∝ (s+R)^{d−1} e^{−s²/2}`.
    fn tail_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = (self.d - 1) as f64;
        let shift = k / self.big_r;
        loop {
            let s: f64 = shift + rng.sample::<f64, _>(StandardNormal);
            if s < 0.0 {
                continue;
            }
            let u = s / self.big_r;
            if self.d == 1 || rng.random::<f64>() < tail_acceptance(u, k) {
                return s;
            }
        }
    }
}

/// `((1+u)e^{−u})^k`, at most 1 because `1 + u ≤ eᵘ`.
pub fn tail_acceptance(u: f64, k: f64) -> f64 {
    (k * ((1.0 + u).ln() - u)).exp()
}

/// One draw from `π_init`.
pub fn sample_pi_init<R: Rng + ?Sized>(d: usize, big_r: f64, rng: &mut R) -> Result<Vec<f64>, InstanceError> {
    Ok(PiInitSampler::new(d, big_r)?.sample(rng))
}

/// Uniform point on the unit sphere; a random sign in one dimension.
pub fn random_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    if d == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::potential::norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
