//! Langevin samplers, gradient descent, heat-flow post-processing and rejection sampling.
//!
//! Every potential evaluation goes through a [`CountingOracle`], so query counts are exact.

mod rejection;

pub use rejection::{grid_envelope, rejection_sample, warm_start_envelope, Envelope, GridNet, RejectionDraw};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::instance::{BumpInstance, InstanceError, QUAD_TOL};
use crate::oracle::{CountingOracle, InitOracle, OracleError, PiInitSampler};
use crate::potential::{norm, SmoothPotential};
use crate::quad::QuadError;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("envelope violated at {at:?}: acceptance ratio {ratio} > 1")]
    EnvelopeViolation { at: Vec<f64>, ratio: f64 },
    #[error("initialization oracle has no {0}")]
    MissingInit(&'static str),
    #[error("net of {size} points exceeds the limit of {limit}")]
    NetTooLarge { size: usize, limit: usize },
    #[error("expected {expected:.3e} rejection trials per sample, limit is {limit:.3e}")]
    TooManyTrials { expected: f64, limit: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn check_step(name: &str, h: f64) -> Result<(), SamplerError> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(SamplerError::Parameter(format!("{name} must be positive and finite, got {h}")))
    }
}

/// `k` LMC steps `X ← X − h∇V(X) + √(2h)ξ` from `x0`; exactly `k` queries.
pub fn lmc_chain<P: SmoothPotential, R: Rng + ?Sized>(
    oracle: &mut CountingOracle<P>,
    x0: &[f64],
    h: f64,
    k: u64,
    rng: &mut R,
) -> Result<Vec<f64>, SamplerError> {
    check_step("step size", h)?;
    let mut x = x0.to_vec();
    let mut g = vec![0.0; x.len()];
    let s = (2.0 * h).sqrt();
    for _ in 0..k {
        oracle.query_into(&x, &mut g)?;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += -h * gi + s * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(x)
}

/// One output of averaged LMC.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedDraw {
    pub x: Vec<f64>,
    /// The uniform time in `[0, Nh]`.
    pub t: f64,
    /// Full steps taken, `⌊t/h⌋`.
    pub full_steps: u64,
    /// Whether a partial step of length `t − kh > 0` was taken.
    pub partial: bool,
}

/// Averaged LMC: draw `t ~ U[0, Nh]`, run `⌊t/h⌋` full steps from a free init draw, then the
/// partial step of length `t − kh`. Uses `⌊t/h⌋` queries plus one for a partial step.
pub fn averaged_lmc_sample<P: SmoothPotential, R: Rng + ?Sized>(
    oracle: &mut CountingOracle<P>,
    init: &InitOracle,
    h: f64,
    n: u64,
    rng: &mut R,
) -> Result<AveragedDraw, SamplerError> {
    check_step("step size", h)?;
    if n == 0 {
        return Err(SamplerError::Parameter("averaged LMC needs N ≥ 1".into()));
    }
    let t = rng.random::<f64>() * n as f64 * h;
    let k = ((t / h).floor() as u64).min(n);
    let x0 = init.draw(rng);
    let mut x = lmc_chain(oracle, &x0, h, k, rng)?;
    let tau = t - k as f64 * h;
    let partial = tau > 0.0;
    if partial {
        let (_, g) = oracle.query(&x)?;
        let s = (2.0 * tau).sqrt();
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += -tau * gi + s * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(AveragedDraw { x, t, full_steps: k, partial })
}

/// Result of [`gradient_descent`].
#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    /// Queried iterate with the smallest gradient norm.
    pub best: Vec<f64>,
    pub best_grad_norm: f64,
    pub best_value: f64,
    /// Iterations actually run (equal to queries used).
    pub iterations: u64,
}

/// `T` steps of `x ← x − η∇V(x)`, returning the iterate with the smallest observed gradient.
pub fn gradient_descent<P: SmoothPotential>(
    oracle: &mut CountingOracle<P>,
    x0: &[f64],
    eta: f64,
    t: u64,
) -> Result<DescentResult, SamplerError> {
    descend(oracle, x0, eta, t, None)
}

/// Gradient descent that stops at the first iterate with `‖∇V‖ ≤ tol`.
pub fn descend_to_stationary<P: SmoothPotential>(
    oracle: &mut CountingOracle<P>,
    x0: &[f64],
    eta: f64,
    tol: f64,
    max_iter: u64,
) -> Result<DescentResult, SamplerError> {
    descend(oracle, x0, eta, max_iter, Some(tol))
}

fn descend<P: SmoothPotential>(
    oracle: &mut CountingOracle<P>,
    x0: &[f64],
    eta: f64,
    t: u64,
    stop: Option<f64>,
) -> Result<DescentResult, SamplerError> {
    if !(eta >= 0.0) || t == 0 {
        return Err(SamplerError::Parameter(format!("gradient descent needs η ≥ 0 and T ≥ 1, got {eta}, {t}")));
    }
    let mut x = x0.to_vec();
    let mut g = vec![0.0; x.len()];
    let mut best = DescentResult { best: x.clone(), best_grad_norm: f64::INFINITY, best_value: f64::NAN, iterations: 0 };
    for it in 0..t {
        let v = oracle.query_into(&x, &mut g)?;
        best.iterations = it + 1;
        let gn = norm(&g);
        if gn < best.best_grad_norm {
            best.best = x.clone();
            best.best_grad_norm = gn;
            best.best_value = v;
        }
        if stop.is_some_and(|tol| gn <= tol) {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= eta * gi;
        }
    }
    Ok(best)
}

/// `x + β^{−1/2}ξ`, a draw from `N(x, β⁻¹I)`. No queries.
pub fn stationary_gaussian_sample<R: Rng + ?Sized>(x: &[f64], beta: f64, rng: &mut R) -> Vec<f64> {
    let s = beta.sqrt().recip();
    x.iter().map(|xi| xi + s * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `x + √t·ξ`, one step of the heat semigroup `Q_t`.
pub fn heat_postprocess<R: Rng + ?Sized>(x: &[f64], t: f64, rng: &mut R) -> Result<Vec<f64>, SamplerError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SamplerError::Parameter(format!("heat time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    let s = t.sqrt();
    Ok(x.iter().map(|xi| xi + s * rng.sample::<f64, _>(StandardNormal)).collect())
}

/// Exact sampler for `π_ω` by rejection from `π_init` with envelope constant `exp(r²φ(0))`.
/// A test utility: it reads the potential directly and is not query-accounted.
#[derive(Debug, Clone)]
pub struct ExactTargetSampler {
    instance: BumpInstance,
    init: PiInitSampler,
    expected_trials: f64,
}

impl ExactTargetSampler {
    pub fn new(instance: &BumpInstance, max_expected_trials: f64) -> Result<Self, SamplerError> {
        let ints = instance.radial_integrals(QUAD_TOL)?;
        let expected_trials = instance.bump_depth().exp() * ints.z_init / ints.z_omega;
        if expected_trials > max_expected_trials {
            return Err(SamplerError::TooManyTrials { expected: expected_trials, limit: max_expected_trials });
        }
        Ok(ExactTargetSampler {
            instance: instance.clone(),
            init: PiInitSampler::new(instance.d(), instance.big_r())?,
            expected_trials,
        })
    }

    /// `exp(r²φ(0))·Z_init/Z_ω`.
    pub fn expected_trials(&self) -> f64 {
        self.expected_trials
    }

    /// A draw and the number of proposals it took.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, u64) {
        let inst = &self.instance;
        let depth = inst.bump_depth();
        let mut trials = 0;
        loop {
            trials += 1;
            let x = self.init.sample(rng);
            let dist = crate::potential::norm_diff(&x, inst.omega());
            let log_acc = inst.r() * inst.r() * inst.profile().at(dist / inst.r()).phi - depth;
            if rng.random::<f64>() < log_acc.exp() {
                return (x, trials);
            }
        }
    }
}

/// One exact draw from `π_ω`.
pub fn exact_target_sample<R: Rng + ?Sized>(instance: &BumpInstance, rng: &mut R) -> Result<Vec<f64>, SamplerError> {
    Ok(ExactTargetSampler::new(instance, 1e6)?.sample(rng).0)
}
