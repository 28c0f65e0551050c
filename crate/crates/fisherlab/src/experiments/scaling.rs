//! Scaling studies: Fisher-information decay of averaged LMC, and the query cost of
//! high-accuracy rejection sampling.

use serde::Serialize;

use super::config::{FiDecayConfig, RejectionAccuracyConfig, ScalingConfig};
use super::records::ScalingRow;
use super::ExperimentError;
use crate::diagnostics::{averaged_lmc_law, fisher_information, grid_from_potential};
use crate::instance::{BumpInstance, Constants};
use crate::quad::{bisect, integrate_pieces};

/// Ordinary least squares `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit, ExperimentError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(ExperimentError::Validation("a linear fit needs at least two paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::Validation("linear fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub study: &'static str,
    pub rows: Vec<ScalingRow>,
    /// For `fi_decay`, fit of `ln FI` on `ln N`; for `rejection_accuracy`, queries on `ln(1/ε)`.
    pub fit: LinearFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<DipWarmStart>,
    /// `1/(−ln(1 − e^{−3M₀}))`, the slope predicted for `rejection_accuracy`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_slope: Option<f64>,
}

pub fn run_scaling(cfg: &ScalingConfig, constants: &Constants) -> Result<ScalingReport, ExperimentError> {
    match cfg {
        ScalingConfig::FiDecay(c) => fi_decay(c, constants),
        ScalingConfig::RejectionAccuracy(c) => rejection_accuracy(c),
    }
}

/// Step size `h_N = c_h·√(K₀/(dN))/β` with `K₀ = ln 2`.
pub fn fi_decay_step(c_h: f64, d: usize, beta: f64, n: u64) -> f64 {
    c_h * (2f64.ln() / (d as f64 * n as f64)).sqrt() / beta
}

/// `FI(μ̄_N‖π_ω)` for averaged LMC started at `π_init`, by density evolution.
pub fn fi_decay(cfg: &FiDecayConfig, constants: &Constants) -> Result<ScalingReport, ExperimentError> {
    if cfg.ns.len() < 2 || cfg.ns.contains(&0) {
        return Err(ExperimentError::Validation("fi_decay needs at least two positive N values".into()));
    }
    if !(cfg.eps > 0.0) {
        return Err(ExperimentError::Validation(format!("eps must be positive, got {}", cfg.eps)));
    }
    // R = 1/(3ε√c_PI) directly: the c_R floor guards packing counts, which this study does not use
    let inst = BumpInstance::from_big_r(1, 1.0 / (3.0 * cfg.eps * constants.c_pi.sqrt()))?;
    let lim = inst.big_r() + 12.0;
    let pi = grid_from_potential(&inst, -lim, lim, cfg.grid_n)?;
    let mu0 = grid_from_potential(&inst.init_potential(), -lim, lim, cfg.grid_n)?;
    let mut rows = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let h = fi_decay_step(cfg.c_h, 1, crate::potential::SmoothPotential::beta(&inst), n);
        let law = averaged_lmc_law(&inst, &mu0, h, n as usize, cfg.refinement, cfg.mass_tol)?;
        rows.push(ScalingRow { x: n as f64, value: fisher_information(&law, &pi)?, stderr: 0.0 });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.x.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(ScalingReport { study: "fi_decay", rows, fit, warm_start: None, predicted_slope: None })
}

const REJ_BREAKS: [f64; 7] = [-12.0, -4.0, -1.0, 0.0, 1.0, 4.0, 12.0];
const REJ_QUAD_TOL: f64 = 1e-10;
const SERIES_TOL: f64 = 1e-17;

/// Warm start `μ₀ ∝ π·exp(a·s)` for `π = N(0,1)`, with `s(x) = 1 − 2e^{−x²/w²} ∈ [−1, 1)`.
///
/// Expanding `exp(−2a·e^{−x²/w²})` turns `μ₀` into the signed Gaussian mixture
/// `Σ_k w_k N(0, v_k)` with `v_k = 1/(1 + 2k/w²)` and `w_k = c·e^a(−2a)^k/k!·√v_k`, so its heat
/// flow is available in closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipWarmStart {
    pub a: f64,
    pub width: f64,
    /// Normalizer: `μ₀ = c·π·e^{a·s}`.
    pub c: f64,
    /// `sup |ln(μ₀/π)|`.
    pub m0: f64,
    pub weights: Vec<f64>,
    pub variances: Vec<f64>,
}

impl DipWarmStart {
    pub fn new(a: f64, width: f64) -> Result<Self, ExperimentError> {
        if !(a >= 0.0 && a.is_finite()) || !(width > 0.0) {
            return Err(ExperimentError::Validation(format!("need a ≥ 0 and width > 0, got {a}, {width}")));
        }
        let mut weights = Vec::new();
        let mut variances = Vec::new();
        let mut coef = a.exp();
        let mut k = 0usize;
        loop {
            let v = 1.0 / (1.0 + 2.0 * k as f64 / (width * width));
            weights.push(coef * v.sqrt());
            variances.push(v);
            k += 1;
            coef *= -2.0 * a / k as f64;
            if coef.abs() < SERIES_TOL && k as f64 > 2.0 * a {
                break;
            }
        }
        let z: f64 = weights.iter().sum();
        let c = 1.0 / z;
        weights.iter_mut().for_each(|w| *w *= c);
        let lc = c.ln();
        let m0 = (lc - a).abs().max((lc + a).abs());
        Ok(DipWarmStart { a, width, c, m0, weights, variances })
    }

    /// Warm start whose `M₀` equals `m0`.
    pub fn with_m0(m0: f64, width: f64) -> Result<Self, ExperimentError> {
        if !(m0 > 0.0 && m0 <= 6.0) {
            return Err(ExperimentError::Validation(format!("M₀ must lie in (0, 6], got {m0}")));
        }
        let mut hi = m0;
        while DipWarmStart::new(hi, width)?.m0 < m0 {
            hi *= 2.0;
        }
        let a = bisect(|a| DipWarmStart::new(a, width).map(|w| w.m0 - m0).unwrap_or(f64::NAN), 0.0, hi, 1e-14)?;
        DipWarmStart::new(a, width)
    }

    /// `μ₀(x)` evaluated directly.
    pub fn density(&self, x: f64) -> f64 {
        let s = 1.0 - 2.0 * (-(x * x) / (self.width * self.width)).exp();
        self.c * gauss(x, 1.0) * (self.a * s).exp()
    }

    /// Mean proposals per accepted sample from the warm-start envelope, `e^{3M₀}`.
    pub fn expected_trials(&self) -> f64 {
        (3.0 * self.m0).exp()
    }
}

fn gauss(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Probability that `n` rejection trials all fail, with acceptance rate `e^{−3M₀}`.
pub fn failure_probability(m0: f64, n: u64) -> f64 {
    (n as f64 * (-(-3.0 * m0).exp()).ln_1p()).exp()
}

/// `FI(((1−p)π + p·μ₀)Q_t ‖ π)` for `π = N(0,1)`, by adaptive quadrature.
pub fn postprocessed_fi(ws: &DipWarmStart, p: f64, t: f64) -> Result<f64, ExperimentError> {
    let integrand = |x: f64| {
        let g = gauss(x, 1.0 + t);
        // ν and ν′ + xν, the latter assembled termwise to avoid cancellation
        let mut nu = (1.0 - p) * g;
        let mut dev = (1.0 - p) * g * x * (1.0 - 1.0 / (1.0 + t));
        for (w, v) in ws.weights.iter().zip(&ws.variances) {
            let s = v + t;
            let gk = gauss(x, s);
            nu += p * w * gk;
            dev += p * w * gk * x * (1.0 - 1.0 / s);
        }
        if nu > 0.0 {
            dev * dev / nu
        } else {
            0.0
        }
    };
    Ok(integrate_pieces(integrand, &REJ_BREAKS, REJ_QUAD_TOL)?)
}

/// Smallest number of rejection trials `N` for which the post-processed law has `FI ≤ ε²`.
pub fn min_trials_for_accuracy(ws: &DipWarmStart, eps: f64, t: f64) -> Result<u64, ExperimentError> {
    let target = eps * eps;
    let ok = |n: u64| postprocessed_fi(ws, failure_probability(ws.m0, n), t).map(|fi| fi <= target);
    if !ok(u64::MAX / 4)? {
        return Err(ExperimentError::Validation(format!("heat time {t} alone exceeds the target FI at ε = {eps}")));
    }
    if ok(0)? {
        return Ok(0);
    }
    let mut hi = 1u64;
    while !ok(hi)? {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Queries (`N` trials plus one normalization query) against `ln(1/ε)`.
pub fn rejection_accuracy(cfg: &RejectionAccuracyConfig) -> Result<ScalingReport, ExperimentError> {
    if cfg.eps.len() < 2 || cfg.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(ExperimentError::Validation("rejection_accuracy needs at least two ε values in (0, 1)".into()));
    }
    let ws = DipWarmStart::with_m0(cfg.m0, cfg.width)?;
    let mut rows = Vec::with_capacity(cfg.eps.len());
    for &eps in &cfg.eps {
        let t = cfg.c_t * eps * eps;
        let n = min_trials_for_accuracy(&ws, eps, t)?;
        rows.push(ScalingRow { x: (1.0 / eps).ln(), value: (n + 1) as f64, stderr: 0.0 });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let fit = linear_fit(&xs, &ys)?;
    let predicted = -1.0 / (-(-3.0 * ws.m0).exp()).ln_1p();
    Ok(ScalingReport { study: "rejection_accuracy", rows, fit, warm_start: Some(ws), predicted_slope: Some(predicted) })
}
