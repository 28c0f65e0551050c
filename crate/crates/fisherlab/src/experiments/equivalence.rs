//! Stationary points versus Fisher-information sampling, in both directions.
//!
//! With `β = d/ε²`, a point `x` with `‖∇V(x)‖ ≤ ε` gives `N(x, β⁻¹)` with small `FI(·‖π_β)`,
//! and a draw from a law with small `FI(·‖π_β)` is `3ε`-stationary with probability about ½.

use serde::Serialize;

use super::config::{EquivalenceConfig, TestPotential};
use super::scaling::linear_fit;
use super::{trial_rng, ExperimentError};
use crate::diagnostics::{fisher_information, grid_from_potential, kl_init_bound, GridDensity1D};
use crate::oracle::{CountingOracle, InitOracle};
use crate::potential::{CosineWell, Ramp, SmoothPotential, Tilted};
use crate::samplers::{averaged_lmc_sample, descend_to_stationary};

/// Grid used for the direction-1 quadrature.
pub const EQUIV_GRID: (f64, f64, usize) = (-4.0, 4.0, 8001);
const DESCENT_MAX_ITER: u64 = 1_000_000;
const SWEEP_MAX_N: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    /// Smallest `N` whose estimated success rate reaches ½.
    pub min_n: u64,
    pub success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub eps: f64,
    pub beta: f64,
    pub d: usize,
    /// Gradient-descent stationary point and its cost.
    pub descent_x: f64,
    pub descent_grad_norm: f64,
    pub descent_queries: u64,
    /// `FI(N(x*, β⁻¹)‖π_β)` and the bound `10βd`.
    pub fi_direction1: f64,
    pub fi_bound: f64,
    /// `E_{π_β}‖∇(βV)‖²` against `2βd`, and `π_β(‖∇V‖ ≤ √6·ε)`.
    pub control_moment: f64,
    pub control_bound: f64,
    pub control_fraction: f64,
    /// Averaged-LMC settings and outcome.
    pub h: f64,
    pub n_steps: u64,
    pub trials: u64,
    pub success_fraction: f64,
    pub success_stderr: f64,
    pub mean_queries: f64,
    pub sweep: Vec<SweepPoint>,
    /// Fitted slope of `ln N` against `ln ε`.
    pub sweep_slope: Option<f64>,
    #[serde(skip)]
    pub records: Vec<EquivalenceTrial>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceTrial {
    pub trial: u64,
    pub grad_norm: f64,
    pub queries: u64,
    pub success: bool,
}

pub const EQUIVALENCE_HEADER: &str = "trial,grad_norm,queries,success";

pub fn equivalence_csv(records: &[EquivalenceTrial]) -> String {
    let mut out = String::from(EQUIVALENCE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{},{},{}\n", r.trial, super::fmt_float(r.grad_norm), r.queries, r.success as u8));
    }
    out
}

fn test_potential(p: TestPotential) -> CosineWell {
    match p {
        TestPotential::CosineWell => CosineWell,
    }
}

fn check(cfg: &EquivalenceConfig) -> Result<(), ExperimentError> {
    if cfg.d != 1 {
        return Err(ExperimentError::Validation(format!("the shipped test potential is one-dimensional, got d = {}", cfg.d)));
    }
    for (name, v) in [("eps", cfg.eps), ("delta", cfg.delta), ("c_h", cfg.c_h), ("c_n", cfg.c_n)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ExperimentError::Validation(format!("{name} must be positive, got {v}")));
        }
    }
    if cfg.c_h >= 1.0 {
        return Err(ExperimentError::Validation(format!("c_h must be below 1 for a stable step, got {}", cfg.c_h)));
    }
    Ok(())
}

/// Direction 1: descend to an `ε`-stationary point, then measure `FI(N(x*, β⁻¹)‖π_β)`.
pub fn direction_one<P: SmoothPotential>(
    potential: &P,
    eps: f64,
    x0: f64,
) -> Result<(f64, f64, u64, f64), ExperimentError> {
    let beta = 1.0 / (eps * eps);
    let mut oracle = CountingOracle::new(potential);
    let eta = 1.0 / potential.beta();
    let res = descend_to_stationary(&mut oracle, &[x0], eta, eps, DESCENT_MAX_ITER)?;
    if res.best_grad_norm > eps {
        return Err(ExperimentError::Validation(format!("gradient descent did not reach ‖∇V‖ ≤ {eps}")));
    }
    let x = res.best[0];
    let (lo, hi, n) = EQUIV_GRID;
    let pi = grid_from_potential(&Tilted { inner: potential, factor: beta }, lo, hi, n)?;
    let mu = GridDensity1D::from_log_density(lo, hi, n, |y| -0.5 * beta * (y - x) * (y - x))?;
    let fi = fisher_information(&mu, &pi)?;
    Ok((x, res.best_grad_norm, oracle.count(), fi))
}

pub fn run_equivalence(cfg: &EquivalenceConfig, trials: u64, seed: u64) -> Result<EquivalenceReport, ExperimentError> {
    check(cfg)?;
    let v = test_potential(cfg.potential);
    let d = cfg.d;
    let eps = cfg.eps;
    let beta = d as f64 / (eps * eps);

    let (descent_x, descent_grad_norm, descent_queries, fi_direction1) = direction_one(&v, eps, cfg.x0)?;

    // oracle-free control on π_β itself
    let (lo, hi, n) = EQUIV_GRID;
    let tilted = Tilted { inner: v, factor: beta };
    let pi = grid_from_potential(&tilted, lo, hi, n)?;
    let control_moment = pi.expect(|x| tilted.grad(&[x])[0].powi(2));
    let lim = 6f64.sqrt() * eps;
    let control_fraction = pi.expect(|x| if v.grad(&[x])[0].abs() <= lim { 1.0 } else { 0.0 });

    // direction 2: averaged LMC on π_β from N(0, β⁻¹)
    let h = cfg.c_h * eps * eps / d as f64;
    let n_steps = (cfg.c_n * d as f64 * cfg.delta / (eps * eps)).ceil() as u64;
    let k0 = kl_init_bound(cfg.delta, beta, d, 1.0)?;
    let init = InitOracle::gaussian(vec![0.0; d], 1.0 / beta, k0);
    let mut records = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut oracle = CountingOracle::new(&tilted).with_budget(n_steps);
        let draw = averaged_lmc_sample(&mut oracle, &init, h, n_steps, &mut rng)?;
        let grad_norm = v.grad(&draw.x)[0].abs();
        records.push(EquivalenceTrial { trial, grad_norm, queries: oracle.count(), success: grad_norm <= 3.0 * eps });
    }
    let nt = records.len().max(1) as f64;
    let success_fraction = records.iter().filter(|r| r.success).count() as f64 / nt;
    let success_stderr = (success_fraction * (1.0 - success_fraction) / nt).sqrt();
    let mean_queries = records.iter().map(|r| r.queries as f64).sum::<f64>() / nt;

    let sweep = cfg
        .sweep
        .iter()
        .map(|&e| sweep_point(e, cfg.delta, cfg.c_h, cfg.sweep_trials, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let sweep_slope = if sweep.len() >= 2 {
        let xs: Vec<f64> = sweep.iter().map(|p| p.eps.ln()).collect();
        let ys: Vec<f64> = sweep.iter().map(|p| (p.min_n as f64).ln()).collect();
        Some(linear_fit(&xs, &ys)?.slope)
    } else {
        None
    };

    Ok(EquivalenceReport {
        eps,
        beta,
        d,
        descent_x,
        descent_grad_norm,
        descent_queries,
        fi_direction1,
        fi_bound: 10.0 * beta * d as f64,
        control_moment,
        control_bound: 2.0 * beta * d as f64,
        control_fraction,
        h,
        n_steps,
        trials,
        success_fraction,
        success_stderr,
        mean_queries,
        sweep,
        sweep_slope,
        records,
    })
}

/// Fraction of `trials` averaged-LMC runs with budget `n` on the tilted ramp that end
/// `3ε`-stationary. Trial `i` reuses stream `i` for every `n`.
fn ramp_success(eps: f64, delta: f64, c_h: f64, n: u64, trials: u64, seed: u64) -> Result<f64, ExperimentError> {
    let ramp = Ramp { slope: 4.0 * eps, center: delta / (4.0 * eps) };
    let tilted = Tilted { inner: ramp, factor: 1.0 / (eps * eps) };
    let h = c_h * eps * eps;
    let init = InitOracle::new(1, 0.0, |_| vec![0.0]);
    let mut ok = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut oracle = CountingOracle::new(&tilted).with_budget(n);
        let draw = averaged_lmc_sample(&mut oracle, &init, h, n, &mut rng)?;
        if ramp.grad(&draw.x)[0].abs() <= 3.0 * eps {
            ok += 1;
        }
    }
    Ok(ok as f64 / trials.max(1) as f64)
}

/// Smallest `N` reaching success ½ on a ramp whose minimizer sits at distance `Δ/(4ε)` from
/// the start, found by doubling and then bisection.
pub fn sweep_point(eps: f64, delta: f64, c_h: f64, trials: u64, seed: u64) -> Result<SweepPoint, ExperimentError> {
    if !(eps > 0.0) || trials == 0 {
        return Err(ExperimentError::Validation(format!("sweep needs ε > 0 and trials ≥ 1, got {eps}, {trials}")));
    }
    let f = |n| ramp_success(eps, delta, c_h, n, trials, seed);
    let mut hi = 1u64;
    let mut s_hi = f(hi)?;
    while s_hi < 0.5 {
        hi *= 2;
        if hi > SWEEP_MAX_N {
            return Err(ExperimentError::Validation(format!("no N ≤ {SWEEP_MAX_N} reaches success ½ at ε = {eps}")));
        }
        s_hi = f(hi)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 && lo > 0 {
        let mid = lo + (hi - lo) / 2;
        let s = f(mid)?;
        if s >= 0.5 {
            hi = mid;
            s_hi = s;
        } else {
            lo = mid;
        }
    }
    Ok(SweepPoint { eps, min_n: hi, success: s_hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64) -> EquivalenceConfig {
        EquivalenceConfig {
            potential: TestPotential::CosineWell,
            eps,
            d: 1,
            delta: 1.0,
            c_h: 0.5,
            c_n: 1.0,
            x0: 3.0,
            sweep: vec![],
            sweep_trials: 50,
        }
    }

    #[test]
    fn direction_one_bound() {
        let (x, g, q, fi) = direction_one(&CosineWell, 0.1, 3.0).unwrap();
        assert!(g <= 0.1 && q >= 1);
        assert!(CosineWell.grad(&[x])[0].abs() <= 0.1);
        assert!(fi <= 1000.0, "{fi}");
    }

    #[test]
    fn fi_of_exact_minimizer_gaussian_is_small() {
        // at x* = 0 the only mismatch is the cosine curvature correction
        let (x, _, _, fi) = direction_one(&CosineWell, 1e-6, 0.0).unwrap();
        assert_eq!(x, 0.0);
        assert!(fi < 1.0, "{fi}");
    }

    #[test]
    fn control_and_direction_two() {
        let r = run_equivalence(&cfg(0.1), 200, 1).unwrap();
        assert!(r.control_moment <= r.control_bound);
        assert!(r.control_fraction >= 0.5);
        assert!(r.success_fraction >= 0.5 - 3.0 * r.success_stderr);
        assert!(r.records.iter().all(|t| t.queries <= r.n_steps));
        assert_eq!(r.n_steps, 100);
    }

    #[test]
    fn sweep_scales_like_inverse_square() {
        let a = sweep_point(0.1, 1.0, 0.5, 100, 3).unwrap();
        let b = sweep_point(0.05, 1.0, 0.5, 100, 3).unwrap();
        let ratio = b.min_n as f64 / a.min_n as f64;
        assert!((2.5..6.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = cfg(0.1);
        c.d = 2;
        assert!(run_equivalence(&c, 1, 0).is_err());
        let mut c = cfg(0.1);
        c.c_h = 1.5;
        assert!(run_equivalence(&c, 1, 0).is_err());
    }
}
