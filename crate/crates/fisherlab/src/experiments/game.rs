//! The identification game: recover the bump index `ω` from one sample or a scan of queries.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::bounds::fano_bound;
use super::config::{GameConfig, Strategy};
use super::records::TrialRecord;
use super::{trial_rng, ExperimentError};
use crate::diagnostics::{divergence, grid_from_potential, DivergenceKind};
use crate::instance::{BumpInstance, Constants, QUAD_TOL};
use crate::oracle::{CountingOracle, InitOracle};
use crate::potential::SmoothPotential;
use crate::samplers::{averaged_lmc_sample, rejection_sample, warm_start_envelope};

/// Aggregate outcome of a game run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameStats {
    pub strategy: Strategy,
    pub num_centers: usize,
    pub budget: u64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub stderr: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_queries: f64,
    /// Fano lower bound on the failure probability, when `M ≥ 4`.
    pub fano_failure: Option<f64>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Detection threshold for the scan: `V(center) < −r²φ(0)/2` only inside the bump.
pub fn scan_threshold(instance: &BumpInstance) -> f64 {
    -0.5 * instance.bump_depth()
}

/// Outcome of probing centers in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanOutcome {
    Detected(usize),
    /// No bump found; the indices not yet probed.
    Unprobed(Vec<usize>),
}

pub fn scan_probe<P: SmoothPotential>(
    oracle: &mut CountingOracle<P>,
    instance: &BumpInstance,
    budget: u64,
) -> Result<ScanOutcome, ExperimentError> {
    let m = instance.num_centers();
    let probes = (budget as usize).min(m);
    let threshold = scan_threshold(instance);
    for (j, c) in instance.centers().iter().enumerate().take(probes) {
        let (v, _) = oracle.query(c)?;
        if v < threshold {
            return Ok(ScanOutcome::Detected(j));
        }
    }
    Ok(ScanOutcome::Unprobed((probes..m).collect()))
}

/// `sup |ln(π_init/π_ω)| = max(r²φ(0) − ln(Z_ω/Z_init), ln(Z_ω/Z_init))`.
pub fn warm_m0(instance: &BumpInstance) -> Result<f64, ExperimentError> {
    let ints = instance.radial_integrals(QUAD_TOL)?;
    let l = (ints.z_omega / ints.z_init).ln();
    Ok((instance.bump_depth() - l).max(l))
}

/// `π_init` as a warm start for `π_ω`, with its density and `M₀`.
pub fn warm_init(instance: &BumpInstance) -> Result<InitOracle, ExperimentError> {
    Ok(InitOracle::pi_init(instance.d(), instance.big_r())?.with_m0(warm_m0(instance)?))
}

/// Per-trial acceptance probability of warm-start rejection from `π_init`:
/// `e^{V_ω(0) − 2M₀}·Z_ω/Z_init`.
pub fn warm_acceptance(instance: &BumpInstance) -> Result<f64, ExperimentError> {
    let ints = instance.radial_integrals(QUAD_TOL)?;
    let m0 = warm_m0(instance)?;
    let v0 = instance.value(&vec![0.0; instance.d()]);
    Ok((v0 - 2.0 * m0).exp() * ints.z_omega / ints.z_init)
}

/// Probability that warm-start rejection with `budget` queries (one spent on normalization)
/// returns its fallback draw.
pub fn rejection_warm_failure(instance: &BumpInstance, budget: u64) -> Result<f64, ExperimentError> {
    Ok((1.0 - warm_acceptance(instance)?).powf(budget.saturating_sub(1) as f64))
}

/// Exact TV between the rejection-warm output law `(1−p)π_ω + p·π_init` and `π_ω`, in 1-D.
pub fn rejection_warm_tv(instance: &BumpInstance, budget: u64, grid_n: usize) -> Result<f64, ExperimentError> {
    if instance.d() != 1 {
        return Err(ExperimentError::Validation("grid TV is available in one dimension only".into()));
    }
    let lim = instance.big_r() + 12.0;
    let target = grid_from_potential(instance, -lim, lim, grid_n)?;
    let init = grid_from_potential(&instance.init_potential(), -lim, lim, grid_n)?;
    let p = rejection_warm_failure(instance, budget)?;
    Ok(p * divergence(&init, &target, DivergenceKind::Tv)?)
}

/// One trial against `instance` (whose `ω` is the hidden index). Returns the guess and queries.
pub fn play_trial<R: Rng>(
    instance: &BumpInstance,
    strategy: Strategy,
    budget: u64,
    h: Option<f64>,
    init: Option<&InitOracle>,
    rng: &mut R,
) -> Result<(usize, u64), ExperimentError> {
    let mut oracle = CountingOracle::new(instance).with_budget(budget);
    let guess = match strategy {
        Strategy::Scan => match scan_probe(&mut oracle, instance, budget)? {
            ScanOutcome::Detected(j) => j,
            ScanOutcome::Unprobed(rest) if rest.is_empty() => 0,
            ScanOutcome::Unprobed(rest) => rest[rng.random_range(0..rest.len())],
        },
        Strategy::AveragedLmc => {
            let h = h.ok_or_else(|| ExperimentError::Validation("averaged_lmc strategy needs a step size h".into()))?;
            let init = init.expect("init oracle prepared by caller");
            let draw = averaged_lmc_sample(&mut oracle, init, h, budget, rng)?;
            instance.nearest_center(&draw.x)
        }
        Strategy::RejectionWarm => {
            if budget < 2 {
                return Err(ExperimentError::Validation("rejection_warm needs a budget of at least 2".into()));
            }
            let init = init.expect("init oracle prepared by caller");
            let env = warm_start_envelope(init, &mut oracle)?;
            let draw = rejection_sample(&mut oracle, &env, budget - 1, rng)?;
            instance.nearest_center(&draw.x)
        }
    };
    Ok((guess, oracle.count()))
}

/// Runs `trials` independent trials; trial `i` uses RNG stream `i` of `seed`.
pub fn run_game_on(
    family: &BumpInstance,
    strategy: Strategy,
    budget: u64,
    h: Option<f64>,
    trials: u64,
    seed: u64,
    timed: bool,
) -> Result<GameStats, ExperimentError> {
    let m = family.num_centers();
    if budget == 0 && strategy != Strategy::Scan {
        return Err(ExperimentError::Validation("sampling strategies need a positive budget".into()));
    }
    let init = match strategy {
        Strategy::Scan => None,
        Strategy::AveragedLmc => Some(InitOracle::pi_init(family.d(), family.big_r())?),
        Strategy::RejectionWarm => Some(warm_init(family)?),
    };
    let mut records = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let start = Instant::now();
        let mut rng = trial_rng(seed, trial);
        let omega = rng.random_range(0..m);
        let inst = family.with_omega(omega)?;
        let (guess, queries) = play_trial(&inst, strategy, budget, h, init.as_ref(), &mut rng)?;
        let wall_ms = if timed { start.elapsed().as_millis() as u64 } else { 0 };
        records.push(TrialRecord { trial, omega_index: omega, queries, success: guess == omega, wall_ms });
    }
    Ok(summarize(strategy, m, budget, records))
}

pub fn run_identification_game(
    cfg: &GameConfig,
    constants: &Constants,
    trials: u64,
    seed: u64,
    timed: bool,
) -> Result<GameStats, ExperimentError> {
    let family = cfg.instance.build(constants)?;
    run_game_on(&family, cfg.strategy, cfg.budget, cfg.h, trials, seed, timed)
}

fn summarize(strategy: Strategy, m: usize, budget: u64, records: Vec<TrialRecord>) -> GameStats {
    let n = records.len() as u64;
    let successes = records.iter().filter(|r| r.success).count() as u64;
    let p = successes as f64 / n.max(1) as f64;
    let stderr = (p * (1.0 - p) / n.max(1) as f64).sqrt();
    let (ci_low, ci_high) = wilson(successes, n, 1.96);
    let mean_queries = records.iter().map(|r| r.queries as f64).sum::<f64>() / n.max(1) as f64;
    let fano_failure = fano_bound(m as u64, budget).ok();
    GameStats {
        strategy,
        num_centers: m,
        budget,
        trials: n,
        successes,
        success_rate: p,
        stderr,
        ci_low,
        ci_high,
        mean_queries,
        fano_failure,
        records,
    }
}

/// Wilson score interval.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A non-negative fraction in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Ratio { num: num / g, den: den / g }
    }

    fn add(self, other: Ratio) -> Ratio {
        let g = gcd(self.den, other.den);
        let den = self.den / g * other.den;
        Ratio::new(self.num * (den / self.den) + other.num * (den / other.den), den)
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact scan success probability by enumerating every `ω`, each with probability `1/M`,
/// and averaging over the uniform guess among unprobed centers.
pub fn scan_success_exact(family: &BumpInstance, budget: u64) -> Result<Ratio, ExperimentError> {
    let m = family.num_centers() as u64;
    let mut total = Ratio::new(0, 1);
    for omega in 0..family.num_centers() {
        let inst = family.with_omega(omega)?;
        let mut oracle = CountingOracle::new(&inst).with_budget(budget);
        let p = match scan_probe(&mut oracle, &inst, budget)? {
            ScanOutcome::Detected(j) => Ratio::new((j == omega) as u64, 1),
            ScanOutcome::Unprobed(rest) if rest.contains(&omega) => Ratio::new(1, rest.len() as u64),
            ScanOutcome::Unprobed(_) => Ratio::new(0, 1),
        };
        total = total.add(Ratio::new(p.num, p.den * m));
    }
    Ok(total)
}

/// The ten-center 1-D family with `r = 1`, `R = 10` and centers `−9, −7, …, 9`.
pub fn ten_center_family() -> Result<BumpInstance, ExperimentError> {
    let centers = (0..10).map(|k| vec![-9.0 + 2.0 * k as f64]).collect();
    Ok(BumpInstance::with_centers(1, 1.0, 10.0, centers, 0)?)
}
