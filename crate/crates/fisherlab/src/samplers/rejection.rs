//! Rejection sampling against query-built envelopes.
//!
//! An envelope is an unnormalized density `μ̃` with a sampler, chosen so that
//! `π̃(x) = exp(−(V(x) − c)) ≤ μ̃(x)` where `c` is the reference value fixed when the envelope
//! was built. Acceptance of a proposal `x` costs one query.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore};

use super::SamplerError;
use crate::instance::{tail_mass, QUAD_TOL};
use crate::oracle::{CountingOracle, InitOracle, PiInitSampler};
use crate::potential::{norm, SmoothPotential};
use crate::quad::integrate;

/// Slack on `log(π̃/μ̃) ≤ 0` before an envelope is declared violated.
const RATIO_SLACK: f64 = 1e-9;

type LogDensity<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;
type DrawFn<'a> = Box<dyn Fn(&mut dyn RngCore) -> Vec<f64> + 'a>;

pub struct Envelope<'a> {
    dim: usize,
    reference: f64,
    ratio_bound: f64,
    log_density: LogDensity<'a>,
    draw: DrawFn<'a>,
}

impl std::fmt::Debug for Envelope<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Envelope").field("dim", &self.dim).field("reference", &self.reference)
            .field("ratio_bound", &self.ratio_bound)
            .finish_non_exhaustive()
    }
}

impl<'a> Envelope<'a> {
    /// `log_density` is `ln μ̃`; `draw` samples from `μ̃` normalized; `ratio_bound` bounds `Z_μ̃/Z_π̃`.
    pub fn new(
        dim: usize,
        reference: f64,
        ratio_bound: f64,
        log_density: impl Fn(&[f64]) -> f64 + 'a,
        draw: impl Fn(&mut dyn RngCore) -> Vec<f64> + 'a,
    ) -> Self {
        Envelope { dim, reference, ratio_bound, log_density: Box::new(log_density), draw: Box::new(draw) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The constant `c` in `π̃ = exp(−(V − c))`.
    pub fn reference(&self) -> f64 {
        self.reference
    }

    /// Upper bound on `Z_μ̃/Z_π̃`, the mean number of trials per accepted draw.
    pub fn ratio_bound(&self) -> f64 {
        self.ratio_bound
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        (self.log_density)(x)
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (self.draw)(rng)
    }
}

/// Outcome of [`rejection_sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionDraw {
    pub x: Vec<f64>,
    /// False when the trial budget ran out; `x` is then an envelope draw.
    pub accepted: bool,
    /// Proposals examined, one query each.
    pub trials: u64,
}

/// Rejection sampling with at most `max_trials` queries.
pub fn rejection_sample<P: SmoothPotential, R: Rng>(
    oracle: &mut CountingOracle<P>,
    envelope: &Envelope<'_>,
    max_trials: u64,
    rng: &mut R,
) -> Result<RejectionDraw, SamplerError> {
    for trial in 1..=max_trials {
        let x = envelope.draw(rng);
        let (v, _) = oracle.query(&x)?;
        let log_ratio = -(v - envelope.reference) - envelope.log_density(&x);
        if log_ratio > RATIO_SLACK || log_ratio.is_nan() {
            return Err(SamplerError::EnvelopeViolation { at: x, ratio: log_ratio.exp() });
        }
        if rng.random::<f64>() < log_ratio.exp() {
            return Ok(RejectionDraw { x, accepted: true, trials: trial });
        }
    }
    Ok(RejectionDraw { x: envelope.draw(rng), accepted: false, trials: max_trials })
}

/// Envelope `ln μ̃(x) = 2M₀ + ln μ₀(x) − ln μ₀(0)` from a warm start with known density and
/// `sup |ln μ₀/π| ≤ M₀`. One query, at the origin.
pub fn warm_start_envelope<'a, P: SmoothPotential>(
    init: &'a InitOracle,
    oracle: &mut CountingOracle<P>,
) -> Result<Envelope<'a>, SamplerError> {
    let m0 = init.m0().ok_or(SamplerError::MissingInit("warmness bound M0"))?;
    let origin = vec![0.0; oracle.dim()];
    let log_mu0_origin = init.log_density(&origin).ok_or(SamplerError::MissingInit("density"))?;
    let (v0, _) = oracle.query(&origin)?;
    let shift = 2.0 * m0 - log_mu0_origin;
    Ok(Envelope::new(
        init.dim(),
        v0,
        (3.0 * m0).exp(),
        move |x| shift + init.log_density(x).expect("density checked above"),
        move |rng| init.draw(rng),
    ))
}

/// Lattice net used by [`grid_envelope`]: integer points whose unit cube meets `B_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNet {
    pub points: Vec<Vec<i64>>,
}

impl GridNet {
    pub fn new(d: usize, big_r: f64, limit: usize) -> Result<Self, SamplerError> {
        if d == 0 || !(big_r > 0.0) {
            return Err(SamplerError::Parameter(format!("grid net needs d ≥ 1 and R > 0, got {d}, {big_r}")));
        }
        let k = (big_r + 0.5).floor() as i64;
        let side = (2 * k + 1) as f64;
        if side.powi(d as i32) > 64.0 * limit as f64 {
            return Err(SamplerError::NetTooLarge { size: side.powi(d as i32) as usize, limit });
        }
        let mut points = Vec::new();
        let mut z = vec![-k; d];
        loop {
            let dist2: f64 = z.iter().map(|&c| ((c.abs() as f64) - 0.5).max(0.0).powi(2)).sum();
            if dist2 <= big_r * big_r {
                points.push(z.clone());
                if points.len() > limit {
                    return Err(SamplerError::NetTooLarge { size: points.len(), limit });
                }
            }
            let mut i = 0;
            loop {
                if i == d {
                    return Ok(GridNet { points });
                }
                z[i] += 1;
                if z[i] <= k {
                    break;
                }
                z[i] = -k;
                i += 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `ln ∫_{−½}^{½} exp(−g·u + u²/2) du`.
fn log_cube_factor(g: f64) -> Result<f64, SamplerError> {
    let a = 0.5 * g.abs();
    let v = integrate(|u| (-g * u - a + 0.5 * u * u).exp(), -0.5, 0.5, 1e-12)?;
    Ok(a + v.ln())
}

/// Draw from the density `∝ exp(−g·u + u²/2)` on `[−½, ½]`.
fn sample_cube_coord(g: f64, rng: &mut dyn RngCore) -> f64 {
    loop {
        let v: f64 = rng.random();
        let u = if g.abs() < 1e-12 {
            v - 0.5
        } else {
            // truncated exponential with rate |g| from the end where the density is largest
            let a = g.abs();
            let w = -0.5 - (v * (-a).exp_m1()).ln_1p() / a;
            if g > 0.0 {
                w
            } else {
                -w
            }
        };
        if rng.random::<f64>() < (0.5 * u * u - 0.125).exp() {
            return u;
        }
    }
}

/// Envelope from a lattice net, valid for 1-smooth potentials equal to `½(‖x‖−R)₊²` plus a
/// constant outside `B_R`. Queries every net point and one anchor outside the ball, `|N| + 1`
/// in total. Inside the union of net cubes the envelope is the smoothness lower model of `V`
/// around the nearest lattice point; outside it is the exact tail. Since `‖x − x_N‖² ≤ d/4`,
/// `μ̃ ≤ e^{d/4}·π̃` pointwise.
pub fn grid_envelope<P: SmoothPotential>(
    oracle: &mut CountingOracle<P>,
    big_r: f64,
    net_limit: usize,
) -> Result<Envelope<'static>, SamplerError> {
    let d = oracle.dim();
    let net = GridNet::new(d, big_r, net_limit)?;
    let mut anchor = vec![0.0; d];
    anchor[0] = big_r + 1.0;
    let (va, _) = oracle.query(&anchor)?;
    let reference = va - 0.5;

    let mut cells: HashMap<Vec<i64>, (f64, Vec<f64>)> = HashMap::with_capacity(net.len());
    let mut log_w = Vec::with_capacity(net.len() + 1);
    for z in &net.points {
        let zf: Vec<f64> = z.iter().map(|&c| c as f64).collect();
        let (v, g) = oracle.query(&zf)?;
        let lv = -(v - reference);
        let mut lw = lv;
        for gi in &g {
            lw += log_cube_factor(*gi)?;
        }
        log_w.push(lw);
        cells.insert(z.clone(), (lv, g));
    }
    log_w.push(tail_mass(d, big_r, QUAD_TOL)?.ln());
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| SamplerError::Parameter(format!("envelope weights: {e}")))?;
    let tail = PiInitSampler::new(d, big_r)?;

    let cells = std::sync::Arc::new(cells);
    let lookup = cells.clone();
    let points = net.points;
    let log_density = move |x: &[f64]| {
        let z: Vec<i64> = x.iter().map(|c| c.round() as i64).collect();
        match lookup.get(&z) {
            Some((lv, g)) => {
                let mut out = *lv;
                for ((xi, zi), gi) in x.iter().zip(&z).zip(g) {
                    let u = xi - *zi as f64;
                    out += -gi * u + 0.5 * u * u;
                }
                out
            }
            None => {
                let s = (norm(x) - big_r).max(0.0);
                -0.5 * s * s
            }
        }
    };
    let draw = move |rng: &mut dyn RngCore| loop {
        let idx = pick.sample(rng);
        if idx < points.len() {
            let z = &points[idx];
            let g = &cells[z].1;
            return z.iter().zip(g).map(|(&zi, &gi)| zi as f64 + sample_cube_coord(gi, rng)).collect();
        }
        let x = tail.sample_tail(rng);
        let z: Vec<i64> = x.iter().map(|c| c.round() as i64).collect();
        if !cells.contains_key(&z) {
            return x;
        }
    };
    Ok(Envelope::new(d, reference, (0.25 * d as f64).exp(), log_density, draw))
}
