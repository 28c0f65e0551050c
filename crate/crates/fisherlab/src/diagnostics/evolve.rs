//! Exact law of 1-D LMC on a grid: pushforward through the drift map, then heat smoothing.

use super::grid::{check_1d, GaussianKernel, GridDensity1D};
use super::DiagnosticsError;
use crate::potential::SmoothPotential;

/// Default tolerance on the mass lost or gained by one step before renormalization.
pub const MASS_TOL: f64 = 1e-6;

/// Inverse of `T(x) = x − τV′(x)` at every node of a grid, with its derivative.
///
/// For node `y_j` the preimage lies in `[x_i, x_{i+1}]` with `x = x_i + w·dx`; `jac` holds
/// `dT⁻¹/dy`. Nodes outside `T([lo, hi])` have no preimage in the domain.
#[derive(Debug, Clone)]
pub struct DriftMap {
    tau: f64,
    lo: f64,
    hi: f64,
    n: usize,
    preimage: Vec<Option<(usize, f64)>>,
    jac: Vec<f64>,
}

impl DriftMap {
    pub fn new<P: SmoothPotential>(potential: &P, lo: f64, hi: f64, n: usize, tau: f64) -> Result<Self, DiagnosticsError> {
        check_1d(potential)?;
        if !(tau >= 0.0) || n < 3 || !(hi > lo) {
            return Err(DiagnosticsError::Parameter(format!("drift map needs τ ≥ 0, n ≥ 3, lo < hi; got τ={tau}, n={n}")));
        }
        let beta = potential.beta();
        if beta > 0.0 && tau * beta >= 1.0 {
            return Err(DiagnosticsError::Precondition(format!("step {tau} with β = {beta} makes the drift map non-invertible")));
        }
        let dx = (hi - lo) / (n - 1) as f64;
        let drift = |x: f64| {
            let mut g = [0.0];
            potential.value_grad(&[x], &mut g);
            x - tau * g[0]
        };
        let t: Vec<f64> = (0..n).map(|i| drift(lo + i as f64 * dx)).collect();
        if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(DiagnosticsError::Precondition(format!("drift map is not increasing near x = {}", lo + i as f64 * dx)));
        }
        let mut preimage = Vec::with_capacity(n);
        let mut inv = Vec::with_capacity(n);
        let mut i = 0;
        for j in 0..n {
            let y = lo + j as f64 * dx;
            if y < t[0] || y > t[n - 1] {
                preimage.push(None);
                inv.push(f64::NAN);
                continue;
            }
            while i + 2 < n && t[i + 1] < y {
                i += 1;
            }
            let w = invert_in_cell(&drift, y, lo + i as f64 * dx, dx, t[i], t[i + 1]);
            preimage.push(Some((i, w)));
            inv.push(lo + (i as f64 + w) * dx);
        }
        let at = |k: Option<usize>| k.and_then(|k| inv.get(k)).copied().filter(|v| v.is_finite());
        let jac = (0..n)
            .map(|j| match (at(j.checked_sub(1)), at(Some(j)), at(Some(j + 1))) {
                (Some(l), _, Some(r)) => (r - l) / (2.0 * dx),
                (None, Some(c), Some(r)) => (r - c) / dx,
                (Some(l), Some(c), None) => (c - l) / dx,
                _ => 1.0,
            })
            .collect();
        Ok(DriftMap { tau, lo, hi, n, preimage, jac })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Density of `T(X)` for `X ~ law`: `p(T⁻¹(y))·(T⁻¹)′(y)`.
    pub fn push(&self, law: &GridDensity1D) -> Result<Vec<f64>, DiagnosticsError> {
        if law.n() != self.n || law.lo() != self.lo || law.hi() != self.hi {
            return Err(DiagnosticsError::GridMismatch);
        }
        let p = law.values();
        Ok(self
            .preimage
            .iter()
            .zip(&self.jac)
            .map(|(pre, j)| match pre {
                Some((i, w)) => (p[*i] * (1.0 - w) + p[i + 1] * w) * j,
                None => 0.0,
            })
            .collect())
    }
}

/// Solves `T(x_i + w·dx) = y` for `w ∈ [0, 1]` by the Illinois variant of regula falsi.
fn invert_in_cell(drift: &impl Fn(f64) -> f64, y: f64, x0: f64, dx: f64, t0: f64, t1: f64) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    let (mut fa, mut fb) = (t0 - y, t1 - y);
    if fa == 0.0 {
        return 0.0;
    }
    if fb == 0.0 {
        return 1.0;
    }
    let mut side = 0;
    for _ in 0..60 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = drift(x0 + c * dx) - y;
        if fc == 0.0 || (b - a) < 1e-14 {
            return c;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if fc.abs() <= 1e-15 * (1.0 + y.abs()) {
            return c;
        }
    }
    0.5 * (a + b)
}

/// One LMC update of length `τ` at the level of laws: `μ ↦ (T_τ)_#μ ∗ N(0, 2τ)`.
#[derive(Debug, Clone)]
pub struct LmcStep {
    drift: DriftMap,
    kernel: Option<GaussianKernel>,
    mass_tol: f64,
}

impl LmcStep {
    pub fn new<P: SmoothPotential>(potential: &P, lo: f64, hi: f64, n: usize, tau: f64) -> Result<Self, DiagnosticsError> {
        let drift = DriftMap::new(potential, lo, hi, n, tau)?;
        let kernel = (tau > 0.0).then(|| GaussianKernel::new(2.0 * tau, (hi - lo) / (n - 1) as f64));
        Ok(LmcStep { drift, kernel, mass_tol: MASS_TOL })
    }

    pub fn with_mass_tol(mut self, tol: f64) -> Self {
        self.mass_tol = tol;
        self
    }

    pub fn apply(&self, law: &GridDensity1D) -> Result<GridDensity1D, DiagnosticsError> {
        let pushed = self.drift.push(law)?;
        let out = match &self.kernel {
            Some(k) => k.apply(&pushed),
            None => pushed,
        };
        let mass = crate::quad::trapezoid(&out, law.spacing());
        if !((mass - 1.0).abs() <= self.mass_tol) {
            return Err(DiagnosticsError::MassDrift { drift: mass - 1.0, tol: self.mass_tol });
        }
        GridDensity1D::from_values(law.lo(), law.hi(), out)
    }
}

/// Laws `μ_0, μ_h, …, μ_{kh}` of LMC started from `mu0`.
pub fn evolve_lmc_law<P: SmoothPotential>(
    potential: &P,
    mu0: &GridDensity1D,
    h: f64,
    steps: usize,
) -> Result<Vec<GridDensity1D>, DiagnosticsError> {
    if !(h > 0.0) {
        return Err(DiagnosticsError::Parameter(format!("step size must be positive, got {h}")));
    }
    let step = LmcStep::new(potential, mu0.lo(), mu0.hi(), mu0.n(), h)?;
    let mut laws = Vec::with_capacity(steps + 1);
    laws.push(mu0.clone());
    for k in 0..steps {
        let next = step.apply(&laws[k])?;
        laws.push(next);
    }
    Ok(laws)
}

/// Partial-step operators at the midpoints `τ_j = (j + ½)h/m` of a step.
fn partial_steps<P: SmoothPotential>(potential: &P, like: &GridDensity1D, h: f64, refinement: usize) -> Result<Vec<LmcStep>, DiagnosticsError> {
    if refinement == 0 {
        return Err(DiagnosticsError::Parameter("refinement must be at least 1".into()));
    }
    (0..refinement)
        .map(|j| LmcStep::new(potential, like.lo(), like.hi(), like.n(), (j as f64 + 0.5) * h / refinement as f64))
        .collect()
}

/// Law of averaged LMC given the full-step laws `μ_0, …, μ_{(N−1)h}`: the uniform mixture over
/// `[0, Nh]`, each step resolved by `refinement` midpoint partial times.
pub fn averaged_law<P: SmoothPotential>(
    potential: &P,
    laws: &[GridDensity1D],
    h: f64,
    refinement: usize,
) -> Result<GridDensity1D, DiagnosticsError> {
    let first = laws.first().ok_or(DiagnosticsError::Empty)?;
    let partial = partial_steps(potential, first, h, refinement)?;
    let mut acc = vec![0.0; first.n()];
    for law in laws {
        accumulate(&partial, law, &mut acc)?;
    }
    GridDensity1D::from_values(first.lo(), first.hi(), acc)
}

/// [`averaged_law`] for `N` steps from `mu0` without storing the intermediate laws.
pub fn averaged_lmc_law<P: SmoothPotential>(
    potential: &P,
    mu0: &GridDensity1D,
    h: f64,
    n: usize,
    refinement: usize,
    mass_tol: f64,
) -> Result<GridDensity1D, DiagnosticsError> {
    if n == 0 {
        return Err(DiagnosticsError::Empty);
    }
    let full = LmcStep::new(potential, mu0.lo(), mu0.hi(), mu0.n(), h)?.with_mass_tol(mass_tol);
    let partial: Vec<LmcStep> =
        partial_steps(potential, mu0, h, refinement)?.into_iter().map(|s| s.with_mass_tol(mass_tol)).collect();
    let mut acc = vec![0.0; mu0.n()];
    let mut law = mu0.clone();
    for k in 0..n {
        accumulate(&partial, &law, &mut acc)?;
        if k + 1 < n {
            law = full.apply(&law)?;
        }
    }
    GridDensity1D::from_values(mu0.lo(), mu0.hi(), acc)
}

fn accumulate(partial: &[LmcStep], law: &GridDensity1D, acc: &mut [f64]) -> Result<(), DiagnosticsError> {
    for step in partial {
        let q = step.apply(law)?;
        for (a, v) in acc.iter_mut().zip(q.values()) {
            *a += v;
        }
    }
    Ok(())
}
