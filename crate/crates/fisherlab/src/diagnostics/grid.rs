//! Densities on a uniform 1-D grid.

use std::io::Write;

use super::DiagnosticsError;
use crate::potential::SmoothPotential;
use crate::quad::trapezoid;

/// Boundary values above this fraction of the peak mean the domain is too small.
pub const BOUNDARY_FRACTION: f64 = 1e-12;
/// Floor applied before taking logarithms.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// A probability density sampled at `n` equispaced nodes of `[lo, hi]`, normalized by the
/// trapezoid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity1D {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl GridDensity1D {
    /// Normalizes `values` without checking the boundary.
    pub fn from_values(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self, DiagnosticsError> {
        if !(hi > lo) || values.len() < 3 {
            return Err(DiagnosticsError::Parameter(format!("grid needs lo < hi and n ≥ 3, got [{lo}, {hi}], n={}", values.len())));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(DiagnosticsError::Parameter("grid values must be finite and non-negative".into()));
        }
        let mut g = GridDensity1D { lo, hi, values };
        let mass = g.mass();
        if !(mass > 0.0) {
            return Err(DiagnosticsError::Parameter("grid density has zero mass".into()));
        }
        g.values.iter_mut().for_each(|v| *v /= mass);
        Ok(g)
    }

    /// `exp(log_density)` at the nodes, normalized. Fails if either end exceeds
    /// [`BOUNDARY_FRACTION`] of the peak.
    pub fn from_log_density(lo: f64, hi: f64, n: usize, log_density: impl Fn(f64) -> f64) -> Result<Self, DiagnosticsError> {
        let dx = (hi - lo) / (n.max(2) - 1) as f64;
        let logs: Vec<f64> = (0..n).map(|i| log_density(lo + i as f64 * dx)).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(DiagnosticsError::Parameter("log density has no finite maximum".into()));
        }
        let g = Self::from_values(lo, hi, logs.iter().map(|l| (l - top).exp()).collect())?;
        g.check_boundary()?;
        Ok(g)
    }

    pub fn check_boundary(&self) -> Result<(), DiagnosticsError> {
        let peak = self.peak();
        let edge = self.values[0].max(*self.values.last().unwrap());
        if edge > BOUNDARY_FRACTION * peak {
            return Err(DiagnosticsError::DomainTooSmall { lo: self.lo, hi: self.hi, ratio: edge / peak });
        }
        Ok(())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.spacing();
        (0..self.n()).map(move |i| self.lo + i as f64 * dx)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.spacing())
    }

    /// `∫ f·μ` by the trapezoid rule.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        let w: Vec<f64> = self.xs().zip(&self.values).map(|(x, v)| f(x) * v).collect();
        trapezoid(&w, self.spacing())
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m))
    }

    /// Cumulative trapezoid integral at every node.
    pub fn cdf(&self) -> Vec<f64> {
        let h = 0.5 * self.spacing();
        let mut out = Vec::with_capacity(self.n());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Linear interpolation, zero outside the domain.
    pub fn density_at(&self, x: f64) -> f64 {
        if !(x >= self.lo && x <= self.hi) {
            return 0.0;
        }
        let t = (x - self.lo) / self.spacing();
        let i = (t.floor() as usize).min(self.n() - 2);
        let w = t - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn same_grid(&self, other: &GridDensity1D) -> bool {
        self.n() == other.n() && self.lo == other.lo && self.hi == other.hi
    }

    pub(crate) fn check_same(&self, other: &GridDensity1D) -> Result<(), DiagnosticsError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(DiagnosticsError::GridMismatch)
        }
    }

    /// `(1 − p)·self + p·other`, renormalized.
    pub fn mix(&self, other: &GridDensity1D, p: f64) -> Result<GridDensity1D, DiagnosticsError> {
        self.check_same(other)?;
        let v = self.values.iter().zip(&other.values).map(|(a, b)| (1.0 - p) * a + p * b).collect();
        Self::from_values(self.lo, self.hi, v)
    }

    /// Convolution with `N(0, var)` by banded direct quadrature with a normalized kernel.
    pub fn convolve_gaussian(&self, var: f64) -> Result<GridDensity1D, DiagnosticsError> {
        if !(var >= 0.0) {
            return Err(DiagnosticsError::Parameter(format!("convolution variance must be non-negative, got {var}")));
        }
        if var == 0.0 {
            return Ok(self.clone());
        }
        let kernel = GaussianKernel::new(var, self.spacing());
        Self::from_values(self.lo, self.hi, kernel.apply(&self.values))
    }

    /// Two-column CSV `x,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,density")?;
        for (x, v) in self.xs().zip(&self.values) {
            writeln!(w, "{x:.9e},{v:.9e}")?;
        }
        Ok(())
    }
}

/// Half-width of the convolution band in standard deviations.
pub const KERNEL_SIGMAS: f64 = 10.0;

/// Discrete Gaussian kernel on a grid of given spacing, normalized to unit mass.
#[derive(Debug, Clone)]
pub(crate) struct GaussianKernel {
    weights: Vec<f64>,
}

impl GaussianKernel {
    pub(crate) fn new(var: f64, dx: f64) -> Self {
        let sigma = var.sqrt();
        let half = ((KERNEL_SIGMAS * sigma / dx).ceil() as usize).max(1);
        let mut weights: Vec<f64> = (0..=2 * half)
            .map(|m| {
                let z = (m as f64 - half as f64) * dx;
                (-0.5 * z * z / var).exp()
            })
            .collect();
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        GaussianKernel { weights }
    }

    pub(crate) fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let half = self.weights.len() / 2;
        let mut out = vec![0.0; n];
        for (i, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let j0 = i.saturating_sub(half);
            let j1 = (i + half).min(n - 1);
            let k0 = j0 + half - i;
            for (o, w) in out[j0..=j1].iter_mut().zip(&self.weights[k0..]) {
                *o += v * w;
            }
        }
        out
    }
}

/// `exp(−V)` for a one-dimensional potential, normalized on `[lo, hi]`.
pub fn grid_from_potential<P: SmoothPotential>(potential: &P, lo: f64, hi: f64, n: usize) -> Result<GridDensity1D, DiagnosticsError> {
    check_1d(potential)?;
    GridDensity1D::from_log_density(lo, hi, n, |x| -potential.value(&[x]))
}

pub(crate) fn check_1d<P: SmoothPotential>(potential: &P) -> Result<(), DiagnosticsError> {
    if potential.dim() == 1 {
        Ok(())
    } else {
        Err(DiagnosticsError::Parameter(format!("grid diagnostics need a 1-D potential, got d={}", potential.dim())))
    }
}
