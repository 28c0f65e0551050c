//! Smooth potentials `V` with declared smoothness, and the wrappers used to
//! build tilted, rescaled and shifted versions of them.

use std::sync::Arc;

/// A twice-differentiable potential on ℝᵈ whose gradient is `beta()`-Lipschitz.
pub trait SmoothPotential {
    fn dim(&self) -> usize;

    /// Declared smoothness constant. Not enforced per call; see [`smoothness_audit`].
    fn beta(&self) -> f64;

    /// Writes ∇V(x) into `grad` and returns V(x). Callers pass slices of length `dim()`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn value(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.value_grad(x, &mut g)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.value_grad(x, &mut g);
        g
    }
}

impl<T: SmoothPotential + ?Sized> SmoothPotential for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn beta(&self) -> f64 {
        (**self).beta()
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_grad(x, grad)
    }
}

impl<T: SmoothPotential + ?Sized> SmoothPotential for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn beta(&self) -> f64 {
        (**self).beta()
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_grad(x, grad)
    }
}

impl<T: SmoothPotential + ?Sized> SmoothPotential for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn beta(&self) -> f64 {
        (**self).beta()
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_grad(x, grad)
    }
}

/// `V(x) = c·‖x − m‖²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub curvature: f64,
    pub mean: Vec<f64>,
}

impl Quadratic {
    pub fn standard(d: usize) -> Self {
        Quadratic { curvature: 1.0, mean: vec![0.0; d] }
    }
}

impl SmoothPotential for Quadratic {
    fn dim(&self) -> usize {
        self.mean.len()
    }
    fn beta(&self) -> f64 {
        self.curvature
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut v = 0.0;
        for ((g, xi), mi) in grad.iter_mut().zip(x).zip(&self.mean) {
            let u = xi - mi;
            *g = self.curvature * u;
            v += u * u;
        }
        0.5 * self.curvature * v
    }
}

/// `V(x) = Σ xᵢ⁴` with a user-declared (and generally wrong) smoothness constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Quartic {
    pub d: usize,
    pub declared_beta: f64,
}

impl SmoothPotential for Quartic {
    fn dim(&self) -> usize {
        self.d
    }
    fn beta(&self) -> f64 {
        self.declared_beta
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut v = 0.0;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g = 4.0 * xi * xi * xi;
            v += xi.powi(4);
        }
        v
    }
}

/// The one-dimensional non-convex well `V(x) = x²/4 − cos(x)/2`, with `V″ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CosineWell;

impl SmoothPotential for CosineWell {
    fn dim(&self) -> usize {
        1
    }
    fn beta(&self) -> f64 {
        1.0
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let t = x[0];
        grad[0] = 0.5 * t + 0.5 * t.sin();
        0.25 * t * t - 0.5 * t.cos()
    }
}

/// Smoothed ramp `V(x) = slope·√(1 + (x − c)²)`, `slope`-smooth with minimum at `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub slope: f64,
    pub center: f64,
}

impl SmoothPotential for Ramp {
    fn dim(&self) -> usize {
        1
    }
    fn beta(&self) -> f64 {
        self.slope
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let u = x[0] - self.center;
        let s = (1.0 + u * u).sqrt();
        grad[0] = self.slope * u / s;
        self.slope * s
    }
}

type EvalFn = dyn Fn(&[f64], &mut [f64]) -> f64 + Send + Sync;

/// A potential given by a closure.
#[derive(Clone)]
pub struct FnPotential {
    d: usize,
    beta: f64,
    f: Arc<EvalFn>,
}

impl FnPotential {
    pub fn new(d: usize, beta: f64, f: impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnPotential { d, beta, f: Arc::new(f) }
    }
}

impl std::fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnPotential").field("d", &self.d).field("beta", &self.beta).finish_non_exhaustive()
    }
}

impl SmoothPotential for FnPotential {
    fn dim(&self) -> usize {
        self.d
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (self.f)(x, grad)
    }
}

/// `V + c`: same gradients, values shifted by a constant.
#[derive(Debug, Clone)]
pub struct Shifted<P> {
    pub inner: P,
    pub shift: f64,
}

impl<P: SmoothPotential> SmoothPotential for Shifted<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn beta(&self) -> f64 {
        self.inner.beta()
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.inner.value_grad(x, grad) + self.shift
    }
}

/// `β·V`, the potential of `π_β ∝ exp(−βV)`. Each evaluation costs one evaluation of `V`.
#[derive(Debug, Clone)]
pub struct Tilted<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: SmoothPotential> SmoothPotential for Tilted<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn beta(&self) -> f64 {
        self.factor * self.inner.beta()
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let v = self.inner.value_grad(x, grad);
        for g in grad.iter_mut() {
            *g *= self.factor;
        }
        self.factor * v
    }
}

/// `V_β(x) = V(x/√β)` with `∇V_β(x) = β^{−1/2}∇V(x/√β)`; a `β_V`-smooth input becomes `β_V/β`-smooth.
#[derive(Debug, Clone)]
pub struct Rescaled<P> {
    pub inner: P,
    pub scale: f64,
}

/// Rescale `potential` by `beta > 0`.
pub fn rescale<P: SmoothPotential>(potential: P, beta: f64) -> Rescaled<P> {
    assert!(beta > 0.0 && beta.is_finite(), "rescale factor must be positive");
    Rescaled { inner: potential, scale: beta }
}

impl<P: SmoothPotential> SmoothPotential for Rescaled<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn beta(&self) -> f64 {
        self.inner.beta() / self.scale
    }
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let s = self.scale.sqrt();
        let y: Vec<f64> = x.iter().map(|v| v / s).collect();
        let v = self.inner.value_grad(&y, grad);
        for g in grad.iter_mut() {
            *g /= s;
        }
        v
    }
}

/// Result of [`smoothness_audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    pub max_ratio: f64,
    pub worst_pair: Option<usize>,
    pub violations: Vec<usize>,
    pub skipped: usize,
}

impl SmoothnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest observed `‖∇V(x) − ∇V(y)‖/‖x − y‖` over `pairs`. A pair is a violation when the
/// ratio exceeds `beta·(1 + 1e−9)`; coincident pairs are skipped and counted.
pub fn smoothness_audit<P: SmoothPotential>(potential: &P, pairs: &[(Vec<f64>, Vec<f64>)], beta: f64) -> SmoothnessReport {
    let d = potential.dim();
    let mut gx = vec![0.0; d];
    let mut gy = vec![0.0; d];
    let mut report = SmoothnessReport { max_ratio: 0.0, worst_pair: None, violations: Vec::new(), skipped: 0 };
    for (i, (x, y)) in pairs.iter().enumerate() {
        let dist = norm_diff(x, y);
        if dist == 0.0 {
            report.skipped += 1;
            continue;
        }
        potential.value_grad(x, &mut gx);
        potential.value_grad(y, &mut gy);
        let ratio = norm_diff(&gx, &gy) / dist;
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst_pair = Some(i);
        }
        if ratio > beta * (1.0 + 1e-9) {
            report.violations.push(i);
        }
    }
    report
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn norm_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
