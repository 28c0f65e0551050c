//! Closed-form bound evaluators: Fano, packing counts, embedding dimension.

use super::ExperimentError;

/// `max(0, 1 − ((4N/M)·ln(M/2) + ln 2)/ln M)`: lower bound on the failure probability of any
/// algorithm identifying one of `M` bumps with `N` queries.
pub fn fano_bound(m: u64, n: u64) -> Result<f64, ExperimentError> {
    if m < 4 {
        return Err(ExperimentError::Validation(format!("Fano bound needs M ≥ 4, got {m}")));
    }
    let mf = m as f64;
    let v = 1.0 - ((4.0 * n as f64 / mf) * (mf / 2.0).ln() + 2f64.ln()) / mf.ln();
    Ok(v.max(0.0))
}

/// Threshold `exp(−c_ε·d)` below which the packing bound is non-trivial.
pub fn packing_regime_threshold(d: usize, c_eps: f64) -> f64 {
    (-c_eps * d as f64).exp()
}

/// `(c·d/ln(1/ε))^{d/2}·ε^{−2d/(d+2)}`, the packing-count lower bound.
pub fn packing_count_bound(d: usize, eps: f64, c: f64) -> Result<f64, ExperimentError> {
    if d == 0 || !(eps > 0.0) || !(c > 0.0) {
        return Err(ExperimentError::Validation(format!("packing bound needs d ≥ 1, ε > 0, c > 0; got {d}, {eps}, {c}")));
    }
    if eps >= packing_regime_threshold(d, 1.0) {
        return Err(ExperimentError::Validation(format!("ε = {eps} is outside the regime ε < e^{{−d}} for d = {d}")));
    }
    let df = d as f64;
    let l = (1.0 / eps).ln();
    Ok((c * df / l).powf(df / 2.0) * eps.powf(-2.0 * df / (df + 2.0)))
}

/// `1/(ε√ln(1/ε))`, the one-dimensional packing size up to a constant.
pub fn packing_count_1d(eps: f64) -> Result<f64, ExperimentError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ExperimentError::Validation(format!("need 0 < ε < 1, got {eps}")));
    }
    Ok(1.0 / (eps * (1.0 / eps).ln().sqrt()))
}

/// Smallest `d` with `d²·ln d ≥ 8·ln(1/ε)`.
pub fn optimal_embed_dim(eps: f64) -> Result<usize, ExperimentError> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ExperimentError::Validation(format!("embedding dimension needs 0 < ε < 1/2, got {eps}")));
    }
    let target = 8.0 * (1.0 / eps).ln();
    let mut d = 1usize;
    while embed_objective(d) < target {
        d += 1;
    }
    Ok(d)
}

/// `g(d) = d²·ln d`.
pub fn embed_objective(d: usize) -> f64 {
    let x = d as f64;
    x * x * x.ln()
}
