//! Packings of `B_{R−r}` by points at mutual distance at least `2r`.

use std::collections::HashMap;

use super::InstanceError;
use crate::potential::{norm, norm_diff};

const REL_SLACK: f64 = 1e-12;
const MAX_CANDIDATES: usize = 50_000_000;

/// Centers of a maximal `2r`-packing of `B_{R−r}`.
///
/// In one dimension this is the grid `{2rk : |2rk| ≤ R − r}`. In higher dimension the
/// candidates are the points of the lattice `(r/4)ℤᵈ` inside `B_{R−r}`, visited by
/// increasing norm (ties broken lexicographically), and each is kept if it is at least `2r`
/// from everything kept so far.
pub fn build_packing(d: usize, r: f64, big_r: f64) -> Result<Vec<Vec<f64>>, InstanceError> {
    if d == 0 {
        return Err(InstanceError::Domain("dimension must be at least 1".into()));
    }
    if !(r > 0.0) || !(big_r - r >= 0.0) {
        return Err(InstanceError::Degenerate { r, big_r });
    }
    let reach = big_r - r;
    if d == 1 {
        let kmax = (reach / (2.0 * r) * (1.0 + REL_SLACK)).floor() as i64;
        return Ok((-kmax..=kmax).map(|k| vec![2.0 * r * k as f64]).collect());
    }
    greedy(d, r, reach)
}

fn greedy(d: usize, r: f64, reach: f64) -> Result<Vec<Vec<f64>>, InstanceError> {
    let step = r / 4.0;
    let kmax = (reach / step * (1.0 + REL_SLACK)).floor() as i64;
    let side = (2 * kmax + 1) as usize;
    if side.checked_pow(d as u32).is_none_or(|n| n > MAX_CANDIDATES) {
        return Err(InstanceError::Solver(format!("packing lattice too large: {side}^{d} candidates")));
    }
    let limit = reach * (1.0 + REL_SLACK);
    let mut cands: Vec<Vec<i64>> = Vec::new();
    let mut idx = vec![-kmax; d];
    loop {
        let p: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
        if norm(&p) <= limit {
            cands.push(idx.clone());
        }
        let mut j = 0;
        while j < d {
            idx[j] += 1;
            if idx[j] <= kmax {
                break;
            }
            idx[j] = -kmax;
            j += 1;
        }
        if j == d {
            break;
        }
    }
    cands.sort_by(|a, b| {
        let na: i64 = a.iter().map(|k| k * k).sum();
        let nb: i64 = b.iter().map(|k| k * k).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });

    // hash grid with cells of side 2r, so any conflict sits in a neighbouring cell
    let cell = 2.0 * r;
    let min_dist = 2.0 * r * (1.0 - REL_SLACK);
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut accepted: Vec<Vec<f64>> = Vec::new();
    let mut offsets = vec![vec![]];
    for _ in 0..d {
        offsets = offsets.into_iter().flat_map(|o: Vec<i64>| (-1..=1).map(move |s| [o.clone(), vec![s]].concat())).collect();
    }
    for c in cands {
        let p: Vec<f64> = c.iter().map(|&k| k as f64 * step).collect();
        let key: Vec<i64> = p.iter().map(|v| (v / cell).floor() as i64).collect();
        let clash = offsets.iter().any(|o| {
            let nk: Vec<i64> = key.iter().zip(o).map(|(a, b)| a + b).collect();
            grid.get(&nk).is_some_and(|ids| ids.iter().any(|&i| norm_diff(&accepted[i], &p) < min_dist))
        });
        if !clash {
            grid.entry(key).or_default().push(accepted.len());
            accepted.push(p);
        }
    }
    Ok(accepted)
}

/// Checks that `centers` lie in `B_{R−r}` and are pairwise at least `2r` apart.
pub fn validate_packing(centers: &[Vec<f64>], d: usize, r: f64, big_r: f64) -> Result<(), InstanceError> {
    let limit = (big_r - r) * (1.0 + REL_SLACK) + 1e-12;
    for (i, c) in centers.iter().enumerate() {
        if c.len() != d {
            return Err(InstanceError::Dimension { expected: d, got: c.len() });
        }
        if norm(c) > limit {
            return Err(InstanceError::Packing(format!("center {i} has norm {} > R − r = {}", norm(c), big_r - r)));
        }
    }
    let min_dist = 2.0 * r * (1.0 - REL_SLACK);
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let dist = norm_diff(&centers[i], &centers[j]);
            if dist < min_dist {
                return Err(InstanceError::Packing(format!("centers {i} and {j} are {dist} apart, need {}", 2.0 * r)));
            }
        }
    }
    Ok(())
}
