//! Euclidean projection onto the feasible pattern polytope.
//!
//! With `u_m = x_m - m d_min` (zero-based `m`) the constraints become
//! `0 <= u_1 <= ... <= u_M <= L - (M-1) d_min`, so the projection is an
//! isotonic regression followed by clipping to the box.

use crate::channel::DeploymentPattern;
use crate::scenario::ArrayGeometry;

/// Unweighted pool-adjacent-violators fit: the nondecreasing sequence
/// closest to `y` in the least-squares sense.
pub fn isotonic_nondecreasing(y: &[f64]) -> Vec<f64> {
    // Blocks of (mean, count).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let c = c1 + c2;
            *blocks.last_mut().unwrap() = ((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(mean, count)| std::iter::repeat_n(mean, count))
        .collect()
}

/// Projects arbitrary coordinates onto
/// `{x : x_m - x_{m-1} >= d_min, 0 <= x_m <= L}`.
pub fn project_pattern(x: &[f64], geometry: &ArrayGeometry) -> DeploymentPattern {
    let d = geometry.min_separation;
    let upper = geometry.free_span();
    let u: Vec<f64> = x.iter().enumerate().map(|(m, v)| v - m as f64 * d).collect();
    let fitted = isotonic_nondecreasing(&u);
    DeploymentPattern::new(
        fitted
            .into_iter()
            .enumerate()
            .map(|(m, v)| v.clamp(0.0, upper) + m as f64 * d)
            .map(|v| v.min(geometry.span))
            .collect(),
    )
}
