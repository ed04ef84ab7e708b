//! Deployment patterns and line-of-sight channel vectors.
//!
//! Element `i` of a channel vector belongs to track `m = i / N` and antenna
//! `n = i % N` (zero-based), i.e. track-major ordering.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ArrayGeometry, Scenario};

/// Slack allowed when checking the ordering and range constraints, so that
/// patterns produced by floating-point projection still pass.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Horizontal coordinates of the `M` tracks, in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeploymentPattern(Vec<f64>);

impl DeploymentPattern {
    /// Wraps coordinates without checking them.
    pub fn new(coords: Vec<f64>) -> Self {
        DeploymentPattern(coords)
    }

    /// Wraps coordinates after checking them against `geometry`.
    pub fn feasible(coords: Vec<f64>, geometry: &ArrayGeometry) -> Result<Self> {
        let pattern = DeploymentPattern(coords);
        pattern.check(geometry)?;
        Ok(pattern)
    }

    /// Two-track pattern with the second track pinned to the end of the span.
    pub fn pinned_pair(x1: f64, span: f64) -> Self {
        DeploymentPattern(vec![x1, span])
    }

    /// Evenly spread tracks over the full span.
    pub fn uniform(geometry: &ArrayGeometry) -> Self {
        let m = geometry.num_tracks;
        if m == 1 {
            return DeploymentPattern(vec![geometry.span]);
        }
        let gap = geometry.span / (m - 1) as f64;
        DeploymentPattern((0..m).map(|i| i as f64 * gap).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, geometry: &ArrayGeometry) -> Result<()> {
        if self.0.len() != geometry.num_tracks {
            return Err(Error::InfeasiblePattern(format!(
                "expected {} coordinates, got {}",
                geometry.num_tracks,
                self.0.len()
            )));
        }
        for (m, &x) in self.0.iter().enumerate() {
            if !x.is_finite() || x < -FEASIBILITY_SLACK || x > geometry.span + FEASIBILITY_SLACK {
                return Err(Error::InfeasiblePattern(format!(
                    "x[{m}] = {x} outside [0, {}]",
                    geometry.span
                )));
            }
        }
        for (m, pair) in self.0.windows(2).enumerate() {
            let gap = pair[1] - pair[0];
            if gap < geometry.min_separation - FEASIBILITY_SLACK {
                return Err(Error::InfeasiblePattern(format!(
                    "x[{}] - x[{m}] = {gap} below d_min {}",
                    m + 1,
                    geometry.min_separation
                )));
            }
        }
        Ok(())
    }

    /// Smallest gap between neighbouring tracks (infinite for one track).
    pub fn min_gap(&self) -> f64 {
        self.0.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn translated(&self, delta: f64) -> Self {
        DeploymentPattern(self.0.iter().map(|x| x + delta).collect())
    }

    /// Representative of the translation class with the last track at `span`.
    /// Rates only depend on track differences, so this loses nothing.
    pub fn right_aligned(&self, span: f64) -> Self {
        let last = *self.0.last().expect("non-empty pattern");
        self.translated(span - last)
    }

    /// Chebyshev distance `max_m |a_m - b_m|`.
    pub fn chebyshev(&self, other: &DeploymentPattern) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn lexicographic_cmp(&self, other: &DeploymentPattern) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// `MN` complex channel amplitudes of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector(pub DVector<Complex64>);

impl ChannelVector {
    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }
}

/// Phase `2 pi (x_m vartheta + y_n varphi)` of element `(m, n)`.
pub(crate) fn element_phase(x_m: f64, y_n: f64, horizontal: f64, vertical: f64) -> f64 {
    2.0 * PI * (x_m * horizontal + y_n * vertical)
}

/// Channel vector of user `k` (zero-based) for pattern `p`:
/// `h_i = sqrt(beta_k) exp(-j 2 pi (x_m vartheta_k + y_n varphi_k))`.
pub fn channel_vector(s: &Scenario, k: usize, p: &DeploymentPattern) -> ChannelVector {
    let user = &s.users()[k];
    let ys = s.geometry().vertical_offsets();
    let (hor, ver) = (user.horizontal_aoa(), user.vertical_aoa());
    let amplitude = user.gain.sqrt();
    let n = ys.len();
    let h = DVector::from_fn(p.len() * n, |i, _| {
        let phase = element_phase(p.coords()[i / n], ys[i % n], hor, ver);
        Complex64::from_polar(amplitude, -phase)
    });
    ChannelVector(h)
}

/// Channel vectors of all users.
pub fn channel_vectors(s: &Scenario, p: &DeploymentPattern) -> Vec<ChannelVector> {
    (0..s.num_users()).map(|k| channel_vector(s, k, p)).collect()
}
