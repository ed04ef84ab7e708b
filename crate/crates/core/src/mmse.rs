//! MMSE receive combining: per-user SINR and achievable rate for a fixed
//! deployment pattern.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_vectors, ChannelVector, DeploymentPattern};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Relative size of the imaginary residue of `h^H A^{-1} h` that is
/// tolerated before the solve is declared broken.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector {
    /// `log2(1 + sinr_k)` in bits/s/Hz.
    pub rates: Vec<f64>,
    pub sinrs: Vec<f64>,
}

impl RateVector {
    pub fn from_sinrs(sinrs: Vec<f64>) -> Self {
        let rates = sinrs.iter().map(|g| (1.0 + g).log2()).collect();
        RateVector { rates, sinrs }
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the worst user (first one on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (k, r) in self.rates.iter().enumerate() {
            if *r < self.rates[best] {
                best = k;
            }
        }
        best
    }

    pub fn weighted_sum(&self, weights: &[f64]) -> f64 {
        self.rates.iter().zip(weights).map(|(r, w)| r * w).sum()
    }
}

fn outer_sum(s: &Scenario, hs: &[ChannelVector], skip: Option<usize>) -> DMatrix<Complex64> {
    let dim = s.geometry().num_elements();
    let mut a = DMatrix::<Complex64>::identity(dim, dim);
    for (j, h) in hs.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        let h = h.as_vector();
        let p = Complex64::new(s.normalized_power(j), 0.0);
        a.ger(p, h, &h.conjugate(), Complex64::new(1.0, 0.0));
    }
    a
}

/// `A_k = sum_{j != k} Pbar_j h_j h_j^H + I`.
pub fn interference_matrix(s: &Scenario, k: usize, p: &DeploymentPattern) -> DMatrix<Complex64> {
    outer_sum(s, &channel_vectors(s, p), Some(k))
}

fn cholesky(a: DMatrix<Complex64>) -> Result<Cholesky<Complex64, Dyn>> {
    Cholesky::new(a).ok_or_else(|| Error::NumericalBreakdown("interference matrix not positive definite".into()))
}

/// Real part of `h^H g`, failing if the imaginary residue is not negligible.
pub(crate) fn real_quadratic_form(h: &DVector<Complex64>, g: &DVector<Complex64>) -> Result<f64> {
    real_part(h.dotc(g), h.norm() * g.norm())
}

/// Real part of `q`, failing if its imaginary part exceeds the round-off
/// expected from terms of size `scale`.
pub(crate) fn real_part(q: Complex64, scale: f64) -> Result<f64> {
    if q.im.abs() > IMAG_RESIDUE_TOL * scale.max(q.re.abs()) && q.im.abs() > 1e-300 {
        return Err(Error::NumericalBreakdown(format!(
            "quadratic form has imaginary part {:e} against real part {:e}",
            q.im, q.re
        )));
    }
    Ok(q.re)
}

/// Per-user MMSE quantities at one pattern: the channels, the whitened
/// vectors `g_k = A_k^{-1} h_k` and `gamma~_k = h_k^H A_k^{-1} h_k`.
#[derive(Debug, Clone)]
pub(crate) struct MmseState {
    pub channels: Vec<ChannelVector>,
    pub whitened: Vec<DVector<Complex64>>,
    pub gamma_tilde: Vec<f64>,
}

impl MmseState {
    pub fn new(s: &Scenario, p: &DeploymentPattern) -> Result<Self> {
        let channels = channel_vectors(s, p);
        let full = outer_sum(s, &channels, None);
        let mut whitened = Vec::with_capacity(channels.len());
        let mut gamma_tilde = Vec::with_capacity(channels.len());
        for (k, h) in channels.iter().enumerate() {
            let h = h.as_vector();
            let mut a_k = full.clone();
            a_k.ger(
                Complex64::new(-s.normalized_power(k), 0.0),
                h,
                &h.conjugate(),
                Complex64::new(1.0, 0.0),
            );
            let g = cholesky(a_k)?.solve(h);
            gamma_tilde.push(real_quadratic_form(h, &g)?.max(0.0));
            whitened.push(g);
        }
        Ok(MmseState {
            channels,
            whitened,
            gamma_tilde,
        })
    }

    pub fn rates(&self, s: &Scenario) -> RateVector {
        RateVector::from_sinrs(
            self.gamma_tilde
                .iter()
                .enumerate()
                .map(|(k, g)| s.normalized_power(k) * g)
                .collect(),
        )
    }
}

/// SINR of user `k` under MMSE combining, `Pbar_k h_k^H A_k^{-1} h_k`.
pub fn mmse_sinr(s: &Scenario, k: usize, p: &DeploymentPattern) -> Result<f64> {
    let hs = channel_vectors(s, p);
    let a = outer_sum(s, &hs, Some(k));
    let h = hs[k].as_vector();
    let g = cholesky(a)?.solve(h);
    Ok(s.normalized_power(k) * real_quadratic_form(h, &g)?.max(0.0))
}

/// Rates of all users at pattern `p`.
pub fn rate_vector(s: &Scenario, p: &DeploymentPattern) -> Result<RateVector> {
    Ok(MmseState::new(s, p)?.rates(s))
}

/// Unit-norm MMSE combiner `A_k^{-1} h_k / ||A_k^{-1} h_k||`.
pub fn mmse_beamformer(s: &Scenario, k: usize, p: &DeploymentPattern) -> Result<DVector<Complex64>> {
    let hs = channel_vectors(s, p);
    let a = outer_sum(s, &hs, Some(k));
    let g = cholesky(a)?.solve(hs[k].as_vector());
    let norm = g.norm();
    Ok(g / Complex64::new(norm, 0.0))
}

/// SINR of user `k` for an arbitrary combiner `w`.
pub fn sinr_with_beamformer(s: &Scenario, k: usize, p: &DeploymentPattern, w: &DVector<Complex64>) -> f64 {
    let hs = channel_vectors(s, p);
    let signal = s.normalized_power(k) * w.dotc(hs[k].as_vector()).norm_sqr();
    let interference: f64 = hs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(j, h)| s.normalized_power(j) * w.dotc(h.as_vector()).norm_sqr())
        .sum();
    signal / (interference + w.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_vector;
    use crate::scenario::{reference_scenario, ArrayGeometry, UserSpec};
    use nalgebra::SymmetricEigen;

    fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn single_user_sees_identity() {
        let g = ArrayGeometry::new(2, 2, 3.0, 0.5, 1.0).unwrap();
        let s = Scenario::new(g, vec![UserSpec::new(0.2, 0.9, 10.0, 1.0)], 0.0, 1.0).unwrap();
        let p = DeploymentPattern::new(vec![0.3, 2.0]);
        let a = interference_matrix(&s, 0, &p);
        assert_eq!(a, DMatrix::identity(4, 4));
        let sinr = mmse_sinr(&s, 0, &p).unwrap();
        assert!((sinr - 10.0 * 4.0).abs() < 1e-10);
    }

    #[test]
    fn single_user_rate_closed_form() {
        // Pbar * beta * M * N = 10 with M = N = 1.
        let g = ArrayGeometry::new(1, 1, 1.0, 0.5, 1.0).unwrap();
        let s = Scenario::new(g, vec![UserSpec::new(0.5, 0.5, 10.0, 1.0)], 0.0, 1.0).unwrap();
        let r = rate_vector(&s, &DeploymentPattern::new(vec![0.7])).unwrap();
        assert!((r.rates[0] - 11f64.log2()).abs() < 1e-12);
        assert!((r.rates[0] - 3.459).abs() < 1e-3);
    }

    #[test]
    fn interference_matrix_is_hermitian_with_spectrum_above_one() {
        let s = reference_scenario();
        let p = DeploymentPattern::new(vec![4.2, 20.0]);
        for k in 0..3 {
            let a = interference_matrix(&s, k, &p);
            assert!((&a - a.adjoint()).norm() < 1e-12);
            assert!(hermitian_eigenvalues(&a)[0] >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn symmetric_users_share_spectrum() {
        // Two users with identical angles and powers: A_1 and A_2 coincide
        // up to which user is excluded, so their spectra agree.
        let g = ArrayGeometry::new(2, 2, 3.0, 0.5, 1.0).unwrap();
        let u = UserSpec::new(0.4, 0.8, 10.0, 1.0);
        let s = Scenario::new(g, vec![u.clone(), u], 0.0, 1.0).unwrap();
        let p = DeploymentPattern::new(vec![0.0, 1.7]);
        let e1 = hermitian_eigenvalues(&interference_matrix(&s, 0, &p));
        let e2 = hermitian_eigenvalues(&interference_matrix(&s, 1, &p));
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_residual_is_small() {
        let s = reference_scenario();
        let p = DeploymentPattern::new(vec![6.63, 20.0]);
        for k in 0..3 {
            let a = interference_matrix(&s, k, &p);
            let h = channel_vector(&s, k, &p).0;
            let g = a.clone().cholesky().unwrap().solve(&h);
            assert!((&a * &g - &h).norm() / h.norm() <= 1e-10);
        }
    }

    #[test]
    fn mmse_beamformer_attains_closed_form_sinr() {
        let s = reference_scenario();
        let p = DeploymentPattern::new(vec![2.5, 20.0]);
        for k in 0..3 {
            let w = mmse_beamformer(&s, k, &p).unwrap();
            let direct = sinr_with_beamformer(&s, k, &p, &w);
            let closed = mmse_sinr(&s, k, &p).unwrap();
            assert!((direct - closed).abs() <= 1e-9 * closed);
        }
    }

    #[test]
    fn state_matches_per_user_solves() {
        let s = reference_scenario();
        let p = DeploymentPattern::new(vec![11.0, 19.0]);
        let r = rate_vector(&s, &p).unwrap();
        for k in 0..3 {
            let sinr = mmse_sinr(&s, k, &p).unwrap();
            assert!((r.sinrs[k] - sinr).abs() <= 1e-10 * sinr);
        }
    }

    #[test]
    fn reference_static_point_rate() {
        // x1 = 6.63 is close to the max-min static optimum of the reference
        // instance; the minimum rate there is about 1.86 bits/s/Hz.
        let s = reference_scenario();
        let r = rate_vector(&s, &DeploymentPattern::pinned_pair(6.63, 20.0)).unwrap();
        assert!((r.min_rate() - 1.856).abs() < 5e-3, "{:?}", r.rates);
    }

    #[test]
    fn louder_interferers_never_help() {
        let s = reference_scenario();
        let p = DeploymentPattern::new(vec![9.0, 20.0]);
        let base = mmse_sinr(&s, 0, &p).unwrap();
        let mut users = s.users().to_vec();
        users[1].power_dbm += 3.0;
        users[2].power_dbm += 3.0;
        let louder = s.with_users(users).unwrap();
        assert!(mmse_sinr(&louder, 0, &p).unwrap() <= base + 1e-12);
    }
}
