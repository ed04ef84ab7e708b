//! Successive convex approximation of the per-pattern rate objectives.
//!
//! At an anchor pattern `x_q`, `gamma~_k(x) = h_k^H A_k^{-1} h_k` is bounded
//! from below by a concave quadratic that is tight (value and gradient) at
//! the anchor. The bound chains three minorizations:
//!
//! 1. the variational form `gamma~ = max_z 2 Re(h^H z) - z^H A z`, fixed at
//!    `z = g_k = A_k^{-1}(x_q) h_k(x_q)`;
//! 2. `h^H G h <= h^H Theta h - 2 Re(h^H (Theta - G) h_q) + const` with
//!    `Theta = lambda_max(G) I`, which removes the quadratic dependence on
//!    the interferers' channels;
//! 3. the second-order bound `cos(u) >= cos(u_q) - sin(u_q)(u - u_q) - (u - u_q)^2 / 2`
//!    applied to every element's phase.
//!
//! Every phase is affine in a single track coordinate, so the final bound is
//! separable: `gamma~'(x) = c0 + sum_m (b_m dx_m - a_m dx_m^2 / 2)` with
//! `a_m >= 0`.

use std::f64::consts::{LN_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{element_phase, DeploymentPattern};
use crate::error::Result;
use crate::isotonic::project_pattern;
use crate::mmse::{real_part, MmseState};
use crate::scenario::{Scenario, SolverConfig};

/// Any trial point with `1 + Pbar_k gamma~'_k` at or below this is rejected.
pub const LOG_DOMAIN_FLOOR: f64 = 1e-9;

const PGA_MAX_ITERS: usize = 500;
const PGA_STEP_TOL: f64 = 1e-11;
const EXTRAPOLATION_DOUBLINGS: usize = 16;

/// Concave lower bound of `gamma~_k` built at one anchor.
#[derive(Debug, Clone)]
pub struct SurrogateCoefficients {
    pub user: usize,
    pub anchor: DeploymentPattern,
    /// `g_k = A_k^{-1}(x_q) h_k(x_q)`; `G_k = g_k g_k^H`.
    pub whitened: DVector<Complex64>,
    /// Largest eigenvalue of the rank-one `G_k`, i.e. `||g_k||^2`.
    pub lambda_max: f64,
    /// `o_j = (lambda_max I - G_k) h_j(x_q)`, zero for `j = k`.
    pub shifted: Vec<DVector<Complex64>>,
    /// `C_j`, zero for `j = k`.
    pub offsets: Vec<f64>,
    /// `D_k = sum_{j != k} Pbar_j C_j + ||g_k||^2`.
    pub constant: f64,
    /// Phase curvature `delta_j = (2 pi vartheta_j)^2` of every user.
    pub curvature: Vec<f64>,
    value_at_anchor: f64,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
}

impl SurrogateCoefficients {
    pub(crate) fn from_state(s: &Scenario, k: usize, anchor: &DeploymentPattern, state: &MmseState) -> Result<Self> {
        let geometry = s.geometry();
        let n = geometry.antennas_per_track;
        let m_tracks = geometry.num_tracks;
        let mn = geometry.num_elements() as f64;
        let ys = geometry.vertical_offsets();
        let g = state.whitened[k].clone();
        let lambda_max = g.norm_squared();

        let mut shifted = Vec::with_capacity(s.num_users());
        let mut offsets = Vec::with_capacity(s.num_users());
        let mut constant = lambda_max;
        for (j, h) in state.channels.iter().enumerate() {
            if j == k {
                shifted.push(DVector::zeros(g.len()));
                offsets.push(0.0);
                continue;
            }
            let h = h.as_vector();
            let proj = g.dotc(h);
            let o = h * Complex64::new(lambda_max, 0.0) - &g * proj;
            // o = (lambda I - g g^H) h cancels for rank-one spans; scale by lambda |h|^2.
            let c = lambda_max * s.gain(j) * mn + real_part(h.dotc(&o), lambda_max * h.norm_squared())?;
            constant += s.normalized_power(j) * c;
            shifted.push(o);
            offsets.push(c);
        }

        let slopes: Vec<f64> = s.users().iter().map(|u| 2.0 * PI * u.horizontal_aoa()).collect();
        let curvature: Vec<f64> = slopes.iter().map(|a| a * a).collect();

        let mut value_at_anchor = -constant;
        let mut linear = vec![0.0; m_tracks];
        let mut quadratic = vec![0.0; m_tracks];
        let mut accumulate = |user: usize, scale: f64, v: &DVector<Complex64>| {
            let u = &s.users()[user];
            let (hor, ver) = (u.horizontal_aoa(), u.vertical_aoa());
            for (i, z) in v.iter().enumerate() {
                let weight = scale * z.norm();
                if weight == 0.0 {
                    continue;
                }
                let m = i / n;
                let phase = element_phase(anchor.coords()[m], ys[i % n], hor, ver) + z.arg();
                value_at_anchor += weight * phase.cos();
                linear[m] -= weight * slopes[user] * phase.sin();
                quadratic[m] += weight * curvature[user];
            }
        };
        accumulate(k, 2.0 * s.gain(k).sqrt(), &g);
        for (j, o) in shifted.iter().enumerate() {
            if j != k {
                accumulate(j, 2.0 * s.normalized_power(j) * s.gain(j).sqrt(), o);
            }
        }

        Ok(SurrogateCoefficients {
            user: k,
            anchor: anchor.clone(),
            whitened: g,
            lambda_max,
            shifted,
            offsets,
            constant,
            curvature,
            value_at_anchor,
            linear,
            quadratic,
        })
    }

    /// Builds the bound for user `k` anchored at `anchor`.
    pub fn build(s: &Scenario, k: usize, anchor: &DeploymentPattern) -> Result<Self> {
        let state = MmseState::new(s, anchor)?;
        Self::from_state(s, k, anchor, &state)
    }

    /// `gamma~'_k(x, x_q)`.
    pub fn value(&self, x: &DeploymentPattern) -> f64 {
        let mut v = self.value_at_anchor;
        for (m, (&xm, &xq)) in x.coords().iter().zip(self.anchor.coords()).enumerate() {
            let dx = xm - xq;
            v += self.linear[m] * dx - 0.5 * self.quadratic[m] * dx * dx;
        }
        v
    }

    pub fn gradient(&self, x: &DeploymentPattern) -> Vec<f64> {
        x.coords()
            .iter()
            .zip(self.anchor.coords())
            .enumerate()
            .map(|(m, (xm, xq))| self.linear[m] - self.quadratic[m] * (xm - xq))
            .collect()
    }

    /// Per-track curvature of the bound (all entries non-negative).
    pub fn track_curvature(&self) -> &[f64] {
        &self.quadratic
    }
}

/// Evaluates the surrogate of user `k` at `x`.
pub fn surrogate_value(_s: &Scenario, k: usize, x: &DeploymentPattern, coeffs: &SurrogateCoefficients) -> f64 {
    debug_assert_eq!(coeffs.user, k);
    coeffs.value(x)
}

/// How per-user rates are combined into the scalar objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Aggregate {
    /// `sum_k mu_k r_k`.
    Weighted(Vec<f64>),
    /// Smooth minimum `-tau ln sum_k exp(-r_k / tau)`.
    SoftMin(f64),
}

impl Aggregate {
    pub fn value(&self, rates: &[f64]) -> f64 {
        match self {
            Aggregate::Weighted(mu) => rates.iter().zip(mu).map(|(r, w)| r * w).sum(),
            Aggregate::SoftMin(tau) => {
                let low = rates.iter().copied().fold(f64::INFINITY, f64::min);
                let sum: f64 = rates.iter().map(|r| (-(r - low) / tau).exp()).sum();
                low - tau * sum.ln()
            }
        }
    }

    /// Partial derivatives with respect to each rate.
    fn sensitivities(&self, rates: &[f64]) -> Vec<f64> {
        match self {
            Aggregate::Weighted(mu) => mu.clone(),
            Aggregate::SoftMin(tau) => {
                let low = rates.iter().copied().fold(f64::INFINITY, f64::min);
                let e: Vec<f64> = rates.iter().map(|r| (-(r - low) / tau).exp()).collect();
                let sum: f64 = e.iter().sum();
                e.into_iter().map(|v| v / sum).collect()
            }
        }
    }
}

/// All users' bounds at one anchor.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    pub coefficients: Vec<SurrogateCoefficients>,
    powers: Vec<f64>,
}

impl SurrogateModel {
    pub fn build(s: &Scenario, anchor: &DeploymentPattern) -> Result<Self> {
        let state = MmseState::new(s, anchor)?;
        let coefficients = (0..s.num_users())
            .map(|k| SurrogateCoefficients::from_state(s, k, anchor, &state))
            .collect::<Result<Vec<_>>>()?;
        Ok(SurrogateModel {
            coefficients,
            powers: (0..s.num_users()).map(|k| s.normalized_power(k)).collect(),
        })
    }

    /// Surrogate rates `log2(1 + Pbar_k gamma~'_k(x))`, or `None` outside
    /// the log domain.
    pub fn rates(&self, x: &DeploymentPattern) -> Option<Vec<f64>> {
        self.coefficients
            .iter()
            .zip(&self.powers)
            .map(|(c, p)| {
                let arg = 1.0 + p * c.value(x);
                (arg > LOG_DOMAIN_FLOOR).then(|| arg.log2())
            })
            .collect()
    }

    #[cfg(test)]
    fn objective(&self, aggregate: &Aggregate, x: &DeploymentPattern) -> Option<f64> {
        self.rates(x).map(|r| aggregate.value(&r))
    }

    fn gradient(&self, aggregate: &Aggregate, x: &DeploymentPattern, rates: &[f64]) -> Vec<f64> {
        let weights = aggregate.sensitivities(rates);
        let mut grad = vec![0.0; x.len()];
        for ((c, p), w) in self.coefficients.iter().zip(&self.powers).zip(weights) {
            if w == 0.0 {
                continue;
            }
            let arg = 1.0 + p * c.value(x);
            let scale = w * p / (arg * LN_2);
            for (g, d) in grad.iter_mut().zip(c.gradient(x)) {
                *g += scale * d;
            }
        }
        grad
    }

    /// Projected gradient ascent with backtracking on the surrogate
    /// objective, started at the anchor.
    pub fn maximize(&self, s: &Scenario, aggregate: &Aggregate, start: &DeploymentPattern) -> SubproblemSolution {
        let geometry = s.geometry();
        let mut x = start.clone();
        let mut rates = match self.rates(&x) {
            Some(r) => r,
            None => {
                return SubproblemSolution {
                    pattern: x,
                    converged: false,
                    iterations: 0,
                }
            }
        };
        let mut value = aggregate.value(&rates);
        let mut step = 1.0;
        for iteration in 0..PGA_MAX_ITERS {
            let grad = self.gradient(aggregate, &x, &rates);
            let mut accepted = None;
            while step > 1e-18 {
                let trial: Vec<f64> = x.coords().iter().zip(&grad).map(|(a, g)| a + step * g).collect();
                let cand = project_pattern(&trial, geometry);
                let delta: Vec<f64> = cand.coords().iter().zip(x.coords()).map(|(a, b)| a - b).collect();
                let lin: f64 = delta.iter().zip(&grad).map(|(d, g)| d * g).sum();
                let sq: f64 = delta.iter().map(|d| d * d).sum();
                if let Some(r) = self.rates(&cand) {
                    let v = aggregate.value(&r);
                    let slack = 1e-14 * value.abs().max(1.0);
                    if v >= value + lin - sq / (2.0 * step) - slack && v >= value - slack {
                        accepted = Some((cand, r, v, delta));
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some((cand, r, v, delta)) = accepted else {
                return SubproblemSolution {
                    pattern: x,
                    converged: true,
                    iterations: iteration,
                };
            };
            let moved = delta.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
            if v >= value {
                x = cand;
                rates = r;
                value = v;
            }
            if moved <= PGA_STEP_TOL {
                return SubproblemSolution {
                    pattern: x,
                    converged: true,
                    iterations: iteration + 1,
                };
            }
            step *= 2.0;
        }
        SubproblemSolution {
            pattern: x,
            converged: false,
            iterations: PGA_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub pattern: DeploymentPattern,
    /// False when the iteration cap was hit.
    pub converged: bool,
    pub iterations: usize,
}

/// Maximizes `sum_k mu_k log2(1 + Pbar_k gamma~'_k(x, x_q))` over the
/// feasible polytope.
pub fn solve_subproblem(s: &Scenario, mu: &[f64], x_q: &DeploymentPattern) -> Result<SubproblemSolution> {
    let model = SurrogateModel::build(s, x_q)?;
    Ok(model.maximize(s, &Aggregate::Weighted(mu.to_vec()), x_q))
}

#[derive(Debug, Clone, Default)]
pub struct ScaTrace {
    pub iterates: Vec<DeploymentPattern>,
    /// True objective at each iterate; non-decreasing.
    pub objective: Vec<f64>,
    pub converged: bool,
}

/// True objective `aggregate(log2(1 + gamma_k(x)))`.
pub fn true_objective(s: &Scenario, aggregate: &Aggregate, x: &DeploymentPattern) -> Result<f64> {
    let rates = MmseState::new(s, x)?.rates(s);
    Ok(aggregate.value(&rates.rates))
}

/// Runs SCA from `x_init` until the relative improvement of the true
/// objective drops below `cfg.sca_rel_tol` or `cfg.sca_max_iters` is hit.
///
/// After each surrogate maximization the step `x_hat - x_q` is also tried
/// at doubled lengths on the true objective and the best point is kept;
/// this only ever adds improvement, so the trace stays monotone.
pub fn sca_run(
    s: &Scenario,
    aggregate: &Aggregate,
    x_init: &DeploymentPattern,
    cfg: &SolverConfig,
) -> Result<(DeploymentPattern, ScaTrace)> {
    let geometry = s.geometry();
    let mut x = x_init.clone();
    let mut value = true_objective(s, aggregate, &x)?;
    let mut trace = ScaTrace {
        iterates: vec![x.clone()],
        objective: vec![value],
        converged: false,
    };
    for _ in 0..cfg.sca_max_iters {
        let model = SurrogateModel::build(s, &x)?;
        let sub = model.maximize(s, aggregate, &x);
        let mut best = (sub.pattern.clone(), true_objective(s, aggregate, &sub.pattern)?);

        let direction: Vec<f64> = sub
            .pattern
            .coords()
            .iter()
            .zip(x.coords())
            .map(|(a, b)| a - b)
            .collect();
        if direction.iter().any(|d| d.abs() > 1e-13) {
            let mut scale = 2.0;
            for _ in 0..EXTRAPOLATION_DOUBLINGS {
                let trial: Vec<f64> = x.coords().iter().zip(&direction).map(|(a, d)| a + scale * d).collect();
                let cand = project_pattern(&trial, geometry);
                let v = true_objective(s, aggregate, &cand)?;
                if v > best.1 {
                    best = (cand, v);
                    scale *= 2.0;
                } else {
                    break;
                }
            }
        }

        let (next, next_value) = best;
        if next_value < value {
            // The minorization guarantees ascent; only rounding lands here.
            trace.converged = true;
            break;
        }
        let improvement = next_value - value;
        x = next;
        value = next_value;
        trace.iterates.push(x.clone());
        trace.objective.push(value);
        if improvement <= cfg.sca_rel_tol * value.abs().max(1e-12) {
            trace.converged = true;
            break;
        }
    }
    Ok((x, trace))
}

/// Weighted-sum SCA: maximizes `sum_k mu_k log2(1 + gamma_k(x))` from `x_init`.
pub fn sca_iterate(
    s: &Scenario,
    mu: &[f64],
    x_init: &DeploymentPattern,
    cfg: &SolverConfig,
) -> Result<(DeploymentPattern, ScaTrace)> {
    sca_run(s, &Aggregate::Weighted(mu.to_vec()), x_init, cfg)
}
