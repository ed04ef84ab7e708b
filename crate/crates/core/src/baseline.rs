//! Static single-pattern baseline and the two-track grid oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::DeploymentPattern;
use crate::dual::{merge_duplicates, stationary_points};
use crate::error::{Error, Result};
use crate::mmse::{rate_vector, RateVector};
use crate::sca::Aggregate;
use crate::scenario::{Scenario, SolverConfig};

/// One pattern held for the whole horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticSolution {
    pub pattern: DeploymentPattern,
    pub rates: RateVector,
    pub min_rate: f64,
}

impl StaticSolution {
    pub fn at(s: &Scenario, pattern: DeploymentPattern) -> Result<Self> {
        let rates = rate_vector(s, &pattern)?;
        Ok(StaticSolution {
            min_rate: rates.min_rate(),
            pattern,
            rates,
        })
    }
}

/// Scalar objective scanned by the grid oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum GridObjective {
    Weighted(Vec<f64>),
    MaxMin,
}

impl GridObjective {
    fn value(&self, r: &RateVector) -> f64 {
        match self {
            GridObjective::Weighted(mu) => r.weighted_sum(mu),
            GridObjective::MaxMin => r.min_rate(),
        }
    }
}

fn grid_points(s: &Scenario, step: f64) -> Result<Vec<f64>> {
    let g = s.geometry();
    if g.num_tracks != 2 {
        return Err(Error::field(
            "M",
            format!("grid search needs exactly 2 tracks, got {}", g.num_tracks),
        ));
    }
    if !(step > 0.0) {
        return Err(Error::field("grid_step", "must be positive"));
    }
    let upper = g.span - g.min_separation;
    let count = (upper / step + 1e-9).floor() as usize;
    let mut xs: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
    if upper - xs[count] > 1e-9 {
        xs.push(upper);
    }
    Ok(xs)
}

/// Rates of every user as `x_1` sweeps `[0, L - d_min]` with `x_2 = L`.
pub fn x1_curve(s: &Scenario, step: f64) -> Result<Vec<(f64, RateVector)>> {
    let span = s.geometry().span;
    grid_points(s, step)?
        .into_par_iter()
        .map(|x1| Ok((x1, rate_vector(s, &DeploymentPattern::pinned_pair(x1, span))?)))
        .collect()
}

/// Exhaustive scan over `x_1` at `cfg.grid_step` with `x_2 = L`; returns
/// the first maximizer and its value.
pub fn grid_oracle(s: &Scenario, objective: &GridObjective, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let mut best = (0.0, f64::NEG_INFINITY);
    for (x1, r) in x1_curve(s, cfg.grid_step)? {
        let v = objective.value(&r);
        if v > best.1 {
            best = (x1, v);
        }
    }
    Ok(best)
}

/// Grid points that are at least as good as both neighbours (strictly
/// better than one), in increasing `x_1`.
pub fn grid_local_maxima(s: &Scenario, objective: &GridObjective, cfg: &SolverConfig) -> Result<Vec<(f64, f64)>> {
    let curve: Vec<(f64, f64)> = x1_curve(s, cfg.grid_step)?
        .into_iter()
        .map(|(x, r)| (x, objective.value(&r)))
        .collect();
    let n = curve.len();
    Ok((0..n)
        .filter(|&i| {
            let v = curve[i].1;
            let left = if i > 0 { curve[i - 1].1 } else { f64::NEG_INFINITY };
            let right = if i + 1 < n { curve[i + 1].1 } else { f64::NEG_INFINITY };
            v >= left && v > right || v > left && v >= right
        })
        .map(|i| curve[i])
        .collect())
}

/// Best single pattern for the minimum rate. Two tracks are scanned on the
/// grid; more tracks use multi-start SCA on a smooth minimum of the rates.
pub fn static_optimal(s: &Scenario, cfg: &SolverConfig) -> Result<StaticSolution> {
    let g = s.geometry();
    match g.num_tracks {
        1 => StaticSolution::at(s, DeploymentPattern::new(vec![g.span])),
        2 => {
            let (x1, _) = grid_oracle(s, &GridObjective::MaxMin, cfg)?;
            StaticSolution::at(s, DeploymentPattern::pinned_pair(x1, g.span))
        }
        _ => static_by_sca(s, cfg),
    }
}

fn static_by_sca(s: &Scenario, cfg: &SolverConfig) -> Result<StaticSolution> {
    let aggregate = Aggregate::SoftMin(cfg.softmin_temperature);
    let points = merge_duplicates(stationary_points(s, &aggregate, cfg)?, cfg.pattern_merge_tol);
    let mut best: Option<StaticSolution> = None;
    for (p, _) in points {
        let candidate = StaticSolution::at(s, p)?;
        if best.as_ref().is_none_or(|b| candidate.min_rate > b.min_rate) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::multistart_patterns;
    use crate::scenario::{reference_scenario, ArrayGeometry, UserSpec};

    #[test]
    fn grid_covers_interval_end() {
        let s = reference_scenario();
        let xs = grid_points(&s, 0.7).unwrap();
        assert_eq!(xs[0], 0.0);
        assert!((xs.last().unwrap() - 19.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_other_track_counts() {
        let g = ArrayGeometry::new(3, 1, 5.0, 0.5, 1.0).unwrap();
        let s = Scenario::new(g, vec![UserSpec::new(0.3, 0.3, 10.0, 1.0)], 0.0, 1.0).unwrap();
        let err = grid_oracle(&s, &GridObjective::MaxMin, &SolverConfig::default()).unwrap_err();
        assert!(err.to_string().contains('M'));
    }

    #[test]
    fn single_user_static_rate_is_interference_free() {
        let g = ArrayGeometry::new(2, 3, 6.0, 0.5, 1.0).unwrap();
        let s = Scenario::new(g, vec![UserSpec::new(0.7, 0.2, 10.0, 1.0)], 0.0, 1.0).unwrap();
        let st = static_optimal(&s, &SolverConfig::default()).unwrap();
        assert!((st.min_rate - 61f64.log2()).abs() < 1e-10);
    }

    #[test]
    fn halving_grid_step_moves_argmax_by_at_most_one_step() {
        let s = reference_scenario();
        let mut cfg = SolverConfig {
            grid_step: 0.02,
            ..SolverConfig::default()
        };
        let (a, _) = grid_oracle(&s, &GridObjective::MaxMin, &cfg).unwrap();
        cfg.grid_step = 0.01;
        let (b, _) = grid_oracle(&s, &GridObjective::MaxMin, &cfg).unwrap();
        assert!((a - b).abs() <= 0.02 + 1e-9);
    }

    #[test]
    fn local_maxima_of_weighted_objective() {
        let s = reference_scenario();
        let mu = vec![0.229, 0.1507, 0.6203];
        let maxima = grid_local_maxima(&s, &GridObjective::Weighted(mu), &SolverConfig::default()).unwrap();
        let best = maxima.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
        let top: Vec<f64> = maxima.iter().filter(|m| m.1 >= best - 1e-2).map(|m| m.0).collect();
        assert_eq!(top.len(), 3, "{maxima:?}");
        assert_eq!(top[0], 0.0);
    }

    #[test]
    fn sca_static_agrees_with_the_grid_on_two_tracks() {
        let s = reference_scenario();
        let cfg = SolverConfig::default();
        let (_, grid) = grid_oracle(&s, &GridObjective::MaxMin, &cfg).unwrap();
        let sca = static_by_sca(&s, &cfg).unwrap();
        assert!(sca.min_rate >= grid - 1e-3, "{} vs {grid}", sca.min_rate);
    }

    #[test]
    fn three_track_static_beats_random_patterns() {
        let g = ArrayGeometry::new(3, 2, 8.0, 0.5, 1.0).unwrap();
        let users = vec![
            UserSpec::new(0.5, 0.4, 10.0, 1.0),
            UserSpec::new(0.6, 0.5, 10.0, 1.0),
            UserSpec::new(0.45, 0.6, 10.0, 1.0),
        ];
        let s = Scenario::new(g, users, 0.0, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let st = static_optimal(&s, &cfg).unwrap();
        assert!(st.pattern.check(s.geometry()).is_ok());
        let random_best = multistart_patterns(s.geometry(), 1000, 99)
            .iter()
            .map(|p| rate_vector(&s, p).unwrap().min_rate())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(st.min_rate >= random_best - 1e-3, "{} vs {random_best}", st.min_rate);
    }
}
