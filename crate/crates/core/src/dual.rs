//! Dual pattern discovery: an ellipsoid method over the user weights `mu`
//! whose dual function is the best weighted sum rate over all patterns.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::DeploymentPattern;
use crate::error::{Error, Result};
use crate::mmse::{rate_vector, RateVector};
use crate::sca::{sca_run, true_objective, Aggregate};
use crate::scenario::{ArrayGeometry, Scenario, SolverConfig};
use crate::timeshare::allocate_time;

/// Screened starts are the best of this many samples per start.
pub const SCREENING_POOL_FACTOR: usize = 32;
const SCREENING_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

/// Patterns whose weighted value is this close (relative) to `f(mu)` count
/// as exact maximizers when picking the cut direction.
const EXACT_TIE_REL: f64 = 1e-12;

/// Relative gain in the max-min rate needed before the patterns found at
/// earlier weights replace those at the final weights.
pub const POOL_GAIN_REL: f64 = 1e-4;

/// Ellipsoid center `mu` and shape matrix `B`.
///
/// `B` is carried as a factor `J` with `B = J J^T`. Thin ellipsoids make the
/// direct update lose `g^T B g` to cancellation; the factored update does not.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub mu: Vec<f64>,
    pub shape: DMatrix<f64>,
    pub factor: DMatrix<f64>,
    pub iteration: usize,
}

impl DualState {
    /// `mu_k = 1/K`, `B = K I`.
    pub fn initial(num_users: usize) -> Self {
        let k = num_users as f64;
        DualState {
            mu: vec![1.0 / k; num_users],
            shape: DMatrix::identity(num_users, num_users) * k,
            factor: DMatrix::identity(num_users, num_users) * k.sqrt(),
            iteration: 0,
        }
    }

    /// State with an explicit positive definite `shape`.
    pub fn with_shape(mu: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let factor = shape
            .clone()
            .cholesky()
            .ok_or_else(|| Error::field("shape", "must be symmetric positive definite"))?
            .l();
        Ok(DualState {
            mu,
            shape,
            factor,
            iteration: 0,
        })
    }

    /// `sqrt(g^T B g)`.
    pub fn step_norm(&self, gra: &[f64]) -> f64 {
        (self.factor.transpose() * DVector::from_column_slice(gra)).norm()
    }
}

/// Patterns that jointly maximize the weighted sum rate at one `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    /// Right-aligned (`x_M = L`), in lexicographic order.
    pub patterns: Vec<DeploymentPattern>,
    pub rates: Vec<RateVector>,
    /// Weighted sum rate of each pattern at `mu`.
    pub values: Vec<f64>,
    pub mu: Vec<f64>,
    /// `f(mu)`, the best weighted sum rate.
    pub dual_value: f64,
    /// False when the ellipsoid loop stopped at its iteration cap.
    pub converged: bool,
    pub iterations: usize,
}

impl PatternSet {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// `Gamma x K` rate matrix.
    pub fn rate_matrix(&self) -> Vec<Vec<f64>> {
        self.rates.iter().map(|r| r.rates.clone()).collect()
    }
}

/// One line of the ellipsoid convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTraceRow {
    pub iteration: usize,
    pub mu: Vec<f64>,
    /// Dual value, present only on objective iterations.
    pub dual_value: Option<f64>,
    pub step_norm: f64,
}

/// Writes the trace as CSV: `iteration,mu_1..mu_K,f,step_norm`.
pub fn write_trace_csv<W: Write>(rows: &[DualTraceRow], mut out: W) -> std::io::Result<()> {
    let k = rows.first().map_or(0, |r| r.mu.len());
    let mu_cols: Vec<String> = (1..=k).map(|i| format!("mu_{i}")).collect();
    writeln!(out, "iteration,{},f,step_norm", mu_cols.join(","))?;
    for r in rows {
        let mu: Vec<String> = r.mu.iter().map(|m| format!("{m:.12}")).collect();
        let f = r.dual_value.map(|v| format!("{v:.12}")).unwrap_or_default();
        writeln!(out, "{},{},{f},{:.6e}", r.iteration, mu.join(","), r.step_norm)?;
    }
    Ok(())
}

/// Deterministic multi-start patterns: the `M` vertices of the
/// right-aligned polytope (maxima often sit on its boundary) followed by
/// `count` Latin-hypercube samples of it, so every stretch of each free
/// coordinate is covered even with few starts.
pub fn multistart_patterns(geometry: &ArrayGeometry, count: usize, seed: u64) -> Vec<DeploymentPattern> {
    let m = geometry.num_tracks;
    if m == 1 {
        return vec![DeploymentPattern::new(vec![geometry.span])];
    }
    let count = count.max(1);
    let free = geometry.free_span();
    let d = geometry.min_separation;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strata: Vec<Vec<usize>> = (0..m - 1)
        .map(|_| {
            let mut p: Vec<usize> = (0..count).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let lift = |u: Vec<f64>| DeploymentPattern::new(u.iter().enumerate().map(|(j, v)| v + j as f64 * d).collect());
    // Vertex v has its first v tracks packed at the left end.
    let vertices = (0..m).map(|v| lift((0..m).map(|j| if j < v { 0.0 } else { free }).collect()));
    let samples = (0..count).map(|i| {
        let mut u: Vec<f64> = strata
            .iter()
            .map(|perm| (perm[i] as f64 + rng.gen::<f64>()) / count as f64 * free)
            .collect();
        u.sort_by(f64::total_cmp);
        u.push(free);
        lift(u)
    });
    vertices.chain(samples.collect::<Vec<_>>()).collect()
}

/// The `count` best of `SCREENING_POOL_FACTOR * count` samples of the
/// right-aligned polytope, ranked by the true objective.
pub fn screened_starts(s: &Scenario, aggregate: &Aggregate, count: usize, seed: u64) -> Result<Vec<DeploymentPattern>> {
    if s.geometry().num_tracks == 1 || count == 0 {
        return Ok(Vec::new());
    }
    let pool = multistart_patterns(s.geometry(), SCREENING_POOL_FACTOR * count, seed ^ SCREENING_SEED_MIX);
    let mut scored = pool[s.geometry().num_tracks..]
        .par_iter()
        .map(|p| Ok((true_objective(s, aggregate, p)?, p.clone())))
        .collect::<Result<Vec<_>>>()?;
    // Stable sort keeps the draw order among equal scores.
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(scored.into_iter().take(count).map(|(_, p)| p).collect())
}

/// Stationary points of `aggregate` from every start, right-aligned and
/// paired with their objective value, in start order. Starts are the
/// polytope vertices, `num_starts` stratified samples and `num_starts`
/// screened samples.
pub fn stationary_points(
    s: &Scenario,
    aggregate: &Aggregate,
    cfg: &SolverConfig,
) -> Result<Vec<(DeploymentPattern, f64)>> {
    let span = s.geometry().span;
    let mut starts = multistart_patterns(s.geometry(), cfg.num_starts, cfg.rng_seed);
    starts.extend(screened_starts(s, aggregate, cfg.num_starts, cfg.rng_seed)?);
    starts
        .into_par_iter()
        .map(|start| {
            let (x, trace) = sca_run(s, aggregate, &start, cfg)?;
            let value = *trace.objective.last().expect("trace holds the start");
            Ok((x.right_aligned(span), value))
        })
        .collect()
}

/// Merges points closer than `tol` (max-norm), keeping the better value.
pub fn merge_duplicates(mut points: Vec<(DeploymentPattern, f64)>, tol: f64) -> Vec<(DeploymentPattern, f64)> {
    points.sort_by(|a, b| a.0.lexicographic_cmp(&b.0));
    let mut merged: Vec<(DeploymentPattern, f64)> = Vec::new();
    for (p, v) in points {
        match merged.iter_mut().find(|(q, _)| q.chebyshev(&p) <= tol) {
            Some(entry) => {
                if v > entry.1 {
                    *entry = (p, v);
                }
            }
            None => merged.push((p, v)),
        }
    }
    merged.sort_by(|a, b| a.0.lexicographic_cmp(&b.0));
    merged
}

/// `f(mu) = max_x sum_k mu_k log2(1 + gamma_k(x))` by multi-start SCA, with
/// the set of patterns attaining it within `concurrent_max_rel_tol`.
pub fn dual_function(s: &Scenario, mu: &[f64], cfg: &SolverConfig) -> Result<(f64, PatternSet)> {
    let aggregate = Aggregate::Weighted(mu.to_vec());
    let points = merge_duplicates(stationary_points(s, &aggregate, cfg)?, cfg.pattern_merge_tol);
    let best = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - cfg.concurrent_max_rel_tol * best.abs();
    let (patterns, values): (Vec<DeploymentPattern>, Vec<f64>) =
        points.into_iter().filter(|p| p.1 >= threshold).unzip();
    let rates = patterns.iter().map(|p| rate_vector(s, p)).collect::<Result<Vec<_>>>()?;
    Ok((
        best,
        PatternSet {
            patterns,
            rates,
            values,
            mu: mu.to_vec(),
            dual_value: best,
            converged: true,
            iterations: 0,
        },
    ))
}

/// Cutting-plane direction at the current center. Weights that are not
/// positive or do not sum to one get a feasibility cut; otherwise the rate
/// vector at the best pattern is returned, the lexicographically smallest
/// one among exact ties.
pub fn subgradient(state: &DualState, f_output: Option<&PatternSet>, simplex_tol: f64) -> Vec<f64> {
    let k = state.mu.len();
    let mut argmin = 0;
    for (i, m) in state.mu.iter().enumerate() {
        if *m < state.mu[argmin] {
            argmin = i;
        }
    }
    if state.mu[argmin] <= 0.0 {
        let mut g = vec![0.0; k];
        g[argmin] = -1.0;
        return g;
    }
    let total: f64 = state.mu.iter().sum();
    if total > 1.0 + simplex_tol {
        return vec![1.0; k];
    }
    if total < 1.0 - simplex_tol {
        return vec![-1.0; k];
    }
    let ps = f_output.expect("objective cut needs the dual function output");
    let tie = ps.dual_value - EXACT_TIE_REL * ps.dual_value.abs();
    let pick = ps.values.iter().position(|v| *v >= tie).unwrap_or(0);
    ps.rates[pick].rates.clone()
}

/// Whether `subgradient` would need a dual function evaluation at `state`.
pub fn needs_objective(state: &DualState, simplex_tol: f64) -> bool {
    state.mu.iter().all(|m| *m > 0.0) && (state.mu.iter().sum::<f64>() - 1.0).abs() <= simplex_tol
}

/// Central-cut ellipsoid update.
pub fn ellipsoid_step(state: &DualState, gra: &[f64]) -> Result<DualState> {
    let k = state.mu.len() as f64;
    let g = DVector::from_column_slice(gra);
    let p = state.factor.transpose() * &g;
    let root = p.norm();
    let gbg = root * root;
    if !(gbg > 0.0) || !gbg.is_finite() {
        return Err(Error::EllipsoidCollapse(gbg));
    }
    let bg = &state.factor * &p;
    let mu: Vec<f64> = state
        .mu
        .iter()
        .zip(bg.iter())
        .map(|(m, b)| m - b / ((k + 1.0) * root))
        .collect();
    // J' = K / sqrt(K^2 - 1) J (I - c p p^T / |p|^2) gives J' J'^T = B'.
    let c = 1.0 - ((k - 1.0) / (k + 1.0)).sqrt();
    let jp = &state.factor * &p;
    let factor = (&state.factor - (jp * p.transpose()) * (c / gbg)) * (k / (k * k - 1.0).sqrt());
    let shape = &factor * factor.transpose();
    // Keep B exactly symmetric against rounding drift.
    let shape = (&shape + shape.transpose()) * 0.5;
    Ok(DualState {
        mu,
        shape,
        factor,
        iteration: state.iteration + 1,
    })
}

/// Runs the ellipsoid loop from `mu = 1/K` and returns the pattern set at
/// the last evaluated weights, or at the weights with the lowest dual value
/// if the iteration cap is hit first.
pub fn discover_patterns(s: &Scenario, cfg: &SolverConfig) -> Result<PatternSet> {
    discover_patterns_traced(s, cfg).map(|run| run.patterns)
}

/// Output of the ellipsoid loop with diagnostics.
#[derive(Debug, Clone)]
pub struct DualRun {
    pub patterns: PatternSet,
    pub trace: Vec<DualTraceRow>,
    /// Maximizers found at every evaluated `mu`, merged, with their rates.
    pub explored: Vec<(DeploymentPattern, RateVector)>,
}

/// Like [`discover_patterns`], also returning the convergence trace and
/// every maximizer seen on the way.
pub fn discover_patterns_traced(s: &Scenario, cfg: &SolverConfig) -> Result<DualRun> {
    let k = s.num_users();
    if k == 1 {
        let (_, mut ps) = dual_function(s, &[1.0], cfg)?;
        ps.converged = true;
        let row = DualTraceRow {
            iteration: 0,
            mu: vec![1.0],
            dual_value: Some(ps.dual_value),
            step_norm: 0.0,
        };
        let explored = ps.patterns.iter().cloned().zip(ps.rates.iter().cloned()).collect();
        return Ok(DualRun {
            patterns: ps,
            trace: vec![row],
            explored,
        });
    }

    let mut state = DualState::initial(k);
    let mut trace = Vec::new();
    let mut last: Option<PatternSet> = None;
    let mut best: Option<PatternSet> = None;
    let mut explored: Vec<(DeploymentPattern, RateVector)> = Vec::new();
    let mut converged = false;
    while state.iteration < cfg.ellipsoid_max_iters {
        let objective = needs_objective(&state, cfg.simplex_tol);
        let evaluated = if objective {
            Some(dual_function(s, &state.mu, cfg)?.1)
        } else {
            None
        };
        let gra = subgradient(&state, evaluated.as_ref(), cfg.simplex_tol);
        let norm = state.step_norm(&gra);
        trace.push(DualTraceRow {
            iteration: state.iteration,
            mu: state.mu.clone(),
            dual_value: evaluated.as_ref().map(|p| p.dual_value),
            step_norm: norm,
        });
        if let Some(ps) = evaluated {
            for (p, r) in ps.patterns.iter().zip(&ps.rates) {
                if !explored
                    .iter()
                    .any(|(q, _): &(DeploymentPattern, RateVector)| q.chebyshev(p) <= cfg.pattern_merge_tol)
                {
                    explored.push((p.clone(), r.clone()));
                }
            }
            if norm < cfg.ellipsoid_tol {
                last = Some(ps);
                converged = true;
                break;
            }
            if best.as_ref().is_none_or(|b: &PatternSet| ps.dual_value < b.dual_value) {
                best = Some(ps.clone());
            }
            last = Some(ps);
        }
        state = ellipsoid_step(&state, &gra)?;
    }

    // At the cap, the lowest dual value seen is the best estimate.
    let chosen = if converged { last } else { best };
    let mut ps = match chosen {
        Some(ps) => ps,
        // Never reached the simplex; project the center and evaluate there.
        None => {
            let clipped: Vec<f64> = state.mu.iter().map(|m| m.max(1e-12)).collect();
            let total: f64 = clipped.iter().sum();
            let mu: Vec<f64> = clipped.iter().map(|m| m / total).collect();
            dual_function(s, &mu, cfg)?.1
        }
    };
    ps.converged = converged;
    ps.iterations = state.iteration;
    explored.sort_by(|a, b| a.0.lexicographic_cmp(&b.0));
    if !explored.is_empty() {
        ps = pooled_support(ps, &explored)?;
    }
    Ok(DualRun {
        patterns: ps,
        trace,
        explored,
    })
}

/// Replaces the patterns of `ps` by the support of the best time sharing
/// over every explored maximizer, when that beats time sharing over `ps`
/// itself by more than [`POOL_GAIN_REL`].
fn pooled_support(mut ps: PatternSet, explored: &[(DeploymentPattern, RateVector)]) -> Result<PatternSet> {
    let zero = vec![0.0; ps.mu.len()];
    let own = allocate_time(&ps.rate_matrix(), 1.0, &zero, 1.0)?.min_rate;
    let rates: Vec<Vec<f64>> = explored.iter().map(|(_, r)| r.rates.clone()).collect();
    let allocation = allocate_time(&rates, 1.0, &zero, 1.0)?;
    if allocation.min_rate <= own * (1.0 + POOL_GAIN_REL) {
        return Ok(ps);
    }
    let support: Vec<usize> = (0..explored.len()).filter(|&i| allocation.durations[i] > 0.0).collect();
    ps.patterns = support.iter().map(|&i| explored[i].0.clone()).collect();
    ps.rates = support.iter().map(|&i| explored[i].1.clone()).collect();
    ps.values = ps.rates.iter().map(|r| r.weighted_sum(&ps.mu)).collect();
    Ok(ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{reference_scenario, UserSpec};

    fn smallest_eigenvalue(b: &DMatrix<f64>) -> f64 {
        b.clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn feasibility_cuts() {
        let st = DualState::with_shape(vec![0.5, -0.1, 0.6], DMatrix::identity(3, 3)).unwrap();
        assert_eq!(subgradient(&st, None, 1e-7), vec![0.0, -1.0, 0.0]);
        let st = DualState { mu: vec![0.5; 3], ..st };
        assert_eq!(subgradient(&st, None, 1e-7), vec![1.0; 3]);
        let st = DualState { mu: vec![0.2; 3], ..st };
        assert_eq!(subgradient(&st, None, 1e-7), vec![-1.0; 3]);
    }

    #[test]
    fn objective_cut_breaks_ties_lexicographically() {
        let st = DualState::initial(2);
        let ps = PatternSet {
            patterns: vec![
                DeploymentPattern::new(vec![0.0, 1.0]),
                DeploymentPattern::new(vec![0.5, 1.0]),
            ],
            rates: vec![
                RateVector::from_sinrs(vec![1.0, 3.0]),
                RateVector::from_sinrs(vec![3.0, 1.0]),
            ],
            values: vec![1.5, 1.5],
            mu: st.mu.clone(),
            dual_value: 1.5,
            converged: true,
            iterations: 0,
        };
        assert_eq!(subgradient(&st, Some(&ps), 1e-7), vec![1.0, 2.0]);
        let ps = PatternSet {
            values: vec![1.499, 1.5],
            ..ps
        };
        assert_eq!(subgradient(&st, Some(&ps), 1e-7), vec![2.0, 1.0]);
    }

    #[test]
    fn single_step_by_hand() {
        // K = 3, B = 3I, g = e1: Bg = 3e1, g^T B g = 3.
        // mu_1 = 1/3 - 3 / (4 sqrt 3); B = 9/8 (3I - 3/2 e1 e1^T).
        let st = DualState::initial(3);
        let next = ellipsoid_step(&st, &[1.0, 0.0, 0.0]).unwrap();
        let mu1 = 1.0 / 3.0 - 3.0 / (4.0 * 3f64.sqrt());
        assert!((next.mu[0] - mu1).abs() < 1e-15);
        assert!((next.mu[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((next.shape[(0, 0)] - 9.0 / 8.0 * 1.5).abs() < 1e-14);
        assert!((next.shape[(1, 1)] - 27.0 / 8.0).abs() < 1e-14);
        assert_eq!(next.shape[(0, 1)], 0.0);
        assert_eq!(next.iteration, 1);
    }

    #[test]
    fn volume_shrinks_and_shape_stays_positive_definite() {
        let mut st = DualState::initial(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut det = st.shape.determinant();
        for _ in 0..60 {
            let g: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            st = ellipsoid_step(&st, &g).unwrap();
            let d = st.shape.determinant();
            assert!(d < det);
            det = d;
            assert!(smallest_eigenvalue(&st.shape) >= -1e-12);
            assert!((&st.shape - st.shape.transpose()).norm() == 0.0);
        }
    }

    #[test]
    fn long_runs_of_simplex_cuts_keep_a_usable_shape() {
        // Alternating cuts on both sides of the simplex plane make the
        // ellipsoid a thin needle.
        let mut st = DualState::initial(2);
        st.mu = vec![0.1, 0.2];
        for i in 0..45 {
            let g = if i % 2 == 0 { [1.0, 1.0] } else { [-1.0, -1.0] };
            st = ellipsoid_step(&st, &g).unwrap();
        }
        assert!(st.step_norm(&[1.0, 1.0]) > 0.0);
        assert!(st.step_norm(&[1.0, 2.0]) > st.step_norm(&[1.0, 1.0]));
    }

    #[test]
    fn zero_direction_is_a_collapse() {
        let st = DualState::initial(2);
        assert!(matches!(
            ellipsoid_step(&st, &[0.0, 0.0]),
            Err(Error::EllipsoidCollapse(_))
        ));
    }

    #[test]
    fn starts_are_feasible_and_deterministic() {
        let s = reference_scenario();
        let all = multistart_patterns(s.geometry(), 12, 3);
        assert_eq!(all, multistart_patterns(s.geometry(), 12, 3));
        assert_eq!(all.len(), 14);
        assert_eq!(all[0].coords(), &[19.5, 20.0]);
        assert_eq!(all[1].coords(), &[0.0, 20.0]);
        let a = &all[2..];
        for p in a {
            assert!(p.check(s.geometry()).is_ok());
            assert_eq!(p.coords()[1], 20.0);
        }
        // One start per stratum of the free coordinate.
        let mut strata: Vec<usize> = a.iter().map(|p| (p.coords()[0] / 19.5 * 12.0) as usize).collect();
        strata.sort();
        assert_eq!(strata, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn merging_keeps_better_duplicate() {
        let pts = vec![
            (DeploymentPattern::new(vec![1.0, 5.0]), 1.0),
            (DeploymentPattern::new(vec![1.03, 5.0]), 1.2),
            (DeploymentPattern::new(vec![3.0, 5.0]), 0.5),
        ];
        let merged = merge_duplicates(pts, 0.05);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].1, 1.2);
    }

    #[test]
    fn single_user_dual_value_is_max_rate() {
        let g = ArrayGeometry::new(2, 2, 4.0, 0.5, 1.0).unwrap();
        let s = Scenario::new(g, vec![UserSpec::new(0.4, 0.3, 10.0, 1.0)], 0.0, 10.0).unwrap();
        let ps = discover_patterns(&s, &SolverConfig::default()).unwrap();
        assert_eq!(ps.mu, vec![1.0]);
        // Interference-free: every pattern gives log2(1 + Pbar beta M N).
        assert!((ps.dual_value - 41f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn dual_value_dominates_grid() {
        let s = reference_scenario();
        let mu = [0.229, 0.1507, 0.6203];
        let cfg = SolverConfig::default();
        let (f, ps) = dual_function(&s, &mu, &cfg).unwrap();
        for i in 0..=195 {
            let x1 = 0.1 * i as f64;
            let r = rate_vector(&s, &DeploymentPattern::pinned_pair(x1, 20.0)).unwrap();
            assert!(r.weighted_sum(&mu) <= f + 1e-6);
        }
        assert_eq!(ps.len(), 3);
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let rows = vec![DualTraceRow {
            iteration: 0,
            mu: vec![0.5, 0.5],
            dual_value: Some(1.0),
            step_norm: 0.25,
        }];
        let mut buf = Vec::new();
        write_trace_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,mu_1,mu_2,f,step_norm\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
