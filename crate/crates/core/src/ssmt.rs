//! Stay-then-move trajectories under a track speed limit: visit the
//! patterns in a shortest-switching order, stay at each for an allocated
//! time, and move all tracks at full speed in between.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::StaticSolution;
use crate::channel::DeploymentPattern;
use crate::dual::PatternSet;
use crate::error::{Error, Result};
use crate::mmse::rate_vector;
use crate::scenario::{Scenario, SolverConfig};
use crate::timeshare::{allocate_time, average_rates};

/// Orders of at most this many patterns are solved exactly.
pub const EXACT_ORDERING_LIMIT: usize = 20;

/// Tolerance of the track-separation check during a move.
pub const COUPLING_SLACK: f64 = 1e-9;

/// Time to move between two patterns at `v_max`: the Chebyshev distance
/// over the speed.
pub fn switching_time(a: &DeploymentPattern, b: &DeploymentPattern, v_max: f64) -> Result<f64> {
    let distance = a.chebyshev(b);
    if distance == 0.0 {
        return Ok(0.0);
    }
    if !(v_max > 0.0) {
        return Err(Error::Unreachable);
    }
    Ok(distance / v_max)
}

fn path_cost(order: &[usize], dist: &[Vec<f64>]) -> f64 {
    order.windows(2).map(|w| dist[w[0]][w[1]]).sum()
}

/// Exact shortest open path over all start nodes. Among optimal paths the
/// lexicographically smallest visiting order is returned.
fn held_karp(dist: &[Vec<f64>]) -> Vec<usize> {
    let n = dist.len();
    if n <= 1 {
        return (0..n).collect();
    }
    let full = (1usize << n) - 1;
    // cost[mask * n + i]: cheapest path that starts at i and visits exactly mask.
    let mut cost = vec![f64::INFINITY; (1usize << n) * n];
    for i in 0..n {
        cost[(1 << i) * n + i] = 0.0;
    }
    for mask in 1..=full {
        for i in 0..n {
            if mask & (1 << i) == 0 || mask == 1 << i {
                continue;
            }
            let rest = mask & !(1 << i);
            let mut best = f64::INFINITY;
            let mut bits = rest;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let c = dist[i][j] + cost[rest * n + j];
                if c < best {
                    best = c;
                }
            }
            cost[mask * n + i] = best;
        }
    }
    let scale = dist.iter().flatten().fold(1.0f64, |a, b| a.max(*b));
    let tie = 1e-12 * scale * n as f64;
    let optimum = (0..n).map(|i| cost[full * n + i]).fold(f64::INFINITY, f64::min);
    let mut current = (0..n)
        .find(|&i| cost[full * n + i] <= optimum + tie)
        .expect("some start is optimal");
    let mut order = vec![current];
    let mut mask = full;
    let mut remaining = optimum;
    while order.len() < n {
        mask &= !(1 << current);
        let next = (0..n)
            .filter(|&j| mask & (1 << j) != 0)
            .find(|&j| dist[current][j] + cost[mask * n + j] <= remaining + tie)
            .expect("an optimal continuation exists");
        remaining -= dist[current][next];
        order.push(next);
        current = next;
    }
    order
}

/// Nearest-neighbour paths from every start, each improved by 2-opt; the
/// cheapest is kept.
fn heuristic_path(dist: &[Vec<f64>]) -> Vec<usize> {
    let n = dist.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in 0..n {
        let mut order = vec![start];
        let mut used = vec![false; n];
        used[start] = true;
        while order.len() < n {
            let last = *order.last().unwrap();
            let next = (0..n)
                .filter(|&j| !used[j])
                .min_by(|&a, &b| dist[last][a].total_cmp(&dist[last][b]))
                .unwrap();
            used[next] = true;
            order.push(next);
        }
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n - 1 {
                for j in i + 1..n {
                    let mut candidate = order.clone();
                    candidate[i..=j].reverse();
                    if path_cost(&candidate, dist) < path_cost(&order, dist) - 1e-12 {
                        order = candidate;
                        improved = true;
                    }
                }
            }
        }
        let c = path_cost(&order, dist);
        if best.as_ref().is_none_or(|(b, _)| c < *b - 1e-12) {
            best = Some((c, order));
        }
    }
    best.map(|b| b.1).unwrap_or_default()
}

/// Visiting order of `patterns` minimizing total switching time, and that
/// time. Exact up to [`EXACT_ORDERING_LIMIT`] patterns, heuristic beyond.
pub fn order_patterns(patterns: &[DeploymentPattern], v_max: f64) -> Result<(Vec<usize>, f64)> {
    let dist: Vec<Vec<f64>> = patterns
        .iter()
        .map(|a| patterns.iter().map(|b| a.chebyshev(b)).collect())
        .collect();
    let order = if patterns.len() <= EXACT_ORDERING_LIMIT {
        held_karp(&dist)
    } else {
        heuristic_path(&dist)
    };
    let mut total = 0.0;
    for w in order.windows(2) {
        total += switching_time(&patterns[w[0]], &patterns[w[1]], v_max)?;
    }
    Ok((order, total))
}

/// Straight-line move between two patterns, every track at full speed
/// until it reaches its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSegment {
    pub from: DeploymentPattern,
    pub to: DeploymentPattern,
    pub duration: f64,
    /// `+1` for tracks moving towards larger coordinates, `-1` otherwise.
    pub directions: Vec<f64>,
    /// Time at which each track reaches its target.
    pub arrivals: Vec<f64>,
    pub speed: f64,
}

impl SwitchSegment {
    pub fn new(from: &DeploymentPattern, to: &DeploymentPattern, v_max: f64) -> Result<Self> {
        let duration = switching_time(from, to, v_max)?;
        let mut directions = Vec::with_capacity(from.len());
        let mut arrivals = Vec::with_capacity(from.len());
        for (a, b) in from.coords().iter().zip(to.coords()) {
            directions.push(if b >= a { 1.0 } else { -1.0 });
            arrivals.push(if b == a { 0.0 } else { (b - a).abs() / v_max });
        }
        Ok(SwitchSegment {
            from: from.clone(),
            to: to.clone(),
            duration,
            directions,
            arrivals,
            speed: v_max,
        })
    }

    /// Per-track velocity while moving.
    pub fn velocities(&self) -> Vec<f64> {
        self.directions.iter().map(|d| d * self.speed).collect()
    }

    /// Segment start, end and all arrival times, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut t: Vec<f64> = vec![0.0, self.duration];
        t.extend(self.arrivals.iter().copied());
        t.sort_by(f64::total_cmp);
        t.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * self.duration.max(1.0));
        t
    }
}

/// Pattern at time `t` into the move.
pub fn transition_pattern(seg: &SwitchSegment, t: f64) -> DeploymentPattern {
    let t = t.clamp(0.0, seg.duration);
    DeploymentPattern::new(
        (0..seg.from.len())
            .map(|m| {
                if t >= seg.arrivals[m] {
                    seg.to.coords()[m]
                } else {
                    seg.from.coords()[m] + seg.directions[m] * seg.speed * t
                }
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCheck {
    pub coupling_free: bool,
    /// Smallest neighbouring-track gap seen (infinite for one track).
    pub min_distance: f64,
    pub at_time: f64,
}

/// Checks neighbouring-track gaps at every breakpoint and at `samples`
/// uniform times. Gaps are piecewise affine between breakpoints, so the
/// breakpoints alone decide the outcome; the samples are a cross-check.
pub fn verify_no_coupling(seg: &SwitchSegment, d_min: f64, samples: usize) -> CouplingCheck {
    let mut times = seg.breakpoints();
    let samples = samples.max(2);
    times.extend((0..samples).map(|i| seg.duration * i as f64 / (samples - 1) as f64));
    let mut worst = CouplingCheck {
        coupling_free: true,
        min_distance: f64::INFINITY,
        at_time: 0.0,
    };
    for t in times {
        let gap = transition_pattern(seg, t).min_gap();
        if gap < worst.min_distance {
            worst.min_distance = gap;
            worst.at_time = t;
        }
    }
    worst.coupling_free = worst.min_distance >= d_min - COUPLING_SLACK;
    worst
}

fn quadrature_nodes(seg: &SwitchSegment, samples: usize) -> Vec<f64> {
    let samples = samples.max(2);
    let mut t: Vec<f64> = (0..samples)
        .map(|i| seg.duration * i as f64 / (samples - 1) as f64)
        .collect();
    t.extend(seg.breakpoints());
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * seg.duration.max(1.0));
    t
}

/// Data delivered to every user during the move, `int log2(1 + gamma_k) dt`,
/// by the composite trapezoid rule.
pub fn switching_rates(s: &Scenario, seg: &SwitchSegment, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let k = s.num_users();
    if seg.duration == 0.0 {
        return Ok(vec![0.0; k]);
    }
    let d_min = s.geometry().min_separation;
    let nodes = quadrature_nodes(seg, cfg.quadrature_samples_per_segment);
    let values = nodes
        .par_iter()
        .map(|&t| {
            let p = transition_pattern(seg, t);
            let gap = p.min_gap();
            if gap < d_min - COUPLING_SLACK {
                return Err(Error::CouplingViolation {
                    distance: gap,
                    d_min,
                    time: t,
                });
            }
            Ok(rate_vector(s, &p)?.rates)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; k];
    for (w, v) in nodes.windows(2).zip(values.windows(2)) {
        let h = w[1] - w[0];
        for (acc, (a, b)) in total.iter_mut().zip(v[0].iter().zip(&v[1])) {
            *acc += 0.5 * h * (a + b);
        }
    }
    Ok(total)
}

/// Data delivered to user `k` during the move.
pub fn switching_rate(s: &Scenario, seg: &SwitchSegment, k: usize, cfg: &SolverConfig) -> Result<f64> {
    Ok(switching_rates(s, seg, cfg)?[k])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    Dynamic,
    StaticFallback,
}

/// A full-horizon trajectory: stays and moves in visiting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsmtPlan {
    pub mode: PlanMode,
    /// Indices into the input pattern set, in visiting order.
    pub order: Vec<usize>,
    /// Patterns in visiting order.
    pub patterns: Vec<DeploymentPattern>,
    /// Stay time at each pattern in visiting order, seconds.
    pub stay_durations: Vec<f64>,
    pub segments: Vec<SwitchSegment>,
    /// Data each user receives while moving, bits/Hz.
    pub switching_rates: Vec<f64>,
    pub switching_time: f64,
    pub average_rates: Vec<f64>,
    pub min_rate: f64,
}

impl SsmtPlan {
    fn fallback(s: &Scenario, baseline: &StaticSolution) -> Self {
        SsmtPlan {
            mode: PlanMode::StaticFallback,
            order: Vec::new(),
            patterns: vec![baseline.pattern.clone()],
            stay_durations: vec![s.horizon()],
            segments: Vec::new(),
            switching_rates: vec![0.0; s.num_users()],
            switching_time: 0.0,
            average_rates: baseline.rates.rates.clone(),
            min_rate: baseline.min_rate,
        }
    }

    /// Stays and moves for a motion controller, as TOML.
    pub fn export_toml(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Stay<'a> {
            pattern: &'a [f64],
            seconds: f64,
        }
        #[derive(Serialize)]
        struct Move<'a> {
            from: &'a [f64],
            to: &'a [f64],
            seconds: f64,
            velocities: Vec<f64>,
            arrivals: &'a [f64],
        }
        #[derive(Serialize)]
        struct Export<'a> {
            mode: PlanMode,
            stay: Vec<Stay<'a>>,
            #[serde(rename = "move")]
            moves: Vec<Move<'a>>,
        }
        let export = Export {
            mode: self.mode,
            stay: self
                .patterns
                .iter()
                .zip(&self.stay_durations)
                .map(|(p, t)| Stay {
                    pattern: p.coords(),
                    seconds: *t,
                })
                .collect(),
            moves: self
                .segments
                .iter()
                .map(|s| Move {
                    from: s.from.coords(),
                    to: s.to.coords(),
                    seconds: s.duration,
                    velocities: s.velocities(),
                    arrivals: &s.arrivals,
                })
                .collect(),
        };
        toml::to_string(&export).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Plans the trajectory for the speed limit of `s`. Falls back to the
/// static baseline when the moves use up the horizon or the resulting
/// rate does not beat it.
pub fn plan_ssmt(s: &Scenario, ps: &PatternSet, baseline: &StaticSolution, cfg: &SolverConfig) -> Result<SsmtPlan> {
    if ps.is_empty() {
        return Err(Error::field("patterns", "pattern set is empty"));
    }
    let horizon = s.horizon();
    let v_max = s.geometry().max_speed;
    let (order, switching_time) = match order_patterns(&ps.patterns, v_max) {
        Ok(o) => o,
        Err(Error::Unreachable) => return Ok(SsmtPlan::fallback(s, baseline)),
        Err(e) => return Err(e),
    };
    if switching_time >= horizon {
        return Ok(SsmtPlan::fallback(s, baseline));
    }

    let patterns: Vec<DeploymentPattern> = order.iter().map(|&i| ps.patterns[i].clone()).collect();
    let segments = patterns
        .windows(2)
        .map(|w| SwitchSegment::new(&w[0], &w[1], v_max))
        .collect::<Result<Vec<_>>>()?;
    let d_min = s.geometry().min_separation;
    let mut offsets = vec![0.0; s.num_users()];
    for seg in &segments {
        let check = verify_no_coupling(seg, d_min, cfg.quadrature_samples_per_segment);
        if !check.coupling_free {
            return Err(Error::CouplingViolation {
                distance: check.min_distance,
                d_min,
                time: check.at_time,
            });
        }
        for (acc, r) in offsets.iter_mut().zip(switching_rates(s, seg, cfg)?) {
            *acc += r;
        }
    }
    let rates: Vec<Vec<f64>> = order.iter().map(|&i| ps.rates[i].rates.clone()).collect();
    let budget = horizon - switching_time;
    let alloc = allocate_time(&rates, budget, &offsets, horizon)?;
    if alloc.min_rate < baseline.min_rate {
        return Ok(SsmtPlan::fallback(s, baseline));
    }
    Ok(SsmtPlan {
        mode: PlanMode::Dynamic,
        average_rates: average_rates(&rates, &alloc.durations, &offsets, horizon),
        min_rate: alloc.min_rate,
        order,
        patterns,
        stay_durations: alloc.durations,
        segments,
        switching_rates: offsets,
        switching_time,
    })
}
