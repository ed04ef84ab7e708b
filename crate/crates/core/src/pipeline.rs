//! End-to-end solvers for the three deployment modes, plus evaluation of a
//! design made on one scenario against another (angle-estimation error).

use serde::{Deserialize, Serialize};

use crate::baseline::{static_optimal, StaticSolution};
use crate::dual::{discover_patterns, PatternSet};
use crate::error::Result;
use crate::mmse::rate_vector;
use crate::scenario::{Scenario, SolverConfig};
use crate::ssmt::{plan_ssmt, switching_rates, PlanMode, SsmtPlan};
use crate::timeshare::{allocate_time, average_rates, TimeAllocation};

/// Time sharing with instantaneous pattern changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealSolution {
    pub patterns: PatternSet,
    pub allocation: TimeAllocation,
    pub average_rates: Vec<f64>,
}

impl IdealSolution {
    pub fn min_rate(&self) -> f64 {
        self.allocation.min_rate
    }
}

/// Speed-limited trajectory with its static fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsmtSolution {
    pub patterns: PatternSet,
    pub baseline: StaticSolution,
    pub plan: SsmtPlan,
}

impl SsmtSolution {
    pub fn min_rate(&self) -> f64 {
        self.plan.min_rate
    }
}

pub fn solve_ideal(s: &Scenario, cfg: &SolverConfig) -> Result<IdealSolution> {
    let patterns = discover_patterns(s, cfg)?;
    time_share(s, patterns)
}

fn time_share(s: &Scenario, patterns: PatternSet) -> Result<IdealSolution> {
    let rates = patterns.rate_matrix();
    let zero = vec![0.0; s.num_users()];
    let allocation = allocate_time(&rates, s.horizon(), &zero, s.horizon())?;
    let average_rates = average_rates(&rates, &allocation.durations, &zero, s.horizon());
    Ok(IdealSolution {
        patterns,
        allocation,
        average_rates,
    })
}

pub fn solve_static(s: &Scenario, cfg: &SolverConfig) -> Result<StaticSolution> {
    static_optimal(s, cfg)
}

pub fn solve_ssmt(s: &Scenario, cfg: &SolverConfig) -> Result<SsmtSolution> {
    let patterns = discover_patterns(s, cfg)?;
    let baseline = static_optimal(s, cfg)?;
    plan_with(s, patterns, baseline, cfg)
}

/// SSMT plan for already computed patterns and baseline, e.g. when
/// sweeping the speed limit.
pub fn plan_with(
    s: &Scenario,
    patterns: PatternSet,
    baseline: StaticSolution,
    cfg: &SolverConfig,
) -> Result<SsmtSolution> {
    let plan = plan_ssmt(s, &patterns, &baseline, cfg)?;
    Ok(SsmtSolution {
        patterns,
        baseline,
        plan,
    })
}

/// Per-user average rates on `truth` when keeping the ideal design's
/// patterns and durations.
pub fn evaluate_ideal(truth: &Scenario, design: &IdealSolution) -> Result<Vec<f64>> {
    let rates = design
        .patterns
        .patterns
        .iter()
        .map(|p| Ok(rate_vector(truth, p)?.rates))
        .collect::<Result<Vec<_>>>()?;
    let zero = vec![0.0; truth.num_users()];
    Ok(average_rates(
        &rates,
        &design.allocation.durations,
        &zero,
        truth.horizon(),
    ))
}

/// Per-user rates on `truth` of a static pattern.
pub fn evaluate_static(truth: &Scenario, design: &StaticSolution) -> Result<Vec<f64>> {
    Ok(rate_vector(truth, &design.pattern)?.rates)
}

/// Per-user average rates on `truth` when replaying the plan's stays and
/// moves unchanged.
pub fn evaluate_plan(truth: &Scenario, plan: &SsmtPlan, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let rates = plan
        .patterns
        .iter()
        .map(|p| Ok(rate_vector(truth, p)?.rates))
        .collect::<Result<Vec<_>>>()?;
    let mut offsets = vec![0.0; truth.num_users()];
    if plan.mode == PlanMode::Dynamic {
        for seg in &plan.segments {
            for (acc, r) in offsets.iter_mut().zip(switching_rates(truth, seg, cfg)?) {
                *acc += r;
            }
        }
    }
    Ok(average_rates(&rates, &plan.stay_durations, &offsets, truth.horizon()))
}

/// Minimum rates of all three modes designed on `truth` with angles offset
/// by `aoa_error` and evaluated on `truth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub ideal: Vec<f64>,
    pub ssmt: Vec<f64>,
    pub static_rates: Vec<f64>,
    /// Number of patterns in the ideal design.
    pub num_patterns: usize,
    /// Total switching time of the trajectory design, zero for a static fallback.
    pub switching_time: f64,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

impl MismatchReport {
    pub fn ideal_min(&self) -> f64 {
        min_of(&self.ideal)
    }

    pub fn ssmt_min(&self) -> f64 {
        min_of(&self.ssmt)
    }

    pub fn static_min(&self) -> f64 {
        min_of(&self.static_rates)
    }
}

pub fn evaluate_with_aoa_error(truth: &Scenario, aoa_error: f64, cfg: &SolverConfig) -> Result<MismatchReport> {
    let believed = truth.apply_aoa_error(aoa_error);
    let ssmt = solve_ssmt(&believed, cfg)?;
    let ideal = time_share(&believed, ssmt.patterns.clone())?;
    Ok(MismatchReport {
        ideal: evaluate_ideal(truth, &ideal)?,
        ssmt: evaluate_plan(truth, &ssmt.plan, cfg)?,
        static_rates: evaluate_static(truth, &ssmt.baseline)?,
        num_patterns: ideal.patterns.len(),
        switching_time: ssmt.plan.switching_time,
    })
}
