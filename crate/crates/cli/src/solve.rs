use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use mafair_core::dual::{discover_patterns_traced, DualTraceRow};
use mafair_core::pipeline::plan_with;
use mafair_core::timeshare::average_rates;
use mafair_core::{allocate_time, solve_static, PatternSet, Scenario, SolverConfig, SsmtPlan};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Mode;

/// Everything `solve` persists about one run.
#[derive(Debug, Serialize)]
pub struct ResultRecord {
    pub mode: &'static str,
    pub scenario: String,
    pub seed: u64,
    /// SHA-256 of the resolved scenario and solver settings.
    pub config_hash: String,
    pub min_rate: f64,
    pub per_user_rates: Vec<f64>,
    /// Patterns in the order of `durations`.
    pub patterns: Vec<Vec<f64>>,
    pub durations: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<SsmtPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct DualSummary {
    pub mu: Vec<f64>,
    pub dual_value: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl DualSummary {
    fn of(ps: &PatternSet) -> Self {
        DualSummary {
            mu: ps.mu.clone(),
            dual_value: ps.dual_value,
            converged: ps.converged,
            iterations: ps.iterations,
        }
    }
}

pub struct Outcome {
    pub record: ResultRecord,
    pub trace: Option<Vec<DualTraceRow>>,
    pub plan_toml: Option<String>,
    pub warnings: Vec<String>,
}

pub fn config_hash(s: &Scenario, cfg: &SolverConfig) -> String {
    let digest = Sha256::digest(s.to_toml(Some(cfg)).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn coords(ps: &[mafair_core::DeploymentPattern]) -> Vec<Vec<f64>> {
    ps.iter().map(|p| p.coords().to_vec()).collect()
}

pub fn solve(s: &Scenario, cfg: &SolverConfig, mode: Mode, path: &Path, omit_timing: bool) -> Result<Outcome> {
    let start = Instant::now();
    let mut warnings = Vec::new();
    let mut trace = None;
    let mut plan_toml = None;
    let (per_user_rates, patterns, durations, dual, plan) = match mode {
        Mode::Static => {
            let st = solve_static(s, cfg)?;
            (
                st.rates.rates.clone(),
                vec![st.pattern.coords().to_vec()],
                vec![s.horizon()],
                None,
                None,
            )
        }
        Mode::Ideal | Mode::Ssmt => {
            let run = discover_patterns_traced(s, cfg)?;
            let ps = run.patterns;
            trace = Some(run.trace);
            if !ps.converged {
                warnings.push(format!(
                    "pattern search stopped at its iteration cap ({} iterations)",
                    ps.iterations
                ));
            }
            let dual = Some(DualSummary::of(&ps));
            if mode == Mode::Ideal {
                let rates = ps.rate_matrix();
                let zero = vec![0.0; s.num_users()];
                let allocation = allocate_time(&rates, s.horizon(), &zero, s.horizon())?;
                let avg = average_rates(&rates, &allocation.durations, &zero, s.horizon());
                (avg, coords(&ps.patterns), allocation.durations, dual, None)
            } else {
                let baseline = solve_static(s, cfg)?;
                let solution = plan_with(s, ps, baseline, cfg)?;
                let plan = solution.plan;
                plan_toml = Some(plan.export_toml()?);
                (
                    plan.average_rates.clone(),
                    coords(&plan.patterns),
                    plan.stay_durations.clone(),
                    dual,
                    Some(plan),
                )
            }
        }
    };
    let min_rate = per_user_rates.iter().copied().fold(f64::INFINITY, f64::min);
    let record = ResultRecord {
        mode: mode.name(),
        scenario: path.display().to_string(),
        seed: cfg.rng_seed,
        config_hash: config_hash(s, cfg),
        min_rate,
        per_user_rates,
        patterns,
        durations,
        dual,
        plan,
        wall_ms: (!omit_timing).then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(Outcome {
        record,
        trace,
        plan_toml,
        warnings,
    })
}
