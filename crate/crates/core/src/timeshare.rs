//! Time sharing across deployment patterns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{Constraint, LinearProgram, Sense};

/// Relative slack on the optimal rate when the tie-breaking LP re-solves
/// for the earliest-pattern-heavy allocation.
const TIE_BREAK_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAllocation {
    /// Seconds spent at each pattern; sums to the budget.
    pub durations: Vec<f64>,
    /// Minimum over users of the time-averaged rate, bits/s/Hz.
    pub min_rate: f64,
}

/// Per-user averages `(sum_i t_i rates[i][k] + offsets[k]) / horizon`.
pub fn average_rates(rates: &[Vec<f64>], durations: &[f64], offsets: &[f64], horizon: f64) -> Vec<f64> {
    offsets
        .iter()
        .enumerate()
        .map(|(k, off)| {
            let served: f64 = rates.iter().zip(durations).map(|(r, t)| t * r[k]).sum();
            (served + off) / horizon
        })
        .collect()
}

fn validate(rates: &[Vec<f64>], budget: f64, offsets: &[f64], horizon: f64) -> Result<()> {
    let field = |f: &str, r: &str| Err(Error::field(f, r));
    if rates.is_empty() {
        return field("rates", "need at least one pattern");
    }
    if !(budget >= 0.0) || !budget.is_finite() {
        return field("budget", "must be finite and non-negative");
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return field("horizon_T", "must be finite and positive");
    }
    for row in rates {
        if row.len() != offsets.len() {
            return field("rates", "row length differs from number of users");
        }
        if row.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return field("rates", "must be finite and non-negative");
        }
    }
    if offsets.iter().any(|o| !o.is_finite() || *o < 0.0) {
        return field("offsets", "must be finite and non-negative");
    }
    Ok(())
}

/// Maximizes the minimum time-averaged rate
/// `(sum_i t_i rates[i][k] + offsets[k]) / horizon` over `t >= 0` with
/// `sum_i t_i = budget`.
///
/// Among optimal allocations, the one minimizing `sum_i i t_i` is returned.
pub fn allocate_time(rates: &[Vec<f64>], budget: f64, offsets: &[f64], horizon: f64) -> Result<TimeAllocation> {
    validate(rates, budget, offsets, horizon)?;
    let gamma = rates.len();
    let k = offsets.len();

    // Variables: t_1..t_Gamma, r.
    let mut constraints = Vec::with_capacity(k + 1);
    for user in 0..k {
        let mut row: Vec<f64> = rates.iter().map(|r| -r[user]).collect();
        row.push(horizon);
        constraints.push(Constraint::new(row, Sense::Le, offsets[user]));
    }
    let mut sum_row = vec![1.0; gamma];
    sum_row.push(0.0);
    constraints.push(Constraint::new(sum_row, Sense::Eq, budget));
    let mut objective = vec![0.0; gamma];
    objective.push(1.0);
    let first = LinearProgram { objective, constraints }.solve()?;
    let best = first[gamma];

    // Earliest-pattern-heavy optimum: min sum_i (i + 1) t_i at r >= r*.
    let floor = horizon * best * (1.0 - TIE_BREAK_SLACK);
    let mut constraints: Vec<Constraint> = (0..k)
        .map(|user| {
            Constraint::new(
                rates.iter().map(|r| r[user]).collect(),
                Sense::Ge,
                floor - offsets[user],
            )
        })
        .collect();
    constraints.push(Constraint::new(vec![1.0; gamma], Sense::Eq, budget));
    let objective = (0..gamma).map(|i| -((i + 1) as f64)).collect();
    let durations = match (LinearProgram { objective, constraints }).solve() {
        Ok(t) => t,
        Err(_) => first[..gamma].to_vec(),
    };

    let durations = normalize(durations, budget);
    let min_rate = average_rates(rates, &durations, offsets, horizon)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(TimeAllocation { durations, min_rate })
}

/// Clears round-off so that `t >= 0` and `sum t = budget` hold exactly.
fn normalize(mut t: Vec<f64>, budget: f64) -> Vec<f64> {
    for v in t.iter_mut() {
        *v = v.max(0.0);
    }
    let total: f64 = t.iter().sum();
    if total > 0.0 {
        let scale = budget / total;
        for v in t.iter_mut() {
            *v *= scale;
        }
    } else if let Some(v) = t.first_mut() {
        *v = budget;
    }
    let residual = budget - t.iter().sum::<f64>();
    let largest = (0..t.len()).fold(0, |b, i| if t[i] > t[b] { i } else { b });
    t[largest] += residual;
    t
}
