use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use mafair_core::pipeline::{evaluate_with_aoa_error, plan_with};
use mafair_core::timeshare::average_rates;
use mafair_core::{
    allocate_time, discover_patterns, rate_vector, solve_static, x1_curve, ArrayGeometry, DeploymentPattern,
    PatternSet, Scenario, SolverConfig, StaticSolution,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "L")]
    Span,
    #[value(name = "V_max")]
    MaxSpeed,
    #[value(name = "N")]
    Antennas,
    #[value(name = "K")]
    Users,
    #[value(name = "aoa_error")]
    AoaError,
    #[value(name = "x1_curve")]
    X1Curve,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Span => "L",
            Axis::MaxSpeed => "V_max",
            Axis::Antennas => "N",
            Axis::Users => "K",
            Axis::AoaError => "aoa_error",
            Axis::X1Curve => "x1_curve",
        }
    }
}

/// One CSV line.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub axis: &'static str,
    pub value: f64,
    pub mode: &'static str,
    pub min_rate: f64,
    /// Semicolon-separated, one entry per user.
    pub per_user_rates: String,
    pub gamma: usize,
    pub t_swi: f64,
    pub wall_ms: Option<f64>,
}

/// Parses `start:stop:step` (inclusive of `stop` up to round-off) or a
/// comma-separated list.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        ensure!(parts.len() == 3, "range {text:?} must be start:stop:step");
        let nums = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number {p:?} in range"))
            })
            .collect::<Result<Vec<f64>>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        ensure!(step > 0.0 && step.is_finite(), "range step must be positive");
        ensure!(stop >= start, "range stop must not be below start");
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounded so that printed values do not carry accumulation noise.
        (0..=count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        text.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number {p:?} in range"))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    ensure!(!values.is_empty(), "range is empty");
    ensure!(values.iter().all(|v| v.is_finite()), "range values must be finite");
    Ok(values)
}

fn joined(rates: &[f64]) -> String {
    rates.iter().map(|r| format!("{r:.10}")).collect::<Vec<_>>().join(";")
}

fn min_of(rates: &[f64]) -> f64 {
    rates.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Ideal time sharing over known patterns.
fn ideal_rates(s: &Scenario, ps: &PatternSet) -> Result<Vec<f64>> {
    let rates = ps.rate_matrix();
    let zero = vec![0.0; s.num_users()];
    let allocation = allocate_time(&rates, s.horizon(), &zero, s.horizon())?;
    Ok(average_rates(&rates, &allocation.durations, &zero, s.horizon()))
}

struct Shared {
    patterns: Option<(PatternSet, f64)>,
    baseline: Option<(StaticSolution, f64)>,
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, start.elapsed().as_secs_f64() * 1e3))
}

fn shared(s: &Scenario, cfg: &SolverConfig, modes: &[Mode]) -> Result<Shared> {
    let needs_patterns = modes.iter().any(|m| *m != Mode::Static);
    let needs_static = modes.iter().any(|m| *m != Mode::Ideal);
    Ok(Shared {
        patterns: if needs_patterns {
            Some(timed(|| Ok(discover_patterns(s, cfg)?))?)
        } else {
            None
        },
        baseline: if needs_static {
            Some(timed(|| Ok(solve_static(s, cfg)?))?)
        } else {
            None
        },
    })
}

/// Rows of all requested modes on scenario `s`, reusing `pre` when given.
fn mode_rows(
    s: &Scenario,
    cfg: &SolverConfig,
    axis: Axis,
    value: f64,
    modes: &[Mode],
    pre: &Shared,
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &mode in modes {
        let (rates, gamma, t_swi, wall) = match mode {
            Mode::Ideal => {
                let (ps, t) = pre.patterns.as_ref().expect("patterns computed");
                let (rates, extra) = timed(|| ideal_rates(s, ps))?;
                (rates, ps.len(), 0.0, t + extra)
            }
            Mode::Static => {
                let (st, t) = pre.baseline.as_ref().expect("baseline computed");
                (st.rates.rates.clone(), 1, 0.0, *t)
            }
            Mode::Ssmt => {
                let (ps, tp) = pre.patterns.as_ref().expect("patterns computed");
                let (st, ts) = pre.baseline.as_ref().expect("baseline computed");
                let (solution, extra) = timed(|| Ok(plan_with(s, ps.clone(), st.clone(), cfg)?))?;
                let plan = solution.plan;
                (
                    plan.average_rates.clone(),
                    plan.patterns.len(),
                    plan.switching_time,
                    tp + ts + extra,
                )
            }
        };
        rows.push(Row {
            axis: axis.name(),
            value,
            mode: mode.name(),
            min_rate: min_of(&rates),
            per_user_rates: joined(&rates),
            gamma,
            t_swi,
            wall_ms: Some(wall),
        });
    }
    Ok(rows)
}

fn integer(value: f64, what: &str) -> Result<usize> {
    ensure!(
        value >= 1.0 && value.fract() == 0.0,
        "{what} values must be positive integers, got {value}"
    );
    Ok(value as usize)
}

fn point(s: &Scenario, cfg: &SolverConfig, axis: Axis, value: f64, modes: &[Mode]) -> Result<Vec<Row>> {
    match axis {
        Axis::Span => {
            let variant = s.with_span(value)?;
            mode_rows(&variant, cfg, axis, value, modes, &shared(&variant, cfg, modes)?)
        }
        Axis::Antennas => {
            let g = s.geometry();
            let geometry = ArrayGeometry::new(
                g.num_tracks,
                integer(value, "N")?,
                g.span,
                g.min_separation,
                g.max_speed,
            )?;
            let variant = s.with_geometry(geometry)?;
            mode_rows(&variant, cfg, axis, value, modes, &shared(&variant, cfg, modes)?)
        }
        Axis::Users => {
            let variant = s.with_table_users(integer(value, "K")?)?;
            mode_rows(&variant, cfg, axis, value, modes, &shared(&variant, cfg, modes)?)
        }
        Axis::AoaError => {
            let (report, wall) = timed(|| Ok(evaluate_with_aoa_error(s, value, cfg)?))?;
            Ok(modes
                .iter()
                .map(|&mode| {
                    let (rates, gamma, t_swi) = match mode {
                        Mode::Ideal => (&report.ideal, report.num_patterns, 0.0),
                        Mode::Ssmt => (&report.ssmt, report.num_patterns, report.switching_time),
                        Mode::Static => (&report.static_rates, 1, 0.0),
                    };
                    Row {
                        axis: axis.name(),
                        value,
                        mode: mode.name(),
                        min_rate: min_of(rates),
                        per_user_rates: joined(rates),
                        gamma,
                        t_swi,
                        wall_ms: Some(wall),
                    }
                })
                .collect())
        }
        Axis::MaxSpeed | Axis::X1Curve => unreachable!("handled before the per-point loop"),
    }
}

fn fixed_pattern_row(s: &Scenario, x1: f64) -> Result<Row> {
    let g = s.geometry();
    let (rates, wall) = timed(|| {
        let p = DeploymentPattern::feasible(vec![x1, g.span], g)?;
        Ok(rate_vector(s, &p)?.rates)
    })?;
    Ok(Row {
        axis: Axis::X1Curve.name(),
        value: x1,
        mode: "fixed",
        min_rate: min_of(&rates),
        per_user_rates: joined(&rates),
        gamma: 1,
        t_swi: 0.0,
        wall_ms: Some(wall),
    })
}

pub fn sweep(
    s: &Scenario,
    cfg: &SolverConfig,
    axis: Axis,
    range: Option<&str>,
    modes: &[Mode],
    omit_timing: bool,
) -> Result<Vec<Row>> {
    let values = match (axis, range) {
        (_, Some(text)) => parse_range(text)?,
        (Axis::X1Curve, None) => Vec::new(),
        (_, None) => bail!("--range is required for axis {}", axis.name()),
    };
    let mut modes = modes.to_vec();
    modes.sort();
    modes.dedup();

    let mut rows: Vec<Row> = match axis {
        Axis::X1Curve => {
            ensure!(s.geometry().num_tracks == 2, "x1_curve needs a two-track scenario");
            if values.is_empty() {
                x1_curve(s, cfg.grid_step)?
                    .into_iter()
                    .map(|(x1, r)| Row {
                        axis: axis.name(),
                        value: x1,
                        mode: "fixed",
                        min_rate: r.min_rate(),
                        per_user_rates: joined(&r.rates),
                        gamma: 1,
                        t_swi: 0.0,
                        wall_ms: None,
                    })
                    .collect()
            } else {
                values
                    .par_iter()
                    .map(|&x1| fixed_pattern_row(s, x1))
                    .collect::<Result<Vec<_>>>()?
            }
        }
        Axis::MaxSpeed => {
            // Patterns and the baseline do not depend on the speed limit.
            let pre = shared(s, cfg, &modes)?;
            let per_point = values
                .par_iter()
                .map(|&v| mode_rows(&s.with_max_speed(v)?, cfg, axis, v, &modes, &pre))
                .collect::<Result<Vec<_>>>()?;
            per_point.into_iter().flatten().collect()
        }
        _ => {
            let per_point = values
                .par_iter()
                .map(|&v| point(s, cfg, axis, v, &modes).with_context(|| format!("{} = {v}", axis.name())))
                .collect::<Result<Vec<_>>>()?;
            per_point.into_iter().flatten().collect()
        }
    };
    if omit_timing {
        for row in &mut rows {
            row.wall_ms = None;
        }
    }
    // Parallel collection keeps input order; the stable sort only groups by value.
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

pub fn to_csv(rows: &[Row]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        writer.write_record([
            "axis",
            "value",
            "mode",
            "min_rate",
            "per_user_rates",
            "gamma",
            "t_swi",
            "wall_ms",
        ])?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("14,16, 18").unwrap(), vec![14.0, 16.0, 18.0]);
        let r = parse_range("0.1:0.5:0.1").unwrap();
        assert_eq!(r.len(), 5);
        assert!((r[4] - 0.5).abs() < 1e-12);
        assert_eq!(parse_range("15.3:15.4:0.01").unwrap()[6], 15.36);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("a,b").is_err());
        assert!(parse_range("").is_err());
    }

    #[test]
    fn integer_axes_reject_fractions() {
        assert!(integer(2.5, "N").is_err());
        assert!(integer(0.0, "K").is_err());
        assert_eq!(integer(3.0, "K").unwrap(), 3);
    }
}
