//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::ops::{Range, RangeInclusive};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mafair_core::dual::multistart_patterns;
use mafair_core::mmse::sinr_with_beamformer;
use mafair_core::pipeline::{evaluate_with_aoa_error, plan_with};
use mafair_core::sca::SurrogateCoefficients;
use mafair_core::ssmt::{order_patterns, switching_time, verify_no_coupling};
use mafair_core::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAPER_MU: [f64; 3] = [0.229, 0.1507, 0.6203];
const PAPER_X1: [f64; 3] = [0.0, 6.6325, 15.5615];
const PAPER_DURATIONS: [f64; 3] = [17.551, 30.7109, 51.7381];
const PAPER_IDEAL_RATE: f64 = 2.4475;
const PAPER_STATIC_RATE: f64 = 1.9;
const PAPER_STATIC_X1: f64 = 6.63;
const PAPER_GAIN_PERCENT: f64 = 22.4;
const SPEED_THRESHOLD: f64 = 0.1556;

struct Report {
    lines: Vec<(bool, String, String)>,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((pass, name.to_string(), detail));
    }

    fn error(&mut self, name: &str, err: Error) {
        self.check(name, false, format!("error: {err}"));
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn x1s(ps: &PatternSet) -> Vec<f64> {
    ps.patterns.iter().map(|p| p.coords()[0]).collect()
}

fn close_sets(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= tol)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn non_decreasing(v: &[f64], slack: f64) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] - slack)
}

fn non_increasing(v: &[f64], slack: f64) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Reference-instance results shared by several criteria.
struct Reference {
    scenario: Scenario,
    ideal: IdealSolution,
    baseline: StaticSolution,
}

fn reference_anchors(r: &mut Report, cfg: &SolverConfig) -> Option<Reference> {
    let s = reference_scenario();
    let start = Instant::now();
    let ideal = match solve_ideal(&s, cfg) {
        Ok(v) => v,
        Err(e) => {
            r.error("1 dual anchor", e);
            return None;
        }
    };
    let elapsed = start.elapsed();
    let mu = &ideal.patterns.mu;
    let mu_ok = mu.iter().zip(PAPER_MU).all(|(a, b)| (a - b).abs() <= 0.02);
    r.check(
        "1 dual anchor: weights",
        mu_ok,
        format!("mu = {} vs {} (+-0.02)", fmt(mu), fmt(&PAPER_MU)),
    );
    let got = x1s(&ideal.patterns);
    r.check(
        "1 dual anchor: patterns",
        close_sets(&got, &PAPER_X1, 0.1),
        format!("x1 = {} vs {} (count exact, +-0.1)", fmt(&got), fmt(&PAPER_X1)),
    );
    r.check(
        "1 dual anchor: runtime",
        secs(elapsed) < 60.0,
        format!("{:.1} s (< 60 s)", secs(elapsed)),
    );

    let t = &ideal.allocation.durations;
    let t_ok = t.len() == 3 && t.iter().zip(PAPER_DURATIONS).all(|(a, b)| (a - b).abs() <= 1.0);
    r.check(
        "2 time allocation: durations",
        t_ok,
        format!("t = {} vs {} (+-1.0 s)", fmt(t), fmt(&PAPER_DURATIONS)),
    );
    let rate = ideal.min_rate();
    r.check(
        "2 time allocation: min rate",
        (rate - PAPER_IDEAL_RATE).abs() <= 0.02,
        format!("{rate:.4} vs {PAPER_IDEAL_RATE} (+-0.02)"),
    );

    let baseline = match solve_static(&s, cfg) {
        Ok(v) => v,
        Err(e) => {
            r.error("3 static anchor", e);
            return None;
        }
    };
    let x1 = baseline.pattern.coords()[0];
    r.check(
        "3 static anchor: position",
        (x1 - PAPER_STATIC_X1).abs() <= 0.1,
        format!("x1 = {x1:.4} vs {PAPER_STATIC_X1} (+-0.1)"),
    );
    r.check(
        "3 static anchor: min rate",
        (baseline.min_rate - PAPER_STATIC_RATE).abs() <= 0.02,
        format!("{:.4} vs {PAPER_STATIC_RATE} (+-0.02)", baseline.min_rate),
    );
    let gain = 100.0 * (rate - baseline.min_rate) / rate;
    r.check(
        "3 static anchor: improvement",
        (gain - PAPER_GAIN_PERCENT).abs() <= 2.0,
        format!("{gain:.2}% vs {PAPER_GAIN_PERCENT}% (+-2 pp)"),
    );
    Some(Reference {
        scenario: s,
        ideal,
        baseline,
    })
}

fn table_rows(r: &mut Report, cfg: &SolverConfig) {
    let rows: [(f64, &[f64]); 4] = [
        (14.0, &[0.0, 9.8685]),
        (16.0, &[0.0, 2.418, 11.532]),
        (18.0, &[0.0, 4.6025, 13.4575]),
        (22.0, &[1.1395, 8.686, 17.3935]),
    ];
    let start = Instant::now();
    for (span, want) in rows {
        let name = format!("4 pattern table: L = {span}");
        let solved = reference_scenario().with_span(span).and_then(|s| solve_ideal(&s, cfg));
        match solved {
            Ok(ideal) => {
                let got = x1s(&ideal.patterns);
                r.check(
                    &name,
                    close_sets(&got, want, 0.15),
                    format!("x1 = {} vs {} (count exact, +-0.15)", fmt(&got), fmt(want)),
                );
            }
            Err(e) => r.error(&name, e),
        }
    }
    let elapsed = secs(start.elapsed());
    r.check(
        "4 pattern table: runtime",
        elapsed < 300.0,
        format!("{elapsed:.1} s (< 300 s)"),
    );
}

fn switching_anchors(r: &mut Report, reference: &Reference, cfg: &SolverConfig) {
    let sequence: Vec<DeploymentPattern> = PAPER_X1
        .iter()
        .map(|&x| DeploymentPattern::pinned_pair(x, 20.0))
        .collect();
    let mut exact = true;
    let mut worst = 0.0f64;
    for v in [0.1, 0.1556, 0.5, 1.0, 2.0, 7.3] {
        match order_patterns(&sequence, v) {
            Ok((_, t)) => {
                let want = 15.5615 / v;
                worst = worst.max((t - want).abs() / want);
                exact &= (t - want).abs() <= 1e-12 * want;
            }
            Err(_) => exact = false,
        }
    }
    r.check(
        "5 switching anchors: t_swi = 15.5615 / V",
        exact,
        format!("worst relative error {worst:.1e} over six speeds"),
    );

    let s = &reference.scenario;
    let plan_at = |v: f64| -> Result<SsmtSolution> {
        let sv = s.with_max_speed(v)?;
        plan_with(&sv, reference.ideal.patterns.clone(), reference.baseline.clone(), cfg)
    };
    let slow: Vec<f64> = [0.02, 0.05, 0.1, SPEED_THRESHOLD]
        .iter()
        .map(|&v| plan_at(v).map(|p| p.min_rate()).unwrap_or(f64::NAN))
        .collect();
    let flat = slow.iter().all(|v| (v - PAPER_STATIC_RATE).abs() <= 0.02);
    r.check(
        "5 switching anchors: static-valued up to 0.1556",
        flat,
        format!(
            "rates at V = 0.02, 0.05, 0.1, 0.1556: {} vs {PAPER_STATIC_RATE} (+-0.02)",
            fmt(&slow)
        ),
    );
    let speeds = [
        SPEED_THRESHOLD,
        0.16,
        0.2,
        0.3,
        0.5,
        0.75,
        1.0,
        1.5,
        2.0,
        3.0,
        5.0,
        10.0,
    ];
    let rates: Vec<f64> = speeds
        .iter()
        .map(|&v| plan_at(v).map(|p| p.min_rate()).unwrap_or(f64::NAN))
        .collect();
    r.check(
        "5 switching anchors: monotone in V",
        rates.iter().all(|v| v.is_finite()) && non_decreasing(&rates, 1e-9),
        format!("rates {} at V = {}", fmt(&rates), fmt(&speeds)),
    );
    let at_two = rates[8];
    r.check(
        "5 switching anchors: V = 2 near ideal",
        (PAPER_IDEAL_RATE * 0.99..=PAPER_IDEAL_RATE * 1.01).contains(&at_two),
        format!("{at_two:.4} vs {PAPER_IDEAL_RATE} (+-1%)"),
    );
}

fn random_scenario(
    rng: &mut ChaCha8Rng,
    m: RangeInclusive<usize>,
    n: RangeInclusive<usize>,
    k: RangeInclusive<usize>,
    span: Range<f64>,
) -> Scenario {
    let (m, n, k) = (rng.gen_range(m), rng.gen_range(n), rng.gen_range(k));
    let span = rng.gen_range(span);
    let d_min = rng.gen_range(0.2..0.8);
    let span = span.max(m as f64 * d_min + 0.5);
    let g = ArrayGeometry::new(m, n, span, d_min, rng.gen_range(0.2..3.0)).unwrap();
    let users = (0..k)
        .map(|_| {
            UserSpec::new(
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..15.0),
                rng.gen_range(0.3..2.0),
            )
        })
        .collect();
    Scenario::new(g, users, 0.0, rng.gen_range(20.0..200.0)).unwrap()
}

fn random_pattern(rng: &mut ChaCha8Rng, g: &ArrayGeometry) -> DeploymentPattern {
    multistart_patterns(g, 1, rng.gen()).pop().unwrap()
}

fn property_norms(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = random_scenario(rng, 1..=4, 1..=4, 1..=4, 2.0..30.0);
        let mn = s.geometry().num_elements() as f64;
        let p = random_pattern(rng, s.geometry());
        for (j, h) in channel_vectors(&s, &p).iter().enumerate() {
            let want = s.gain(j) * mn;
            worst = worst.max((h.norm_squared() - want).abs() / want);
        }
    }
    (
        worst <= 1e-12,
        format!("worst relative error {worst:.1e} on 1000 instances"),
    )
}

fn property_mmse(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut violations = 0;
    let mut instances = 0;
    for _ in 0..20 {
        let s = random_scenario(rng, 1..=3, 1..=3, 2..=4, 10.0..10.5);
        let p = random_pattern(rng, s.geometry());
        let dim = s.geometry().num_elements();
        for k in 0..s.num_users() {
            instances += 1;
            let best = mmse_sinr(&s, k, &p).unwrap();
            for _ in 0..1000 {
                let w = DVector::from_fn(dim, |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                if sinr_with_beamformer(&s, k, &p, &w) > best * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
    }
    (
        violations == 0,
        format!("{violations} violations, {instances} user instances x 1000 combiners"),
    )
}

fn property_surrogate(rng: &mut ChaCha8Rng) -> (bool, String) {
    let (mut tight, mut bound) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let s = random_scenario(rng, 1..=3, 1..=3, 1..=4, 12.0..12.5);
        let anchor = random_pattern(rng, s.geometry());
        let x = random_pattern(rng, s.geometry());
        let k = rng.gen_range(0..s.num_users());
        let c = SurrogateCoefficients::build(&s, k, &anchor).unwrap();
        let exact = |p: &DeploymentPattern| mmse_sinr(&s, k, p).unwrap() / s.normalized_power(k);
        let at_anchor = exact(&anchor);
        tight = tight.max((c.value(&anchor) - at_anchor).abs() / at_anchor.max(1.0));
        let at_x = exact(&x);
        bound = bound.max((c.value(&x) - at_x) / at_x.max(1.0));
    }
    (
        tight <= 1e-8 && bound <= 1e-8,
        format!("tightness {tight:.1e}, worst bound excess {bound:.1e} on 1000 pairs"),
    )
}

fn property_sca(rng: &mut ChaCha8Rng, cfg: &SolverConfig) -> (bool, String) {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let s = random_scenario(rng, 2..=3, 1..=3, 2..=3, 15.0..15.5);
        let raw: Vec<f64> = (0..s.num_users()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mu: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let start = random_pattern(rng, s.geometry());
        let (_, trace) = sca_iterate(&s, &mu, &start, cfg).unwrap();
        for w in trace.objective.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
    }
    (worst <= 1e-12, format!("largest decrease {worst:.1e} over 100 starts"))
}

/// Exact max-min time sharing by enumerating every vertex of
/// `{(w, t): w in simplex, t <= R^T w}`.
fn vertex_enumeration(rates: &[Vec<f64>]) -> f64 {
    let gamma = rates.len();
    let users = rates[0].len();
    // Free variables w_1..w_{gamma-1}, t; w_gamma = 1 - sum.
    let dim = gamma;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for k in 0..users {
        // t - sum_i (r_ik - r_gk) w_i = r_gk
        let mut a: Vec<f64> = (0..gamma - 1).map(|i| -(rates[i][k] - rates[gamma - 1][k])).collect();
        a.push(1.0);
        rows.push((a, rates[gamma - 1][k]));
    }
    for i in 0..gamma - 1 {
        let mut a = vec![0.0; dim];
        a[i] = 1.0;
        rows.push((a, 0.0));
    }
    let mut a = vec![1.0; dim];
    a[dim - 1] = 0.0;
    rows.push((a, 1.0));

    let eval = |w: &[f64]| -> f64 {
        (0..users)
            .map(|k| (0..gamma).map(|i| w[i] * rates[i][k]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = f64::NEG_INFINITY;
    let mut pick = vec![0usize; dim];
    fn combos(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            combos(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    combos(rows.len(), dim, 0, &mut Vec::new(), &mut all);
    for c in all {
        pick.copy_from_slice(&c);
        let a = DMatrix::from_fn(dim, dim, |r, col| rows[pick[r]].0[col]);
        let b = DVector::from_fn(dim, |r, _| rows[pick[r]].1);
        let Some(sol) = a.lu().solve(&b) else { continue };
        let mut w: Vec<f64> = sol.iter().take(gamma - 1).copied().collect();
        let last = 1.0 - w.iter().sum::<f64>();
        w.push(last);
        if w.iter().all(|v| *v >= -1e-9) && sol.iter().all(|v| v.is_finite()) {
            best = best.max(eval(&w));
        }
    }
    best
}

fn property_lp(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let gamma = rng.gen_range(1..=3);
        let users = rng.gen_range(1..=4);
        let rates: Vec<Vec<f64>> = (0..gamma)
            .map(|_| (0..users).map(|_| rng.gen_range(0.0..6.0)).collect())
            .collect();
        let lp = allocate_time(&rates, 1.0, &vec![0.0; users], 1.0).unwrap().min_rate;
        let oracle = vertex_enumeration(&rates);
        worst = worst.max((lp - oracle).abs());
    }
    (worst <= 1e-3, format!("worst gap {worst:.1e} on 300 rate matrices"))
}

fn best_permutation(patterns: &[DeploymentPattern], v: f64) -> f64 {
    fn walk(
        patterns: &[DeploymentPattern],
        v: f64,
        last: usize,
        used: &mut Vec<bool>,
        depth: usize,
        cost: f64,
        best: &mut f64,
    ) {
        if depth == patterns.len() {
            *best = best.min(cost);
            return;
        }
        for next in 0..patterns.len() {
            if !used[next] {
                used[next] = true;
                let step = switching_time(&patterns[last], &patterns[next], v).unwrap();
                walk(patterns, v, next, used, depth + 1, cost + step, best);
                used[next] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    for first in 0..patterns.len() {
        let mut used = vec![false; patterns.len()];
        used[first] = true;
        walk(patterns, v, first, &mut used, 1, 0.0, &mut best);
    }
    best
}

fn property_ordering(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut mismatches = 0;
    let mut cases = 0;
    for gamma in 1..=8 {
        for _ in 0..6 {
            cases += 1;
            let g = ArrayGeometry::new(rng.gen_range(1..=3), 1, rng.gen_range(3.0..25.0), 0.5, 1.0).unwrap();
            let patterns: Vec<DeploymentPattern> = (0..gamma).map(|_| random_pattern(rng, &g)).collect();
            let v = rng.gen_range(0.1..4.0);
            let (_, t) = order_patterns(&patterns, v).unwrap();
            let brute = best_permutation(&patterns, v);
            if (t - brute).abs() > 1e-12 * brute.max(1.0) {
                mismatches += 1;
            }
        }
    }
    (
        mismatches == 0,
        format!("{mismatches} mismatches in {cases} instances with up to 8 patterns"),
    )
}

fn property_coupling(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut failures = 0;
    let mut closest = f64::INFINITY;
    for _ in 0..1000 {
        let m = rng.gen_range(2..=5);
        let g = ArrayGeometry::new(m, 1, rng.gen_range(4.0..20.0), rng.gen_range(0.2..0.7), 1.0).unwrap();
        let a = random_pattern(rng, &g);
        let b = random_pattern(rng, &g);
        let seg = SwitchSegment::new(&a, &b, rng.gen_range(0.1..5.0)).unwrap();
        let check = verify_no_coupling(&seg, g.min_separation, 10_000);
        closest = closest.min(check.min_distance - g.min_separation);
        if !check.coupling_free {
            failures += 1;
        }
    }
    (
        failures == 0,
        format!("{failures} coupled segments of 1000, smallest margin {closest:.1e}"),
    )
}

fn property_sandwich(rng: &mut ChaCha8Rng, cfg: &SolverConfig) -> (bool, String) {
    let mut failures = 0;
    for _ in 0..50 {
        let s = random_scenario(rng, 2..=2, 2..=2, 2..=2, 2.0..8.0);
        let st = solve_static(&s, cfg).unwrap();
        let ideal = solve_ideal(&s, cfg).unwrap();
        let ssmt = plan_with(&s, ideal.patterns.clone(), st.clone(), cfg).unwrap();
        let ok = st.min_rate <= ssmt.min_rate() + 1e-12 && ssmt.min_rate() <= ideal.min_rate() + 1e-6;
        if !ok {
            failures += 1;
        }
    }
    (failures == 0, format!("{failures} violations on 50 scenarios"))
}

fn property_suite(r: &mut Report, cfg: &SolverConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let checks: [(&str, Box<dyn Fn(&mut ChaCha8Rng) -> (bool, String)>); 8] = [
        ("6a channel norm", Box::new(property_norms)),
        ("6b MMSE dominance", Box::new(property_mmse)),
        ("6c surrogate tight lower bound", Box::new(property_surrogate)),
        ("6d SCA monotone", Box::new(|rng| property_sca(rng, cfg))),
        ("6e allocation LP vs vertex oracle", Box::new(property_lp)),
        ("6f optimal ordering vs permutations", Box::new(property_ordering)),
        ("6g coupling-free moves", Box::new(property_coupling)),
        (
            "6h static <= ssmt <= ideal",
            Box::new(|rng| property_sandwich(rng, cfg)),
        ),
    ];
    for (name, check) in checks.iter() {
        let t = Instant::now();
        let (pass, detail) = match panic::catch_unwind(AssertUnwindSafe(|| check(&mut rng))) {
            Ok(outcome) => outcome,
            Err(payload) => {
                let message = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|m| m.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {message}"))
            }
        };
        r.check(name, pass, format!("{detail} ({:.1} s)", secs(t.elapsed())));
    }
    let elapsed = secs(start.elapsed());
    r.check(
        "6 property suite: runtime",
        elapsed < 120.0,
        format!("{elapsed:.1} s (< 120 s)"),
    );
}

/// `(ideal, ssmt, static)` minimum rates at unit speed.
fn three_modes(s: &Scenario, cfg: &SolverConfig) -> Result<(f64, f64, f64)> {
    let ideal = solve_ideal(s, cfg)?;
    let st = solve_static(s, cfg)?;
    let ssmt = plan_with(s, ideal.patterns.clone(), st.clone(), cfg)?;
    Ok((ideal.min_rate(), ssmt.min_rate(), st.min_rate))
}

fn ordered(m: &(f64, f64, f64)) -> bool {
    m.2 <= m.1 + 1e-12 && m.1 <= m.0 + 1e-6
}

fn trend_lines(r: &mut Report, cfg: &SolverConfig) {
    let base = reference_scenario();
    let antennas: Vec<Result<(f64, f64, f64)>> = (1..=4)
        .map(|n| {
            let g = ArrayGeometry::new(2, n, 20.0, 0.5, 1.0)?;
            three_modes(&base.with_geometry(g)?, cfg)
        })
        .collect();
    match antennas.into_iter().collect::<Result<Vec<_>>>() {
        Ok(rows) => {
            let ideal: Vec<f64> = rows.iter().map(|m| m.0).collect();
            let ssmt: Vec<f64> = rows.iter().map(|m| m.1).collect();
            let st: Vec<f64> = rows.iter().map(|m| m.2).collect();
            r.check(
                "trend: antennas per track",
                rows.iter().all(ordered) && non_decreasing(&ideal, 1e-6) && non_decreasing(&st, 1e-6),
                format!("N = 1..4 ideal {} ssmt {} static {}", fmt(&ideal), fmt(&ssmt), fmt(&st)),
            );
        }
        Err(e) => r.error("trend: antennas per track", e),
    }

    let ks = [5, 7, 9];
    let users: Result<Vec<(f64, f64, f64)>> = ks.iter().map(|&k| three_modes(&user_table_scenario(k)?, cfg)).collect();
    match users {
        Ok(rows) => {
            let ideal: Vec<f64> = rows.iter().map(|m| m.0).collect();
            let ssmt: Vec<f64> = rows.iter().map(|m| m.1).collect();
            let st: Vec<f64> = rows.iter().map(|m| m.2).collect();
            r.check(
                "trend: number of users",
                rows.iter().all(ordered) && non_increasing(&ideal, 1e-6) && non_increasing(&st, 1e-6),
                format!(
                    "K = 5, 7, 9 ideal {} ssmt {} static {}",
                    fmt(&ideal),
                    fmt(&ssmt),
                    fmt(&st)
                ),
            );
        }
        Err(e) => r.error("trend: number of users", e),
    }

    let errors = [0.0, 0.02, 0.05, 0.1];
    let reports: Result<Vec<_>> = errors.iter().map(|&e| evaluate_with_aoa_error(&base, e, cfg)).collect();
    match reports {
        Ok(rows) => {
            let ideal: Vec<f64> = rows.iter().map(|m| m.ideal_min()).collect();
            let ssmt: Vec<f64> = rows.iter().map(|m| m.ssmt_min()).collect();
            let st: Vec<f64> = rows.iter().map(|m| m.static_min()).collect();
            let static_worst = rows
                .iter()
                .all(|m| m.static_min() <= m.ssmt_min().min(m.ideal_min()) + 1e-12);
            let degrade = [&ideal, &ssmt, &st]
                .iter()
                .all(|v| v[1..].iter().all(|x| *x <= v[0] + 1e-9));
            r.check(
                "trend: angle error",
                static_worst && degrade,
                format!(
                    "error {} ideal {} ssmt {} static {}",
                    fmt(&errors),
                    fmt(&ideal),
                    fmt(&ssmt),
                    fmt(&st)
                ),
            );
        }
        Err(e) => r.error("trend: angle error", e),
    }
}

fn main() -> ExitCode {
    let cfg = SolverConfig::default();
    let mut report = Report { lines: Vec::new() };
    let start = Instant::now();
    if let Some(reference) = reference_anchors(&mut report, &cfg) {
        switching_anchors(&mut report, &reference, &cfg);
    }
    table_rows(&mut report, &cfg);
    property_suite(&mut report, &cfg);
    trend_lines(&mut report, &cfg);

    let failed: Vec<&str> = report.lines.iter().filter(|l| !l.0).map(|l| l.1.as_str()).collect();
    println!(
        "{} of {} criteria passed in {:.0} s",
        report.lines.len() - failed.len(),
        report.lines.len(),
        secs(start.elapsed())
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join("; "));
        ExitCode::FAILURE
    }
}
