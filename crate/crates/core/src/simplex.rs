//! Dense two-phase simplex with Bland's rule, for the small allocation LPs.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        Constraint { coeffs, sense, rhs }
    }
}

/// `maximize c^T x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost^T x` over columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            // Bland: first improving column, then the lowest basic index on ratio ties.
            let entering = (0..self.width).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| cost[b] * row[j])
                    .sum();
                z - cost[j] < -PIVOT_EPS
            });
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((j, best)) => {
                            if ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && self.basis[i] < self.basis[j])
                            {
                                Some((i, ratio))
                            } else {
                                Some((j, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leaving else {
                return Err(Error::LinearProgram("objective is unbounded".into()));
            };
            self.pivot(r, c);
        }
        Err(Error::LinearProgram("pivot limit reached".into()))
    }
}

impl LinearProgram {
    /// Optimal vertex `x`.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.objective.len();
        let m = self.constraints.len();
        // Column layout: structural | slack/surplus | artificial.
        let slack_count = self.constraints.iter().filter(|c| c.sense != Sense::Eq).count();
        let art_count = self
            .constraints
            .iter()
            .filter(|c| {
                let flipped = c.rhs < 0.0;
                match c.sense {
                    Sense::Eq => true,
                    Sense::Le => flipped,
                    Sense::Ge => !flipped,
                }
            })
            .count();
        let width = n + slack_count + art_count;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, n + slack_count);
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::LinearProgram("constraint width mismatch".into()));
            }
            let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width + 1];
            for (v, a) in row.iter_mut().zip(&c.coeffs) {
                *v = sign * a;
            }
            row[width] = sign * c.rhs;
            let sense = match (c.sense, sign < 0.0) {
                (Sense::Le, true) => Sense::Ge,
                (Sense::Ge, true) => Sense::Le,
                (s, _) => s,
            };
            match sense {
                Sense::Le => {
                    row[next_slack] = 1.0;
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Sense::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
                Sense::Eq => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        let mut tab = Tableau { rows, basis, width };
        let is_art = |j: usize| j >= n + slack_count;

        if art_count > 0 {
            let cost: Vec<f64> = (0..width).map(|j| if is_art(j) { -1.0 } else { 0.0 }).collect();
            tab.optimize(&cost, &vec![true; width])?;
            let infeasibility: f64 = (0..m).filter(|&i| is_art(tab.basis[i])).map(|i| tab.rhs(i)).sum();
            if infeasibility > 1e-8 {
                return Err(Error::LinearProgram(format!("infeasible (residual {infeasibility:e})")));
            }
            // Drive zero-level artificials out; drop rows that are redundant.
            let mut i = 0;
            while i < tab.rows.len() {
                if is_art(tab.basis[i]) {
                    match (0..n + slack_count).find(|&j| tab.rows[i][j].abs() > PIVOT_EPS) {
                        Some(j) => tab.pivot(i, j),
                        None => {
                            tab.rows.remove(i);
                            tab.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }

        let mut cost = vec![0.0; width];
        cost[..n].copy_from_slice(&self.objective);
        let allowed: Vec<bool> = (0..width).map(|j| !is_art(j)).collect();
        tab.optimize(&cost, &allowed)?;

        let mut x = vec![0.0; n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rhs(i);
            }
        }
        Ok(x)
    }
}
