//! Dense tableau simplex for tiny linear programs in standard form
//! `A x = b, x >= 0`.
//!
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable on ratio ties) rules out cycling on the degenerate systems that
//! the ordering checks and the cutting-plane solver produce.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
const REDUCED_COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

/// Phase-one objectives at or below this count as feasible in [`maximize`].
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PhaseOneResult {
    /// Minimum total artificial mass; zero iff the system is feasible.
    pub objective: f64,
    /// Values of the original variables at the phase-one optimum.
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible { phase_one_objective: f64 },
    Unbounded,
}

struct Tableau {
    /// `m` rows of `cols + 1` entries; the last entry is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    /// Number of original (non-artificial) columns.
    structural: usize,
    active_rows: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let m = a.len();
        if b.len() != m {
            return Err(Error::Dimension(format!("{} constraint rows but {} right-hand sides", m, b.len())));
        }
        let n = a.first().map_or(0, |r| r.len());
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("constraint rows have different lengths".into()));
        }
        let cols = n + m;
        let mut t = Vec::with_capacity(m);
        for (i, (row, &rhs)) in a.iter().zip(b).enumerate() {
            let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
            let mut r = vec![0.0; cols + 1];
            for (j, &v) in row.iter().enumerate() {
                r[j] = sign * v;
            }
            r[n + i] = 1.0;
            r[cols] = sign * rhs;
            t.push(r);
        }
        Ok(Tableau {
            t,
            basis: (n..n + m).collect(),
            cols,
            structural: n,
            active_rows: vec![true; m],
        })
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost . x` over the current basis using columns `< allowed_cols`.
    fn optimize(&mut self, cost: &[f64], allowed_cols: usize) -> Result<Step> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed_cols).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut rc = cost[j];
                for (i, r) in self.t.iter().enumerate() {
                    if self.active_rows[i] {
                        rc -= cost[self.basis[i]] * r[j];
                    }
                }
                rc > REDUCED_COST_EPS
            });
            let Some(col) = entering else {
                return Ok(Step::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                if !self.active_rows[i] {
                    continue;
                }
                let a = self.t[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return Ok(Step::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(Error::Convergence {
            iterations: MAX_PIVOTS,
            lower: f64::NAN,
            upper: f64::NAN,
        })
    }

    fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if self.active_rows[i] && b < self.structural {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        x
    }

    fn artificial_mass(&self) -> f64 {
        self.basis
            .iter()
            .enumerate()
            .filter(|(i, &b)| self.active_rows[*i] && b >= self.structural)
            .map(|(i, _)| self.rhs(i).max(0.0))
            .sum()
    }

    fn run_phase_one(&mut self) -> Result<()> {
        let mut cost = vec![0.0; self.cols];
        for c in cost.iter_mut().skip(self.structural) {
            *c = -1.0;
        }
        match self.optimize(&cost, self.cols)? {
            Step::Optimal => Ok(()),
            // the phase-one objective is bounded below by zero
            Step::Unbounded => Err(Error::Invariant("phase one reported unbounded".into())),
        }
    }

    /// Pivots zero-valued artificials out of the basis; rows where that is
    /// impossible are linearly dependent and get deactivated.
    fn expel_artificials(&mut self) {
        for i in 0..self.t.len() {
            if self.basis[i] < self.structural {
                continue;
            }
            let col = (0..self.structural)
                .filter(|j| !self.basis.contains(j))
                .max_by(|&a, &b| self.t[i][a].abs().total_cmp(&self.t[i][b].abs()));
            match col {
                Some(j) if self.t[i][j].abs() > 1e-9 => self.pivot(i, j),
                _ => self.active_rows[i] = false,
            }
        }
    }
}

/// Minimizes the total artificial mass for `A x = b, x >= 0`.
pub fn phase_one(a: &[Vec<f64>], b: &[f64]) -> Result<PhaseOneResult> {
    let mut tab = Tableau::build(a, b)?;
    tab.run_phase_one()?;
    Ok(PhaseOneResult {
        objective: tab.artificial_mass(),
        x: tab.solution(),
    })
}

/// Maximizes `c . x` subject to `A x = b, x >= 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let mut tab = Tableau::build(a, b)?;
    if c.len() != tab.structural {
        return Err(Error::Dimension(format!(
            "objective has {} entries for {} variables",
            c.len(),
            tab.structural
        )));
    }
    tab.run_phase_one()?;
    let infeasibility = tab.artificial_mass();
    if infeasibility > FEASIBILITY_TOLERANCE {
        return Ok(LpSolution::Infeasible {
            phase_one_objective: infeasibility,
        });
    }
    tab.expel_artificials();
    let mut cost = vec![0.0; tab.cols];
    cost[..c.len()].copy_from_slice(c);
    match tab.optimize(&cost, tab.structural)? {
        Step::Unbounded => Ok(LpSolution::Unbounded),
        Step::Optimal => {
            let x = tab.solution();
            let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
            Ok(LpSolution::Optimal { x, value })
        }
    }
}
