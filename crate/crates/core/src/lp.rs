//! Small dense linear programs.
//!
//! Two-phase tableau simplex with Dantzig pricing that falls back to Bland's
//! rule after a run of degenerate pivots. Intended for the few dozen
//! variables and a few hundred rows of the degree-distribution problems.

use crate::error::{Error, Result};

const TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// `maximize c·x` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        self.constraints.push(Constraint { coeffs, cmp, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::Invalid("linear program without variables".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Invalid(format!("constraint {i} has {} coefficients, expected {n}", c.coeffs.len())));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::Invalid(format!("constraint {i} is not finite")));
            }
        }
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
    /// First artificial column; columns `[art_start, width)` are artificial.
    art_start: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        // Normalize to nonnegative right-hand sides.
        let rows: Vec<(Vec<f64>, Cmp, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.cmp {
                        Cmp::Le => Cmp::Ge,
                        Cmp::Ge => Cmp::Le,
                        Cmp::Eq => Cmp::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.cmp, c.rhs)
                }
            })
            .collect();
        let slacks = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let arts = rows.iter().filter(|r| r.1 != Cmp::Le).count();
        let art_start = n + slacks;
        let width = art_start + arts;
        let mut t = Tableau { rows: Vec::with_capacity(rows.len()), basis: Vec::new(), n, art_start, width };
        let (mut s, mut a) = (n, art_start);
        for (coeffs, cmp, rhs) in rows {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(&coeffs);
            row[width] = rhs;
            match cmp {
                Cmp::Le => {
                    row[s] = 1.0;
                    t.basis.push(s);
                    s += 1;
                }
                Cmp::Ge => {
                    row[s] = -1.0;
                    row[a] = 1.0;
                    t.basis.push(a);
                    s += 1;
                    a += 1;
                }
                Cmp::Eq => {
                    row[a] = 1.0;
                    t.basis.push(a);
                    a += 1;
                }
            }
            t.rows.push(row);
        }
        t
    }

    /// Reduced-cost row for maximizing `cost` over the current basis.
    fn price(&self, cost: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = (0..=self.width).map(|j| if j < self.width { -cost[j] } else { 0.0 }).collect();
        for (r, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (zj, rj) in z.iter_mut().zip(r) {
                    *zj += cb * rj;
                }
            }
        }
        z
    }

    fn pivot(&mut self, z: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            let f = row[c];
            if i != r && f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = z[c];
        if f != 0.0 {
            for (v, pv) in z.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            z[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Maximizes over columns `< limit`. Returns `Err` when unbounded.
    fn optimize(&mut self, z: &mut [f64], limit: usize) -> Result<()> {
        let mut degenerate = 0;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -TOL;
            for (j, &zj) in z.iter().enumerate().take(limit) {
                if zj < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = zj;
                }
            }
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > TOL {
                    let ratio = row[self.width] / a;
                    let better = match leave {
                        None => true,
                        Some((l, lr)) => ratio < lr - TOL || (ratio <= lr + TOL && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Invalid("linear program is unbounded".into()));
            };
            degenerate = if ratio.abs() <= TOL { degenerate + 1 } else { 0 };
            self.pivot(z, r, c);
        }
        Err(Error::NoConvergence { iterations: MAX_PIVOTS, residual: f64::NAN })
    }

    fn run(mut self, objective: &[f64]) -> Result<LpSolution> {
        if self.art_start < self.width {
            let mut phase1 = vec![0.0; self.width];
            for c in phase1.iter_mut().skip(self.art_start) {
                *c = -1.0;
            }
            let mut z = self.price(&phase1);
            self.optimize(&mut z, self.width)?;
            let scale = 1.0 + self.rows.iter().map(|r| r[self.width].abs()).fold(0.0, f64::max);
            if z[self.width] < -1e-9 * scale {
                return Err(Error::Infeasible(format!("phase one ended at {:.3e}", -z[self.width])));
            }
            // Drive remaining artificials out of the basis, dropping rows
            // that turn out to be redundant.
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.art_start {
                    let col = (0..self.art_start).find(|&j| self.rows[r][j].abs() > 1e-9);
                    match col {
                        Some(c) => self.pivot(&mut z, r, c),
                        None => {
                            self.rows.remove(r);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }
        let mut cost = vec![0.0; self.width];
        cost[..self.n].copy_from_slice(objective);
        let mut z = self.price(&cost);
        self.optimize(&mut z, self.art_start)?;
        let mut x = vec![0.0; self.n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n {
                x[b] = row[self.width].max(0.0);
            }
        }
        let objective = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(vec![3.0, 5.0]);
        lp.add(vec![1.0, 0.0], Cmp::Le, 4.0);
        lp.add(vec![0.0, 2.0], Cmp::Le, 12.0);
        lp.add(vec![3.0, 2.0], Cmp::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x/2 + y/3 + z/7 on the simplex with y + 2z ≥ 1
        let mut lp = LinearProgram::new(vec![0.5, 1.0 / 3.0, 1.0 / 7.0]);
        lp.add(vec![1.0, 1.0, 1.0], Cmp::Eq, 1.0);
        lp.add(vec![0.0, 1.0, 2.0], Cmp::Ge, 1.0);
        let s = lp.solve().unwrap();
        // y = 1 gives 1/3; x = z = 1/2 gives 9/28 < 1/3
        assert!((s.objective - 1.0 / 3.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add(vec![1.0], Cmp::Le, 1.0);
        lp.add(vec![1.0], Cmp::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(Error::Infeasible(_))));
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add(vec![0.0, 1.0], Cmp::Le, 1.0);
        assert!(lp.solve().is_err());
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add(vec![-1.0, -1.0], Cmp::Le, -2.0);
        lp.add(vec![1.0, 1.0], Cmp::Eq, 3.0);
        lp.add(vec![2.0, 2.0], Cmp::Eq, 6.0);
        let s = lp.solve().unwrap();
        assert!((s.objective + 3.0).abs() < 1e-9);
    }
}
