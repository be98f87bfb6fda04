//! Dense two-phase tableau simplex. The mixed-equilibrium programs solved
//! here stay small (a few thousand variables at most), so a dense tableau
//! with Bland fallback for anti-cycling is all that is needed.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// min c^T x  s.t.  constraints, x >= 0.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub minimize: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: usize,
    cols: usize, // total variable columns (rhs stored separately)
    a: Vec<f64>, // rows x cols
    rhs: Vec<f64>,
    obj: Vec<f64>, // reduced cost row
    obj_rhs: f64,
    basis: Vec<usize>,
    n_vars: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.at(pr, pc);
        let inv = 1.0 / piv;
        for c in 0..self.cols {
            self.a[pr * self.cols + c] *= inv;
        }
        self.rhs[pr] *= inv;
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let factor = self.at(r, pc);
            if factor != 0.0 {
                for c in 0..self.cols {
                    let v = self.at(pr, c);
                    self.a[r * self.cols + c] -= factor * v;
                }
                self.rhs[r] -= factor * self.rhs[pr];
            }
        }
        let factor = self.obj[pc];
        if factor != 0.0 {
            for c in 0..self.cols {
                self.obj[c] -= factor * self.at(pr, c);
            }
            self.obj_rhs -= factor * self.rhs[pr];
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex iterations until optimality. `allow` filters columns
    /// eligible to enter the basis.
    fn optimize(&mut self, allow: impl Fn(usize) -> bool) -> Result<()> {
        let max_iters = 200 * (self.rows + self.cols) + 1000;
        let bland_after = max_iters / 2;
        for iter in 0..max_iters {
            let bland = iter >= bland_after;
            let mut entering = None;
            if bland {
                for c in 0..self.cols {
                    if allow(c) && self.obj[c] < -COST_TOL {
                        entering = Some(c);
                        break;
                    }
                }
            } else {
                let mut best = -COST_TOL;
                for c in 0..self.cols {
                    if allow(c) && self.obj[c] < best {
                        best = self.obj[c];
                        entering = Some(c);
                    }
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    match leaving {
                        None => leaving = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || (ratio < lratio + 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                leaving = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((pr, _)) = leaving else {
                return Err(Error::LinearProgram("unbounded".into()));
            };
            self.pivot(pr, pc);
        }
        Err(Error::LinearProgram("iteration limit exceeded".into()))
    }
}

/// Solves the program; errors on infeasible or unbounded input.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n_vars = lp.minimize.len();
    let m = lp.constraints.len();
    if m == 0 {
        return Err(Error::LinearProgram("no constraints".into()));
    }
    for (i, con) in lp.constraints.iter().enumerate() {
        if con.coeffs.len() != n_vars {
            return Err(Error::LinearProgram(format!(
                "constraint {i} has {} coefficients, expected {n_vars}",
                con.coeffs.len()
            )));
        }
    }

    // Orient every row so the right-hand side is non-negative.
    let oriented: Vec<Constraint> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                Constraint {
                    coeffs: c.coeffs.iter().map(|v| -v).collect(),
                    relation: match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    },
                    rhs: -c.rhs,
                }
            } else {
                c.clone()
            }
        })
        .collect();

    let n_slack = oriented
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let n_artificial = oriented
        .iter()
        .filter(|c| c.relation != Relation::Le)
        .count();
    let cols = n_vars + n_slack + n_artificial;
    let artificial_start = n_vars + n_slack;

    let mut t = Tableau {
        rows: m,
        cols,
        a: vec![0.0; m * cols],
        rhs: vec![0.0; m],
        obj: vec![0.0; cols],
        obj_rhs: 0.0,
        basis: vec![0; m],
        n_vars,
    };

    let mut slack_col = n_vars;
    let mut art_col = artificial_start;
    for (r, con) in oriented.iter().enumerate() {
        for (c, &v) in con.coeffs.iter().enumerate() {
            t.a[r * cols + c] = v;
        }
        t.rhs[r] = con.rhs;
        match con.relation {
            Relation::Le => {
                t.a[r * cols + slack_col] = 1.0;
                t.basis[r] = slack_col;
                slack_col += 1;
            }
            Relation::Ge => {
                t.a[r * cols + slack_col] = -1.0;
                slack_col += 1;
                t.a[r * cols + art_col] = 1.0;
                t.basis[r] = art_col;
                art_col += 1;
            }
            Relation::Eq => {
                t.a[r * cols + art_col] = 1.0;
                t.basis[r] = art_col;
                art_col += 1;
            }
        }
    }

    if n_artificial > 0 {
        // Phase 1: minimize the artificial sum.
        for c in artificial_start..cols {
            t.obj[c] = 1.0;
        }
        for r in 0..m {
            if t.basis[r] >= artificial_start {
                for c in 0..cols {
                    t.obj[c] -= t.at(r, c);
                }
                t.obj_rhs -= t.rhs[r];
            }
        }
        t.optimize(|_| true)?;
        if -t.obj_rhs > 1e-7 {
            return Err(Error::LinearProgram(format!(
                "infeasible (phase-1 objective {})",
                -t.obj_rhs
            )));
        }
        // Pivot any artificial still basic (at zero) out of the basis.
        for r in 0..m {
            if t.basis[r] >= artificial_start {
                if let Some(pc) =
                    (0..artificial_start).find(|&c| t.at(r, c).abs() > PIVOT_TOL)
                {
                    t.pivot(r, pc);
                }
            }
        }
    }

    // Phase 2 over the original objective.
    t.obj = vec![0.0; cols];
    t.obj_rhs = 0.0;
    for (c, &v) in lp.minimize.iter().enumerate() {
        t.obj[c] = v;
    }
    for r in 0..m {
        let b = t.basis[r];
        if b < n_vars && lp.minimize[b] != 0.0 {
            let factor = t.obj[b];
            if factor != 0.0 {
                for c in 0..cols {
                    t.obj[c] -= factor * t.at(r, c);
                }
                t.obj_rhs -= factor * t.rhs[r];
            }
        }
    }
    let art = artificial_start;
    t.optimize(|c| c < art)?;

    let mut x = vec![0.0; t.n_vars];
    for r in 0..m {
        if t.basis[r] < t.n_vars {
            x[t.basis[r]] = t.rhs[r];
        }
    }
    let objective = lp
        .minimize
        .iter()
        .zip(x.iter())
        .map(|(c, v)| c * v)
        .sum();
    Ok(LpSolution { x, objective })
}
