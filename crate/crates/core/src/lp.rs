//! Dense two-phase primal simplex for `max cᵀx  s.t.  Gx ≤ h, x ≥ 0`.
//!
//! Pivoting follows Bland's rule (lowest index enters, ties in the ratio test
//! leave by lowest basic index), so the method terminates on degenerate
//! problems. A single tolerance drives the feasibility, reduced-cost and ratio
//! tests. Free variables must be split by the caller into `x⁺ − x⁻`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{Matrix, Vector};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_PIVOTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: Vector,
    pub g: Matrix,
    pub h: Vector,
}

impl LinearProgram {
    pub fn new(c: Vector, g: Matrix, h: Vector) -> Result<Self> {
        if g.cols() != c.dim() || g.rows() != h.dim() {
            return Err(Error::Dimension {
                op: "LinearProgram::new",
                detail: format!(
                    "G is {}x{}, c has {} entries, h has {}",
                    g.rows(),
                    g.cols(),
                    c.dim(),
                    h.dim()
                ),
            });
        }
        Ok(Self { c, g, h })
    }

    pub fn num_vars(&self) -> usize {
        self.c.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.h.dim()
    }

    /// Largest constraint violation `max(Gx − h)⁺` together with `max(−x)⁺`.
    pub fn infeasibility(&self, x: &[f64]) -> f64 {
        let gx = self.g.matvec(x).expect("x has one entry per variable");
        let rows = gx.iter().zip(self.h.iter()).map(|(a, b)| a - b);
        let bounds = x.iter().map(|v| -v);
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vector, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn x(&self) -> Option<&Vector> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<LpOutcome> {
    solve_lp_with_cap(lp, tol, DEFAULT_MAX_PIVOTS)
}

/// Any point of `{x ≥ 0 : Gx ≤ h}`, found with a zero objective.
pub fn solve_feasibility(g: &Matrix, h: &Vector, tol: f64) -> Result<LpOutcome> {
    let lp = LinearProgram::new(Vector::zeros(g.cols()), g.clone(), h.clone())?;
    solve_lp(&lp, tol)
}

pub fn solve_lp_with_cap(lp: &LinearProgram, tol: f64, max_pivots: usize) -> Result<LpOutcome> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "LP tolerance must be positive, got {tol}"
        )));
    }
    let mut tab = Tableau::new(lp, tol, max_pivots);

    if tab.num_art > 0 {
        let mut phase_one = vec![0.0; tab.width()];
        for a in tab.art_start()..tab.width() {
            phase_one[a] = -1.0;
        }
        tab.set_objective(&phase_one);
        match tab.optimize()? {
            Phase::Optimal => {}
            // -Σa is bounded above by 0, so a ray here is pure round-off
            Phase::Unbounded => {
                return Err(Error::Domain("phase one reported an unbounded ray".into()))
            }
        }
        if -tab.objective_value() > tol {
            return Ok(LpOutcome::Infeasible);
        }
        tab.evict_artificials()?;
    }

    let mut objective = vec![0.0; tab.width()];
    objective[..lp.num_vars()].copy_from_slice(lp.c.as_slice());
    tab.set_objective(&objective);
    tab.allow_artificials = false;
    match tab.optimize()? {
        Phase::Unbounded => Ok(LpOutcome::Unbounded),
        Phase::Optimal => {
            let x = tab.primal(lp.num_vars());
            let value = lp.c.dot(&x);
            Ok(LpOutcome::Optimal {
                x: Vector::new(x)?,
                value,
            })
        }
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

/// Rows are `[coefficients | rhs]`; columns are structural, slack, artificial.
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    objective: Vec<f64>,
    num_vars: usize,
    num_slack: usize,
    num_art: usize,
    allow_artificials: bool,
    tol: f64,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram, tol: f64, max_pivots: usize) -> Self {
        let n = lp.num_vars();
        let m = lp.num_constraints();
        let num_art = lp.h.iter().filter(|&&h| h < 0.0).count();
        let width = n + m + num_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = n + m;
        for i in 0..m {
            let mut row = vec![0.0; width + 1];
            let sign = if lp.h[i] < 0.0 { -1.0 } else { 1.0 };
            for (dst, &g) in row.iter_mut().zip(lp.g.row(i)) {
                *dst = sign * g;
            }
            row[n + i] = sign;
            row[width] = sign * lp.h[i];
            if sign < 0.0 {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(n + i);
            }
            rows.push(row);
        }
        Self {
            rows,
            basis,
            objective: vec![0.0; width + 1],
            num_vars: n,
            num_slack: m,
            num_art,
            allow_artificials: true,
            tol,
            pivots: 0,
            max_pivots,
        }
    }

    fn width(&self) -> usize {
        self.num_vars + self.num_slack + self.num_art
    }

    fn art_start(&self) -> usize {
        self.num_vars + self.num_slack
    }

    /// Loads reduced costs `c_Bᵀ B⁻¹ a_j − c_j` for maximizing `cᵀx`.
    fn set_objective(&mut self, c: &[f64]) {
        let w = self.width();
        for j in 0..w {
            self.objective[j] = -c[j];
        }
        self.objective[w] = 0.0;
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = c[b];
            if cb != 0.0 {
                for (o, r) in self.objective.iter_mut().zip(row) {
                    *o += cb * r;
                }
            }
        }
    }

    fn objective_value(&self) -> f64 {
        self.objective[self.width()]
    }

    fn optimize(&mut self) -> Result<Phase> {
        loop {
            let Some(col) = self.entering() else {
                return Ok(Phase::Optimal);
            };
            let Some(row) = self.leaving(col) else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(row, col)?;
        }
    }

    fn entering(&self) -> Option<usize> {
        let limit = if self.allow_artificials {
            self.width()
        } else {
            self.art_start()
        };
        (0..limit).find(|&j| self.objective[j] < -self.tol)
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let w = self.width();
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = row[col];
            if a <= self.tol {
                continue;
            }
            let ratio = row[w] / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br - self.tol
                        || (ratio <= br + self.tol && self.basis[i] < self.basis[bi])
                    {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<()> {
        if self.pivots >= self.max_pivots {
            return Err(Error::SolverStall {
                pivots: self.pivots,
            });
        }
        self.pivots += 1;

        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = core::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            eliminate(row, &pivot_row, c);
        }
        eliminate(&mut self.objective, &pivot_row, c);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
        Ok(())
    }

    /// Pivots zero-valued artificials out of the basis; rows where that is
    /// impossible are linearly dependent and get dropped.
    fn evict_artificials(&mut self) -> Result<()> {
        let art = self.art_start();
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < art {
                i += 1;
                continue;
            }
            let replacement = (0..art).find(|&j| libm::fabs(self.rows[i][j]) > self.tol);
            match replacement {
                Some(j) => {
                    self.pivot(i, j)?;
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
        Ok(())
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let w = self.width();
        let mut x = vec![0.0; n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < n {
                x[b] = row[w];
            }
        }
        x
    }
}

fn eliminate(row: &mut [f64], pivot_row: &[f64], c: usize) {
    let factor = row[c];
    if factor == 0.0 {
        return;
    }
    for (v, p) in row.iter_mut().zip(pivot_row) {
        *v -= factor * p;
    }
    row[c] = 0.0;
}
