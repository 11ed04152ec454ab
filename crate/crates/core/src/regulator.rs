//! The linear regulator for positive systems.
//!
//! For Metzler `A`, the problem
//!
//! ```text
//! minimize ∫ sᵀx dt   subject to   ẋ = Ax + Bu,  |u| ≤ Ex
//! ```
//!
//! has value `pᵀx₀`, where `p ≥ 0` solves the algebraic equation
//! `Aᵀp = Eᵀ|Bᵀp| − s`. That `p` is the maximizer of a linear program in
//! `(p, ζ)`, and the optimal feedback is `u = −Kx` with
//! `K = diag(sign(Bᵀp)) E`.

use alloc::format;
use alloc::vec::Vec;

use crate::lp::{self, LinearProgram, LpOutcome};
use crate::matrix::{Matrix, Vector};
use crate::{Error, Result};

/// Default tolerance on the algebraic-equation residual.
pub const VERIFY_TOL: f64 = 1e-7;

/// One agent's dynamics `ẋ = Ax + Bu`, its input bound `|u| ≤ Ex` and cost weights `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDynamics {
    a: Matrix,
    b: Matrix,
    e: Matrix,
    s: Vector,
}

impl AgentDynamics {
    /// Checks shapes, that `A` is Metzler, `E ≥ 0` and `s > 0`.
    pub fn new(a: Matrix, b: Matrix, e: Matrix, s: Vector) -> Result<Self> {
        let n = a.rows();
        let m = b.cols();
        if !a.is_square() || b.rows() != n || e.shape() != (m, n) || s.dim() != n {
            return Err(Error::Dimension {
                op: "AgentDynamics::new",
                detail: format!(
                    "A {}x{}, B {}x{}, E {}x{}, s {}; need A n×n, B n×m, E m×n, s n",
                    a.rows(),
                    a.cols(),
                    b.rows(),
                    b.cols(),
                    e.rows(),
                    e.cols(),
                    s.dim()
                ),
            });
        }
        if let Some((i, j)) = a.first_negative_off_diagonal(0.0)? {
            return Err(Error::Domain(format!(
                "A is not Metzler: A[{i}][{j}] = {} is a negative off-diagonal entry",
                a[(i, j)]
            )));
        }
        if let Some((i, j)) = e.first_negative(0.0) {
            return Err(Error::Domain(format!(
                "E must be nonnegative: E[{i}][{j}] = {}",
                e[(i, j)]
            )));
        }
        if let Some(k) = s.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Domain(format!(
                "s must be strictly positive: s[{k}] = {}",
                s[k]
            )));
        }
        Ok(Self { a, b, e, s })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// The input bound `E` (the regulator's `Ẽ`).
    pub fn e(&self) -> &Matrix {
        &self.e
    }

    pub fn s(&self) -> &Vector {
        &self.s
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    /// Same agent with the input bound replaced by `E / rho`.
    pub fn with_bound_scaled(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!(
                "coupling gain must be positive, got {rho}"
            )));
        }
        Ok(Self {
            e: self.e.scale(1.0 / rho),
            ..self.clone()
        })
    }

    /// Same agent with cost weights `s` replaced.
    pub fn with_cost(&self, s: Vector) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), self.e.clone(), s)
    }
}

/// Maximizer of the regulator LP and the gain derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulatorSolution {
    pub p: Vector,
    pub zeta: Vector,
    pub k: Matrix,
    /// `sign(Bᵀp)` per input channel, with values inside the tolerance mapped to 0.
    pub signs: Vec<i8>,
    /// `𝟙ᵀp` at the LP optimum.
    pub objective: f64,
    /// `‖Aᵀp − Eᵀ|Bᵀp| + s‖_∞`.
    pub residual: f64,
}

impl RegulatorSolution {
    /// Optimal cost `pᵀx₀` from a nonnegative initial state.
    pub fn optimal_cost(&self, x0: &[f64]) -> Result<f64> {
        if x0.len() != self.p.dim() {
            return Err(Error::Dimension {
                op: "optimal_cost",
                detail: format!("x0 has {} entries, p has {}", x0.len(), self.p.dim()),
            });
        }
        if let Some(k) = x0.iter().position(|&v| v < 0.0) {
            return Err(Error::Domain(format!(
                "x0 must be nonnegative: x0[{k}] = {}",
                x0[k]
            )));
        }
        Ok(self.p.dot(x0))
    }

    /// True when `K` equals the bound it was built from, i.e. every sign is `+1`.
    pub fn gain_equals_bound(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }
}

/// Feasibility of `Ax + Bu ≤ −𝟙`, `−Ex ≤ u ≤ Ex` over `x ≥ 0` and free `u`.
pub fn check_e_stabilizable(dyn_: &AgentDynamics) -> Result<bool> {
    let (n, m) = (dyn_.state_dim(), dyn_.input_dim());
    // columns: x (n) | u⁺ (m) | u⁻ (m)
    let mut g = Matrix::zeros(n + 2 * m, n + 2 * m);
    let mut h = Vector::zeros(n + 2 * m);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = dyn_.a[(i, j)];
        }
        for k in 0..m {
            g[(i, n + k)] = dyn_.b[(i, k)];
            g[(i, n + m + k)] = -dyn_.b[(i, k)];
        }
        h[i] = -1.0;
    }
    for k in 0..m {
        let upper = n + k;
        let lower = n + m + k;
        for j in 0..n {
            g[(upper, j)] = -dyn_.e[(k, j)];
            g[(lower, j)] = -dyn_.e[(k, j)];
        }
        // u − Ex ≤ 0
        g[(upper, n + k)] = 1.0;
        g[(upper, n + m + k)] = -1.0;
        // −u − Ex ≤ 0
        g[(lower, n + k)] = -1.0;
        g[(lower, n + m + k)] = 1.0;
    }
    let outcome = lp::solve_feasibility(&g, &h, lp::DEFAULT_TOL)?;
    Ok(matches!(outcome, LpOutcome::Optimal { .. }))
}

/// The regulator LP over `(p, ζ) ≥ 0`:
///
/// ```text
/// maximize 𝟙ᵀp  s.t.  −Aᵀp + Eᵀζ ≤ s,   Bᵀp − ζ ≤ 0,   −Bᵀp − ζ ≤ 0
/// ```
///
/// Feasible `p` satisfy `Aᵀp + s ≥ Eᵀ|Bᵀp|`, so they under-estimate the
/// value function; the maximizer attains equality.
pub fn build_regulator_lp(dyn_: &AgentDynamics) -> LinearProgram {
    let (n, m) = (dyn_.state_dim(), dyn_.input_dim());
    let mut g = Matrix::zeros(n + 2 * m, n + m);
    let mut h = Vector::zeros(n + 2 * m);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = -dyn_.a[(j, i)];
        }
        for k in 0..m {
            g[(i, n + k)] = dyn_.e[(k, i)];
        }
        h[i] = dyn_.s[i];
    }
    for k in 0..m {
        let upper = n + k;
        let lower = n + m + k;
        for j in 0..n {
            g[(upper, j)] = dyn_.b[(j, k)];
            g[(lower, j)] = -dyn_.b[(j, k)];
        }
        g[(upper, n + k)] = -1.0;
        g[(lower, n + k)] = -1.0;
    }
    let mut c = Vector::zeros(n + m);
    for i in 0..n {
        c[i] = 1.0;
    }
    LinearProgram::new(c, g, h).expect("regulator LP dimensions are consistent by construction")
}

/// Solves the regulator LP, extracts `K = diag(sign(Bᵀp)) E` and checks the
/// algebraic equation to within `tol`.
pub fn solve_regulator(dyn_: &AgentDynamics, tol: f64) -> Result<RegulatorSolution> {
    let (n, m) = (dyn_.state_dim(), dyn_.input_dim());
    let lp = build_regulator_lp(dyn_);
    let (x, objective) = match lp::solve_lp(&lp, lp::DEFAULT_TOL)? {
        LpOutcome::Optimal { x, value } => (x, value),
        LpOutcome::Infeasible | LpOutcome::Unbounded => return Err(Error::NotStabilizable),
    };
    let p = Vector::new(x[..n].to_vec())?;
    let zeta = Vector::new(x[n..].to_vec())?;

    let btp = dyn_.b.transpose().matvec(&p)?;
    let signs: Vec<i8> = btp
        .iter()
        .map(|&v| {
            if v > tol {
                1
            } else if v < -tol {
                -1
            } else {
                0
            }
        })
        .collect();
    let mut k = dyn_.e.clone();
    for (row, &sign) in signs.iter().enumerate() {
        for j in 0..n {
            k[(row, j)] *= f64::from(sign);
        }
    }

    let residual = equation_residual(dyn_, &p)?;
    if residual > tol {
        return Err(Error::Verification { residual });
    }
    debug_assert_eq!(zeta.dim(), m);
    Ok(RegulatorSolution {
        p,
        zeta,
        k,
        signs,
        objective,
        residual,
    })
}

/// `‖Aᵀp − Eᵀ|Bᵀp| + s‖_∞`.
pub fn equation_residual(dyn_: &AgentDynamics, p: &[f64]) -> Result<f64> {
    let atp = dyn_.a.transpose().matvec(p)?;
    let abs_btp: Vec<f64> = dyn_
        .b
        .transpose()
        .matvec(p)?
        .iter()
        .map(|v| libm::fabs(*v))
        .collect();
    let et_abs = dyn_.e.transpose().matvec(&abs_btp)?;
    Ok(atp
        .iter()
        .zip(et_abs.iter())
        .zip(dyn_.s.iter())
        .map(|((a, e), s)| libm::fabs(a - e + s))
        .fold(0.0, f64::max))
}

/// Largest `τ ≥ 0` keeping `A − τ|B|Ẽ` Metzler, with `Ẽ = E/ρ`.
///
/// Only off-diagonal entries with `(|B|Ẽ)_ij > 0` constrain `τ`; when there
/// are none the answer is `+∞`.
pub fn compute_alpha(dyn_: &AgentDynamics, rho: f64) -> Result<f64> {
    let bound = dyn_.b.abs().matmul(&dyn_.with_bound_scaled(rho)?.e)?;
    let n = dyn_.state_dim();
    let mut alpha = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j && bound[(i, j)] > 0.0 {
                alpha = alpha.min(dyn_.a[(i, j)] / bound[(i, j)]);
            }
        }
    }
    Ok(alpha)
}

/// `α ≥ γ/β`.
pub fn check_alpha_condition(alpha: f64, beta: f64, gamma: f64) -> Result<bool> {
    if !(beta > 0.0 && gamma > 0.0) || beta > gamma {
        return Err(Error::Precondition(format!(
            "need 0 < beta <= gamma, got beta = {beta}, gamma = {gamma}"
        )));
    }
    Ok(alpha >= gamma / beta)
}
