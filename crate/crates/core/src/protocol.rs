//! Assembly and certification of the synchronization protocol `uᵢ = −ρ K ζᵢ`.
//!
//! With `K` taken from the regulator solved for `Ẽ = E/ρ`, the network
//! `ẋ = (I_N ⊗ A − ρ L ⊗ BK) x` decouples into the modes `A − λᵢρBK`,
//! `i = 2..N`. For Metzler modes, a vector `p ≥ 0` with `(A − λᵢρBK)ᵀp < 0`
//! proves the mode Hurwitz; such a vector is found by linear programming.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{self, Graph};
use crate::lp::{self, LpOutcome};
use crate::matrix::{integrate_linear_strided, CsrMatrix, LinearOperator, Matrix, Vector};
use crate::regulator::{self, AgentDynamics, RegulatorSolution};
use crate::{Error, Result};

/// Orthant exit threshold used by the counterexample search.
pub const EXIT_TOL: f64 = 1e-9;
const MAX_WITNESS_MAGNITUDE: f64 = (1u64 << 40) as f64;
const WITNESS_HORIZON: f64 = 1.0;
const WITNESS_DT: f64 = 1e-3;

/// Protocol parameters together with the regulator solved for `Ẽ = E/ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub regulator: RegulatorSolution,
}

impl ProtocolConfig {
    /// Solves the regulator for `Ẽ = E/ρ`; `rho` defaults to `1/β`.
    pub fn design(
        dyn_: &AgentDynamics,
        beta: f64,
        gamma: f64,
        rho: Option<f64>,
        tol: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && gamma >= beta && gamma.is_finite()) {
            return Err(Error::Precondition(format!(
                "need 0 < beta <= gamma, got beta = {beta}, gamma = {gamma}"
            )));
        }
        let rho = rho.unwrap_or(1.0 / beta);
        let regulator = regulator::solve_regulator(&dyn_.with_bound_scaled(rho)?, tol)?;
        Ok(Self {
            beta,
            gamma,
            rho,
            regulator,
        })
    }

    pub fn gain(&self) -> &Matrix {
        &self.regulator.k
    }

    /// `B K`.
    pub fn coupling(&self, dyn_: &AgentDynamics) -> Matrix {
        dyn_.b().matmul(&self.regulator.k).expect("K is m×n")
    }

    /// `A − λρBK`.
    pub fn mode_matrix(&self, dyn_: &AgentDynamics, lambda: f64) -> Matrix {
        dyn_.a()
            .sub(&self.coupling(dyn_).scale(lambda * self.rho))
            .expect("n×n")
    }
}

/// A standing hypothesis of the protocol that does not hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// `ρ < 1/β`.
    CouplingGainTooSmall { rho: f64, min: f64 },
    /// `A − γρ|B|Ẽ` has a negative off-diagonal entry.
    ShiftedNotMetzler { row: usize, col: usize, value: f64 },
    /// `α < γ/β`.
    AlphaBelowRatio { alpha: f64, required: f64 },
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::CouplingGainTooSmall { rho, min } => {
                write!(f, "rho = {rho} is below 1/beta = {min}")
            }
            Hypothesis::ShiftedNotMetzler { row, col, value } => write!(
                f,
                "A - gamma*rho*|B|*E~ is not Metzler: entry ({row}, {col}) = {value}"
            ),
            Hypothesis::AlphaBelowRatio { alpha, required } => {
                write!(f, "alpha = {alpha} is below gamma/beta = {required}")
            }
        }
    }
}

/// Outcome of [`validate_protocol`]: empty means every hypothesis holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Validation {
    pub violations: Vec<Hypothesis>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `ρ ≥ 1/β`, that `A − γρ|B|Ẽ` is Metzler, and `α ≥ γ/β`.
pub fn validate_protocol(dyn_: &AgentDynamics, cfg: &ProtocolConfig) -> Result<Validation> {
    let mut violations = Vec::new();
    let min_rho = 1.0 / cfg.beta;
    if cfg.rho < min_rho {
        violations.push(Hypothesis::CouplingGainTooSmall {
            rho: cfg.rho,
            min: min_rho,
        });
    }
    let shifted = shifted_state_matrix(dyn_, cfg)?;
    if let Some((row, col)) = shifted.first_negative_off_diagonal(0.0)? {
        violations.push(Hypothesis::ShiftedNotMetzler {
            row,
            col,
            value: shifted[(row, col)],
        });
    }
    let alpha = regulator::compute_alpha(dyn_, cfg.rho)?;
    if !regulator::check_alpha_condition(alpha, cfg.beta, cfg.gamma)? {
        violations.push(Hypothesis::AlphaBelowRatio {
            alpha,
            required: cfg.gamma / cfg.beta,
        });
    }
    Ok(Validation { violations })
}

/// `A − γρ|B|Ẽ`, which equals `A − γ|B|E`.
pub fn shifted_state_matrix(dyn_: &AgentDynamics, cfg: &ProtocolConfig) -> Result<Matrix> {
    let tilde = dyn_.with_bound_scaled(cfg.rho)?;
    let bound = dyn_.b().abs().matmul(tilde.e())?;
    dyn_.a().sub(&bound.scale(cfg.gamma * cfg.rho))
}

/// Hurwitz certificate for one mode `A − λρBK`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCertificate {
    pub lambda: f64,
    pub p: Vector,
    /// `min_k −((A − λρBK)ᵀp)_k`, positive for a valid certificate.
    pub margin: f64,
}

/// Finds `p ≥ 0` with `(A − λρBK)ᵀp ≤ −𝟙`, which proves the Metzler mode Hurwitz.
pub fn certify_mode(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    lambda: f64,
    tol: f64,
) -> Result<ModeCertificate> {
    if lambda < cfg.beta - tol || lambda > cfg.gamma + tol {
        return Err(Error::Precondition(format!(
            "mode lambda = {lambda} lies outside [beta, gamma] = [{}, {}]",
            cfg.beta, cfg.gamma
        )));
    }
    let mode = cfg.mode_matrix(dyn_, lambda);
    if let Some((i, j)) = mode.first_negative_off_diagonal(tol)? {
        return Err(Error::Hypothesis(format!(
            "A - lambda*rho*BK is not Metzler at lambda = {lambda}: entry ({i}, {j}) = {}",
            mode[(i, j)]
        )));
    }
    let n = dyn_.state_dim();
    let mode_t = mode.transpose();
    let rhs = Vector::new(vec![-1.0; n])?;
    let p = match lp::solve_feasibility(&mode_t, &rhs, lp::DEFAULT_TOL)? {
        LpOutcome::Optimal { x, .. } => x,
        _ => return Err(Error::NotHurwitz { lambda }),
    };
    let margin = mode_t
        .matvec(&p)?
        .iter()
        .map(|v| -v)
        .fold(f64::INFINITY, f64::min);
    if !(margin > 0.0) {
        return Err(Error::NotHurwitz { lambda });
    }
    Ok(ModeCertificate { lambda, p, margin })
}

/// `‖(A − αBK)ᵀp − ((1 − α)Ẽᵀ|Bᵀp| − s)‖_∞` for the regulator's `p`.
///
/// The regulator equation makes this zero for every `α`; for `α ≥ 1` the
/// bracket is `≤ −s`, so `p` itself certifies every Metzler mode with
/// `λρ ≥ 1`.
pub fn direct_certificate_defect(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    alpha: f64,
) -> Result<f64> {
    let p = &cfg.regulator.p;
    let lhs = dyn_
        .a()
        .sub(&cfg.coupling(dyn_).scale(alpha))?
        .transpose()
        .matvec(p)?;
    let tilde = dyn_.with_bound_scaled(cfg.rho)?;
    let abs_btp: Vec<f64> = dyn_
        .b()
        .transpose()
        .matvec(p)?
        .iter()
        .map(|v| libm::fabs(*v))
        .collect();
    let et = tilde.e().transpose().matvec(&abs_btp)?;
    Ok(lhs
        .iter()
        .zip(et.iter())
        .zip(dyn_.s().iter())
        .map(|((l, e), s)| libm::fabs(l - ((1.0 - alpha) * e - s)))
        .fold(0.0, f64::max))
}

/// Whether trajectories from nonnegative initial states stay nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    Guaranteed,
    /// `(BK)[row][col] < 0` (0-based).
    Violated {
        row: usize,
        col: usize,
    },
}

/// Positivity holds iff `BK ≥ 0`; otherwise reports the first negative entry.
pub fn check_positivity(dyn_: &AgentDynamics, cfg: &ProtocolConfig, tol: f64) -> Positivity {
    match cfg.coupling(dyn_).first_negative(tol) {
        None => Positivity::Guaranteed,
        Some((row, col)) => Positivity::Violated { row, col },
    }
}

/// Maximum weighted degree against `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeCheck {
    pub max_degree: f64,
    pub gamma: f64,
}

impl DegreeCheck {
    pub fn holds(&self) -> bool {
        self.max_degree <= self.gamma
    }
}

/// Initial condition and exit time of a trajectory leaving the orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationWitness {
    pub x0: Vec<f64>,
    pub exit_time: f64,
    /// Agent whose coordinate `row` starts at zero.
    pub agent: usize,
    /// Neighbour whose coordinate `col` carries the large value.
    pub neighbor: usize,
    pub magnitude: f64,
    /// `ẋ_agent(0)[row]`, negative by construction.
    pub initial_derivative: f64,
}

/// Builds an initial condition that leaves the nonnegative orthant when
/// `(BK)[row][col] < 0`.
///
/// Every coordinate starts at 1 except `x_i[row] = 0` and `x_j[col] = μ`,
/// where `(i, j)` is the first edge of `g`. `μ` doubles from 1 until
/// `ẋ_i[row](0) < 0` and the simulated state drops below `−1e-9`.
pub fn construct_violation_trajectory(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    g: &Graph,
    row: usize,
    col: usize,
) -> Result<ViolationWitness> {
    let n = dyn_.state_dim();
    let bk = cfg.coupling(dyn_);
    if row >= n || col >= n || !(bk[(row, col)] < 0.0) {
        return Err(Error::Precondition(format!(
            "(BK)[{row}][{col}] must be negative for an orthant exit"
        )));
    }
    let &(agent, neighbor, _) = g
        .edges()
        .first()
        .ok_or_else(|| Error::Precondition("graph needs at least one edge".into()))?;

    let op = CsrMatrix::from_dense(&closed_loop_matrix(dyn_, cfg, g));
    let watched = agent * n + row;
    let mut derivative = vec![0.0; op.dim()];
    let mut magnitude = 1.0;
    while magnitude <= MAX_WITNESS_MAGNITUDE {
        let mut x0 = vec![1.0; op.dim()];
        x0[watched] = 0.0;
        x0[neighbor * n + col] = magnitude;
        op.apply_into(&x0, &mut derivative);
        let initial_derivative = derivative[watched];
        if initial_derivative < 0.0 {
            let traj = integrate_linear_strided(&op, &x0, WITNESS_HORIZON, WITNESS_DT, 1)?;
            let exit = traj
                .states
                .iter()
                .position(|s| s.iter().any(|&v| v < -EXIT_TOL))
                .map(|k| traj.times[k]);
            if let Some(exit_time) = exit {
                return Ok(ViolationWitness {
                    x0,
                    exit_time,
                    agent,
                    neighbor,
                    magnitude,
                    initial_derivative,
                });
            }
        }
        magnitude *= 2.0;
    }
    Err(Error::ConstructionFailure {
        max_magnitude: MAX_WITNESS_MAGNITUDE,
    })
}

/// `I_N ⊗ A − ρ (L ⊗ BK)`, agent-major.
pub fn closed_loop_matrix(dyn_: &AgentDynamics, cfg: &ProtocolConfig, g: &Graph) -> Matrix {
    let drift = Matrix::identity(g.n()).kron(dyn_.a());
    let coupling = g.laplacian().kron(&cfg.coupling(dyn_)).scale(cfg.rho);
    drift.sub(&coupling).expect("both blocks are Nn×Nn")
}

/// Proof object for the protocol on a concrete graph or on the family `[β, γ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolCertificate {
    pub validation: Validation,
    pub mode_certificates: Vec<ModeCertificate>,
    pub positivity: Positivity,
    /// Present when a concrete graph was supplied.
    pub degree_check: Option<DegreeCheck>,
    /// Largest direct-certificate defect over the certified modes.
    pub direct_defect: f64,
    /// Whether the closed loop was assembled, i.e. a graph was supplied.
    pub assembled: bool,
}

impl ProtocolCertificate {
    pub fn min_margin(&self) -> f64 {
        self.mode_certificates
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Certifies every nonzero Laplacian eigenvalue of `g`, or the endpoints
/// `{β, γ}` when no graph is given.
pub fn certify(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    g: Option<&Graph>,
    tol: f64,
) -> Result<ProtocolCertificate> {
    let validation = validate_protocol(dyn_, cfg)?;
    if !validation.is_valid() {
        let reasons: Vec<String> = validation
            .violations
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        return Err(Error::Hypothesis(reasons.join("; ")));
    }
    let (lambdas, degree_check) = match g {
        Some(g) => {
            let summary = graph::spectral_summary(g, graph::CONNECTIVITY_TOL)?;
            if !summary.is_connected {
                return Err(Error::Precondition("graph is not connected".into()));
            }
            let check = DegreeCheck {
                max_degree: g.max_weighted_degree(),
                gamma: cfg.gamma,
            };
            (summary.nonzero_modes().to_vec(), Some(check))
        }
        None => (vec![cfg.beta, cfg.gamma], None),
    };
    let mut mode_certificates = Vec::with_capacity(lambdas.len());
    let mut direct_defect: f64 = 0.0;
    for &lambda in &lambdas {
        mode_certificates.push(certify_mode(dyn_, cfg, lambda, tol)?);
        direct_defect = direct_defect.max(direct_certificate_defect(dyn_, cfg, lambda * cfg.rho)?);
    }
    Ok(ProtocolCertificate {
        validation,
        mode_certificates,
        positivity: check_positivity(dyn_, cfg, 0.0),
        degree_check,
        direct_defect,
        assembled: g.is_some(),
    })
}
