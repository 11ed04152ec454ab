//! Closed-loop simulation of the synchronization protocol and its metrics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::matrix::{expm, integrate_linear_strided, CsrMatrix, Trajectory};
use crate::protocol::{closed_loop_matrix, ProtocolConfig};
use crate::regulator::AgentDynamics;
use crate::{Error, Result};

/// Initial agent states.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// One nonnegative state per agent.
    Explicit(Vec<Vec<f64>>),
    /// Independent uniform draws on `[0, scale]` from a seeded ChaCha8 stream.
    Random { scale: f64, seed: u64 },
}

impl InitialCondition {
    /// Stacked agent-major initial state for `agents` agents of dimension `n`.
    pub fn stacked(&self, agents: usize, n: usize) -> Result<Vec<f64>> {
        match self {
            InitialCondition::Explicit(states) => {
                if states.len() != agents || states.iter().any(|s| s.len() != n) {
                    return Err(Error::Dimension {
                        op: "initial condition",
                        detail: format!("expected {agents} states of dimension {n}"),
                    });
                }
                let x0: Vec<f64> = states.iter().flatten().copied().collect();
                if let Some(v) = x0.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return Err(Error::Domain(format!(
                        "initial states must be finite and nonnegative, found {v}"
                    )));
                }
                Ok(x0)
            }
            InitialCondition::Random { scale, seed } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Domain(format!(
                        "initial scale must be positive, got {scale}"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..agents * n).map(|_| rng.gen::<f64>() * scale).collect())
            }
        }
    }
}

/// Integration horizon, step, output stride and initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    pub output_stride: usize,
    pub init: InitialCondition,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 20.0,
            dt: 1e-3,
            output_stride: 100,
            init: InitialCondition::Random {
                scale: 5.0,
                seed: 0,
            },
        }
    }
}

/// Integrates `ẋ = (I_N ⊗ A − ρ L ⊗ BK) x` with RK4 on a sparse copy of the closed loop.
pub fn simulate(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    g: &Graph,
    sim: &SimConfig,
) -> Result<Trajectory> {
    let x0 = sim.init.stacked(g.n(), dyn_.state_dim())?;
    let op = CsrMatrix::from_dense(&closed_loop_matrix(dyn_, cfg, g));
    let mut traj = integrate_linear_strided(&op, &x0, sim.t_end, sim.dt, sim.output_stride)?;
    traj.agent_dim = dyn_.state_dim();
    Ok(traj)
}

/// `x_s(t) = e^{At} · mean(xᵢ(0))` at each of `times`.
pub fn reference_trajectory(
    dyn_: &AgentDynamics,
    x0: &[f64],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = dyn_.state_dim();
    if x0.is_empty() || x0.len() % n != 0 {
        return Err(Error::Dimension {
            op: "reference_trajectory",
            detail: format!(
                "stacked state of length {} is not a multiple of {n}",
                x0.len()
            ),
        });
    }
    let agents = x0.len() / n;
    let mut mean = vec![0.0; n];
    for chunk in x0.chunks(n) {
        for (m, v) in mean.iter_mut().zip(chunk) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= agents as f64);
    times
        .iter()
        .map(|&t| Ok(expm(dyn_.a(), t)?.matvec(&mean)?.into_vec()))
        .collect()
}

/// Per-sample synchronization metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncMetrics {
    pub times: Vec<f64>,
    /// `max_k (max_i x_i,k − min_i x_i,k)`.
    pub disagreement: Vec<f64>,
    /// Smallest coordinate over all agents.
    pub min_coordinate: Vec<f64>,
    /// `max_i ‖xᵢ − x_s‖_∞`.
    pub sync_error_vs_reference: Vec<f64>,
    /// First sample time with disagreement at most half its initial value.
    pub half_life: Option<f64>,
}

impl SyncMetrics {
    /// `disagreement(t_end) / disagreement(0)`; zero when the agents start in agreement.
    pub fn disagreement_ratio(&self) -> f64 {
        match (self.disagreement.first(), self.disagreement.last()) {
            (Some(&d0), Some(&d1)) if d0 > 0.0 => d1 / d0,
            _ => 0.0,
        }
    }
}

/// Largest per-coordinate spread across agents.
pub fn disagreement(state: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let coords = state.iter().skip(k).step_by(n);
            let (lo, hi) = coords.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

pub fn compute_metrics(dyn_: &AgentDynamics, traj: &Trajectory) -> Result<SyncMetrics> {
    let n = traj.agent_dim;
    let first = traj.states.first().ok_or(Error::Empty)?;
    let reference = reference_trajectory(dyn_, first, &traj.times)?;
    let disagreement: Vec<f64> = traj.states.iter().map(|s| disagreement(s, n)).collect();
    let min_coordinate = traj
        .states
        .iter()
        .map(|s| s.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let sync_error_vs_reference = traj
        .states
        .iter()
        .zip(&reference)
        .map(|(s, r)| {
            s.chunks(n)
                .flat_map(|xi| xi.iter().zip(r).map(|(a, b)| libm::fabs(a - b)))
                .fold(0.0, f64::max)
        })
        .collect();
    let d0 = disagreement[0];
    let half_life = if d0 == 0.0 {
        Some(0.0)
    } else {
        disagreement
            .iter()
            .position(|&d| d <= 0.5 * d0)
            .map(|k| traj.times[k])
    };
    Ok(SyncMetrics {
        times: traj.times.clone(),
        disagreement,
        min_coordinate,
        sync_error_vs_reference,
        half_life,
    })
}

/// `max (|uᵢ| − E|ζᵢ|)` over samples, agents and input channels; `≤ 0` up to round-off.
pub fn input_bound_excess(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    g: &Graph,
    traj: &Trajectory,
) -> Result<f64> {
    let n = dyn_.state_dim();
    let lap = g.laplacian();
    let k = cfg.gain();
    let e = dyn_.e();
    let mut worst = f64::NEG_INFINITY;
    let mut zeta = vec![0.0; n];
    for state in &traj.states {
        for i in 0..g.n() {
            zeta.iter_mut().for_each(|z| *z = 0.0);
            for j in 0..g.n() {
                let l = lap[(i, j)];
                if l != 0.0 {
                    for (z, x) in zeta.iter_mut().zip(&state[j * n..(j + 1) * n]) {
                        *z += l * x;
                    }
                }
            }
            let u = k.matvec(&zeta)?;
            let abs_zeta: Vec<f64> = zeta.iter().map(|z| libm::fabs(*z)).collect();
            let bound = e.matvec(&abs_zeta)?;
            for (ui, bi) in u.iter().zip(bound.iter()) {
                worst = worst.max(libm::fabs(cfg.rho * ui) - bi);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_cycle};
    use crate::matrix::{Matrix, Vector};
    use crate::regulator::VERIFY_TOL;

    fn paper_agent() -> AgentDynamics {
        AgentDynamics::new(
            Matrix::from_rows(&[&[-2.21, 2.40], &[0.43, -0.44]]).unwrap(),
            Matrix::from_rows(&[&[0.27], &[0.0]]).unwrap(),
            Matrix::from_rows(&[&[0.06, 0.6]]).unwrap(),
            Vector::ones(2),
        )
        .unwrap()
    }

    #[test]
    fn random_init_is_seeded_and_bounded() {
        let init = InitialCondition::Random {
            scale: 5.0,
            seed: 7,
        };
        let a = init.stacked(10, 2).unwrap();
        assert_eq!(a, init.stacked(10, 2).unwrap());
        assert!(a.iter().all(|&v| (0.0..=5.0).contains(&v)));
        assert_ne!(
            a,
            InitialCondition::Random {
                scale: 5.0,
                seed: 8
            }
            .stacked(10, 2)
            .unwrap()
        );
        assert!(InitialCondition::Explicit(vec![vec![1.0]])
            .stacked(1, 2)
            .is_err());
        assert!(InitialCondition::Explicit(vec![vec![-1.0, 0.0]])
            .stacked(1, 2)
            .is_err());
    }

    #[test]
    fn agreement_is_preserved() {
        let dyn_ = paper_agent();
        let cfg = ProtocolConfig::design(&dyn_, 1.0, 13.0, None, VERIFY_TOL).unwrap();
        let g = gen_complete(3).unwrap();
        let sim = SimConfig {
            t_end: 1.0,
            dt: 1e-3,
            output_stride: 100,
            init: InitialCondition::Explicit(vec![vec![1.0, 2.0]; 3]),
        };
        let traj = simulate(&dyn_, &cfg, &g, &sim).unwrap();
        assert_eq!(traj.len(), 11);
        let metrics = compute_metrics(&dyn_, &traj).unwrap();
        assert_eq!(metrics.half_life, Some(0.0));
        assert!(metrics.disagreement.iter().all(|&d| d < 1e-12));
        assert!(metrics.sync_error_vs_reference.iter().all(|&e| e < 1e-9));
    }

    #[test]
    fn disagreement_shrinks_on_a_cycle() {
        let dyn_ = paper_agent();
        let cfg = ProtocolConfig::design(&dyn_, 1.0, 4.0, None, VERIFY_TOL).unwrap();
        let g = gen_cycle(6).unwrap();
        let sim = SimConfig {
            t_end: 5.0,
            dt: 1e-2,
            output_stride: 10,
            init: InitialCondition::Random {
                scale: 5.0,
                seed: 1,
            },
        };
        let traj = simulate(&dyn_, &cfg, &g, &sim).unwrap();
        let metrics = compute_metrics(&dyn_, &traj).unwrap();
        assert!(metrics.disagreement_ratio() < 1.0);
        assert!(metrics.min_coordinate.iter().all(|&v| v >= 0.0));
        assert!(input_bound_excess(&dyn_, &cfg, &g, &traj).unwrap() <= 1e-12);
    }

    #[test]
    fn disagreement_examples() {
        assert_eq!(disagreement(&[1.0, 5.0, 3.0, 2.0], 2), 3.0);
        assert_eq!(disagreement(&[4.0, 4.0], 2), 0.0);
    }
}
