//! Property checks and configuration samplers shared by the integration and
//! acceptance suites.
#![allow(dead_code)]

use possync_core::graph::{
    gen_complete, gen_cycle, gen_path, gen_random_regular, spectral_summary, CONNECTIVITY_TOL,
};
use possync_core::lp::LinearProgram;
use possync_core::matrix::{expm, integrate_linear_strided, sym_eigen};
use possync_core::protocol::{check_positivity, shifted_state_matrix, Positivity};
use possync_core::regulator::VERIFY_TOL;
use possync_core::sim::{simulate, InitialCondition, SimConfig};
use possync_core::{AgentDynamics, Graph, Matrix, ProtocolConfig, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every connected unit-weight graph family instance with `N ≤ 6` used by the mode tests.
pub fn small_graphs() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 2..=6 {
        out.push((format!("K{n}"), gen_complete(n).unwrap()));
        out.push((format!("P{n}"), gen_path(n).unwrap()));
        if n >= 3 {
            out.push((format!("C{n}"), gen_cycle(n).unwrap()));
        }
        for d in 2..n {
            if (n * d) % 2 == 0 {
                for seed in 0..3 {
                    out.push((
                        format!("R({n},{d};{seed})"),
                        gen_random_regular(n, d, seed).unwrap(),
                    ));
                }
            }
        }
    }
    out
}

/// Largest deviations of the nonzero modes and of the agent mean from their
/// decoupled counterparts: `η̇ₖ = (A − λₖρBK)ηₖ` and `x̄(t) = e^{At} x̄(0)`.
pub fn mode_decomposition_error(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    g: &Graph,
    sim: &SimConfig,
) -> (f64, f64) {
    let n = dyn_.state_dim();
    let agents = g.n();
    let traj = simulate(dyn_, cfg, g, sim).unwrap();
    let eig = sym_eigen(&g.laplacian(), 1e-12).unwrap();
    let project = |state: &[f64], k: usize| -> Vec<f64> {
        let mut eta = vec![0.0; n];
        for i in 0..agents {
            for c in 0..n {
                eta[c] += eig.vectors[(i, k)] * state[i * n + c];
            }
        }
        eta
    };

    let mut mode_err: f64 = 0.0;
    for k in 1..agents {
        let mode = cfg.mode_matrix(dyn_, eig.values[k]);
        let eta0 = project(&traj.states[0], k);
        let decoupled =
            integrate_linear_strided(&mode, &eta0, sim.t_end, sim.dt, sim.output_stride).unwrap();
        assert_eq!(decoupled.times, traj.times);
        for (state, eta) in traj.states.iter().zip(&decoupled.states) {
            mode_err = mode_err.max(max_diff(&project(state, k), eta));
        }
    }

    let mean = |state: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|c| (0..agents).map(|i| state[i * n + c]).sum::<f64>() / agents as f64)
            .collect()
    };
    let mean0 = mean(&traj.states[0]);
    let mut zero_err: f64 = 0.0;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let exact = expm(dyn_.a(), *t).unwrap().matvec(&mean0).unwrap();
        zero_err = zero_err.max(max_diff(&mean(state), &exact));
    }
    (mode_err, zero_err)
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_agent(rng: &mut ChaCha8Rng, b_lo: f64) -> AgentDynamics {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=2);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j {
                rng.gen_range(-3.0..0.5)
            } else {
                rng.gen_range(0.2..2.0)
            };
        }
    }
    let b = (0..n * m).map(|_| rng.gen_range(b_lo..1.0)).collect();
    let e = (0..m * n).map(|_| rng.gen_range(0.0..0.3)).collect();
    AgentDynamics::new(
        Matrix::new(n, n, a).unwrap(),
        Matrix::new(n, m, b).unwrap(),
        Matrix::new(m, n, e).unwrap(),
        Vector::ones(n),
    )
    .unwrap()
}

fn random_small_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(2..=7);
    match rng.gen_range(0..4) {
        0 => gen_complete(n).unwrap(),
        1 => gen_path(n).unwrap(),
        2 if n >= 3 => gen_cycle(n).unwrap(),
        _ if n >= 4 => gen_random_regular(n, if n % 2 == 0 { 3 } else { 2 }, rng.gen()).unwrap(),
        _ => gen_path(n).unwrap(),
    }
}

/// Protocol configuration on a small graph with `[β, γ] = [λ₂, max(λ_N, d_max)]`.
fn configure(dyn_: &AgentDynamics, g: &Graph) -> Option<ProtocolConfig> {
    let summary = spectral_summary(g, CONNECTIVITY_TOL).unwrap();
    let beta = summary.lambda2?;
    let gamma = summary.lambda_n.max(g.max_weighted_degree());
    ProtocolConfig::design(dyn_, beta, gamma, None, VERIFY_TOL).ok()
}

/// Samples agents with nonnegative `B` until `BK ≥ 0` and the block diagonal
/// `A − γρ|B|Ẽ` is Metzler, which together make the closed loop Metzler.
pub fn random_guaranteed(rng: &mut ChaCha8Rng) -> (AgentDynamics, ProtocolConfig, Graph) {
    loop {
        let dyn_ = random_agent(rng, 0.0);
        let g = random_small_graph(rng);
        let Some(cfg) = configure(&dyn_, &g) else {
            continue;
        };
        if check_positivity(&dyn_, &cfg, 0.0) != Positivity::Guaranteed {
            continue;
        }
        if shifted_state_matrix(&dyn_, &cfg)
            .unwrap()
            .is_metzler(0.0)
            .unwrap()
        {
            return (dyn_, cfg, g);
        }
    }
}

/// Samples agents with mixed-sign `B` until `BK` has a negative entry.
pub fn random_violated(
    rng: &mut ChaCha8Rng,
) -> (AgentDynamics, ProtocolConfig, Graph, (usize, usize)) {
    loop {
        let dyn_ = random_agent(rng, -1.0);
        let g = random_small_graph(rng);
        let Some(cfg) = configure(&dyn_, &g) else {
            continue;
        };
        if let Positivity::Violated { row, col } = check_positivity(&dyn_, &cfg, 0.0) {
            return (dyn_, cfg, g, (row, col));
        }
    }
}

/// Smallest coordinate of a simulated trajectory from a random nonnegative start.
pub fn simulated_min_coordinate(
    dyn_: &AgentDynamics,
    cfg: &ProtocolConfig,
    g: &Graph,
    seed: u64,
    t_end: f64,
) -> f64 {
    let sim = SimConfig {
        t_end,
        dt: 1e-3,
        output_stride: 10,
        init: InitialCondition::Random { scale: 5.0, seed },
    };
    let traj = simulate(dyn_, cfg, g, &sim).unwrap();
    traj.states
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Small integer LP `max cᵀx, Gx ≤ h, x ≥ 0` with up to 6 variables and 8 constraints.
pub fn random_lp(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=8);
    // integer data keeps the vertex oracle away from near-singular subsets
    let mut int = |lo: i32, hi: i32| rng.gen_range(lo..=hi) as f64;
    let c = (0..n).map(|_| int(-5, 5)).collect();
    let g = (0..m)
        .map(|_| (0..n).map(|_| int(-5, 5)).collect())
        .collect();
    let h = (0..m).map(|_| int(-4, 10)).collect();
    (c, g, h)
}

pub fn build_lp(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> LinearProgram {
    LinearProgram::new(
        Vector::new(c.to_vec()).unwrap(),
        Matrix::from_rows(g).unwrap(),
        Vector::new(h.to_vec()).unwrap(),
    )
    .unwrap()
}
