mod support;

use possync_core::graph::gen_random_regular;
use possync_core::protocol::{
    certify_mode, construct_violation_trajectory, direct_certificate_defect,
};
use possync_core::regulator::VERIFY_TOL;
use possync_core::sim::{
    compute_metrics, input_bound_excess, simulate, InitialCondition, SimConfig,
};
use possync_core::{AgentDynamics, Matrix, ProtocolConfig, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::checks::{
    mode_decomposition_error, random_guaranteed, random_violated, simulated_min_coordinate,
    small_graphs,
};
use support::oracles::eig2;

fn paper_agent() -> AgentDynamics {
    AgentDynamics::new(
        Matrix::from_rows(&[&[-2.21, 2.40], &[0.43, -0.44]]).unwrap(),
        Matrix::from_rows(&[&[0.27], &[0.0]]).unwrap(),
        Matrix::from_rows(&[&[0.06, 0.6]]).unwrap(),
        Vector::ones(2),
    )
    .unwrap()
}

fn paper_config() -> ProtocolConfig {
    ProtocolConfig::design(&paper_agent(), 1.0, 13.0, None, VERIFY_TOL).unwrap()
}

#[test]
fn certified_modes_are_hurwitz_by_eigenvalue_oracle() {
    let dyn_ = paper_agent();
    let cfg = paper_config();
    for lambda in [1.0, 2.0, 5.0, 9.5, 13.0] {
        certify_mode(&dyn_, &cfg, lambda, 1e-9).unwrap();
        let mode = cfg.mode_matrix(&dyn_, lambda);
        let eig = eig2([[mode[(0, 0)], mode[(0, 1)]], [mode[(1, 0)], mode[(1, 1)]]]);
        assert!(
            eig.iter().all(|&(re, _)| re < 0.0),
            "lambda = {lambda}: {eig:?}"
        );
    }
}

#[test]
fn direct_certificate_covers_the_whole_interval() {
    let dyn_ = paper_agent();
    let cfg = paper_config();
    let btp: f64 = 0.27 * cfg.regulator.p[0];
    for k in 0..=120 {
        let alpha = 1.0 + 12.0 * k as f64 / 120.0;
        assert!(direct_certificate_defect(&dyn_, &cfg, alpha).unwrap() <= 1e-9);
        let lhs = cfg
            .mode_matrix(&dyn_, alpha)
            .transpose()
            .matvec(&cfg.regulator.p)
            .unwrap();
        // (1 − α)Ẽᵀ|Bᵀp| − s ≤ −s
        for (l, e) in lhs.iter().zip(dyn_.e().as_slice()) {
            assert!(*l <= -1.0 + 1e-9);
            assert!((l - ((1.0 - alpha) * e * btp - 1.0)).abs() <= 1e-9);
        }
    }
}

#[test]
fn mode_decomposition_on_small_graphs() {
    let dyn_ = paper_agent();
    let cfg = paper_config();
    for (idx, (name, g)) in small_graphs().into_iter().enumerate() {
        let sim = SimConfig {
            t_end: 5.0,
            dt: 1e-3,
            output_stride: 100,
            init: InitialCondition::Random {
                scale: 5.0,
                seed: idx as u64,
            },
        };
        let (mode_err, zero_err) = mode_decomposition_error(&dyn_, &cfg, &g, &sim);
        assert!(
            mode_err <= 1e-6,
            "{name}: nonzero modes off by {mode_err:e}"
        );
        assert!(zero_err <= 1e-6, "{name}: zero mode off by {zero_err:e}");
    }
}

#[test]
fn synchronized_states_stay_synchronized() {
    let dyn_ = paper_agent();
    let cfg = paper_config();
    let g = gen_random_regular(12, 5, 3).unwrap();
    let sim = SimConfig {
        t_end: 5.0,
        dt: 1e-3,
        output_stride: 50,
        init: InitialCondition::Explicit(vec![vec![0.7, 3.1]; 12]),
    };
    let traj = simulate(&dyn_, &cfg, &g, &sim).unwrap();
    let metrics = compute_metrics(&dyn_, &traj).unwrap();
    assert!(metrics.disagreement.iter().all(|&d| d <= 1e-10));
}

#[test]
fn positivity_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for trial in 0..60 {
        let (dyn_, cfg, g) = random_guaranteed(&mut rng);
        for (seed, t_end) in [(trial, 1.0), (trial + 1000, 3.0)] {
            let min = simulated_min_coordinate(&dyn_, &cfg, &g, seed, t_end);
            assert!(min >= -1e-7, "trial {trial}: min coordinate {min}");
        }
    }
}

#[test]
fn positivity_completeness() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..40 {
        let (dyn_, cfg, g, (row, col)) = random_violated(&mut rng);
        let w = construct_violation_trajectory(&dyn_, &cfg, &g, row, col)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        assert!(w.x0.iter().all(|&v| v >= 0.0));
        assert!(w.initial_derivative < 0.0);
    }
}

#[test]
fn inputs_respect_the_proportional_bound() {
    let dyn_ = paper_agent();
    let cfg = paper_config();
    for seed in 0..4 {
        let g = gen_random_regular(20, 5, seed).unwrap();
        let sim = SimConfig {
            t_end: 5.0,
            dt: 1e-3,
            output_stride: 50,
            init: InitialCondition::Random { scale: 5.0, seed },
        };
        let traj = simulate(&dyn_, &cfg, &g, &sim).unwrap();
        assert!(input_bound_excess(&dyn_, &cfg, &g, &traj).unwrap() <= 1e-12);
        let metrics = compute_metrics(&dyn_, &traj).unwrap();
        assert!(metrics.min_coordinate.iter().all(|&v| v >= -1e-7));
    }
}
