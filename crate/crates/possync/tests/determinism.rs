use std::fs;

use possync::commands::{cmd_simulate, cmd_simulate_batch};
use possync::scenario::LoadedScenario;

fn small_paper() -> LoadedScenario {
    let mut loaded = LoadedScenario::load("paper-d7").unwrap();
    loaded.scenario.sim.t_end = 3.0;
    loaded
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = small_paper();
    for run in ["a", "b"] {
        cmd_simulate(&loaded, &dir.path().join(run), &mut Vec::new()).unwrap();
    }
    for artifact in ["trajectory.csv", "metrics.json", "summary.json"] {
        let a = fs::read(dir.path().join("a").join(artifact)).unwrap();
        let b = fs::read(dir.path().join("b").join(artifact)).unwrap();
        assert!(a == b, "{artifact} differs between identical runs");
    }
}

#[test]
fn batch_runs_match_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = small_paper();
    let batch =
        cmd_simulate_batch(&loaded, &dir.path().join("batch"), 40, 3, &mut Vec::new()).unwrap();
    assert_eq!(batch.seeds, vec![40, 41, 42]);
    let single = LoadedScenario {
        scenario: loaded.scenario.clone().with_seed(41),
        ..loaded.clone()
    };
    cmd_simulate(&single, &dir.path().join("single"), &mut Vec::new()).unwrap();
    for artifact in ["trajectory.csv", "metrics.json"] {
        let a = fs::read(dir.path().join("batch/seed-41").join(artifact)).unwrap();
        let b = fs::read(dir.path().join("single").join(artifact)).unwrap();
        assert!(a == b, "{artifact} differs between batch and single run");
    }
}
