//! The `check`, `solve`, `simulate` and `bounds` commands.
//!
//! Each command writes a human-readable report to the supplied writer and
//! returns whether every verdict it was asked for holds.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use possync_core::graph::{anderson_morley_bound, in_family, spectral_summary, CONNECTIVITY_TOL};
use possync_core::protocol::{
    self, shifted_state_matrix, validate_protocol, Positivity, ProtocolCertificate,
};
use possync_core::regulator::{
    self, check_alpha_condition, check_e_stabilizable, compute_alpha, VERIFY_TOL,
};
use possync_core::sim::{compute_metrics, input_bound_excess, simulate};
use possync_core::{Graph, ProtocolConfig};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::edgelist;
use crate::output::{to_json, trajectory_csv, MetricsJson};
use crate::scenario::{LoadedScenario, Scenario};

/// Lowest admissible state entry during simulation.
pub const MIN_COORDINATE_TOL: f64 = -1e-7;
/// Slack on `|uᵢ| ≤ E|ζᵢ|` for round-off in `ρ · (E/ρ)`.
pub const INPUT_BOUND_TOL: f64 = 1e-9;
const CERTIFY_TOL: f64 = 1e-9;

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn positivity_label(p: Positivity) -> String {
    match p {
        Positivity::Guaranteed => "guaranteed (BK >= 0)".into(),
        Positivity::Violated { row, col } => format!("violated: (BK)[{row}][{col}] < 0"),
    }
}

/// Outcome of the hypothesis checks.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub a_metzler: bool,
    pub e_stabilizable: bool,
    pub alpha: f64,
    pub alpha_condition: bool,
    pub rho: f64,
    pub rho_condition: bool,
    pub shifted_metzler: bool,
    /// `None` when the regulator could not be solved.
    pub positivity_guaranteed: Option<bool>,
}

impl CheckReport {
    pub fn all_hold(&self) -> bool {
        self.a_metzler
            && self.e_stabilizable
            && self.alpha_condition
            && self.rho_condition
            && self.shifted_metzler
            && self.positivity_guaranteed == Some(true)
    }
}

pub fn cmd_check(loaded: &LoadedScenario, w: &mut dyn Write) -> Result<CheckReport> {
    let scn = &loaded.scenario;
    let dyn_ = scn.dynamics()?;
    let (beta, gamma, rho) = (scn.protocol.beta, scn.protocol.gamma, scn.protocol.rho());
    let scaled = dyn_.with_bound_scaled(rho)?;

    let a_metzler = dyn_.a().is_metzler(0.0)?;
    let e_stabilizable = check_e_stabilizable(&scaled)?;
    let alpha = compute_alpha(&dyn_, rho)?;
    let alpha_condition = check_alpha_condition(alpha, beta, gamma)?;
    let rho_condition = rho >= 1.0 / beta;
    let positivity = match ProtocolConfig::design(&dyn_, beta, gamma, Some(rho), VERIFY_TOL) {
        Ok(cfg) => {
            let shifted = shifted_state_matrix(&dyn_, &cfg)?;
            Ok((
                shifted.is_metzler(0.0)?,
                protocol::check_positivity(&dyn_, &cfg, 0.0),
            ))
        }
        Err(e) => Err(e),
    };

    writeln!(w, "scenario: {}", loaded.origin)?;
    writeln!(w, "{} A is Metzler", verdict(a_metzler))?;
    writeln!(
        w,
        "{} (A, B) is E~-stabilizable with E~ = E/rho",
        verdict(e_stabilizable)
    )?;
    writeln!(
        w,
        "{} alpha = {alpha} >= gamma/beta = {}",
        verdict(alpha_condition),
        gamma / beta
    )?;
    writeln!(
        w,
        "{} rho = {rho} >= 1/beta = {}",
        verdict(rho_condition),
        1.0 / beta
    )?;
    let (shifted_metzler, positivity_guaranteed) = match positivity {
        Ok((shifted, pos)) => {
            writeln!(w, "{} A - gamma*rho*|B|*E~ is Metzler", verdict(shifted))?;
            let guaranteed = pos == Positivity::Guaranteed;
            writeln!(
                w,
                "{} positivity {}",
                verdict(guaranteed),
                positivity_label(pos)
            )?;
            (shifted, Some(guaranteed))
        }
        Err(e) => {
            let shifted = {
                let bound = dyn_.b().abs().matmul(scaled.e())?;
                dyn_.a().sub(&bound.scale(gamma * rho))?.is_metzler(0.0)?
            };
            writeln!(w, "{} A - gamma*rho*|B|*E~ is Metzler", verdict(shifted))?;
            writeln!(w, "FAIL positivity unavailable: {e}")?;
            (shifted, None)
        }
    };
    let report = CheckReport {
        a_metzler,
        e_stabilizable,
        alpha,
        alpha_condition,
        rho,
        rho_condition,
        shifted_metzler,
        positivity_guaranteed,
    };
    writeln!(
        w,
        "{}",
        if report.all_hold() {
            "all hypotheses hold"
        } else {
            "some hypotheses fail"
        }
    )?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub p: Vec<f64>,
    pub zeta: Vec<f64>,
    pub k: Vec<Vec<f64>>,
    pub signs: Vec<i8>,
    pub residual: f64,
    pub objective: f64,
    pub rho: f64,
    pub k_equals_e_tilde: bool,
}

pub fn cmd_solve(
    loaded: &LoadedScenario,
    out_dir: &Path,
    w: &mut dyn Write,
) -> Result<SolveReport> {
    let scn = &loaded.scenario;
    let rho = scn.protocol.rho();
    let scaled = scn.dynamics()?.with_bound_scaled(rho)?;
    let sol = regulator::solve_regulator(&scaled, VERIFY_TOL)?;
    let report = SolveReport {
        p: sol.p.to_vec(),
        zeta: sol.zeta.to_vec(),
        k: sol.k.to_rows(),
        signs: sol.signs.clone(),
        residual: sol.residual,
        objective: sol.objective,
        rho,
        k_equals_e_tilde: sol.gain_equals_bound(),
    };
    write_artifact(out_dir, "solution.json", &to_json(&report))?;
    writeln!(w, "p = {:?}", report.p)?;
    writeln!(w, "K = {:?}", report.k)?;
    writeln!(w, "residual = {:e}", report.residual)?;
    writeln!(
        w,
        "K = E~: {}",
        if report.k_equals_e_tilde { "yes" } else { "no" }
    )?;
    writeln!(w, "wrote {}", out_dir.join("solution.json").display())?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
struct ModeMargin {
    lambda: f64,
    margin: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CertificateJson {
    modes: Vec<ModeMargin>,
    min_margin: f64,
    direct_defect: f64,
    positivity: String,
    max_degree: Option<f64>,
    degree_within_gamma: Option<bool>,
}

impl From<&ProtocolCertificate> for CertificateJson {
    fn from(c: &ProtocolCertificate) -> Self {
        Self {
            modes: c
                .mode_certificates
                .iter()
                .map(|m| ModeMargin {
                    lambda: m.lambda,
                    margin: m.margin,
                })
                .collect(),
            min_margin: c.min_margin(),
            direct_defect: c.direct_defect,
            positivity: positivity_label(c.positivity),
            max_degree: c.degree_check.map(|d| d.max_degree),
            degree_within_gamma: c.degree_check.map(|d| d.holds()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub certified: bool,
    pub positivity_guaranteed: bool,
    pub min_coordinate_ok: bool,
    pub input_bound_ok: bool,
}

impl Verdicts {
    pub fn all_hold(&self) -> bool {
        self.certified
            && self.positivity_guaranteed
            && self.min_coordinate_ok
            && self.input_bound_ok
    }
}

#[derive(Debug, Clone, Serialize)]
struct RunSummary<'a> {
    origin: &'a str,
    graph_seed: Option<u64>,
    init_seed: Option<u64>,
    graph_hash: String,
    nodes: usize,
    edges: usize,
    scenario: &'a Scenario,
    rho: f64,
    certificate: CertificateJson,
    verdicts: &'a Verdicts,
    min_coordinate: f64,
    input_bound_excess: f64,
    final_disagreement_ratio: f64,
    half_life: Option<f64>,
}

/// Headline numbers of one simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub graph_seed: Option<u64>,
    pub init_seed: Option<u64>,
    pub verdicts: Verdicts,
    pub min_coordinate: f64,
    pub final_disagreement_ratio: f64,
    pub half_life: Option<f64>,
    pub out_dir: PathBuf,
}

/// SHA-256 of the graph's edge-list serialization.
pub fn graph_hash(g: &Graph) -> String {
    hex::encode(Sha256::digest(edgelist::write(g).as_bytes()))
}

fn run_simulation(loaded: &LoadedScenario, out_dir: &Path) -> Result<SimulateReport> {
    let scn = &loaded.scenario;
    let dyn_ = scn.dynamics()?;
    let p = &scn.protocol;
    let cfg = ProtocolConfig::design(&dyn_, p.beta, p.gamma, Some(p.rho()), VERIFY_TOL)?;
    let validation = validate_protocol(&dyn_, &cfg)?;
    if !validation.is_valid() {
        let reasons: Vec<String> = validation
            .violations
            .iter()
            .map(ToString::to_string)
            .collect();
        bail!("protocol hypotheses fail: {}", reasons.join("; "));
    }
    let g = loaded.graph()?;
    let cert =
        protocol::certify(&dyn_, &cfg, Some(&g), CERTIFY_TOL).context("certification failed")?;

    let traj = simulate(&dyn_, &cfg, &g, &scn.sim_config())?;
    let metrics = compute_metrics(&dyn_, &traj)?;
    let excess = input_bound_excess(&dyn_, &cfg, &g, &traj)?;
    let min_coordinate = metrics
        .min_coordinate
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let verdicts = Verdicts {
        certified: true,
        positivity_guaranteed: cert.positivity == Positivity::Guaranteed,
        min_coordinate_ok: min_coordinate >= MIN_COORDINATE_TOL,
        input_bound_ok: excess <= INPUT_BOUND_TOL,
    };
    let summary = RunSummary {
        origin: &loaded.origin,
        graph_seed: scn.graph.seed(),
        init_seed: scn.init_seed(),
        graph_hash: graph_hash(&g),
        nodes: g.n(),
        edges: g.num_edges(),
        scenario: scn,
        rho: cfg.rho,
        certificate: CertificateJson::from(&cert),
        verdicts: &verdicts,
        min_coordinate,
        input_bound_excess: excess,
        final_disagreement_ratio: metrics.disagreement_ratio(),
        half_life: metrics.half_life,
    };
    write_artifact(out_dir, "trajectory.csv", &trajectory_csv(&traj))?;
    write_artifact(
        out_dir,
        "metrics.json",
        &to_json(&MetricsJson::from(&metrics)),
    )?;
    write_artifact(out_dir, "summary.json", &to_json(&summary))?;
    Ok(SimulateReport {
        graph_seed: summary.graph_seed,
        init_seed: summary.init_seed,
        min_coordinate,
        final_disagreement_ratio: summary.final_disagreement_ratio,
        half_life: metrics.half_life,
        verdicts,
        out_dir: out_dir.to_path_buf(),
    })
}

fn write_simulate_line(w: &mut dyn Write, r: &SimulateReport) -> std::io::Result<()> {
    let seed = r
        .graph_seed
        .or(r.init_seed)
        .map_or_else(|| "-".to_string(), |s| s.to_string());
    let half = r
        .half_life
        .map_or_else(|| "not reached".to_string(), |h| format!("{h:.3}"));
    writeln!(
        w,
        "{} seed {seed}: disagreement ratio {:.3e}, half-life {half}, min coordinate {:.3e}, output {}",
        verdict(r.verdicts.all_hold()),
        r.final_disagreement_ratio,
        r.min_coordinate,
        r.out_dir.display()
    )
}

pub fn cmd_simulate(
    loaded: &LoadedScenario,
    out_dir: &Path,
    w: &mut dyn Write,
) -> Result<SimulateReport> {
    let report = run_simulation(loaded, out_dir)?;
    write_simulate_line(w, &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub seeds: Vec<u64>,
    pub runs: Vec<SimulateReport>,
    /// Median over runs, counting runs that never halve as `+∞`; `None` when that median is `+∞`.
    pub median_half_life: Option<f64>,
}

impl BatchReport {
    pub fn all_hold(&self) -> bool {
        self.runs.iter().all(|r| r.verdicts.all_hold())
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Runs seeds `base, base + 1, …, base + k − 1` concurrently, each into `out_dir/seed-<s>`.
pub fn cmd_simulate_batch(
    loaded: &LoadedScenario,
    out_dir: &Path,
    base_seed: u64,
    k: usize,
    w: &mut dyn Write,
) -> Result<BatchReport> {
    if k == 0 {
        bail!("--batch needs at least one repetition");
    }
    let seeds: Vec<u64> = (0..k as u64).map(|i| base_seed + i).collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let run = LoadedScenario {
                scenario: loaded.scenario.clone().with_seed(seed),
                ..loaded.clone()
            };
            run_simulation(&run, &out_dir.join(format!("seed-{seed}")))
                .with_context(|| format!("seed {seed}"))
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &runs {
        write_simulate_line(w, r)?;
    }
    let mut halves: Vec<f64> = runs
        .iter()
        .map(|r| r.half_life.unwrap_or(f64::INFINITY))
        .collect();
    let med = median(&mut halves);
    let report = BatchReport {
        seeds,
        runs,
        median_half_life: med.is_finite().then_some(med),
    };
    write_artifact(out_dir, "batch.json", &to_json(&report))?;
    writeln!(
        w,
        "median half-life over {k} runs: {}",
        report
            .median_half_life
            .map_or("not reached".into(), |m| format!("{m:.3}"))
    )?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub nodes: usize,
    pub lambda2: Option<f64>,
    pub lambda_n: f64,
    pub connected: bool,
    pub anderson_morley: Option<f64>,
    pub regular_degree: Option<usize>,
    /// `None` unless both `beta` and `gamma` were supplied.
    pub in_family: Option<bool>,
}

pub fn cmd_bounds(
    g: &Graph,
    family: Option<(f64, f64)>,
    w: &mut dyn Write,
) -> Result<BoundsReport> {
    let summary = spectral_summary(g, CONNECTIVITY_TOL)?;
    let anderson_morley = if g.num_edges() > 0 {
        Some(anderson_morley_bound(g)?)
    } else {
        None
    };
    let in_family = family
        .map(|(beta, gamma)| in_family(g, beta, gamma, CONNECTIVITY_TOL))
        .transpose()?;
    let report = BoundsReport {
        nodes: g.n(),
        lambda2: summary.lambda2,
        lambda_n: summary.lambda_n,
        connected: summary.is_connected,
        anderson_morley,
        regular_degree: g.regular_degree(),
        in_family,
    };
    writeln!(w, "nodes: {}, edges: {}", g.n(), g.num_edges())?;
    match report.lambda2 {
        Some(l2) => writeln!(w, "lambda_2 = {l2}")?,
        None => writeln!(w, "lambda_2 undefined for a single node")?,
    }
    writeln!(w, "lambda_N = {}", report.lambda_n)?;
    writeln!(
        w,
        "connected: {}",
        if report.connected { "yes" } else { "no" }
    )?;
    if let Some(b) = report.anderson_morley {
        writeln!(w, "Anderson-Morley bound = {b}")?;
    }
    if let Some(d) = report.regular_degree {
        writeln!(w, "{d}-regular, 2d = {}", 2 * d)?;
    }
    if let (Some(member), Some((beta, gamma))) = (report.in_family, family) {
        writeln!(
            w,
            "{} spectrum within [beta, gamma] = [{beta}, {gamma}]",
            verdict(member)
        )?;
    }
    Ok(report)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}
