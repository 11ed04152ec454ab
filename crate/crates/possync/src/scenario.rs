//! Scenario files: TOML documents describing one certify-then-simulate run.
//!
//! ```toml
//! [dynamics]
//! a = [[-2.21, 2.40], [0.43, -0.44]]
//! b = [[0.27], [0.0]]
//! e = [[0.06, 0.6]]
//! s = [1.0, 1.0]
//!
//! [protocol]
//! beta = 1.0
//! gamma = 13.0
//! # rho defaults to 1/beta
//!
//! [graph]
//! kind = "random_regular"   # complete | path | cycle | random_regular | erdos_renyi | file
//! n = 150
//! d = 5
//! seed = 1
//!
//! [sim]
//! t_end = 20.0
//! dt = 1e-3
//! output_stride = 100
//! init = { kind = "random", scale = 5.0, seed = 7 }
//!
//! [outputs]
//! dir = "out"
//! ```

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use possync_core::graph::{gen_complete, gen_cycle, gen_erdos_renyi, gen_path, gen_random_regular};
use possync_core::sim::{InitialCondition, SimConfig};
use possync_core::{AgentDynamics, Graph, Matrix, Vector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edgelist;

const PRESETS: &[(&str, &str)] = &[
    ("paper-d5", include_str!("../scenarios/paper-d5.toml")),
    ("paper-d7", include_str!("../scenarios/paper-d7.toml")),
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: {source}")]
    Parse {
        origin: String,
        source: Box<toml::de::Error>,
    },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("{origin}: {message}")]
    EdgeList { origin: String, message: String },
}

fn field_error(field: impl Into<String>, message: impl Display) -> ScenarioError {
    ScenarioError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub dynamics: DynamicsSpec,
    pub protocol: ProtocolSpec,
    pub graph: GraphSpec,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub beta: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl ProtocolSpec {
    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(1.0 / self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Complete {
        n: usize,
    },
    Path {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    RandomRegular {
        n: usize,
        d: usize,
        seed: u64,
    },
    ErdosRenyi {
        n: usize,
        p_edge: f64,
        seed: u64,
    },
    /// Edge-list file, relative paths resolve against the scenario's directory.
    File {
        path: PathBuf,
    },
}

impl GraphSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            GraphSpec::RandomRegular { seed, .. } | GraphSpec::ErdosRenyi { seed, .. } => {
                Some(*seed)
            }
            _ => None,
        }
    }

    fn set_seed(&mut self, new: u64) {
        if let GraphSpec::RandomRegular { seed, .. } | GraphSpec::ErdosRenyi { seed, .. } = self {
            *seed = new;
        }
    }

    /// Node count when known without reading a file.
    pub fn nodes(&self) -> Option<usize> {
        match self {
            GraphSpec::Complete { n }
            | GraphSpec::Path { n }
            | GraphSpec::Cycle { n }
            | GraphSpec::RandomRegular { n, .. }
            | GraphSpec::ErdosRenyi { n, .. } => Some(*n),
            GraphSpec::File { .. } => None,
        }
    }

    pub fn build(&self, base_dir: &Path) -> Result<Graph, ScenarioError> {
        let gen = |r: possync_core::Result<Graph>| r.map_err(|e| field_error("graph", e));
        match self {
            // a single agent has no neighbours; K₁ is the only connected graph on one node
            GraphSpec::Complete { n: 1 } => gen(Graph::unit(1, [])),
            GraphSpec::Complete { n } => gen(gen_complete(*n)),
            GraphSpec::Path { n } => gen(gen_path(*n)),
            GraphSpec::Cycle { n } => gen(gen_cycle(*n)),
            GraphSpec::RandomRegular { n, d, seed } => gen(gen_random_regular(*n, *d, *seed)),
            GraphSpec::ErdosRenyi { n, p_edge, seed } => gen(gen_erdos_renyi(*n, *p_edge, *seed)),
            GraphSpec::File { path } => {
                let full = base_dir.join(path);
                let text = fs::read_to_string(&full).map_err(|source| ScenarioError::Io {
                    path: full.clone(),
                    source,
                })?;
                edgelist::parse(&text).map_err(|e| ScenarioError::EdgeList {
                    origin: full.display().to_string(),
                    message: e.to_string(),
                })
            }
        }
    }

    /// Parses the inline form `kind:key=value,...`, e.g. `random_regular:n=150,d=5,seed=1`.
    pub fn parse_inline(spec: &str) -> Result<Self, ScenarioError> {
        let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
        let mut doc = format!("kind = {kind:?}\n");
        for pair in args.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                field_error("graph", format!("expected key=value, found {pair:?}"))
            })?;
            let value = if key.trim() == "path" {
                format!("{:?}", value.trim())
            } else {
                value.trim().to_string()
            };
            doc.push_str(&format!("{} = {value}\n", key.trim()));
        }
        toml::from_str(&doc).map_err(|e| field_error("graph", e.message()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default)]
    pub init: InitSpec,
}

fn default_t_end() -> f64 {
    20.0
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    100
}

fn default_scale() -> f64 {
    5.0
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
            dt: default_dt(),
            output_stride: default_stride(),
            init: InitSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Random {
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default)]
        seed: u64,
    },
    Explicit {
        states: Vec<Vec<f64>>,
    },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Random {
            scale: default_scale(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// A validated scenario together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub base_dir: PathBuf,
    pub origin: String,
}

impl LoadedScenario {
    /// Reads `name_or_path` from disk, or falls back to a built-in preset of that name.
    pub fn load(name_or_path: &str) -> Result<Self, ScenarioError> {
        let path = Path::new(name_or_path);
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
                path: path.into(),
                source,
            })?;
            let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            return Self::from_toml(&text, base_dir, path.display().to_string());
        }
        match PRESETS.iter().find(|(name, _)| *name == name_or_path) {
            Some((name, text)) => {
                Self::from_toml(text, PathBuf::from("."), format!("preset {name}"))
            }
            None => Err(ScenarioError::Io {
                path: path.into(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or preset"),
            }),
        }
    }

    pub fn from_toml(text: &str, base_dir: PathBuf, origin: String) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            origin: origin.clone(),
            source: Box::new(e),
        })?;
        scenario.validate()?;
        Ok(Self {
            scenario,
            base_dir,
            origin,
        })
    }

    pub fn graph(&self) -> Result<Graph, ScenarioError> {
        let g = self.scenario.graph.build(&self.base_dir)?;
        if let InitSpec::Explicit { states } = &self.scenario.sim.init {
            if states.len() != g.n() {
                return Err(field_error(
                    "sim.init.states",
                    format!("expected {} agent states, found {}", g.n(), states.len()),
                ));
            }
        }
        Ok(g)
    }
}

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

impl Scenario {
    /// Replaces the graph and initial-condition seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.graph.set_seed(seed);
        if let InitSpec::Random { seed: s, .. } = &mut self.sim.init {
            *s = seed;
        }
        self
    }

    pub fn init_seed(&self) -> Option<u64> {
        match self.sim.init {
            InitSpec::Random { seed, .. } => Some(seed),
            InitSpec::Explicit { .. } => None,
        }
    }

    /// Checks every shape and sign constraint, naming the first offending field.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let d = &self.dynamics;
        let n = d.a.len();
        if n == 0 {
            return Err(field_error(
                "dynamics.a",
                "state matrix must have at least one row",
            ));
        }
        check_rows("dynamics.a", &d.a, n)?;
        for (i, row) in d.a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j && v < 0.0 {
                    return Err(field_error(
                        format!("dynamics.a[{i}][{j}]"),
                        format!("off-diagonal entry {v} is negative, A must be Metzler"),
                    ));
                }
            }
        }
        if d.b.len() != n {
            return Err(field_error(
                "dynamics.b",
                format!("expected {n} rows to match A, found {}", d.b.len()),
            ));
        }
        let m = d.b[0].len();
        if m == 0 {
            return Err(field_error(
                "dynamics.b[0]",
                "input matrix needs at least one column",
            ));
        }
        check_rows("dynamics.b", &d.b, m)?;
        if d.e.len() != m {
            return Err(field_error(
                "dynamics.e",
                format!(
                    "expected {m} rows to match B's columns, found {}",
                    d.e.len()
                ),
            ));
        }
        check_rows("dynamics.e", &d.e, n)?;
        for (i, row) in d.e.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(field_error(
                        format!("dynamics.e[{i}][{j}]"),
                        format!("entry {v} is negative, E must be nonnegative"),
                    ));
                }
            }
        }
        if d.s.len() != n {
            return Err(field_error(
                "dynamics.s",
                format!("expected {n} entries, found {}", d.s.len()),
            ));
        }
        for (i, &v) in d.s.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_error(
                    format!("dynamics.s[{i}]"),
                    format!("cost weight {v} must be positive"),
                ));
            }
        }

        let p = &self.protocol;
        if !(p.beta > 0.0 && p.beta.is_finite()) {
            return Err(field_error(
                "protocol.beta",
                format!("{} must be positive", p.beta),
            ));
        }
        if !(p.gamma >= p.beta && p.gamma.is_finite()) {
            return Err(field_error(
                "protocol.gamma",
                format!("{} must be at least beta = {}", p.gamma, p.beta),
            ));
        }
        if let Some(rho) = p.rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(field_error(
                    "protocol.rho",
                    format!("{rho} must be positive"),
                ));
            }
        }

        match &self.graph {
            GraphSpec::Complete { n: 0 } | GraphSpec::Path { n: 0..=1 } => {
                return Err(field_error("graph.n", "too few nodes for this graph kind"));
            }
            GraphSpec::Cycle { n: 0..=2 } => {
                return Err(field_error("graph.n", "a cycle needs at least 3 nodes"))
            }
            GraphSpec::RandomRegular { n, d, .. } if *d == 0 || d >= n || (n * d) % 2 != 0 => {
                return Err(field_error(
                    "graph.d",
                    format!("need 0 < d < n and n*d even, got n = {n}, d = {d}"),
                ));
            }
            GraphSpec::ErdosRenyi { p_edge, .. } if !(*p_edge > 0.0 && *p_edge <= 1.0) => {
                return Err(field_error(
                    "graph.p_edge",
                    format!("{p_edge} must lie in (0, 1]"),
                ));
            }
            _ => {}
        }

        let s = &self.sim;
        if !(s.dt > 0.0 && s.t_end.is_finite() && s.dt <= s.t_end) {
            return Err(field_error(
                "sim.dt",
                format!(
                    "need 0 < dt <= t_end, got dt = {}, t_end = {}",
                    s.dt, s.t_end
                ),
            ));
        }
        if s.output_stride == 0 {
            return Err(field_error("sim.output_stride", "must be at least 1"));
        }
        match &s.init {
            InitSpec::Random { scale, .. } if !(*scale > 0.0 && scale.is_finite()) => {
                return Err(field_error(
                    "sim.init.scale",
                    format!("{scale} must be positive"),
                ));
            }
            InitSpec::Explicit { states } => {
                if let Some(agents) = self.graph.nodes() {
                    if states.len() != agents {
                        return Err(field_error(
                            "sim.init.states",
                            format!("expected {agents} agent states, found {}", states.len()),
                        ));
                    }
                }
                for (i, state) in states.iter().enumerate() {
                    if state.len() != n {
                        return Err(field_error(
                            format!("sim.init.states[{i}]"),
                            format!("expected {n} entries, found {}", state.len()),
                        ));
                    }
                    if let Some(k) = state.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
                        return Err(field_error(
                            format!("sim.init.states[{i}][{k}]"),
                            "initial states must be nonnegative",
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn dynamics(&self) -> Result<AgentDynamics, ScenarioError> {
        let d = &self.dynamics;
        let build = || -> possync_core::Result<AgentDynamics> {
            AgentDynamics::new(
                Matrix::from_rows(&d.a)?,
                Matrix::from_rows(&d.b)?,
                Matrix::from_rows(&d.e)?,
                Vector::new(d.s.clone())?,
            )
        };
        build().map_err(|e| field_error("dynamics", e))
    }

    pub fn sim_config(&self) -> SimConfig {
        let init = match &self.sim.init {
            InitSpec::Random { scale, seed } => InitialCondition::Random {
                scale: *scale,
                seed: *seed,
            },
            InitSpec::Explicit { states } => InitialCondition::Explicit(states.clone()),
        };
        SimConfig {
            t_end: self.sim.t_end,
            dt: self.sim.dt,
            output_stride: self.sim.output_stride,
            init,
        }
    }
}

fn check_rows(field: &str, rows: &[Vec<f64>], width: usize) -> Result<(), ScenarioError> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(field_error(
                format!("{field}[{i}]"),
                format!("expected {width} entries, found {}", row.len()),
            ));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(field_error(
                format!("{field}[{i}][{j}]"),
                "entry is not finite",
            ));
        }
    }
    Ok(())
}
