//! Scenario files: a TOML description of one formation problem.
//!
//! A scenario names the nominal shape, the leader set, each follower's
//! neighbor pair, how the run starts, how the leaders move, and optional
//! per-follower weight overrides and tolerance overrides. Unknown fields
//! are rejected so typos surface instead of silently using defaults.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DVector, Vector2};
use serde::Deserialize;

use simform::{FormationGraph, NodeId, NominalConfiguration};

use crate::error::{RunError, RunResult};

/// Seed used by random initial placement when the scenario does not pick
/// one, so the bundled scenarios reproduce exactly out of the box.
pub const DEFAULT_SEED: u64 = 42;

fn default_horizon() -> f64 {
    30.0
}

fn default_dt() -> f64 {
    0.01
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    nominal: Vec<[f64; 2]>,
    leaders: Vec<usize>,
    followers: BTreeMap<String, Vec<usize>>,
    #[serde(default = "default_horizon")]
    horizon: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default)]
    initial: InitialSpec,
    #[serde(default)]
    schedule: ScheduleSpec,
    #[serde(default)]
    weights: BTreeMap<String, WeightSpec>,
    #[serde(default)]
    tolerances: ToleranceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "mode", rename_all = "lowercase")]
pub enum InitialSpec {
    /// Leaders start on their nominal points; followers spawn uniformly in
    /// [-5, 5)² from the seed.
    Random { seed: Option<u64> },
    /// Every node starts exactly where listed, one point per node id.
    Explicit { positions: Vec<[f64; 2]> },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Random { seed: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "mode", rename_all = "lowercase")]
pub enum ScheduleSpec {
    /// Leaders hold their initial positions.
    Static,
    /// Leaders sweep through keyframed similarity poses.
    Parameterized { keyframes: Vec<KeyframeSpec> },
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec::Static
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeSpec {
    pub t: f64,
    pub alpha: f64,
    pub theta: f64,
    pub b: [f64; 2],
}

/// Per-follower weight override: either the free parameters of the weight
/// family or three raw 2×2 blocks, never both.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub params: Option<[f64; 2]>,
    pub blocks: Option<BlockSpec>,
}

/// Raw blocks in row-major 2×2 layout; `first` and `second` follow the
/// follower's neighbor order as listed in the scenario.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub first: [[f64; 2]; 2],
    pub second: [[f64; 2]; 2],
    pub diagonal: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Distance below which two nominal points count as collocated.
    pub collocation: Option<f64>,
    /// Relative residual above which initial leaders are rejected as
    /// incompatible with any similar pose of the shape.
    pub feasibility: Option<f64>,
}

/// A parsed and structurally coherent scenario, ready for the pipeline.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub nominal: NominalConfiguration,
    pub graph: FormationGraph,
    /// Neighbors of each follower in the order the scenario listed them.
    /// Topology validation, not parsing, enforces that each list has
    /// exactly two entries.
    pub neighbor_lists: BTreeMap<NodeId, Vec<NodeId>>,
    pub horizon: f64,
    pub dt: f64,
    pub initial: InitialSpec,
    pub schedule: ScheduleSpec,
    pub weights: BTreeMap<NodeId, WeightSpec>,
    pub tolerances: ToleranceSpec,
}

impl Scenario {
    /// The seed a random-start run will use, if any.
    pub fn seed(&self) -> Option<u64> {
        match self.initial {
            InitialSpec::Random { seed } => Some(seed.unwrap_or(DEFAULT_SEED)),
            InitialSpec::Explicit { .. } => None,
        }
    }
}

pub fn load_scenario(path: &Path) -> RunResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> RunResult<Scenario> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| RunError::Input(format!("scenario parse error: {e}")))?;
    let input = |msg: String| RunError::Input(msg);

    let n = file.nominal.len();
    let nominal = NominalConfiguration::from_rows(&file.nominal)
        .map_err(|e| input(format!("nominal configuration: {e}")))?;

    let mut neighbor_lists = BTreeMap::new();
    let mut edges = Vec::new();
    for (key, listed) in &file.followers {
        let f: usize = key
            .parse()
            .map_err(|_| input(format!("follower key '{key}' is not a node id")))?;
        if f < 1 || f > n {
            return Err(input(format!(
                "follower {f} is out of range for {n} nodes"
            )));
        }
        if file.leaders.contains(&f) {
            return Err(input(format!(
                "node {f} is a leader; leaders take no measurements"
            )));
        }
        let mut neighbors = Vec::new();
        for &nb in listed {
            if !(1..=n).contains(&nb) {
                return Err(input(format!(
                    "follower {f} lists neighbor {nb}, outside 1..={n}"
                )));
            }
            let nb = NodeId::new(nb);
            if neighbors.contains(&nb) {
                return Err(input(format!(
                    "follower {f} lists neighbor {nb} more than once"
                )));
            }
            neighbors.push(nb);
            edges.push((f, nb.get()));
        }
        neighbor_lists.insert(NodeId::new(f), neighbors);
    }

    let graph = FormationGraph::new(n, &file.leaders, edges)
        .map_err(|e| input(format!("sensing graph: {e}")))?;
    if let Some(missing) = graph
        .followers()
        .into_iter()
        .find(|f| !neighbor_lists.contains_key(f))
    {
        return Err(input(format!(
            "follower {missing} has no neighbor entry in [followers]"
        )));
    }

    let mut weights = BTreeMap::new();
    for (key, spec) in file.weights {
        let f: usize = key
            .parse()
            .map_err(|_| input(format!("weight key '{key}' is not a node id")))?;
        if f < 1 || f > n || !neighbor_lists.contains_key(&NodeId::new(f)) {
            return Err(input(format!(
                "weight override for {f}, which is not a follower"
            )));
        }
        let id = NodeId::new(f);
        match (&spec.params, &spec.blocks) {
            (Some(_), Some(_)) => {
                return Err(input(format!(
                    "weight override for follower {f} sets both params and blocks"
                )))
            }
            (None, None) => {
                return Err(input(format!(
                    "weight override for follower {f} sets neither params nor blocks"
                )))
            }
            _ => {}
        }
        weights.insert(id, spec);
    }

    if let InitialSpec::Explicit { positions } = &file.initial {
        if positions.len() != n {
            return Err(input(format!(
                "explicit initial positions list {} points for {n} nodes",
                positions.len()
            )));
        }
    }
    if !(file.dt > 0.0) || !file.dt.is_finite() {
        return Err(input(format!("dt must be positive, got {}", file.dt)));
    }
    if !(file.horizon >= 0.0) || !file.horizon.is_finite() {
        return Err(input(format!(
            "horizon must be nonnegative, got {}",
            file.horizon
        )));
    }

    Ok(Scenario {
        name: file.name,
        nominal,
        graph,
        neighbor_lists,
        horizon: file.horizon,
        dt: file.dt,
        initial: file.initial,
        schedule: file.schedule,
        weights,
        tolerances: file.tolerances,
    })
}

/// Initial full configuration of a scenario, stacked in node order.
pub fn initial_state(scenario: &Scenario) -> DVector<f64> {
    match &scenario.initial {
        InitialSpec::Explicit { positions } => {
            let points: Vec<Vector2<f64>> =
                positions.iter().map(|&[x, y]| Vector2::new(x, y)).collect();
            simform::stack_points(&points)
        }
        InitialSpec::Random { seed } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let mut points: Vec<Vector2<f64>> = scenario.nominal.points().to_vec();
            let spawned = simform::random_follower_positions(
                seed,
                scenario.graph.follower_count(),
            );
            for (follower, p) in scenario.graph.followers().into_iter().zip(spawned) {
                points[follower.get() - 1] = p;
            }
            simform::stack_points(&points)
        }
    }
}
