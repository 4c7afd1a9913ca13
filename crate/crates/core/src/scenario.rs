//! Scenario configuration and its TOML file format.
//!
//! ```toml
//! version = 1
//! graph = "fifteen.graph"      # or an inline [graph] table
//! hops = 3
//! f = 2
//! order = "first"              # or "second"
//! leaders = "secure"           # or "insecure"
//! steps = 10000
//! seed = 7
//!
//! [params]
//! period = 0.01
//! alpha = 1.0
//! theta = 6.0
//! eps = 0.1
//! sigma_bar = 1.0
//!
//! [[axis]]
//! name = "x"
//! leader_position = 40.0
//! initial_range = [0.0, 30.0]
//! leader_input = { terms = [{ wave = "cos", amplitude = 3.0, frequency = 1.0 }] }
//!
//! [[axis.adversary]]
//! node = 8
//! kind = "oscillate"
//! base = 15.0
//! amplitude = 1.0
//! period = 20.0
//! ```

use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::adversary::{Adversary, AdversaryAssignment, AdversaryError, RelayMode, Strategy};
use crate::digraph::{Digraph, GraphError};
use crate::dynamics::{
    build_update_rule, check_schedule_first, check_schedule_second, peak_speed_second, validate_first,
    validate_second, DynamicsError, FirstOrderParams, InputSchedule, LeaderMode, Order, SecondOrderParams,
    Violation,
};
use crate::nodeset::NodeSet;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("unsupported scenario version {0}")]
    Version(u32),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Invalid(String),
    #[error("parameter constraints violated for node {node} on axis {axis}: {}", list(.violations))]
    Params {
        node: usize,
        axis: String,
        violations: Vec<Violation>,
    },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Per-node gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGains {
    pub alpha: f64,
    pub theta: f64,
    pub sigma_bar: f64,
}

/// One coordinate axis of a run. Axes share the graph and gains but have
/// their own leader input, offsets, initial states and adversaries.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisConfig {
    pub name: String,
    pub leader_input: InputSchedule,
    pub leader_position: f64,
    pub leader_velocity: f64,
    /// Explicit leader speed bound; derived from the schedule when absent.
    pub v_bar_d: Option<f64>,
    /// Initial positions, one per node. Leader entries are ignored.
    pub initial: Vec<f64>,
    /// Formation offsets, one per node.
    pub rho: Vec<f64>,
    pub adversaries: AdversaryAssignment,
    /// Disturbance stream id, kept when an axis is run on its own.
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub graph: Digraph,
    pub hops: usize,
    pub f: usize,
    pub order: Order,
    pub mode: LeaderMode,
    pub period: f64,
    pub eps: f64,
    /// Velocity damping; unused for first-order runs.
    pub beta: f64,
    pub gains: Vec<NodeGains>,
    pub axes: Vec<AxisConfig>,
    pub steps: usize,
    pub seed: u64,
    /// Skip the f-locality check on adversaries (for necessity demos).
    pub allow_non_local: bool,
}

impl ScenarioConfig {
    /// Leader speed bound on `axis`.
    pub fn v_bar_d(&self, axis: usize) -> f64 {
        let a = &self.axes[axis];
        a.v_bar_d.unwrap_or_else(|| match self.order {
            Order::First => a.leader_input.abs_bound(),
            Order::Second => peak_speed_second(&a.leader_input, self.period, a.leader_velocity, self.steps),
        })
    }

    pub fn first_params(&self, node: usize, axis: usize) -> FirstOrderParams {
        let g = self.gains[node];
        FirstOrderParams {
            period: self.period,
            alpha: g.alpha,
            theta: g.theta,
            eps: self.eps,
            sigma_bar: g.sigma_bar,
            v_bar_d: self.v_bar_d(axis),
        }
    }

    pub fn second_params(&self, node: usize, axis: usize) -> SecondOrderParams {
        SecondOrderParams {
            base: self.first_params(node, axis),
            beta: self.beta,
        }
    }

    /// Followers that are not adversarial on any axis.
    pub fn normal_followers(&self) -> NodeSet {
        let bad = self
            .axes
            .iter()
            .fold(NodeSet::empty(), |acc, a| acc.union(a.adversaries.set()));
        self.graph.followers().difference(bad)
    }

    /// Leaders that are not adversarial on any axis.
    pub fn normal_leaders(&self) -> NodeSet {
        let bad = self
            .axes
            .iter()
            .fold(NodeSet::empty(), |acc, a| acc.union(a.adversaries.set()));
        self.graph.leaders().difference(bad)
    }

    /// Checks every invariant the engine relies on.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.graph.n();
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.hops == 0 {
            return bad("hops must be at least 1".into());
        }
        if self.axes.is_empty() {
            return bad("at least one axis is required".into());
        }
        if self.gains.len() != n {
            return bad(format!("expected {n} gain entries, found {}", self.gains.len()));
        }
        build_update_rule(&self.graph, self.mode, self.order)?;
        if self.normal_leaders().is_empty() {
            return bad("every leader is adversarial".into());
        }
        for (ax, a) in self.axes.iter().enumerate() {
            if a.initial.len() != n || a.rho.len() != n {
                return bad(format!("axis {}: initial and rho need {n} entries", a.name));
            }
            if let Some(k) = a.initial.iter().chain(&a.rho).position(|v| !v.is_finite()) {
                return bad(format!("axis {}: non-finite entry {k}", a.name));
            }
            if a.adversaries.set() != self.axes[0].adversaries.set() {
                return bad("every axis must have the same adversarial nodes".into());
            }
            a.adversaries.validate(
                &self.graph,
                self.f,
                self.hops,
                self.mode == LeaderMode::Insecure,
                !self.allow_non_local,
            )?;
            let v_bar = self.v_bar_d(ax);
            match self.order {
                Order::First => check_schedule_first(&a.leader_input, self.period, v_bar, self.steps)?,
                Order::Second => {
                    check_schedule_second(&a.leader_input, self.period, a.leader_velocity, v_bar, self.steps)?
                }
            }
            for node in self.normal_followers() {
                let violations = match self.order {
                    Order::First => validate_first(&self.first_params(node, ax)),
                    Order::Second => validate_second(&self.second_params(node, ax)),
                };
                if !violations.is_empty() {
                    return Err(ScenarioError::Params {
                        node,
                        axis: a.name.clone(),
                        violations,
                    });
                }
            }
        }
        Ok(())
    }

    /// The same scenario restricted to one axis.
    pub fn project(&self, axis: usize) -> ScenarioConfig {
        ScenarioConfig {
            axes: vec![self.axes[axis].clone()],
            ..self.clone()
        }
    }

    /// Parses a scenario; relative graph paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &FsPath) -> Result<Self, ScenarioError> {
        Self::from_toml_seeded(text, base_dir, None)
    }

    /// Like [`ScenarioConfig::from_toml`], with `seed` replacing the file's
    /// seed before initial states are drawn.
    pub fn from_toml_seeded(text: &str, base_dir: &FsPath, seed: Option<u64>) -> Result<Self, ScenarioError> {
        let mut raw: RawScenario = toml::from_str(text)?;
        if let Some(seed) = seed {
            raw.seed = seed;
        }
        raw.build(base_dir)
    }

    pub fn load(path: &FsPath) -> Result<Self, ScenarioError> {
        Self::load_seeded(path, None)
    }

    pub fn load_seeded(path: &FsPath, seed: Option<u64>) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let dir = path.parent().unwrap_or(FsPath::new("."));
        Self::from_toml_seeded(&text, dir, seed)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: u32,
    graph: RawGraph,
    hops: usize,
    f: usize,
    order: Order,
    #[serde(default = "default_mode")]
    leaders: LeaderMode,
    steps: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    allow_non_local: bool,
    params: RawParams,
    axis: Vec<RawAxis>,
}

fn default_mode() -> LeaderMode {
    LeaderMode::Secure
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGraph {
    File(String),
    Inline {
        n: usize,
        leaders: Vec<usize>,
        edges: Vec<[usize; 2]>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    period: f64,
    alpha: f64,
    theta: f64,
    eps: f64,
    #[serde(default)]
    sigma_bar: f64,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default)]
    v_bar_d: Option<f64>,
    #[serde(default)]
    node: Vec<RawNodeParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNodeParams {
    id: usize,
    alpha: Option<f64>,
    theta: Option<f64>,
    sigma_bar: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    name: String,
    #[serde(default)]
    leader_input: InputSchedule,
    #[serde(default)]
    leader_position: f64,
    #[serde(default)]
    leader_velocity: f64,
    #[serde(default)]
    v_bar_d: Option<f64>,
    #[serde(default)]
    initial_range: Option<[f64; 2]>,
    #[serde(default)]
    initial_values: Option<Vec<f64>>,
    /// `[node, value]` pairs applied last.
    #[serde(default)]
    initial_set: Vec<(usize, f64)>,
    #[serde(default)]
    rho: Option<Vec<f64>>,
    #[serde(default)]
    adversary: Vec<RawAdversary>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdversary {
    node: usize,
    #[serde(flatten)]
    strategy: RawStrategy,
    #[serde(default)]
    relay: RawRelay,
    #[serde(default)]
    malicious: bool,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum RawRelay {
    #[default]
    Tamper,
    PassThrough,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    kind: String,
    value: Option<f64>,
    base: Option<f64>,
    amplitude: Option<f64>,
    period: Option<f64>,
    stuck: Option<Vec<usize>>,
    #[serde(default)]
    groups: Vec<RawGroup>,
    #[serde(default)]
    points: Vec<(usize, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    to: Vec<usize>,
    #[serde(flatten)]
    strategy: RawStrategy,
}

impl RawStrategy {
    fn build(&self, n: usize) -> Result<Strategy, ScenarioError> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| ScenarioError::Invalid(format!("strategy `{}` needs `{name}`", self.kind)))
        };
        let ids = |v: &[usize]| -> Result<NodeSet, ScenarioError> {
            match v.iter().find(|&&i| i >= n) {
                Some(&id) => Err(GraphError::InvalidNode { id, n }.into()),
                None => Ok(v.iter().copied().collect()),
            }
        };
        Ok(match self.kind.as_str() {
            "honest" => Strategy::Honest,
            "constant" => Strategy::Constant(need(self.value, "value")?),
            "mirror-leader" => Strategy::MirrorLeader,
            "oscillate" => Strategy::Oscillate {
                base: need(self.base, "base")?,
                amplitude: need(self.amplitude, "amplitude")?,
                period: need(self.period, "period")?,
            },
            "split" => Strategy::SplitByDestination(
                self.groups
                    .iter()
                    .map(|g| Ok((ids(&g.to)?, g.strategy.build(n)?)))
                    .collect::<Result<_, ScenarioError>>()?,
            ),
            "stuck-at" => Strategy::StuckAtPartition {
                stuck: ids(self.stuck.as_deref().unwrap_or_default())?,
                value: need(self.value, "value")?,
            },
            "script" => Strategy::Script(self.points.clone()),
            other => return Err(ScenarioError::Invalid(format!("unknown strategy kind `{other}`"))),
        })
    }
}

impl RawScenario {
    fn build(self, base_dir: &FsPath) -> Result<ScenarioConfig, ScenarioError> {
        if self.version != FORMAT_VERSION {
            return Err(ScenarioError::Version(self.version));
        }
        let graph = match self.graph {
            RawGraph::File(rel) => {
                let path = base_dir.join(&rel);
                let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                Digraph::parse(&text)?
            }
            RawGraph::Inline { n, leaders, edges } => {
                Digraph::new(n, edges.into_iter().map(|[j, i]| (j, i)), leaders)?
            }
        };
        let n = graph.n();
        let p = &self.params;
        let mut gains = vec![
            NodeGains {
                alpha: p.alpha,
                theta: p.theta,
                sigma_bar: p.sigma_bar,
            };
            n
        ];
        for o in &p.node {
            let g = gains
                .get_mut(o.id)
                .ok_or(GraphError::InvalidNode { id: o.id, n })?;
            g.alpha = o.alpha.unwrap_or(g.alpha);
            g.theta = o.theta.unwrap_or(g.theta);
            g.sigma_bar = o.sigma_bar.unwrap_or(g.sigma_bar);
        }
        let beta = match (self.order, p.beta) {
            (Order::Second, None) => {
                return Err(ScenarioError::Invalid("second-order scenarios need `beta`".into()))
            }
            (_, b) => b.unwrap_or(0.0),
        };
        let mut axes = Vec::with_capacity(self.axis.len());
        for (idx, a) in self.axis.into_iter().enumerate() {
            let stream = idx as u64;
            let mut initial = match (&a.initial_values, a.initial_range) {
                (Some(v), None) => v.clone(),
                (None, Some([lo, hi])) => sample_initial(n, lo, hi, self.seed, stream)?,
                (None, None) => vec![0.0; n],
                (Some(_), Some(_)) => {
                    return Err(ScenarioError::Invalid(format!(
                        "axis {}: give initial_values or initial_range, not both",
                        a.name
                    )))
                }
            };
            if initial.len() != n {
                return Err(ScenarioError::Invalid(format!("axis {}: initial_values needs {n} entries", a.name)));
            }
            for &(node, v) in &a.initial_set {
                *initial
                    .get_mut(node)
                    .ok_or(GraphError::InvalidNode { id: node, n })? = v;
            }
            let mut adversaries = AdversaryAssignment::new();
            for adv in &a.adversary {
                let strategy = adv.strategy.build(n)?;
                adversaries.insert(
                    adv.node,
                    Adversary {
                        strategy,
                        relay: match adv.relay {
                            RawRelay::Tamper => RelayMode::Tamper,
                            RawRelay::PassThrough => RelayMode::PassThrough,
                        },
                        malicious: adv.malicious,
                    },
                );
            }
            axes.push(AxisConfig {
                name: a.name,
                leader_input: a.leader_input,
                leader_position: a.leader_position,
                leader_velocity: a.leader_velocity,
                v_bar_d: a.v_bar_d.or(p.v_bar_d),
                initial,
                rho: a.rho.unwrap_or_else(|| vec![0.0; n]),
                adversaries,
                stream,
            });
        }
        let cfg = ScenarioConfig {
            graph,
            hops: self.hops,
            f: self.f,
            order: self.order,
            mode: self.leaders,
            period: p.period,
            eps: p.eps,
            beta,
            gains,
            axes,
            steps: self.steps,
            seed: self.seed,
            allow_non_local: self.allow_non_local,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Uniform draws on `(lo, hi)`, reproducible from the seed and axis.
pub fn sample_initial(n: usize, lo: f64, hi: f64, seed: u64, stream: u64) -> Result<Vec<f64>, ScenarioError> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(ScenarioError::Invalid(format!("bad initial range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - stream);
    Ok((0..n)
        .map(|_| loop {
            let v = rng.random_range(lo..hi);
            if v > lo {
                break v;
            }
        })
        .collect())
}
