//! Graph families and ready-made scenarios. Every property a generated graph
//! is labelled with comes from re-running the checker on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::adversary::AdversaryAssignment;
use crate::digraph::{Digraph, GraphError};
use crate::dynamics::{InputSchedule, LeaderMode, Order, Sinusoid, Wave};
use crate::robustness::{is_robust_following, is_robust_following_wrt, RobustnessError};
use crate::scenario::{sample_initial, AxisConfig, NodeGains, ScenarioConfig, ScenarioError};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Robustness(#[from] RobustnessError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid family parameters: {0}")]
    Params(String),
    #[error("no graph met the target after {0} attempts")]
    Exhausted(usize),
}

/// A checker verdict recorded at generation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub r: usize,
    pub l: usize,
    pub f: usize,
    /// Checked against the whole leader set, leaders possibly faulty.
    pub leader_set: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub graph: Digraph,
    pub family: String,
    pub certificates: Vec<Certificate>,
}

impl Generated {
    fn certify(graph: Digraph, family: String, checks: &[(usize, usize, usize)]) -> Result<Self, GenerateError> {
        let certificates = checks
            .iter()
            .map(|&(r, l, f)| {
                let leader_set = graph.leaders().len() > 1;
                let holds = if leader_set {
                    is_robust_following_wrt(&graph, graph.leaders(), r, l, f)?.holds
                } else {
                    is_robust_following(&graph, r, l, f)?.holds
                };
                Ok(Certificate {
                    r,
                    l,
                    f,
                    leader_set,
                    holds,
                })
            })
            .collect::<Result<_, RobustnessError>>()?;
        Ok(Generated {
            graph,
            family,
            certificates,
        })
    }

    /// Plain-text provenance: family and every verified property.
    pub fn note(&self) -> String {
        let mut s = format!("family: {}\n", self.family);
        for c in &self.certificates {
            s.push_str(&format!(
                "{}-robust following with {} hops under the {}-local model{}: {}\n",
                c.r,
                c.l,
                c.f,
                if c.leader_set { " w.r.t. the leader set" } else { "" },
                if c.holds { "holds" } else { "fails" }
            ));
        }
        s
    }
}

/// Leader 0 with an edge to each of `n - 1` followers.
pub fn star(n: usize) -> Result<Generated, GenerateError> {
    if n < 2 {
        return Err(GenerateError::Params("star needs at least 2 nodes".into()));
    }
    let g = Digraph::new(n, (1..n).map(|i| (0, i)), [0])?;
    let checks: Vec<_> = (1..n).map(|r| (r, 1, 0)).collect();
    Generated::certify(g, format!("star n={n}"), &checks)
}

/// Layers of `2f+1` followers: the leader feeds the first layer and every
/// node hears the whole previous layer.
pub fn layered(f: usize, layers: usize) -> Result<Generated, GenerateError> {
    if layers == 0 {
        return Err(GenerateError::Params("need at least one layer".into()));
    }
    let width = 2 * f + 1;
    let n = 1 + width * layers;
    let node = |layer: usize, k: usize| 1 + layer * width + k;
    let mut edges: Vec<(usize, usize)> = (0..width).map(|k| (0, node(0, k))).collect();
    for layer in 1..layers {
        for a in 0..width {
            for b in 0..width {
                edges.push((node(layer - 1, a), node(layer, b)));
            }
        }
    }
    let g = Digraph::new(n, edges, [0])?;
    Generated::certify(g, format!("layered f={f} layers={layers}"), &[(f + 1, 1, f)])
}

/// Nine-node graph: not 2-robust following with 1 hop under the 1-local
/// model, but 2-robust following with 2 hops.
pub fn example1_analog() -> Result<Generated, GenerateError> {
    let edges = [
        (0, 1), (0, 2), (0, 3), (1, 2), (1, 5), (1, 6), (1, 8), (2, 3), (2, 4), (2, 7), (3, 4),
        (3, 6), (3, 8), (4, 3), (4, 8), (5, 2), (5, 4), (5, 6), (6, 7), (7, 5), (8, 5), (8, 7),
    ];
    let g = Digraph::new(9, edges, [0])?;
    Generated::certify(g, "example1-analog".into(), &[(2, 1, 1), (2, 2, 1)])
}

/// Fifteen-node graph: not 3-robust following with 1 or 2 hops under the
/// 2-local model, but 3-robust following with 3 hops.
pub fn example2_analog() -> Result<Generated, GenerateError> {
    let edges = [
        (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 4), (1, 6), (1, 7), (1, 9), (1, 10), (1, 12),
        (1, 14), (2, 8), (2, 9), (2, 11), (2, 14), (3, 12), (4, 8), (4, 10), (4, 11), (4, 14), (5, 3),
        (5, 6), (5, 7), (5, 8), (5, 9), (5, 10), (5, 12), (5, 13), (5, 14), (6, 8), (6, 9), (6, 13),
        (7, 6), (7, 10), (7, 12), (8, 7), (8, 9), (8, 10), (8, 12), (9, 7), (9, 8), (9, 11), (9, 13),
        (10, 11), (10, 13), (11, 8), (11, 14), (12, 6), (13, 6), (13, 7), (13, 10), (14, 11), (14, 13),
    ];
    let g = Digraph::new(15, edges, [0])?;
    Generated::certify(g, "example2-analog".into(), &[(3, 1, 2), (3, 2, 2), (3, 3, 2)])
}

/// Leaders {0, 1, 2}: 2-robust following with 2 hops under the 1-local
/// model with respect to the leader set, but not with 1 hop.
pub fn leader_set_certified() -> Result<Generated, GenerateError> {
    let edges = [
        (0, 3), (0, 4), (0, 7), (1, 3), (1, 7), (2, 3), (2, 4), (2, 5), (3, 6), (4, 5), (4, 6),
        (4, 7), (6, 3), (6, 4), (6, 5), (7, 3), (7, 4), (7, 6),
    ];
    let g = Digraph::new(8, edges, [0, 1, 2])?;
    Generated::certify(g, "leader-set-certified".into(), &[(2, 1, 1), (2, 2, 1)])
}

/// Leaders {0, 1, 2}: not 2-robust following with 2 hops under the 1-local
/// model with respect to the leader set.
pub fn leader_set_rejected() -> Result<Generated, GenerateError> {
    let edges = [
        (0, 3), (1, 3), (1, 4), (1, 5), (1, 7), (2, 4), (2, 5), (3, 6), (4, 3), (4, 6), (4, 7),
        (5, 3), (5, 6), (6, 3), (6, 4), (7, 6),
    ];
    let g = Digraph::new(8, edges, [0, 1, 2])?;
    Generated::certify(g, "leader-set-rejected".into(), &[(2, 2, 1)])
}

/// Random digraph with leader 0 and independent edge probability `p`,
/// redrawn until it satisfies `target = (r, l, f)` when one is given.
pub fn random(
    n: usize,
    p: f64,
    seed: u64,
    target: Option<(usize, usize, usize)>,
    attempts: usize,
) -> Result<Generated, GenerateError> {
    if n < 2 || !(0.0..=1.0).contains(&p) {
        return Err(GenerateError::Params(format!("random needs n >= 2 and p in [0, 1], got n={n}, p={p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..attempts.max(1) {
        let g = random_digraph(&mut rng, n, p)?;
        let family = format!("random n={n} p={p} seed={seed} attempt={attempt}");
        match target {
            None => return Generated::certify(g, family, &[]),
            Some(t @ (r, l, f)) => {
                if r <= n - 1 && is_robust_following(&g, r, l, f)?.holds {
                    return Generated::certify(g, family, &[t]);
                }
            }
        }
    }
    Err(GenerateError::Exhausted(attempts))
}

/// One random digraph; leader 0 always has at least one out-edge.
pub fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> Result<Digraph, GraphError> {
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 1..n {
            if i != j && rng.random_bool(p) {
                edges.push((j, i));
            }
        }
    }
    if !edges.iter().any(|&(j, _)| j == 0) {
        edges.push((0, rng.random_range(1..n)));
    }
    Digraph::new(n, edges, [0])
}

fn cos(amplitude: f64, frequency: f64) -> Sinusoid {
    Sinusoid {
        wave: Wave::Cos,
        amplitude,
        frequency,
        phase: 0.0,
    }
}

fn sin(amplitude: f64, frequency: f64) -> Sinusoid {
    Sinusoid {
        wave: Wave::Sin,
        amplitude,
        frequency,
        phase: 0.0,
    }
}

/// `3 cos(t) + 1.5 cos(0.5 t)`.
pub fn first_order_input() -> InputSchedule {
    InputSchedule {
        constant: 0.0,
        terms: vec![cos(3.0, 1.0), cos(1.5, 0.5)],
    }
}

/// `-3.2 sin(2t) + 1.92 sin(1.6t) - 0.25 sin(0.2t)`.
pub fn second_order_input() -> InputSchedule {
    InputSchedule {
        constant: 0.0,
        terms: vec![sin(-3.2, 2.0), sin(1.92, 1.6), sin(-0.25, 0.2)],
    }
}

/// Initial leader velocity that makes the second-order leader's velocity
/// zero-mean under [`second_order_input`].
pub const SECOND_ORDER_LEADER_VELOCITY: f64 = 1.65;

pub const LEADER_START: f64 = 40.0;

fn tracking(
    graph: Digraph,
    hops: usize,
    f: usize,
    order: Order,
    steps: usize,
    seed: u64,
) -> Result<ScenarioConfig, GenerateError> {
    let n = graph.n();
    let (period, theta, beta, input, v0) = match order {
        Order::First => (0.01, 6.0, 0.0, first_order_input(), 0.0),
        Order::Second => (0.005, 100.0, 20.0, second_order_input(), SECOND_ORDER_LEADER_VELOCITY),
    };
    let mode = if graph.leaders().len() == 1 {
        LeaderMode::Secure
    } else {
        LeaderMode::Insecure
    };
    Ok(ScenarioConfig {
        hops,
        f,
        order,
        mode,
        period,
        eps: 0.1,
        beta,
        gains: vec![
            NodeGains {
                alpha: 1.0,
                theta,
                sigma_bar: 1.0
            };
            n
        ],
        axes: vec![AxisConfig {
            name: "x".into(),
            leader_input: input,
            leader_position: LEADER_START,
            leader_velocity: v0,
            v_bar_d: None,
            initial: sample_initial(n, 0.0, 30.0, seed, 0)?,
            rho: vec![0.0; n],
            adversaries: AdversaryAssignment::new(),
            stream: 0,
        }],
        graph,
        steps,
        seed,
        allow_non_local: false,
    })
}

/// First-order tracking run: period 0.01, alpha 1, eps 0.1, theta 6,
/// disturbance bound 1, leader input [`first_order_input`] starting at 40,
/// followers drawn from (0, 30).
pub fn first_order_tracking(
    graph: Digraph,
    hops: usize,
    f: usize,
    steps: usize,
    seed: u64,
) -> Result<ScenarioConfig, GenerateError> {
    tracking(graph, hops, f, Order::First, steps, seed)
}

/// Second-order tracking run: period 0.005, alpha 1, eps 0.1, theta 100,
/// beta 20, disturbance bound 1, leader input [`second_order_input`].
pub fn second_order_tracking(
    graph: Digraph,
    hops: usize,
    f: usize,
    steps: usize,
    seed: u64,
) -> Result<ScenarioConfig, GenerateError> {
    tracking(graph, hops, f, Order::Second, steps, seed)
}
