//! Round-synchronous simulation and trace metrics.
//!
//! Each round reads a snapshot of all states, delivers one message per
//! bounded-length path (corrupted by adversaries on the way), lets every
//! normal follower compute its input, and only then commits the new states.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::AdversaryAssignment;
use crate::digraph::{Digraph, Path};
use crate::dynamics::{
    build_update_rule, follower_step_first, follower_step_second, DynamicsError, LeaderMode, Order, UpdateRule,
};
use crate::msr::{direct_term_first, error_bound, error_bound_layered, Message, MsrError};
use crate::nodeset::NodeSet;
use crate::scenario::{ScenarioConfig, ScenarioError};

/// Absolute slack used in every "error within bound" comparison.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Msr(#[from] MsrError),
    #[error("non-finite state at node {node}, step {k}, axis {axis}")]
    NonFinite { axis: String, k: usize, node: usize },
    #[error("window of {window} steps exceeds the trace ({steps} steps)")]
    Window { window: usize, steps: usize },
    #[error("trace has no steps")]
    EmptyTrace,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Filter diagnostics of one follower in one round.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeDiag {
    pub phi: f64,
    pub weight: usize,
    pub removed_high: usize,
    pub removed_low: usize,
    pub cover_high: usize,
    pub cover_low: usize,
    pub jump: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisTrace {
    pub name: String,
    /// `x[k][i]`, absolute positions, `steps + 1` rows.
    pub x: Vec<Vec<f64>>,
    /// Velocities, second-order runs only.
    pub v: Option<Vec<Vec<f64>>>,
    /// Errors of offset-corrected positions against the leader.
    pub e: Vec<Vec<f64>>,
    /// `diag[k][i]` for rounds `0..steps`; defaults for nodes that did not
    /// filter.
    pub diag: Vec<Vec<NodeDiag>>,
    pub bounds: Bounds,
}

/// Error bounds that apply to a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// Sum of all layer terms over the normal followers.
    pub total: f64,
    /// Layer terms for followers without a leader link plus one term for
    /// the direct ones.
    pub layered: f64,
    /// Bound for runs where every follower is direct.
    pub direct_only: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub axes: Vec<AxisTrace>,
    pub seed: u64,
    pub steps: usize,
    pub order: Order,
    pub mode: LeaderMode,
    pub hops: usize,
    pub f: usize,
    pub period: f64,
    pub eps: f64,
    pub normal: NodeSet,
    pub leaders: NodeSet,
}

/// Applies one update rule across a round's messages.
struct Round<'a> {
    g: &'a Digraph,
    rule: UpdateRule,
    f: usize,
    paths_to: &'a [Vec<Path>],
    adversaries: &'a AdversaryAssignment,
}

impl Round<'_> {
    fn messages(&self, k: usize, i: usize, hat: &[f64], leader_hat: f64) -> Vec<Message> {
        let mut msgs = Vec::with_capacity(self.paths_to[i].len() + 1);
        msgs.push(Message::new(hat[i], Path::trivial(i)));
        for p in &self.paths_to[i] {
            let v = self.adversaries.delivered_value(k, p, hat[p.source()], leader_hat);
            msgs.push(Message::new(v, p.clone()));
        }
        msgs
    }

    fn input(&self, k: usize, i: usize, hat: &[f64], leader_hat: f64) -> Result<NodeDiag, EngineError> {
        let msgs = self.messages(k, i, hat, leader_hat);
        let inp = self.rule.node_input(self.g, i, &msgs, hat[i], self.f)?;
        let mut d = NodeDiag {
            phi: inp.phi,
            weight: inp.weight,
            ..NodeDiag::default()
        };
        if let Some(out) = inp.filter {
            d.removed_high = out.removed_high.len();
            d.removed_low = out.removed_low.len();
            d.cover_high = out.cover_high;
            d.cover_low = out.cover_low;
            d.jump = out.jump_high || out.jump_low;
        }
        Ok(d)
    }
}

/// Bounds for the scenario's axis `axis`.
pub fn scenario_bounds(cfg: &ScenarioConfig, axis: usize) -> Result<Bounds, MsrError> {
    let normal = cfg.normal_followers();
    let n = normal.len().max(1);
    let total = error_bound(n, cfg.eps)?;
    let direct = match cfg.mode {
        LeaderMode::Secure => cfg.graph.direct_followers().intersection(normal),
        LeaderMode::Insecure => NodeSet::empty(),
    };
    let direct_term = match cfg.order {
        Order::Second => cfg.eps,
        Order::First => {
            let v_bar = cfg.v_bar_d(axis);
            direct
                .iter()
                .map(|i| {
                    let g = cfg.gains[i];
                    direct_term_first(cfg.period, g.alpha, g.theta + v_bar + g.sigma_bar, cfg.eps)
                })
                .fold(cfg.eps, f64::max)
        }
    };
    let layered = if direct.is_empty() {
        total
    } else {
        error_bound_layered(n, direct.len(), cfg.eps, direct_term)?
    };
    let all_direct = cfg.mode == LeaderMode::Secure && cfg.graph.direct_followers() == cfg.graph.followers();
    Ok(Bounds {
        total,
        layered,
        direct_only: all_direct.then_some(direct_term),
    })
}

/// Runs a scenario after validating it.
pub fn run(cfg: &ScenarioConfig) -> Result<Trace, EngineError> {
    cfg.validate()?;
    let g = &cfg.graph;
    let n = g.n();
    let rule = build_update_rule(g, cfg.mode, cfg.order)?;
    let all = g.nodes();
    let paths_to: Vec<Vec<Path>> = (0..n)
        .map(|i| g.enumerate_paths_to(i, cfg.hops, all))
        .collect::<Result<_, _>>()
        .map_err(ScenarioError::from)?;
    let normal = cfg.normal_followers();
    let normal_leaders = cfg.normal_leaders();
    let reference = normal_leaders.first().expect("validated");
    let second = cfg.order == Order::Second;

    let mut axes = Vec::with_capacity(cfg.axes.len());
    for (ax, a) in cfg.axes.iter().enumerate() {
        let adversaries = &a.adversaries;
        let round = Round {
            g,
            rule,
            f: cfg.f,
            paths_to: &paths_to,
            adversaries,
        };
        let mut rngs: Vec<ChaCha8Rng> = (0..n)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
                r.set_stream((a.stream << 32) | i as u64);
                r
            })
            .collect();
        let params: Vec<_> = (0..n).map(|i| cfg.second_params(i, ax)).collect();

        let mut leader_x = a.leader_position;
        let mut leader_v = a.leader_velocity;
        let mut x = a.initial.clone();
        let mut v = vec![0.0; n];
        for d in g.leaders() {
            x[d] = leader_x;
            v[d] = leader_v;
        }
        let hat_of = |x: &[f64]| -> Vec<f64> { x.iter().zip(&a.rho).map(|(x, r)| x - r).collect() };
        let mut hat = hat_of(&x);
        for (i, adv) in adversaries.iter() {
            hat[i] = adv.emit(0, &Path::trivial(i), hat[i], leader_x - a.rho[reference]);
            x[i] = hat[i] + a.rho[i];
        }
        let errors = |hat: &[f64], lx: f64| -> Vec<f64> {
            let lh = lx - a.rho[reference];
            (0..n)
                .map(|i| if normal_leaders.contains(i) { 0.0 } else { hat[i] - lh })
                .collect()
        };

        let mut xs = Vec::with_capacity(cfg.steps + 1);
        let mut vs = second.then(|| Vec::with_capacity(cfg.steps + 1));
        let mut es = Vec::with_capacity(cfg.steps + 1);
        let mut diags = Vec::with_capacity(cfg.steps);
        xs.push(x.clone());
        es.push(errors(&hat, leader_x));
        if let Some(vs) = vs.as_mut() {
            vs.push(v.clone());
        }

        for k in 0..cfg.steps {
            let leader_hat = leader_x - a.rho[reference];
            let inputs: Vec<NodeDiag> = (0..n)
                .into_par_iter()
                .map(|i| {
                    if normal.contains(i) {
                        round.input(k, i, &hat, leader_hat)
                    } else {
                        Ok(NodeDiag::default())
                    }
                })
                .collect::<Result<_, _>>()?;

            let u_d = a.leader_input.eval(k, cfg.period);
            if second {
                leader_x += cfg.period * leader_v;
                leader_v += cfg.period * u_d;
            } else {
                leader_x += cfg.period * u_d;
            }
            for i in 0..n {
                if normal_leaders.contains(i) {
                    x[i] = leader_x;
                    v[i] = leader_v;
                } else if normal.contains(i) {
                    let sb = params[i].base.sigma_bar;
                    let sigma = if sb > 0.0 { rngs[i].random_range(-sb..=sb) } else { 0.0 };
                    let d = &inputs[i];
                    if second {
                        let (_, nx, nv) = follower_step_second(hat[i], v[i], d.phi, d.weight, &params[i], sigma)?;
                        x[i] = nx + a.rho[i];
                        v[i] = nv;
                    } else {
                        let (_, nx) = follower_step_first(hat[i], d.phi, d.weight, &params[i].base, sigma)?;
                        x[i] = nx + a.rho[i];
                    }
                }
            }
            let new_leader_hat = leader_x - a.rho[reference];
            for (i, adv) in adversaries.iter() {
                let h = adv.emit(k + 1, &Path::trivial(i), hat[i], new_leader_hat);
                x[i] = h + a.rho[i];
            }
            if let Some(node) = x.iter().chain(&v).position(|s| !s.is_finite()) {
                return Err(EngineError::NonFinite {
                    axis: a.name.clone(),
                    k: k + 1,
                    node: node % n,
                });
            }
            hat = hat_of(&x);
            xs.push(x.clone());
            es.push(errors(&hat, leader_x));
            if let Some(vs) = vs.as_mut() {
                vs.push(v.clone());
            }
            diags.push(inputs);
        }
        axes.push(AxisTrace {
            name: a.name.clone(),
            x: xs,
            v: vs,
            e: es,
            diag: diags,
            bounds: scenario_bounds(cfg, ax)?,
        });
    }
    Ok(Trace {
        axes,
        seed: cfg.seed,
        steps: cfg.steps,
        order: cfg.order,
        mode: cfg.mode,
        hops: cfg.hops,
        f: cfg.f,
        period: cfg.period,
        eps: cfg.eps,
        normal,
        leaders: g.leaders(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisMetrics {
    pub name: String,
    /// First step of the steady window.
    pub window_start: usize,
    /// Largest `|e|` over normal followers in the steady window.
    pub max_steady_error: f64,
    /// Per-node largest `|e|` in the steady window (0 for other nodes).
    pub node_steady_error: Vec<f64>,
    /// First step from which every normal error stays within `bound`.
    pub convergence_step: Option<usize>,
    pub bound: f64,
    pub within_bound: bool,
}

impl AxisMetrics {
    pub fn converged(&self) -> bool {
        self.convergence_step.is_some()
    }
}

/// Steady-window metrics on one error matrix. `window` counts steps at the
/// end of the trace; the default is the last 20%.
pub fn error_metrics(
    name: &str,
    e: &[Vec<f64>],
    normal: NodeSet,
    bound: f64,
    window: Option<usize>,
) -> Result<AxisMetrics, EngineError> {
    if e.is_empty() {
        return Err(EngineError::EmptyTrace);
    }
    let steps = e.len() - 1;
    let window = window.unwrap_or(steps / 5);
    if window > steps {
        return Err(EngineError::Window { window, steps });
    }
    let start = steps - window;
    let n = e[0].len();
    let mut node_steady = vec![0.0f64; n];
    for row in &e[start..] {
        for i in normal {
            node_steady[i] = node_steady[i].max(row[i].abs());
        }
    }
    let max_steady = node_steady.iter().copied().fold(0.0, f64::max);
    let limit = bound + BOUND_SLACK;
    let inside = |row: &Vec<f64>| normal.iter().all(|i| row[i].abs() <= limit);
    let mut conv = None;
    for k in (0..=steps).rev() {
        if inside(&e[k]) {
            conv = Some(k);
        } else {
            break;
        }
    }
    Ok(AxisMetrics {
        name: name.to_string(),
        window_start: start,
        max_steady_error: max_steady,
        node_steady_error: node_steady,
        convergence_step: conv,
        bound,
        within_bound: max_steady <= limit,
    })
}

/// Metrics for every axis against `bound` (the total bound when `None`).
pub fn metrics(trace: &Trace, bound: Option<f64>, window: Option<usize>) -> Result<Vec<AxisMetrics>, EngineError> {
    trace
        .axes
        .iter()
        .map(|a| error_metrics(&a.name, &a.e, trace.normal, bound.unwrap_or(a.bounds.total), window))
        .collect()
}

/// CSV with columns `k, x_<id>..., e_<id>..., v_<id>...`. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(axis: &AxisTrace, out: W) -> Result<(), EngineError> {
    let mut w = csv::Writer::from_writer(out);
    let n = axis.x.first().map_or(0, |r| r.len());
    let mut header = vec!["k".to_string()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    header.extend((0..n).map(|i| format!("e_{i}")));
    if axis.v.is_some() {
        header.extend((0..n).map(|i| format!("v_{i}")));
    }
    w.write_record(&header)?;
    for k in 0..axis.x.len() {
        let mut row = vec![k.to_string()];
        row.extend(axis.x[k].iter().map(|x| x.to_string()));
        row.extend(axis.e[k].iter().map(|x| x.to_string()));
        if let Some(v) = &axis.v {
            row.extend(v[k].iter().map(|x| x.to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Error columns read back from a trace CSV: `(node ids, rows)`.
pub fn read_error_columns<R: std::io::Read>(input: R) -> Result<(Vec<usize>, Vec<Vec<f64>>), EngineError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let cols: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(c, h)| h.strip_prefix("e_").and_then(|id| id.parse().ok()).map(|id| (c, id)))
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut row = Vec::with_capacity(cols.len());
        for &(c, _) in &cols {
            let cell = rec.get(c).unwrap_or("");
            row.push(cell.parse::<f64>().map_err(|_| {
                EngineError::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("bad number `{cell}`"),
                ))
            })?);
        }
        rows.push(row);
    }
    Ok((cols.into_iter().map(|(_, id)| id).collect(), rows))
}
