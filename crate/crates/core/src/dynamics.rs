//! Leader and follower dynamics, parameter validation and update rules.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::Digraph;
use crate::msr::{mwmsr_phi, sat_unchecked, FilterOutcome, Message, MsrError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("retained message count must be at least 1")]
    NoWeight,
    #[error("disturbance {sigma} exceeds bound {bound}")]
    Disturbance { sigma: f64, bound: f64 },
    #[error("leader {what} {value} exceeds bound {bound} at step {k}")]
    LeaderBound {
        what: &'static str,
        k: usize,
        value: f64,
        bound: f64,
    },
    #[error("direct follower {0} received no message from the leader")]
    NoLeaderMessage(usize),
    #[error("secure-leader mode needs exactly one leader, found {0}")]
    LeaderCount(usize),
    #[error(transparent)]
    Msr(#[from] MsrError),
}

/// Which waveform a schedule term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wave {
    Sin,
    Cos,
}

/// `amplitude * wave(frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub wave: Wave,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Leader input as a constant plus sinusoids, evaluated at `t = k T`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InputSchedule {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<Sinusoid>,
}

impl InputSchedule {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, k: usize, period: f64) -> f64 {
        let t = k as f64 * period;
        self.terms.iter().fold(self.constant, |acc, s| {
            let arg = s.frequency * t + s.phase;
            acc + s.amplitude
                * match s.wave {
                    Wave::Sin => arg.sin(),
                    Wave::Cos => arg.cos(),
                }
        })
    }

    /// `|constant| + sum |amplitude|`, an upper bound on `|eval|`.
    pub fn abs_bound(&self) -> f64 {
        self.terms
            .iter()
            .fold(self.constant.abs(), |acc, s| acc + s.amplitude.abs())
    }
}

/// Per-node parameters of the first-order protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderParams {
    pub period: f64,
    pub alpha: f64,
    pub theta: f64,
    pub eps: f64,
    pub sigma_bar: f64,
    pub v_bar_d: f64,
}

/// Per-node parameters of the second-order protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderParams {
    #[serde(flatten)]
    pub base: FirstOrderParams,
    pub beta: f64,
}

/// A violated parameter constraint with both sides evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (lhs {}, rhs {})", self.constraint, self.lhs, self.rhs)
    }
}

fn positivity(p: &FirstOrderParams, out: &mut Vec<Violation>) {
    let checks = [
        ("period > 0", p.period),
        ("alpha > 0", p.alpha),
        ("theta > 0", p.theta),
        ("eps > 0", p.eps),
        ("v_bar_d > 0", p.v_bar_d),
    ];
    for (name, v) in checks {
        if !(v > 0.0) {
            out.push(Violation {
                constraint: name,
                lhs: v,
                rhs: 0.0,
            });
        }
    }
    if !(p.sigma_bar >= 0.0) {
        out.push(Violation {
            constraint: "sigma_bar >= 0",
            lhs: p.sigma_bar,
            rhs: 0.0,
        });
    }
}

/// Checks `v_bar_d + sigma_bar < theta` and
/// `v_bar_d + sigma_bar + theta <= (2 - 2 alpha T) eps / T`.
pub fn validate_first(p: &FirstOrderParams) -> Vec<Violation> {
    let mut out = Vec::new();
    positivity(p, &mut out);
    let drive = p.v_bar_d + p.sigma_bar;
    if !(drive < p.theta) {
        out.push(Violation {
            constraint: "v_bar_d + sigma_bar < theta",
            lhs: drive,
            rhs: p.theta,
        });
    }
    let cap = (2.0 - 2.0 * p.alpha * p.period) * p.eps / p.period;
    if !(drive + p.theta <= cap) {
        out.push(Violation {
            constraint: "v_bar_d + sigma_bar + theta <= (2 - 2 alpha T) eps / T",
            lhs: drive + p.theta,
            rhs: cap,
        });
    }
    out
}

/// Checks positivity and `0 < beta v_bar_d <= theta`.
pub fn validate_second(p: &SecondOrderParams) -> Vec<Violation> {
    let mut out = Vec::new();
    positivity(&p.base, &mut out);
    let damp = p.beta * p.base.v_bar_d;
    if !(damp > 0.0 && damp <= p.base.theta) {
        out.push(Violation {
            constraint: "0 < beta v_bar_d <= theta",
            lhs: damp,
            rhs: p.base.theta,
        });
    }
    out
}

pub fn leader_step_first(x_d: f64, u_d: f64, period: f64) -> f64 {
    x_d + period * u_d
}

pub fn leader_step_second(x_d: f64, v_d: f64, u_d: f64, period: f64) -> (f64, f64) {
    (x_d + period * v_d, v_d + period * u_d)
}

/// Rejects a first-order schedule whose input leaves `[-v_bar_d, v_bar_d]`
/// within `steps` rounds.
pub fn check_schedule_first(
    schedule: &InputSchedule,
    period: f64,
    v_bar_d: f64,
    steps: usize,
) -> Result<(), DynamicsError> {
    for k in 0..steps {
        let u = schedule.eval(k, period);
        if u.abs() > v_bar_d {
            return Err(DynamicsError::LeaderBound {
                what: "input",
                k,
                value: u,
                bound: v_bar_d,
            });
        }
    }
    Ok(())
}

/// Largest leader speed over `steps` rounds of the second-order leader.
pub fn peak_speed_second(schedule: &InputSchedule, period: f64, v0: f64, steps: usize) -> f64 {
    let mut v = v0;
    let mut peak = v.abs();
    for k in 0..steps {
        v += period * schedule.eval(k, period);
        peak = peak.max(v.abs());
    }
    peak
}

pub fn check_schedule_second(
    schedule: &InputSchedule,
    period: f64,
    v0: f64,
    v_bar_d: f64,
    steps: usize,
) -> Result<(), DynamicsError> {
    let mut v = v0;
    for k in 0..=steps {
        if v.abs() > v_bar_d {
            return Err(DynamicsError::LeaderBound {
                what: "velocity",
                k,
                value: v,
                bound: v_bar_d,
            });
        }
        v += period * schedule.eval(k, period);
    }
    Ok(())
}

fn check_disturbance(sigma: f64, bound: f64) -> Result<(), DynamicsError> {
    if sigma.abs() > bound {
        Err(DynamicsError::Disturbance { sigma, bound })
    } else {
        Ok(())
    }
}

/// Control input `-gamma phi - theta sat(phi)` with `gamma = alpha / weight`.
pub fn follower_input(phi: f64, weight: usize, alpha: f64, theta: f64, eps: f64) -> Result<f64, DynamicsError> {
    if weight == 0 {
        return Err(DynamicsError::NoWeight);
    }
    let gamma = alpha / weight as f64;
    Ok(-gamma * phi - theta * sat_unchecked(phi, eps))
}

/// One first-order follower step. Returns the input and the next state.
/// Direct followers pass `weight = 1`.
pub fn follower_step_first(
    x: f64,
    phi: f64,
    weight: usize,
    p: &FirstOrderParams,
    sigma: f64,
) -> Result<(f64, f64), DynamicsError> {
    check_disturbance(sigma, p.sigma_bar)?;
    let u = follower_input(phi, weight, p.alpha, p.theta, p.eps)?;
    Ok((u, x + p.period * (u + sigma)))
}

/// One second-order follower step. Returns the input, position and velocity.
pub fn follower_step_second(
    x: f64,
    v: f64,
    phi: f64,
    weight: usize,
    p: &SecondOrderParams,
    sigma: f64,
) -> Result<(f64, f64, f64), DynamicsError> {
    let b = &p.base;
    check_disturbance(sigma, b.sigma_bar)?;
    let u = follower_input(phi, weight, b.alpha, b.theta, b.eps)? - p.beta * v;
    Ok((u, x + b.period * v, v + b.period * (u + sigma)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeaderMode {
    /// A single trusted leader; its direct followers track it directly.
    Secure,
    /// Leaders may be faulty; every follower filters every message.
    Insecure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Leader,
    DirectFollower,
    Follower,
    Adversary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub x: f64,
    /// Present only for second-order agents.
    pub v: Option<f64>,
    pub role: Role,
}

/// What a follower feeds into its control law this round.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeInput {
    pub phi: f64,
    pub weight: usize,
    /// Filter result when the node ran the filter.
    pub filter: Option<FilterOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateRule {
    pub mode: LeaderMode,
    pub order: Order,
    leader: Option<usize>,
}

/// Checks that `mode` fits the graph's leaders and returns the rule.
pub fn build_update_rule(g: &Digraph, mode: LeaderMode, order: Order) -> Result<UpdateRule, DynamicsError> {
    let leader = match mode {
        LeaderMode::Secure => Some(g.single_leader().ok_or(DynamicsError::LeaderCount(g.leaders().len()))?),
        LeaderMode::Insecure => None,
    };
    Ok(UpdateRule { mode, order, leader })
}

impl UpdateRule {
    /// `phi` and weight for follower `i` from its delivered messages.
    pub fn node_input(
        &self,
        g: &Digraph,
        i: usize,
        msgs: &[Message],
        x_i: f64,
        f: usize,
    ) -> Result<NodeInput, DynamicsError> {
        if let Some(d) = self.leader {
            if g.has_edge(d, i) {
                let m = msgs
                    .iter()
                    .find(|m| m.path.nodes() == [d, i])
                    .ok_or(DynamicsError::NoLeaderMessage(i))?;
                return Ok(NodeInput {
                    phi: x_i - m.value,
                    weight: 1,
                    filter: None,
                });
            }
        }
        let out = mwmsr_phi(msgs, x_i, f)?;
        Ok(NodeInput {
            phi: out.phi,
            weight: out.retained_count,
            filter: Some(out),
        })
    }
}
