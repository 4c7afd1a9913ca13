//! Byzantine behaviour: value fabrication per destination and path, relay
//! tampering, and f-locality checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::digraph::{Digraph, GraphError, Path};
use crate::nodeset::NodeSet;
use crate::robustness::f_local_violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("adversary {0} is a leader, which secure-leader mode forbids")]
    LeaderAdversary(usize),
    #[error("adversary set is not {f}-local: node {node} sees {count} adversaries")]
    NotLocal { node: usize, count: usize, f: usize },
    #[error("oscillation period must be positive")]
    BadPeriod,
    #[error("strategy parameter is not finite")]
    NonFinite,
}

/// A fabrication rule. Values may depend on the round, the destination and
/// the leader's current value.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Sends the true (or inbound) value.
    Honest,
    Constant(f64),
    /// Sends the leader's current value.
    MirrorLeader,
    /// `base + amplitude * sin(2 pi k / period)`.
    Oscillate { base: f64, amplitude: f64, period: f64 },
    /// Per destination group; the first group containing the destination
    /// applies. Destinations in no group get the true value.
    SplitByDestination(Vec<(NodeSet, Strategy)>),
    /// `value` to destinations in `stuck`, the leader's value to all others.
    StuckAtPartition { stuck: NodeSet, value: f64 },
    /// Piecewise constant: from each listed round on, send its value. Before
    /// the first listed round the true value goes out.
    Script(Vec<(usize, f64)>),
}

impl Strategy {
    pub fn validate(&self) -> Result<(), AdversaryError> {
        let finite = |v: f64| if v.is_finite() { Ok(()) } else { Err(AdversaryError::NonFinite) };
        match self {
            Strategy::Honest | Strategy::MirrorLeader => Ok(()),
            Strategy::Constant(v) => finite(*v),
            Strategy::Oscillate { base, amplitude, period } => {
                finite(*base)?;
                finite(*amplitude)?;
                if *period > 0.0 && period.is_finite() {
                    Ok(())
                } else {
                    Err(AdversaryError::BadPeriod)
                }
            }
            Strategy::SplitByDestination(groups) => groups.iter().try_for_each(|(_, s)| s.validate()),
            Strategy::StuckAtPartition { value, .. } => finite(*value),
            Strategy::Script(points) => points.iter().try_for_each(|&(_, v)| finite(v)),
        }
    }

    /// Value sent toward `dest` in round `k` in place of `true_value`.
    pub fn value(&self, k: usize, dest: usize, true_value: f64, leader_value: f64) -> f64 {
        match self {
            Strategy::Honest => true_value,
            Strategy::Constant(v) => *v,
            Strategy::MirrorLeader => leader_value,
            Strategy::Oscillate { base, amplitude, period } => {
                base + amplitude * (2.0 * PI * k as f64 / period).sin()
            }
            Strategy::SplitByDestination(groups) => match groups.iter().find(|(s, _)| s.contains(dest)) {
                Some((_, s)) => s.value(k, dest, true_value, leader_value),
                None => {
                    log::debug!("no split group for destination {dest}; sending the true value");
                    true_value
                }
            },
            Strategy::StuckAtPartition { stuck, value } => {
                if stuck.contains(dest) {
                    *value
                } else {
                    leader_value
                }
            }
            Strategy::Script(points) => points
                .iter()
                .rev()
                .find(|&&(from, _)| from <= k)
                .map_or(true_value, |&(_, v)| v),
        }
    }
}

/// How an adversary treats values it relays for others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelayMode {
    /// Rewrites relayed values the same way it fabricates its own.
    #[default]
    Tamper,
    PassThrough,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adversary {
    pub strategy: Strategy,
    pub relay: RelayMode,
    /// Sends one value per round to everybody (the malicious model).
    pub malicious: bool,
}

impl Adversary {
    pub fn new(strategy: Strategy) -> Self {
        Adversary {
            strategy,
            relay: RelayMode::Tamper,
            malicious: false,
        }
    }

    fn target(&self, owner: usize, path: &Path) -> usize {
        if self.malicious {
            owner
        } else {
            path.destination()
        }
    }

    /// Value sent as the source of `path`.
    pub fn emit(&self, k: usize, path: &Path, true_value: f64, leader_value: f64) -> f64 {
        let owner = path.source();
        self.strategy
            .value(k, self.target(owner, path), true_value, leader_value)
    }

    /// Value forwarded by `owner`, an intermediate node of `path`. The path
    /// itself is never altered.
    pub fn tamper_relay(&self, owner: usize, k: usize, path: &Path, inbound: f64, leader_value: f64) -> f64 {
        match self.relay {
            RelayMode::PassThrough => inbound,
            RelayMode::Tamper => self
                .strategy
                .value(k, self.target(owner, path), inbound, leader_value),
        }
    }
}

/// Adversarial nodes and their behaviour.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdversaryAssignment {
    nodes: BTreeMap<usize, Adversary>,
}

impl AdversaryAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: usize, adv: Adversary) {
        self.nodes.insert(node, adv);
    }

    pub fn with(mut self, node: usize, adv: Adversary) -> Self {
        self.insert(node, adv);
        self
    }

    pub fn get(&self, node: usize) -> Option<&Adversary> {
        self.nodes.get(&node)
    }

    pub fn set(&self) -> NodeSet {
        self.nodes.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Adversary)> {
        self.nodes.iter().map(|(&k, v)| (k, v))
    }

    /// Value delivered at the end of `path` when its source holds
    /// `source_value`: fabricated at an adversarial source, then rewritten
    /// at each adversarial intermediate in path order.
    pub fn delivered_value(&self, k: usize, path: &Path, source_value: f64, leader_value: f64) -> f64 {
        let mut value = match self.get(path.source()) {
            Some(a) => a.emit(k, path, source_value, leader_value),
            None => source_value,
        };
        for &u in path.intermediates() {
            if let Some(a) = self.get(u) {
                value = a.tamper_relay(u, k, path, value, leader_value);
            }
        }
        value
    }

    /// Checks ids, strategy parameters, leader membership (unless leaders
    /// may be faulty) and f-locality.
    pub fn validate(
        &self,
        g: &Digraph,
        f: usize,
        l: usize,
        leaders_may_fail: bool,
        require_local: bool,
    ) -> Result<(), AdversaryError> {
        for (node, adv) in self.iter() {
            if node >= g.n() {
                return Err(GraphError::InvalidNode { id: node, n: g.n() }.into());
            }
            if !leaders_may_fail && g.leaders().contains(node) {
                return Err(AdversaryError::LeaderAdversary(node));
            }
            adv.strategy.validate()?;
        }
        if require_local {
            if let Some(node) = validate_f_local(g, self.set(), f, l)? {
                let count = g.in_neighbors_l(node, l)?.intersection(self.set()).len();
                return Err(AdversaryError::NotLocal { node, count, f });
            }
        }
        Ok(())
    }
}

/// The first normal node whose `l`-hop in-neighborhood holds more than `f`
/// members of `a`, or `None` when `a` is f-local.
pub fn validate_f_local(g: &Digraph, a: NodeSet, f: usize, l: usize) -> Result<Option<usize>, GraphError> {
    let hoods = g.in_neighborhoods(l)?;
    Ok(f_local_violation(&hoods, a, f))
}
