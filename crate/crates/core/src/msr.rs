//! The multi-hop weighted MSR filter and the closed-form error bounds.

use std::cmp::Ordering;

use thiserror::Error;

use crate::digraph::Path;
use crate::nodeset::NodeSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsrError {
    #[error("saturation threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("messages have mixed destinations ({0} and {1})")]
    MixedDestinations(usize, usize),
    #[error("message {0:?} has no node other than its destination")]
    Uncoverable(Path),
    #[error("own-value message missing")]
    MissingOwn,
    #[error("node count must be at least 1")]
    ZeroNodes,
    #[error("direct follower count {direct} exceeds total {total}")]
    BadCounts { direct: usize, total: usize },
}

/// A value together with the path it travelled, source first.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub value: f64,
    pub path: Path,
}

impl Message {
    pub fn new(value: f64, path: Path) -> Self {
        Message { value, path }
    }

    pub fn source(&self) -> usize {
        self.path.source()
    }

    pub fn destination(&self) -> usize {
        self.path.destination()
    }
}

/// Saturation: `x/eps` clipped to `[-1, 1]`.
pub fn sat(x: f64, eps: f64) -> Result<f64, MsrError> {
    if !(eps > 0.0) {
        return Err(MsrError::BadThreshold(eps));
    }
    Ok(sat_unchecked(x, eps))
}

pub(crate) fn sat_unchecked(x: f64, eps: f64) -> f64 {
    if x > eps {
        1.0
    } else if x < -eps {
        -1.0
    } else {
        x / eps
    }
}

fn common_destination<'a>(msgs: impl IntoIterator<Item = &'a Message>) -> Result<Option<usize>, MsrError> {
    let mut dest = None;
    for m in msgs {
        let d = m.destination();
        match dest {
            None => dest = Some(d),
            Some(e) if e != d => return Err(MsrError::MixedDestinations(e, d)),
            _ => {}
        }
    }
    Ok(dest)
}

fn cover_masks<'a>(
    msgs: impl IntoIterator<Item = &'a Message>,
    dest: usize,
) -> Result<Vec<NodeSet>, MsrError> {
    msgs.into_iter()
        .map(|m| {
            let mask = m.path.node_set().without(dest);
            if mask.is_empty() {
                Err(MsrError::Uncoverable(m.path.clone()))
            } else {
                Ok(mask)
            }
        })
        .collect()
}

/// Whether some set of at most `cap` nodes meets every mask. Branches on the
/// nodes of the first unmet mask, so the tree has at most `len^cap` leaves.
fn coverable(masks: &[NodeSet], cap: usize, chosen: NodeSet) -> bool {
    match masks.iter().find(|m| m.is_disjoint(chosen)) {
        None => true,
        Some(_) if cap == 0 => false,
        Some(m) => m.iter().any(|u| coverable(masks, cap - 1, chosen.with(u))),
    }
}

/// Size of a minimum cover, or `None` when it exceeds `cap`.
fn cover_size_upto(masks: &[NodeSet], cap: usize) -> Option<usize> {
    (0..=cap).find(|&k| coverable(masks, k, NodeSet::empty()))
}

/// Smallest node set (excluding the destination) that meets every message
/// path. Among minimum covers the lexicographically least is returned.
pub fn minimum_message_cover(msgs: &[Message], dest: usize) -> Result<(usize, NodeSet), MsrError> {
    if let Some(d) = common_destination(msgs)? {
        if d != dest {
            return Err(MsrError::MixedDestinations(dest, d));
        }
    }
    let masks = cover_masks(msgs, dest)?;
    let pool = masks.iter().fold(NodeSet::empty(), |a, &m| a.union(m));
    let size = cover_size_upto(&masks, pool.len()).expect("the pool covers every mask");
    let cover = pool
        .subsets_by_size(size)
        .skip_while(|c| c.len() < size)
        .find(|c| masks.iter().all(|m| !m.is_disjoint(*c)))
        .expect("a cover of this size exists");
    Ok((size, cover))
}

/// Result of the filter at one node in one round. Message references are
/// indices into the input slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub retained: Vec<usize>,
    pub removed_high: Vec<usize>,
    pub removed_low: Vec<usize>,
    pub phi: f64,
    /// Retained messages, own value included.
    pub retained_count: usize,
    pub cover_high: usize,
    pub cover_low: usize,
    /// The cover size jumped past `f` before reaching it on that side.
    pub jump_high: bool,
    pub jump_low: bool,
}

impl FilterOutcome {
    pub fn removed_count(&self) -> usize {
        self.removed_high.len() + self.removed_low.len()
    }
}

fn tie_order(msgs: &[Message], a: usize, b: usize) -> Ordering {
    let (ma, mb) = (&msgs[a], &msgs[b]);
    ma.source()
        .cmp(&mb.source())
        .then_with(|| ma.path.nodes().cmp(mb.path.nodes()))
}

/// Largest prefix of `order` whose messages have a cover of size at most
/// `f`, with that cover size and whether the next message made it jump past
/// `f` while still below it.
fn removable_prefix(masks: &[NodeSet], order: &[usize], f: usize) -> (usize, usize, bool) {
    let prefix_masks = |len: usize| -> Vec<NodeSet> { order[..len].iter().map(|&k| masks[k]).collect() };
    let fits = |len: usize| coverable(&prefix_masks(len), f, NodeSet::empty());
    // Cover size is monotone in the prefix length.
    let (mut lo, mut hi) = (0, order.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let size = cover_size_upto(&prefix_masks(lo), f).unwrap_or(f);
    let jump = lo < order.len() && size < f;
    (lo, size, jump)
}

/// Partitions `msgs` into retained and removed sets. From each side of
/// `x_i`, the most extreme messages are removed for as long as a set of at
/// most `f` nodes could account for all of them. Ties are broken by source
/// id, then by path.
pub fn select_extreme_removal(msgs: &[Message], x_i: f64, f: usize) -> Result<FilterOutcome, MsrError> {
    let dest = common_destination(msgs)?.ok_or(MsrError::MissingOwn)?;
    if !msgs.iter().any(|m| m.path.hops() == 0) {
        return Err(MsrError::MissingOwn);
    }
    let mut high: Vec<usize> = (0..msgs.len()).filter(|&k| msgs[k].value > x_i).collect();
    let mut low: Vec<usize> = (0..msgs.len()).filter(|&k| msgs[k].value < x_i).collect();
    high.sort_by(|&a, &b| msgs[b].value.total_cmp(&msgs[a].value).then_with(|| tie_order(msgs, a, b)));
    low.sort_by(|&a, &b| msgs[a].value.total_cmp(&msgs[b].value).then_with(|| tie_order(msgs, a, b)));

    let masks: Vec<NodeSet> = msgs.iter().map(|m| m.path.node_set().without(dest)).collect();
    let (nh, cover_high, jump_high) = removable_prefix(&masks, &high, f);
    let (nl, cover_low, jump_low) = removable_prefix(&masks, &low, f);
    let mut removed = vec![false; msgs.len()];
    for &k in high[..nh].iter().chain(&low[..nl]) {
        removed[k] = true;
    }
    let retained: Vec<usize> = (0..msgs.len()).filter(|&k| !removed[k]).collect();
    let phi = retained.iter().map(|&k| x_i - msgs[k].value).sum();
    Ok(FilterOutcome {
        retained_count: retained.len(),
        retained,
        removed_high: high[..nh].to_vec(),
        removed_low: low[..nl].to_vec(),
        phi,
        cover_high,
        cover_low,
        jump_high,
        jump_low,
    })
}

/// The filter followed by the consensus sum over retained messages.
pub fn mwmsr_phi(msgs: &[Message], x_i: f64, f: usize) -> Result<FilterOutcome, MsrError> {
    select_extreme_removal(msgs, x_i, f)
}

/// Per-layer error terms `eps, 2 eps, 6 eps, ...` for layers `1..=n`.
pub fn layer_bounds(n: usize, eps: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut cur = eps;
    for h in 1..=n {
        if h > 1 {
            cur *= h as f64;
        }
        out.push(cur);
    }
    out
}

/// Consensus error bound for `n` normal followers.
pub fn error_bound(n: usize, eps: f64) -> Result<f64, MsrError> {
    if n == 0 {
        return Err(MsrError::ZeroNodes);
    }
    if !(eps > 0.0) {
        return Err(MsrError::BadThreshold(eps));
    }
    Ok(layer_bounds(n, eps).iter().sum())
}

/// Tighter bound when `direct` of the `n` normal followers hear the leader
/// directly: the remaining layers plus a single term for the direct ones.
pub fn error_bound_layered(n: usize, direct: usize, eps: f64, direct_term: f64) -> Result<f64, MsrError> {
    if direct > n {
        return Err(MsrError::BadCounts { direct, total: n });
    }
    if !(eps > 0.0) {
        return Err(MsrError::BadThreshold(eps));
    }
    Ok(layer_bounds(n - direct, eps).iter().sum::<f64>() + direct_term)
}

/// Error bound for first-order direct followers: `max(T eta / (2 - alpha T), eps)`
/// where `eta` is the largest effective compensation gain.
pub fn direct_term_first(period: f64, alpha: f64, eta: f64, eps: f64) -> f64 {
    (period * eta / (2.0 - alpha * period)).max(eps)
}
