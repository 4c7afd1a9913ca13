//! Exact checkers for robust following graphs and related conditions.
//!
//! All checkers reduce "for every nonempty S, some node of S is r-reachable"
//! to a peeling loop: start from the largest admissible S and repeatedly drop
//! any node that is r-reachable. Path counts only shrink as S grows, so the
//! loop ends at the unique maximal violating set, or at the empty set when the
//! condition holds.

use rayon::prelude::*;
use thiserror::Error;

use crate::digraph::{Digraph, GraphError, Path};
use crate::nodeset::NodeSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RobustnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node {0} is not in S")]
    NotInSet(usize),
    #[error("S is empty")]
    EmptySet,
    #[error("r must be at least 1")]
    ZeroR,
    #[error("graph has {0} leaders; use the leader-set checker")]
    MultipleLeaders(usize),
    #[error("r = {r} exceeds the follower count {followers}")]
    RTooLarge { r: usize, followers: usize },
    #[error("leader set must be a nonempty proper subset of the nodes")]
    BadLeaderSet,
    #[error("precondition unmet: {0}")]
    Precondition(String),
}

/// Which intermediate nodes an independent path may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathPolicy {
    /// Intermediates anywhere in the subgraph, including inside S.
    #[default]
    Relaxed,
    /// Intermediates must lie outside S. Any such path can be cut down to
    /// its last hop, so this mode counts one-hop in-neighbors outside S.
    Strict,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions {
    pub policy: PathPolicy,
    pub parallel: bool,
}

/// Pairwise node-disjoint paths (apart from the shared destination).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndependentPathSet {
    pub paths: Vec<Path>,
}

impl IndependentPathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Removed (possibly faulty) set.
    pub removed: NodeSet,
    /// Nonempty set in which no node is r-reachable.
    pub stuck: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustnessVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Number of removal sets checked before the verdict was reached.
    pub sets_examined: usize,
    /// Number of f-local removal sets in total.
    pub f_local_sets: usize,
}

/// Maximum number of independent paths of at most `l` hops into `i` from
/// nodes outside `s`. With `stop_at`, the search ends as soon as that many
/// are found.
pub fn independent_path_count(
    g: &Digraph,
    i: usize,
    s: NodeSet,
    l: usize,
    stop_at: Option<usize>,
) -> Result<(usize, IndependentPathSet), RobustnessError> {
    independent_paths_within(g, i, s, g.nodes(), l, stop_at, PathPolicy::Relaxed)
}

pub fn is_r_reachable(
    g: &Digraph,
    i: usize,
    s: NodeSet,
    l: usize,
    r: usize,
) -> Result<bool, RobustnessError> {
    Ok(independent_path_count(g, i, s, l, Some(r))?.0 >= r)
}

/// Independent path search restricted to nodes of `within`.
pub fn independent_paths_within(
    g: &Digraph,
    i: usize,
    s: NodeSet,
    within: NodeSet,
    l: usize,
    stop_at: Option<usize>,
    policy: PathPolicy,
) -> Result<(usize, IndependentPathSet), RobustnessError> {
    if i >= g.n() {
        return Err(GraphError::InvalidNode { id: i, n: g.n() }.into());
    }
    if l == 0 {
        return Err(GraphError::ZeroHops.into());
    }
    if s.is_empty() {
        return Err(RobustnessError::EmptySet);
    }
    if !s.contains(i) {
        return Err(RobustnessError::NotInSet(i));
    }
    let l = l.min(g.n().saturating_sub(1)).max(1);
    let l = if policy == PathPolicy::Strict { 1 } else { l };
    let paths = entry_paths(g, i, s, within.with(i), l);
    let best = max_disjoint(&paths, i, stop_at.unwrap_or(usize::MAX));
    let set = IndependentPathSet {
        paths: best.iter().map(|&k| paths[k].clone()).collect(),
    };
    Ok((set.len(), set))
}

/// Paths into `i` whose source lies outside `s` and whose intermediates lie
/// inside `s`. Every qualifying path contains a suffix of this shape, so
/// restricting to them does not change the maximum disjoint count.
fn entry_paths(g: &Digraph, i: usize, s: NodeSet, within: NodeSet, l: usize) -> Vec<Path> {
    fn walk(
        g: &Digraph,
        s: NodeSet,
        within: NodeSet,
        l: usize,
        visited: NodeSet,
        rev: &mut Vec<usize>,
        out: &mut Vec<Path>,
    ) {
        let head = *rev.last().unwrap();
        for j in g.in_adj(head).intersection(within).difference(visited) {
            rev.push(j);
            if !s.contains(j) {
                out.push(Path::from_reversed(rev));
            } else if rev.len() <= l {
                walk(g, s, within, l, visited.with(j), rev, out);
            }
            rev.pop();
        }
    }
    let mut out = Vec::new();
    let mut rev = vec![i];
    walk(g, s, within, l, NodeSet::singleton(i), &mut rev, &mut out);
    out
}

/// Branch and bound over paths grouped by their last hop. Paths sharing a
/// penultimate node conflict, so the group count bounds the answer.
fn max_disjoint(paths: &[Path], dest: usize, stop_at: usize) -> Vec<usize> {
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (k, p) in paths.iter().enumerate() {
        let pen = p.nodes()[p.nodes().len() - 2];
        match groups.iter_mut().find(|(q, _)| *q == pen) {
            Some((_, v)) => v.push(k),
            None => groups.push((pen, vec![k])),
        }
    }
    groups.sort_by_key(|(q, _)| *q);
    let masks: Vec<NodeSet> = paths.iter().map(|p| p.node_set().without(dest)).collect();

    struct Search<'a> {
        groups: &'a [(usize, Vec<usize>)],
        masks: &'a [NodeSet],
        stop_at: usize,
        best: Vec<usize>,
        cur: Vec<usize>,
    }
    impl Search<'_> {
        fn go(&mut self, g: usize, used: NodeSet) {
            if self.best.len() >= self.stop_at {
                return;
            }
            if self.cur.len() > self.best.len() {
                self.best = self.cur.clone();
                if self.best.len() >= self.stop_at {
                    return;
                }
            }
            if g == self.groups.len() || self.cur.len() + self.groups.len() - g <= self.best.len() {
                return;
            }
            for &k in &self.groups[g].1 {
                if self.masks[k].is_disjoint(used) {
                    self.cur.push(k);
                    self.go(g + 1, used.union(self.masks[k]));
                    self.cur.pop();
                }
            }
            self.go(g + 1, used);
        }
    }
    let mut search = Search {
        groups: &groups,
        masks: &masks,
        stop_at,
        best: Vec::new(),
        cur: Vec::new(),
    };
    search.go(0, NodeSet::empty());
    let mut best = search.best;
    best.sort_unstable();
    best
}

/// Whether every node outside `a` has at most `f` members of `a` in its
/// `l`-hop in-neighborhood. Returns the first violating node otherwise.
pub fn f_local_violation(in_hoods: &[NodeSet], a: NodeSet, f: usize) -> Option<usize> {
    (0..in_hoods.len()).find(|&i| !a.contains(i) && in_hoods[i].intersection(a).len() > f)
}

/// All f-local subsets of the followers, ordered by size then
/// lexicographically.
pub fn enumerate_f_local_sets(
    g: &Digraph,
    f: usize,
    l: usize,
) -> Result<Vec<NodeSet>, RobustnessError> {
    f_local_subsets(g, g.followers(), f, l)
}

fn f_local_subsets(
    g: &Digraph,
    pool: NodeSet,
    f: usize,
    l: usize,
) -> Result<Vec<NodeSet>, RobustnessError> {
    let hoods = g.in_neighborhoods(l)?;
    Ok(pool
        .subsets_by_size(pool.len())
        .filter(|&a| f_local_violation(&hoods, a, f).is_none())
        .collect())
}

/// Shrinks `start` by removing nodes that pass `reachable` until none does.
fn peel(start: NodeSet, mut reachable: impl FnMut(usize, NodeSet) -> bool) -> NodeSet {
    let mut s = start;
    'outer: loop {
        for i in s {
            if reachable(i, s) {
                s.remove(i);
                continue 'outer;
            }
        }
        return s;
    }
}

fn run_over_removals(
    removals: Vec<NodeSet>,
    parallel: bool,
    check: impl Fn(NodeSet) -> Option<NodeSet> + Sync,
) -> RobustnessVerdict {
    let total = removals.len();
    let found = if parallel {
        removals
            .par_iter()
            .enumerate()
            .find_map_first(|(k, &fset)| check(fset).map(|s| (k, fset, s)))
    } else {
        removals
            .iter()
            .enumerate()
            .find_map(|(k, &fset)| check(fset).map(|s| (k, fset, s)))
    };
    match found {
        Some((k, removed, stuck)) => RobustnessVerdict {
            holds: false,
            witness: Some(Witness { removed, stuck }),
            sets_examined: k + 1,
            f_local_sets: total,
        },
        None => RobustnessVerdict {
            holds: true,
            witness: None,
            sets_examined: total,
            f_local_sets: total,
        },
    }
}

fn check_r(r: usize) -> Result<(), RobustnessError> {
    if r == 0 {
        Err(RobustnessError::ZeroR)
    } else {
        Ok(())
    }
}

/// Robust following check for a graph with a single secure leader.
pub fn is_robust_following(
    g: &Digraph,
    r: usize,
    l: usize,
    f: usize,
) -> Result<RobustnessVerdict, RobustnessError> {
    is_robust_following_with(g, r, l, f, CheckOptions::default())
}

pub fn is_robust_following_with(
    g: &Digraph,
    r: usize,
    l: usize,
    f: usize,
    opts: CheckOptions,
) -> Result<RobustnessVerdict, RobustnessError> {
    check_r(r)?;
    if l == 0 {
        return Err(GraphError::ZeroHops.into());
    }
    if g.leaders().len() != 1 {
        return Err(RobustnessError::MultipleLeaders(g.leaders().len()));
    }
    let w = g.followers();
    if r > w.len() {
        return Err(RobustnessError::RTooLarge {
            r,
            followers: w.len(),
        });
    }
    let wd = g.direct_followers();
    let removals = enumerate_f_local_sets(g, f, l)?;
    if wd == w {
        let total = removals.len();
        return Ok(RobustnessVerdict {
            holds: true,
            witness: None,
            sets_examined: 0,
            f_local_sets: total,
        });
    }
    Ok(run_over_removals(removals, opts.parallel, |fset| {
        let h = w.difference(fset);
        let stuck = peel(h.difference(wd), |i, s| {
            independent_paths_within(g, i, s, h, l, Some(r), opts.policy)
                .map(|(c, _)| c >= r)
                .unwrap_or(false)
        });
        (!stuck.is_empty()).then_some(stuck)
    }))
}

/// Robust following check with respect to a leader set whose members may
/// themselves be faulty. Removal sets range over all f-local node sets.
pub fn is_robust_following_wrt(
    g: &Digraph,
    leaders: NodeSet,
    r: usize,
    l: usize,
    f: usize,
) -> Result<RobustnessVerdict, RobustnessError> {
    is_robust_following_wrt_with(g, leaders, r, l, f, CheckOptions::default())
}

pub fn is_robust_following_wrt_with(
    g: &Digraph,
    leaders: NodeSet,
    r: usize,
    l: usize,
    f: usize,
    opts: CheckOptions,
) -> Result<RobustnessVerdict, RobustnessError> {
    check_r(r)?;
    if l == 0 {
        return Err(GraphError::ZeroHops.into());
    }
    let v = g.nodes();
    if leaders.is_empty() || leaders == v || !leaders.is_subset(v) {
        return Err(RobustnessError::BadLeaderSet);
    }
    let removals = f_local_subsets(g, v, f, l)?;
    Ok(run_over_removals(removals, opts.parallel, |fset| {
        let h = v.difference(fset);
        let stuck = peel(h.difference(leaders), |i, s| {
            independent_paths_within(g, i, s, h, l, Some(r), opts.policy)
                .map(|(c, _)| c >= r)
                .unwrap_or(false)
        });
        (!stuck.is_empty()).then_some(stuck)
    }))
}

/// The one-hop baseline: at least `2f+1` direct followers, and every
/// nonempty set of other followers has a member with `2f+1` in-neighbors
/// outside the set.
pub fn is_robust_leader_follower_2f1(g: &Digraph, f: usize) -> Result<bool, RobustnessError> {
    if g.leaders().len() != 1 {
        return Err(RobustnessError::MultipleLeaders(g.leaders().len()));
    }
    let need = 2 * f + 1;
    let wd = g.direct_followers();
    if wd.len() < need {
        return Ok(false);
    }
    let stuck = peel(g.followers().difference(wd), |i, s| {
        g.in_adj(i).difference(s).len() >= need
    });
    Ok(stuck.is_empty())
}

/// Largest `r` (from 1 up to the follower count) for which the graph is an
/// r-robust following graph, or 0 when even `r = 1` fails.
pub fn max_robust_r(
    g: &Digraph,
    l: usize,
    f: usize,
    opts: CheckOptions,
) -> Result<usize, RobustnessError> {
    let mut best = 0;
    for r in 1..=g.followers().len() {
        if !is_robust_following_with(g, r, l, f, opts)?.holds {
            break;
        }
        best = r;
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralReport {
    pub direct_count: usize,
    pub required: usize,
    pub direct_ok: bool,
    /// A follower whose `l`-hop in-neighborhood holds at least `2f+1` direct
    /// followers.
    pub hub: Option<usize>,
    /// Non-direct followers with fewer than `2f+1` in-neighbors.
    pub low_in_degree: Vec<usize>,
    pub edge_count: usize,
    /// Minimum edge count implied by the in-degree requirements.
    pub edge_floor: usize,
}

impl StructuralReport {
    pub fn all_hold(&self) -> bool {
        self.direct_ok
            && self.hub.is_some()
            && self.low_in_degree.is_empty()
            && self.edge_count >= self.edge_floor
    }
}

/// Necessary structure of an (f+1)-robust following graph with `l` hops
/// whose followers are not all direct.
pub fn structural_properties(
    g: &Digraph,
    f: usize,
    l: usize,
) -> Result<StructuralReport, RobustnessError> {
    let w = g.followers();
    let wd = g.direct_followers();
    if wd == w {
        return Err(RobustnessError::Precondition("every follower is direct".into()));
    }
    if f + 1 > w.len() || !is_robust_following(g, f + 1, l, f)?.holds {
        return Err(RobustnessError::Precondition(format!(
            "graph is not {}-robust following with {l} hops under the {f}-local model",
            f + 1
        )));
    }
    Ok(structure_of(g, f, l)?)
}

/// Evaluates the structural clauses without checking the precondition.
pub fn structure_of(g: &Digraph, f: usize, l: usize) -> Result<StructuralReport, GraphError> {
    let need = 2 * f + 1;
    let w = g.followers();
    let wd = g.direct_followers();
    let hoods = g.in_neighborhoods(l)?;
    let reaches = |i: usize| hoods[i].intersection(wd).len() >= need;
    let hub = w
        .difference(wd)
        .iter()
        .find(|&i| reaches(i))
        .or_else(|| wd.iter().find(|&i| reaches(i)));
    let non_direct = w.difference(wd);
    let low_in_degree = non_direct
        .iter()
        .filter(|&i| g.in_adj(i).len() < need)
        .collect();
    Ok(StructuralReport {
        direct_count: wd.len(),
        required: need,
        direct_ok: wd.len() >= need,
        hub,
        low_in_degree,
        edge_count: g.edge_count(),
        edge_floor: need * (non_direct.len() + 1),
    })
}
