//! Directed communication graphs with designated leaders.
//!
//! An edge `(j, i)` means node `i` receives from node `j`. Nodes are dense ids
//! `0..n`, which lets every neighborhood and subset be a [`NodeSet`].

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::nodeset::{NodeSet, MAX_NODES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node count {0} outside 1..={MAX_NODES}")]
    NodeCount(usize),
    #[error("node id {id} out of range for {n} nodes")]
    InvalidNode { id: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("graph has no leader")]
    NoLeader,
    #[error("graph has no follower")]
    NoFollower,
    #[error("hop count must be at least 1")]
    ZeroHops,
    #[error("node set is empty")]
    EmptySet,
    #[error("node {node} is not in the allowed set")]
    NotAllowed { node: usize },
    #[error("invalid path {0:?}: {1}")]
    InvalidPath(Vec<usize>, &'static str),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    in_adj: Vec<NodeSet>,
    out_adj: Vec<NodeSet>,
    leaders: NodeSet,
}

impl Digraph {
    /// Builds a graph and enforces that it has at least one leader and one
    /// follower. Duplicate edges collapse.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        leaders: impl IntoIterator<Item = usize>,
    ) -> Result<Self, GraphError> {
        let g = Self::build(n, edges, leaders)?;
        if g.leaders.is_empty() {
            return Err(GraphError::NoLeader);
        }
        if g.followers().is_empty() {
            return Err(GraphError::NoFollower);
        }
        Ok(g)
    }

    fn build(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        leaders: impl IntoIterator<Item = usize>,
    ) -> Result<Self, GraphError> {
        if n == 0 || n > MAX_NODES {
            return Err(GraphError::NodeCount(n));
        }
        let mut in_adj = vec![NodeSet::empty(); n];
        let mut out_adj = vec![NodeSet::empty(); n];
        for (j, i) in edges {
            for id in [j, i] {
                if id >= n {
                    return Err(GraphError::InvalidNode { id, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            in_adj[i].insert(j);
            out_adj[j].insert(i);
        }
        let mut set = NodeSet::empty();
        for d in leaders {
            if d >= n {
                return Err(GraphError::InvalidNode { id: d, n });
            }
            set.insert(d);
        }
        Ok(Digraph {
            n,
            in_adj,
            out_adj,
            leaders: set,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    pub fn leaders(&self) -> NodeSet {
        self.leaders
    }

    /// The leader when there is exactly one.
    pub fn single_leader(&self) -> Option<usize> {
        (self.leaders.len() == 1).then(|| self.leaders.first().unwrap())
    }

    pub fn followers(&self) -> NodeSet {
        self.nodes().difference(self.leaders)
    }

    /// Followers with an edge from some leader.
    pub fn direct_followers(&self) -> NodeSet {
        self.leaders
            .iter()
            .fold(NodeSet::empty(), |acc, d| acc.union(self.out_adj[d]))
            .difference(self.leaders)
    }

    pub fn in_adj(&self, i: usize) -> NodeSet {
        self.in_adj[i]
    }

    pub fn out_adj(&self, i: usize) -> NodeSet {
        self.out_adj[i]
    }

    pub fn has_edge(&self, j: usize, i: usize) -> bool {
        i < self.n && self.in_adj[i].contains(j)
    }

    pub fn edge_count(&self) -> usize {
        self.in_adj.iter().map(|s| s.len()).sum()
    }

    /// Edges `(j, i)` sorted by source then destination.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|j| self.out_adj[j].iter().map(move |i| (j, i)))
            .collect()
    }

    fn check_node(&self, i: usize) -> Result<(), GraphError> {
        if i >= self.n {
            Err(GraphError::InvalidNode { id: i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Nodes that reach `i` over at most `l` hops, including `i` itself.
    pub fn in_neighbors_l(&self, i: usize, l: usize) -> Result<NodeSet, GraphError> {
        self.check_node(i)?;
        if l == 0 {
            return Err(GraphError::ZeroHops);
        }
        Ok(bounded_bfs(&self.in_adj, i, l.min(self.n - 1)))
    }

    /// Nodes reachable from `i` over at most `l` hops, including `i` itself.
    pub fn out_neighbors_l(&self, i: usize, l: usize) -> Result<NodeSet, GraphError> {
        self.check_node(i)?;
        if l == 0 {
            return Err(GraphError::ZeroHops);
        }
        Ok(bounded_bfs(&self.out_adj, i, l.min(self.n - 1)))
    }

    /// All `l`-hop in-neighborhoods at once.
    pub fn in_neighborhoods(&self, l: usize) -> Result<Vec<NodeSet>, GraphError> {
        (0..self.n).map(|i| self.in_neighbors_l(i, l)).collect()
    }

    /// Every simple path of `1..=l` hops that ends at `i` and stays inside
    /// `allowed`.
    ///
    /// Paths come out in depth-first order from the destination backwards,
    /// visiting in-neighbors by ascending id: that is lexicographic order on
    /// the node sequence read from the destination, so `(1,2)` precedes
    /// `(0,1,2)`.
    pub fn enumerate_paths_to(
        &self,
        i: usize,
        l: usize,
        allowed: NodeSet,
    ) -> Result<Vec<Path>, GraphError> {
        self.check_node(i)?;
        if l == 0 {
            return Err(GraphError::ZeroHops);
        }
        if !allowed.contains(i) {
            return Err(GraphError::NotAllowed { node: i });
        }
        let mut out = Vec::new();
        let mut rev = vec![i];
        self.walk_back(l.min(self.n - 1), allowed, NodeSet::singleton(i), &mut rev, &mut out);
        Ok(out)
    }

    fn walk_back(
        &self,
        l: usize,
        allowed: NodeSet,
        visited: NodeSet,
        rev: &mut Vec<usize>,
        out: &mut Vec<Path>,
    ) {
        let head = *rev.last().unwrap();
        for j in self.in_adj[head].intersection(allowed).difference(visited) {
            rev.push(j);
            out.push(Path::from_reversed(rev));
            if rev.len() <= l {
                self.walk_back(l, allowed, visited.with(j), rev, out);
            }
            rev.pop();
        }
    }

    /// Subgraph induced by `h`, relabelled densely in ascending id order.
    /// Returns the graph and, for each new id, the original id.
    ///
    /// Leader membership is `leaders ∩ h`, which may be empty; the
    /// leader/follower invariant of [`Digraph::new`] is not enforced here.
    pub fn induced_subgraph(&self, h: NodeSet) -> Result<(Digraph, Vec<usize>), GraphError> {
        if h.is_empty() {
            return Err(GraphError::EmptySet);
        }
        if let Some(bad) = h.difference(self.nodes()).first() {
            return Err(GraphError::InvalidNode { id: bad, n: self.n });
        }
        let original = h.to_vec();
        let mut relabel = vec![usize::MAX; self.n];
        for (new, &old) in original.iter().enumerate() {
            relabel[old] = new;
        }
        let edges = self
            .edges()
            .into_iter()
            .filter(|&(j, i)| h.contains(j) && h.contains(i))
            .map(|(j, i)| (relabel[j], relabel[i]));
        let leaders = self.leaders.intersection(h).iter().map(|d| relabel[d]);
        let g = Digraph::build(original.len(), edges, leaders)?;
        Ok((g, original))
    }

    /// Whether every node is reachable from `d` along directed edges.
    pub fn has_spanning_tree_rooted(&self, d: usize) -> Result<bool, GraphError> {
        self.check_node(d)?;
        Ok(bounded_bfs(&self.out_adj, d, self.n) == self.nodes())
    }

    /// Parses the plain-text edge-list format:
    ///
    /// ```text
    /// # comment
    /// n 4
    /// leaders 0
    /// 0 1
    /// 1 2
    /// ```
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut n = None;
        let mut leaders: Option<Vec<usize>> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |msg: String| GraphError::Parse { line, msg };
            let mut toks = content.split_whitespace();
            let head = toks.next().unwrap();
            let num = |t: &str| -> Result<usize, GraphError> {
                t.parse::<usize>()
                    .map_err(|_| perr(format!("expected a node id, found `{t}`")))
            };
            match head {
                "n" => {
                    if n.is_some() {
                        return Err(perr("duplicate `n` line".into()));
                    }
                    let v = toks.next().ok_or_else(|| perr("missing count".into()))?;
                    n = Some(num(v)?);
                    if toks.next().is_some() {
                        return Err(perr("trailing tokens".into()));
                    }
                }
                "leaders" => {
                    if n.is_none() {
                        return Err(perr("`leaders` must follow `n`".into()));
                    }
                    if leaders.is_some() {
                        return Err(perr("duplicate `leaders` line".into()));
                    }
                    leaders = Some(toks.map(num).collect::<Result<_, _>>()?);
                }
                _ => {
                    if leaders.is_none() {
                        return Err(perr("edges must follow `n` and `leaders`".into()));
                    }
                    let j = num(head)?;
                    let i = num(toks.next().ok_or_else(|| perr("edge needs two ids".into()))?)?;
                    if toks.next().is_some() {
                        return Err(perr("trailing tokens".into()));
                    }
                    edges.push((j, i));
                }
            }
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `n` line".into(),
        })?;
        let leaders = leaders.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `leaders` line".into(),
        })?;
        Digraph::new(n, edges, leaders)
    }

    /// Canonical text form: header lines then edges sorted by `(j, i)`.
    /// `parse(g.to_text()) == g` and the text is a fixed point.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "n {}", self.n).unwrap();
        s.push_str("leaders");
        for d in self.leaders {
            write!(s, " {d}").unwrap();
        }
        s.push('\n');
        for (j, i) in self.edges() {
            writeln!(s, "{j} {i}").unwrap();
        }
        s
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("n", &self.n)
            .field("leaders", &self.leaders)
            .field("edges", &self.edges())
            .finish()
    }
}

fn bounded_bfs(adj: &[NodeSet], start: usize, depth: usize) -> NodeSet {
    let mut seen = NodeSet::singleton(start);
    let mut frontier = VecDeque::from([(start, 0usize)]);
    while let Some((u, du)) = frontier.pop_front() {
        if du == depth {
            continue;
        }
        for w in adj[u].difference(seen) {
            seen.insert(w);
            frontier.push_back((w, du + 1));
        }
    }
    seen
}

/// A simple directed path, source first. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Path {
    nodes: Arc<[usize]>,
    set: NodeSet,
}

impl Path {
    /// Validates `nodes` as a path of `1..=max_hops` hops in `g`.
    pub fn new(g: &Digraph, nodes: Vec<usize>, max_hops: usize) -> Result<Self, GraphError> {
        if nodes.len() < 2 {
            return Err(GraphError::InvalidPath(nodes, "needs at least one hop"));
        }
        if nodes.len() - 1 > max_hops {
            return Err(GraphError::InvalidPath(nodes, "too many hops"));
        }
        for &u in &nodes {
            g.check_node(u)?;
        }
        let set: NodeSet = nodes.iter().copied().collect();
        if set.len() != nodes.len() {
            return Err(GraphError::InvalidPath(nodes, "repeated node"));
        }
        if nodes.windows(2).any(|w| !g.has_edge(w[0], w[1])) {
            return Err(GraphError::InvalidPath(nodes, "missing edge"));
        }
        Ok(Path {
            nodes: nodes.into(),
            set,
        })
    }

    /// The zero-hop path `(i)` carrying a node's own value.
    pub fn trivial(i: usize) -> Self {
        Path {
            nodes: Arc::from([i]),
            set: NodeSet::singleton(i),
        }
    }

    /// Trusted constructor for sequences produced by graph traversal.
    pub(crate) fn from_reversed(rev: &[usize]) -> Self {
        let nodes: Vec<usize> = rev.iter().rev().copied().collect();
        let set = nodes.iter().copied().collect();
        Path {
            nodes: nodes.into(),
            set,
        }
    }

    #[cfg(test)]
    pub(crate) fn from_nodes_unchecked(nodes: Vec<usize>) -> Self {
        let set = nodes.iter().copied().collect();
        Path {
            nodes: nodes.into(),
            set,
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn destination(&self) -> usize {
        *self.nodes.last().unwrap()
    }

    /// Nodes strictly between source and destination.
    pub fn intermediates(&self) -> &[usize] {
        if self.nodes.len() <= 2 {
            &[]
        } else {
            &self.nodes[1..self.nodes.len() - 1]
        }
    }

    pub fn node_set(&self) -> NodeSet {
        self.set
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, u) in self.nodes.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str(")")
    }
}
