//! Brute-force reference implementations used only by tests. They share no
//! code with the library beyond the graph and set types.

#![allow(dead_code)]

use relaycons::{Digraph, NodeSet};

/// Hop distance matrix `dist[j][i]` (usize::MAX when unreachable).
pub fn distances(g: &Digraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut d = vec![vec![usize::MAX; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (j, i) in g.edges() {
        d[j][i] = 1;
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if d[a][k] != usize::MAX && d[k][b] != usize::MAX && d[a][k] + d[k][b] < d[a][b] {
                    d[a][b] = d[a][k] + d[k][b];
                }
            }
        }
    }
    d
}

pub fn in_hood(g: &Digraph, i: usize, l: usize) -> NodeSet {
    let d = distances(g);
    (0..g.n()).filter(|&j| d[j][i] <= l).collect()
}

/// Every node sequence of 2..=l+1 distinct nodes ending at `i`, filtered for
/// edges and membership in `allowed`.
pub fn all_paths_to(g: &Digraph, i: usize, l: usize, allowed: NodeSet) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut out = Vec::new();
    let mut seq = Vec::new();
    fn rec(g: &Digraph, n: usize, i: usize, l: usize, allowed: NodeSet, seq: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if seq.len() >= 1 {
            let mut full = seq.clone();
            full.push(i);
            let distinct: NodeSet = full.iter().copied().collect();
            if distinct.len() == full.len()
                && full.iter().all(|&u| allowed.contains(u))
                && full.windows(2).all(|w| g.has_edge(w[0], w[1]))
            {
                out.push(full);
            }
        }
        if seq.len() == l {
            return;
        }
        for u in 0..n {
            seq.push(u);
            rec(g, n, i, l, allowed, seq, out);
            seq.pop();
        }
    }
    if allowed.contains(i) {
        rec(g, n, i, l, allowed, &mut seq, &mut out);
    }
    out
}

/// Candidate independent paths: sources outside `s`, every node in `within`.
pub fn candidate_paths(g: &Digraph, i: usize, s: NodeSet, l: usize, within: NodeSet) -> Vec<Vec<usize>> {
    all_paths_to(g, i, l, within.with(i))
        .into_iter()
        .filter(|p| !s.contains(p[0]))
        .collect()
}

/// Largest subset of `paths` that pairwise share only the last node.
pub fn max_disjoint_brute(paths: &[Vec<usize>]) -> usize {
    let masks: Vec<u64> = paths
        .iter()
        .map(|p| p[..p.len() - 1].iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let mut best = 0;
    for sub in 0u32..(1 << paths.len()) {
        let mut used = 0u64;
        let mut ok = true;
        for (k, &m) in masks.iter().enumerate() {
            if sub >> k & 1 == 1 {
                if used & m != 0 {
                    ok = false;
                    break;
                }
                used |= m;
            }
        }
        if ok {
            best = best.max(sub.count_ones() as usize);
        }
    }
    best
}

pub fn independent_brute(g: &Digraph, i: usize, s: NodeSet, l: usize, within: NodeSet) -> usize {
    max_disjoint_brute(&candidate_paths(g, i, s, l, within))
}

fn subsets(pool: NodeSet) -> Vec<NodeSet> {
    let items = pool.to_vec();
    (0u64..(1 << items.len()))
        .map(|m| (0..items.len()).filter(|&k| m >> k & 1 == 1).map(|k| items[k]).collect())
        .collect()
}

pub fn f_local_brute(g: &Digraph, pool: NodeSet, f: usize, l: usize) -> Vec<NodeSet> {
    subsets(pool)
        .into_iter()
        .filter(|&a| (0..g.n()).all(|i| a.contains(i) || in_hood(g, i, l).intersection(a).len() <= f))
        .collect()
}

/// Robust following check by enumerating every removal set and every S.
pub fn robust_following_brute(g: &Digraph, r: usize, l: usize, f: usize) -> bool {
    let w = g.followers();
    let wd = g.direct_followers();
    if wd == w {
        return r <= w.len();
    }
    f_local_brute(g, w, f, l).into_iter().all(|fset| {
        let h = w.difference(fset);
        subsets(h.difference(wd))
            .into_iter()
            .filter(|s| !s.is_empty())
            .all(|s| s.iter().any(|i| independent_brute(g, i, s, l, h) >= r))
    })
}

/// Leader-set variant of [`robust_following_brute`].
pub fn robust_following_wrt_brute(g: &Digraph, leaders: NodeSet, r: usize, l: usize, f: usize) -> bool {
    let v = g.nodes();
    f_local_brute(g, v, f, l).into_iter().all(|fset| {
        let h = v.difference(fset);
        subsets(h.difference(leaders))
            .into_iter()
            .filter(|s| !s.is_empty())
            .all(|s| s.iter().any(|i| independent_brute(g, i, s, l, h) >= r))
    })
}

/// Minimum cover size of path masks by plain subset search.
pub fn mmc_brute(masks: &[u64]) -> usize {
    let pool = masks.iter().fold(0u64, |a, &m| a | m);
    let items: Vec<u32> = (0..64).filter(|&b| pool >> b & 1 == 1).collect();
    let mut best = items.len();
    for sub in 0u64..(1 << items.len()) {
        let size = sub.count_ones() as usize;
        if size >= best {
            continue;
        }
        let chosen = (0..items.len()).filter(|&k| sub >> k & 1 == 1).fold(0u64, |a, k| a | 1 << items[k]);
        if masks.iter().all(|&m| m & chosen != 0) {
            best = size;
        }
    }
    best
}

pub fn factorial(h: u64) -> f64 {
    (1..=h).product::<u64>() as f64
}

/// Error bound via the closed form `eps * sum h!`.
pub fn error_bound_closed(n: u64, eps: f64) -> f64 {
    (1..=n).map(|h| factorial(h) * eps).sum()
}

/// Error bound via `eps_h = eps + sum_{q<h} q eps_q`.
pub fn error_bound_cumulative(n: usize, eps: f64) -> f64 {
    let mut terms: Vec<f64> = Vec::new();
    for _ in 0..n {
        let next = eps + terms.iter().enumerate().map(|(q, e)| (q + 1) as f64 * e).sum::<f64>();
        terms.push(next);
    }
    terms.iter().sum()
}

/// Small deterministic generator for test inputs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        (self.next() as f64 / (1u64 << 31) as f64) < p
    }
}

/// Random digraph with leader 0 and edge probability `p`.
pub fn random_graph(rng: &mut Lcg, n: usize, p: f64) -> Digraph {
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 1..n {
            if i != j && rng.chance(p) {
                edges.push((j, i));
            }
        }
    }
    Digraph::new(n, edges, [0]).unwrap()
}
