//! Fixed-width bitset over dense node ids.

use std::fmt;

/// Largest supported node count. Node sets are single machine words so the
/// exponential checkers can enumerate subsets cheaply.
pub const MAX_NODES: usize = 64;

/// A set of node ids in `0..MAX_NODES`, iterated in ascending order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const fn empty() -> Self {
        NodeSet(0)
    }

    /// All ids in `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_NODES);
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_NODES);
        NodeSet(1u64 << i)
    }

    pub const fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_NODES && self.0 & (1u64 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < MAX_NODES);
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        if i < MAX_NODES {
            self.0 &= !(1u64 << i);
        }
    }

    pub fn with(self, i: usize) -> Self {
        let mut s = self;
        s.insert(i);
        s
    }

    pub fn without(self, i: usize) -> Self {
        let mut s = self;
        s.remove(i);
        s
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: NodeSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest member.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset of `self`, in increasing order of the underlying bits.
    pub fn subsets(self) -> Subsets {
        Subsets {
            universe: self.0,
            next: Some(0),
        }
    }

    /// Subsets of `self` ordered by size, then lexicographically on their
    /// ascending member lists.
    pub fn subsets_by_size(self, max_size: usize) -> impl Iterator<Item = NodeSet> {
        let members = self.to_vec();
        let top = max_size.min(members.len());
        (0..=top).flat_map(move |k| Combinations::new(members.clone(), k))
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = NodeSet::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl IntoIterator for NodeSet {
    type Item = usize;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

pub struct Subsets {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = NodeSet;
    fn next(&mut self) -> Option<NodeSet> {
        let cur = self.next?;
        // Standard submask walk in increasing order.
        self.next = if cur == self.universe {
            None
        } else {
            Some(cur.wrapping_sub(self.universe) & self.universe)
        };
        Some(NodeSet(cur))
    }
}

/// k-combinations of a sorted member list in lexicographic order.
struct Combinations {
    members: Vec<usize>,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(members: Vec<usize>, k: usize) -> Self {
        let done = k > members.len();
        Combinations {
            members,
            idx: (0..k).collect(),
            done,
        }
    }
}

impl Iterator for Combinations {
    type Item = NodeSet;
    fn next(&mut self) -> Option<NodeSet> {
        if self.done {
            return None;
        }
        let out: NodeSet = self.idx.iter().map(|&p| self.members[p]).collect();
        let n = self.members.len();
        let k = self.idx.len();
        let mut pos = k;
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            if self.idx[pos] < n - k + pos {
                self.idx[pos] += 1;
                for q in pos + 1..k {
                    self.idx[q] = self.idx[q - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
