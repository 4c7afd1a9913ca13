//! Multi-hop resilient leader-follower consensus: graph checkers, the
//! multi-hop weighted MSR filter, follower dynamics, Byzantine adversaries and
//! a round-synchronous simulator.

pub mod adversary;
pub mod digraph;
pub mod dynamics;
pub mod engine;
pub mod generate;
pub mod msr;
pub mod nodeset;
pub mod robustness;
pub mod scenario;

pub use digraph::{Digraph, GraphError, Path};
pub use nodeset::{NodeSet, MAX_NODES};
