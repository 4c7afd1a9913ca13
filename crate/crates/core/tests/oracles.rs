//! Library results against the brute-force references in `common`.

mod common;

use common::*;
use proptest::prelude::*;
use relaycons::msr::{error_bound, layer_bounds, minimum_message_cover, Message};
use relaycons::robustness::{enumerate_f_local_sets, is_robust_following, is_robust_following_wrt};
use relaycons::{Digraph, NodeSet, Path};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Digraph> {
    (3..=max_n, any::<u64>(), 0.2f64..0.8).prop_map(|(n, seed, p)| random_graph(&mut Lcg(seed), n, p))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(128) })]

    #[test]
    fn path_enumeration_matches_brute_force(g in graph_strategy(6), l in 1usize..4, drop in 0usize..6) {
        let allowed = g.nodes().without(drop % g.n());
        for i in allowed {
            let mut want = all_paths_to(&g, i, l, allowed);
            want.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
            let got: Vec<Vec<usize>> = g
                .enumerate_paths_to(i, l, allowed)
                .unwrap()
                .iter()
                .map(|p| p.nodes().to_vec())
                .collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn neighborhoods_match_distances(g in graph_strategy(7), l in 1usize..5) {
        for i in 0..g.n() {
            prop_assert_eq!(g.in_neighbors_l(i, l).unwrap(), in_hood(&g, i, l));
        }
    }

    #[test]
    fn f_local_sets_match_brute_force(g in graph_strategy(6), l in 1usize..3, f in 0usize..3) {
        let mut got = enumerate_f_local_sets(&g, f, l).unwrap();
        let mut want = f_local_brute(&g, g.followers(), f, l);
        got.sort_by_key(|s| s.bits());
        want.sort_by_key(|s| s.bits());
        prop_assert_eq!(got, want);
    }

    #[test]
    fn checker_matches_brute_force(g in graph_strategy(6), l in 1usize..4, f in 0usize..2, r in 1usize..3) {
        prop_assume!(r <= g.followers().len());
        let got = is_robust_following(&g, r, l, f).unwrap();
        prop_assert_eq!(got.holds, robust_following_brute(&g, r, l, f));
        if let Some(w) = got.witness {
            let h = g.followers().difference(w.removed);
            prop_assert!(!w.stuck.is_empty() && w.stuck.is_subset(h.difference(g.direct_followers())));
            for i in w.stuck {
                prop_assert!(independent_brute(&g, i, w.stuck, l, h) < r);
            }
        }
    }

    #[test]
    fn leader_set_checker_matches_brute_force(g in graph_strategy(6), l in 1usize..3, r in 1usize..3) {
        let leaders: NodeSet = [0, 1].into_iter().collect();
        let edges = g.edges().into_iter().filter(|&(_, i)| i != 1);
        let g = Digraph::new(g.n(), edges, leaders).unwrap();
        let got = is_robust_following_wrt(&g, leaders, r, l, 1).unwrap().holds;
        prop_assert_eq!(got, robust_following_wrt_brute(&g, leaders, r, l, 1));
    }

    #[test]
    fn cover_matches_subset_search(seed in any::<u64>(), count in 1usize..7) {
        let complete = Digraph::new(9, (0..9).flat_map(|j| (0..9).filter(move |&i| i != j).map(move |i| (j, i))), [0]).unwrap();
        let mut rng = Lcg(seed);
        let mut msgs = Vec::new();
        let mut masks = Vec::new();
        for _ in 0..count {
            let hops = 1 + rng.below(3);
            let mut nodes = Vec::new();
            while nodes.len() < hops {
                let u = rng.below(8);
                if !nodes.contains(&u) {
                    nodes.push(u);
                }
            }
            masks.push(nodes.iter().fold(0u64, |m, &u| m | 1 << u));
            nodes.push(8);
            msgs.push(Message::new(0.0, Path::new(&complete, nodes, 3).unwrap()));
        }
        let (size, cover) = minimum_message_cover(&msgs, 8).unwrap();
        prop_assert_eq!(size, mmc_brute(&masks));
        prop_assert!(masks.iter().all(|&m| m & cover.bits() != 0));
    }
}

#[test]
fn error_bound_three_ways() {
    for n in 1..=12 {
        let lib = error_bound(n, 0.1).unwrap();
        let closed = error_bound_closed(n as u64, 0.1);
        let cumulative = error_bound_cumulative(n, 0.1);
        assert!((lib - closed).abs() <= 1e-9 * closed, "n={n}: {lib} vs {closed}");
        assert!((lib - cumulative).abs() <= 1e-9 * closed, "n={n}: {lib} vs {cumulative}");
    }
    assert!((error_bound(3, 0.1).unwrap() - 0.9).abs() < 1e-12);
    let layers = layer_bounds(4, 0.1);
    for (h, v) in layers.iter().enumerate() {
        assert!((v - factorial(h as u64 + 1) * 0.1).abs() < 1e-12);
    }
}
