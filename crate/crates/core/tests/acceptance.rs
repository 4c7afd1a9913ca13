//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Tolerances are fixed below.

mod common;

use std::cmp::Reverse;
use std::error::Error;
use std::time::{Duration, Instant};

use common::*;
use rayon::prelude::*;
use relaycons::adversary::{Adversary, AdversaryAssignment, Strategy};
use relaycons::dynamics::{InputSchedule, Order, Sinusoid, Wave};
use relaycons::engine::{error_metrics, run, write_csv, AxisMetrics, Trace};
use relaycons::generate::{self, LEADER_START};
use relaycons::msr::{error_bound, minimum_message_cover, Message};
use relaycons::robustness::{
    independent_path_count, independent_paths_within, is_robust_following, is_robust_following_wrt,
    is_robust_leader_follower_2f1, structure_of, PathPolicy, Witness,
};
use relaycons::scenario::{sample_initial, ScenarioConfig};
use relaycons::{Digraph, NodeSet, Path};

type Res = Result<(bool, String), Box<dyn Error + Send + Sync>>;

/// Steady error above this counts as a failure to converge.
const NOT_CONVERGED: f64 = 1.0;
/// Fraction of the initial gap a stuck follower must keep.
const STUCK_FRACTION: f64 = 0.5;
const SIM_STEPS: usize = 10_000;
const RUN_LIMIT: Duration = Duration::from_secs(60);
const SEED: u64 = 7;

fn main() {
    let criteria: [(&str, fn() -> Res); 14] = [
        ("checker agrees with spanning-tree test, all digraphs n <= 5", c01),
        ("one-hop baseline implies the checker at l = 1", c02),
        ("verdicts are monotone in the hop bound", c03),
        ("certified graphs satisfy the structural clauses", c04),
        ("minimum message cover matches subset search", c05),
        ("independent path count matches subset search", c06),
        ("first-order sufficiency under f-local Byzantine attacks", c07),
        ("first-order necessity via witness stuck-at attacks", c08),
        ("second-order sufficiency and all-direct tracking", c09),
        ("first-order all-direct tracking within eps", c10),
        ("hop dichotomy on the 9- and 15-node analogs", c11),
        ("faulty leaders: certified converges, rejected stalls", c12),
        ("replay yields byte-identical CSV", c13),
        ("two-axis run equals its one-axis projections", c14),
    ];
    let mut failed = 0;
    for (k, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {}  {title} [{detail}] ({:.1}s)",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- corpus

fn corpus() -> Vec<(String, Digraph)> {
    let mut out = Vec::new();
    let mut push = |g: generate::Generated| out.push((g.family.clone(), g.graph));
    push(generate::star(3).unwrap());
    push(generate::star(5).unwrap());
    push(generate::star(7).unwrap());
    push(generate::layered(1, 2).unwrap());
    push(generate::layered(1, 3).unwrap());
    push(generate::layered(2, 2).unwrap());
    push(generate::example1_analog().unwrap());
    push(generate::example2_analog().unwrap());
    for n in 6..=9 {
        for p in [0.3, 0.45, 0.6] {
            for seed in 0..5 {
                push(generate::random(n, p, seed, None, 1).unwrap());
            }
        }
    }
    out
}

// ------------------------------------------------------------ scenarios

/// High values to even ids, low values to odd ids; relayed values are
/// rewritten the same way.
fn split_attack() -> Adversary {
    let even: NodeSet = (0..64).step_by(2).collect();
    let odd: NodeSet = (1..64).step_by(2).collect();
    Adversary::new(Strategy::SplitByDestination(vec![
        (even, Strategy::Oscillate { base: 60.0, amplitude: 5.0, period: 250.0 }),
        (odd, Strategy::Oscillate { base: 0.0, amplitude: 5.0, period: 250.0 }),
    ]))
}

/// The follower with most out-edges, lowest id on ties.
fn busiest_follower(g: &Digraph) -> usize {
    g.followers()
        .iter()
        .max_by_key(|&i| (g.out_adj(i).len(), Reverse(i)))
        .unwrap()
}

fn tracking(g: &Digraph, l: usize, f: usize, order: Order, steps: usize) -> ScenarioConfig {
    match order {
        Order::First => generate::first_order_tracking(g.clone(), l, f, steps, SEED).unwrap(),
        Order::Second => generate::second_order_tracking(g.clone(), l, f, steps, SEED).unwrap(),
    }
}

fn with_adversaries(mut cfg: ScenarioConfig, nodes: NodeSet, adv: Adversary) -> ScenarioConfig {
    let mut a = AdversaryAssignment::new();
    for i in nodes {
        a.insert(i, adv.clone());
    }
    cfg.axes[0].adversaries = a;
    cfg
}

fn steady(trace: &Trace, bound: f64) -> AxisMetrics {
    error_metrics("x", &trace.axes[0].e, trace.normal, bound, None).unwrap()
}

/// Stuck-at attack from a checker witness: removed nodes feed `value` to the
/// stuck set and the leader's value elsewhere; the stuck set starts at
/// `value`, every other node at the leader's start. Disturbances are zero,
/// one admissible realization under any bound.
fn stuck_at(mut cfg: ScenarioConfig, w: &Witness, value: f64) -> ScenarioConfig {
    let adv = Adversary::new(Strategy::StuckAtPartition { stuck: w.stuck, value });
    for i in 0..cfg.graph.n() {
        cfg.axes[0].initial[i] = if w.stuck.contains(i) { value } else { LEADER_START };
        cfg.gains[i].sigma_bar = 0.0;
    }
    with_adversaries(cfg, w.removed, adv)
}

/// Whether some normal follower keeps at least half its initial gap at
/// every step.
fn some_follower_stuck(trace: &Trace) -> Option<usize> {
    let e = &trace.axes[0].e;
    trace.normal.iter().find(|&i| {
        let gap = e[0][i].abs();
        gap > 0.0 && e.iter().all(|row| row[i].abs() >= STUCK_FRACTION * gap)
    })
}

fn timed_run(cfg: &ScenarioConfig) -> Result<(Trace, Duration), Box<dyn Error + Send + Sync>> {
    let t = Instant::now();
    let trace = run(cfg)?;
    Ok((trace, t.elapsed()))
}

// ------------------------------------------------------------ criteria

fn c01() -> Res {
    let start = Instant::now();
    let mut graphs = 0u64;
    let mut mismatches = 0u64;
    for n in 2..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)))
            .collect();
        let (count, bad) = (0u64..1 << pairs.len())
            .into_par_iter()
            .map(|mask| {
                let edges = pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &e)| e);
                let g = Digraph::new(n, edges, [0]).unwrap();
                let tree = g.has_spanning_tree_rooted(0).unwrap();
                let reach = distances(&g)[0].iter().all(|&d| d != usize::MAX);
                let mut bad = u64::from(tree != reach);
                for l in 1..=4 {
                    if is_robust_following(&g, 1, l, 0).unwrap().holds != tree {
                        bad += 1;
                    }
                }
                (1u64, bad)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        graphs += count;
        mismatches += bad;
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        mismatches == 0 && secs < 300.0,
        format!("{graphs} graphs with leader 0, l in 1..=4, {mismatches} mismatches, {secs:.1}s"),
    ))
}

fn c02() -> Res {
    let mut rng = Lcg(2);
    let (mut violations, mut baseline_pass, mut stronger) = (0, 0, 0);
    let total = 1000;
    for _ in 0..total {
        let n = 4 + rng.below(5);
        let p = 0.3 + 0.6 * rng.below(1000) as f64 / 1000.0;
        let g = random_graph(&mut rng, n, p);
        let base = is_robust_leader_follower_2f1(&g, 1)?;
        let ours = is_robust_following(&g, 2, 1, 1)?.holds;
        baseline_pass += usize::from(base);
        violations += usize::from(base && !ours);
        stronger += usize::from(ours && !base);
    }
    let corpus_only: Vec<String> = corpus()
        .into_iter()
        .filter(|(_, g)| g.followers().len() >= 2)
        .filter(|(_, g)| {
            is_robust_following(g, 2, 1, 1).unwrap().holds && !is_robust_leader_follower_2f1(g, 1).unwrap()
        })
        .map(|(name, _)| name)
        .collect();
    Ok((
        violations == 0 && !corpus_only.is_empty() && baseline_pass > 0,
        format!(
            "{total} random graphs, {baseline_pass} pass the baseline, {violations} violations, \
             {stronger} random and {} corpus graphs pass only the checker (e.g. {})",
            corpus_only.len(),
            corpus_only.first().map_or("none", |s| s.as_str())
        ),
    ))
}

fn c03() -> Res {
    let (mut checks, mut violations) = (0, 0);
    for (_, g) in corpus() {
        for f in 0..=2 {
            for r in 1..=3.min(g.followers().len()) {
                let verdicts: Vec<bool> = (1..=4)
                    .map(|l| is_robust_following(&g, r, l, f).map(|v| v.holds))
                    .collect::<Result<_, _>>()?;
                for w in verdicts.windows(2) {
                    checks += 1;
                    violations += usize::from(w[0] && !w[1]);
                }
            }
        }
    }
    for g in [generate::leader_set_certified()?.graph, generate::leader_set_rejected()?.graph] {
        for f in 0..=1 {
            for r in 1..=2 {
                let verdicts: Vec<bool> = (1..=4)
                    .map(|l| is_robust_following_wrt(&g, g.leaders(), r, l, f).map(|v| v.holds))
                    .collect::<Result<_, _>>()?;
                for w in verdicts.windows(2) {
                    checks += 1;
                    violations += usize::from(w[0] && !w[1]);
                }
            }
        }
    }
    Ok((violations == 0, format!("{checks} (l, l+1) pairs, {violations} violations")))
}

fn c04() -> Res {
    let (mut certified, mut violations) = (0, 0);
    let mut graphs = corpus();
    for seed in 0..40 {
        graphs.push((format!("dense {seed}"), generate::random(7 + (seed as usize % 3), 0.65, 100 + seed, None, 1)?.graph));
    }
    for (_, g) in &graphs {
        let w = g.followers();
        let wd: NodeSet = w.iter().filter(|&i| g.has_edge(0, i)).collect();
        if wd == w {
            continue;
        }
        for f in 0..=2 {
            if f + 1 > w.len() {
                continue;
            }
            for l in 1..=3 {
                if !is_robust_following(g, f + 1, l, f)?.holds {
                    continue;
                }
                certified += 1;
                let need = 2 * f + 1;
                let direct_ok = wd.len() >= need;
                let hub = w.iter().any(|i| in_hood(g, i, l).intersection(wd).len() >= need);
                let degree_ok = w
                    .difference(wd)
                    .iter()
                    .all(|i| (0..g.n()).filter(|&j| j != i && g.has_edge(j, i)).count() >= need);
                let lib = structure_of(g, f, l)?;
                let agree = lib.all_hold() == (direct_ok && hub && degree_ok);
                if !(direct_ok && hub && degree_ok && agree) {
                    violations += 1;
                }
            }
        }
    }
    Ok((
        violations == 0 && certified > 0,
        format!("{certified} certified (graph, f, l) cases with W_d != W, {violations} violations"),
    ))
}

fn c05() -> Res {
    let start = Instant::now();
    let dest = 12;
    let complete = Digraph::new(13, (0..13).flat_map(|j| (0..13).filter(move |&i| i != j).map(move |i| (j, i))), [0])?;
    let mut rng = Lcg(5);
    let mut mismatches = 0;
    let total = 600;
    for _ in 0..total {
        let count = 1 + rng.below(8);
        let mut msgs = Vec::with_capacity(count);
        let mut masks = Vec::with_capacity(count);
        let pool = 3 + rng.below(10);
        for _ in 0..count {
            let hops = 1 + rng.below(4.min(pool));
            let mut nodes: Vec<usize> = Vec::new();
            while nodes.len() < hops {
                let u = rng.below(pool);
                if !nodes.contains(&u) {
                    nodes.push(u);
                }
            }
            masks.push(nodes.iter().fold(0u64, |m, &u| m | 1 << u));
            nodes.push(dest);
            msgs.push(Message::new(rng.below(100) as f64, Path::new(&complete, nodes, 4)?));
        }
        let (size, cover) = minimum_message_cover(&msgs, dest)?;
        let valid = cover.len() == size && masks.iter().all(|&m| m & cover.bits() != 0);
        if size != mmc_brute(&masks) || !valid {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        mismatches == 0 && secs < 60.0,
        format!("{total} instances over at most 12 path nodes, {mismatches} mismatches, {secs:.2}s"),
    ))
}

fn c06() -> Res {
    let mut rng = Lcg(6);
    let (mut instances, mut mismatches, mut tries) = (0, 0, 0);
    while instances < 600 && tries < 200_000 {
        tries += 1;
        let n = 4 + rng.below(4);
        let p = 0.3 + 0.4 * rng.below(100) as f64 / 100.0;
        let g = random_graph(&mut rng, n, p);
        let i = 1 + rng.below(n - 1);
        let l = 1 + rng.below(3);
        let mut s = NodeSet::singleton(i);
        for u in 1..n {
            if rng.chance(0.3) {
                s.insert(u);
            }
        }
        let all = g.nodes();
        let candidates = candidate_paths(&g, i, s, l, all);
        if candidates.is_empty() || candidates.len() > 12 {
            continue;
        }
        instances += 1;
        let truth = max_disjoint_brute(&candidates);
        let (count, set) = independent_path_count(&g, i, s, l, None)?;
        let within = g.nodes().without(rng.below(n));
        let truth_within = independent_brute(&g, i, s, l, within);
        let got_within = if within.contains(i) {
            independent_paths_within(&g, i, s, within, l, None, PathPolicy::Relaxed)?.0
        } else {
            truth_within
        };
        let paths_ok = set.paths.len() == count
            && set.paths.iter().all(|p| {
                p.destination() == i && !s.contains(p.source()) && p.hops() <= l
            })
            && set.paths.iter().enumerate().all(|(a, p)| {
                set.paths[a + 1..]
                    .iter()
                    .all(|q| p.node_set().intersection(q.node_set()) == NodeSet::singleton(i))
            });
        if count != truth || got_within != truth_within || !paths_ok {
            mismatches += 1;
        }
    }
    Ok((
        mismatches == 0 && instances >= 500,
        format!("{instances} instances with at most 12 candidate paths, {mismatches} mismatches"),
    ))
}

/// Certified graphs with at most 12 nodes and the (r, l, f) they satisfy.
fn certified_set() -> Result<Vec<(String, Digraph, usize, usize)>, Box<dyn Error + Send + Sync>> {
    let mut out = vec![
        ("example1-analog".to_string(), generate::example1_analog()?.graph, 2, 1),
        ("layered f=1 x2".to_string(), generate::layered(1, 2)?.graph, 1, 1),
        ("layered f=1 x3".to_string(), generate::layered(1, 3)?.graph, 1, 1),
    ];
    for (n, seed, l) in [(8, 1, 2), (8, 2, 2), (10, 3, 1)] {
        let g = generate::random(n, 0.5, seed, Some((2, l, 1)), 500)?;
        out.push((g.family, g.graph, l, 1));
    }
    for (_, g, l, f) in &out {
        assert!(g.n() <= 12 && is_robust_following(g, f + 1, *l, *f)?.holds);
    }
    Ok(out)
}

fn sufficiency(order: Order) -> Res {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    let mut lines = Vec::new();
    for (name, g, l, f) in certified_set()? {
        let attacker = busiest_follower(&g);
        let cfg = with_adversaries(tracking(&g, l, f, order, SIM_STEPS), NodeSet::singleton(attacker), split_attack());
        let (trace, took) = timed_run(&cfg)?;
        let b = trace.axes[0].bounds;
        let total = steady(&trace, b.total);
        let layered = steady(&trace, b.layered);
        ok &= total.within_bound && layered.within_bound && took < RUN_LIMIT;
        worst = worst.max(total.max_steady_error);
        slowest = slowest.max(took);
        lines.push(format!("{name}: {:.3} <= {:.3}", total.max_steady_error, b.layered));
    }
    Ok((ok, format!("{}; slowest run {:.1}s", lines.join(", "), slowest.as_secs_f64())))
}

fn c07() -> Res {
    sufficiency(Order::First)
}

fn c08() -> Res {
    let mut cases: Vec<(String, Digraph, usize, usize, usize)> = vec![
        ("example1-analog".into(), generate::example1_analog()?.graph, 2, 1, 1),
        ("example2-analog".into(), generate::example2_analog()?.graph, 3, 1, 2),
        ("example2-analog".into(), generate::example2_analog()?.graph, 3, 2, 2),
    ];
    let mut rng = Lcg(8);
    let mut found = 0;
    while found < 3 {
        let g = random_graph(&mut rng, 8, 0.35);
        let l = 1 + found % 2;
        if let Some(w) = is_robust_following(&g, 2, l, 1)?.witness {
            if !w.removed.is_empty() {
                cases.push((format!("random #{found}"), g, 2, l, 1));
                found += 1;
            }
        }
    }
    let mut stalls = 0;
    let mut lines = Vec::new();
    for (name, g, r, l, f) in &cases {
        let w = is_robust_following(g, *r, *l, *f)?.witness.ok_or("graph unexpectedly certified")?;
        let cfg = stuck_at(tracking(g, *l, *f, Order::First, SIM_STEPS), &w, LEADER_START - 20.0);
        let trace = run(&cfg)?;
        match some_follower_stuck(&trace) {
            Some(i) => {
                stalls += 1;
                lines.push(format!("{name} l={l}: node {i} stuck, F={} S={}", w.removed, w.stuck));
            }
            None => lines.push(format!("{name} l={l}: converged")),
        }
    }
    Ok((stalls == cases.len(), format!("{stalls}/{} stalled; {}", cases.len(), lines.join("; "))))
}

fn c09() -> Res {
    let (ok, detail) = sufficiency(Order::Second)?;
    let star = generate::star(6)?.graph;
    let cfg = with_adversaries(tracking(&star, 1, 1, Order::Second, SIM_STEPS), NodeSet::singleton(5), split_attack());
    let trace = run(&cfg)?;
    let m = steady(&trace, cfg.eps);
    Ok((
        ok && m.within_bound,
        format!("{detail}; all-direct star: {:.4} <= {}", m.max_steady_error, cfg.eps),
    ))
}

fn c10() -> Res {
    let star = generate::star(6)?.graph;
    let cfg = with_adversaries(tracking(&star, 1, 1, Order::First, SIM_STEPS), NodeSet::singleton(5), split_attack());
    let g = cfg.gains[1];
    let eta = g.theta + cfg.v_bar_d(0) + g.sigma_bar;
    let term = cfg.period * eta / (2.0 - g.alpha * cfg.period);
    let trace = run(&cfg)?;
    let m = steady(&trace, cfg.eps);
    Ok((
        term < cfg.eps && m.within_bound,
        format!("T eta/(2 - alpha T) = {term:.4}, steady error {:.4} <= {}", m.max_steady_error, cfg.eps),
    ))
}

/// Split-value attack from a low-hop witness: the stuck set sees a slow
/// oscillation around 15 while every other node sees the leader.
fn dichotomy(g: &Digraph, r: usize, lo: usize, hi: usize, f: usize, order: Order) -> Res {
    let low = is_robust_following(g, r, lo, f)?;
    let high = is_robust_following(g, r, hi, f)?;
    let w = low.witness.clone().ok_or("low-hop graph unexpectedly certified")?;
    let adv = Adversary::new(Strategy::SplitByDestination(vec![
        (w.stuck, Strategy::Oscillate { base: 15.0, amplitude: 1.0, period: 100.0 }),
        (g.nodes().difference(w.stuck), Strategy::MirrorLeader),
    ]));
    let lo_trace = run(&with_adversaries(tracking(g, lo, f, order, SIM_STEPS), w.removed, adv.clone()))?;
    let hi_trace = run(&with_adversaries(tracking(g, hi, f, order, SIM_STEPS), w.removed, adv))?;
    let bound = hi_trace.axes[0].bounds.total;
    let lo_m = steady(&lo_trace, bound);
    let hi_m = steady(&hi_trace, bound);
    let pass = !low.holds
        && high.holds
        && lo_m.max_steady_error > NOT_CONVERGED
        && hi_m.within_bound
        && hi_m.max_steady_error <= NOT_CONVERGED;
    Ok((
        pass,
        format!(
            "n={} F={}: l={lo} {} steady {:.3}, l={hi} {} steady {:.3}",
            g.n(),
            w.removed,
            if low.holds { "holds" } else { "fails" },
            lo_m.max_steady_error,
            if high.holds { "holds" } else { "fails" },
            hi_m.max_steady_error
        ),
    ))
}

fn c11() -> Res {
    let (a, da) = dichotomy(&generate::example1_analog()?.graph, 2, 1, 2, 1, Order::Second)?;
    let (b, db) = dichotomy(&generate::example2_analog()?.graph, 3, 1, 3, 2, Order::First)?;
    Ok((a && b, format!("{da}; {db}; threshold {NOT_CONVERGED}")))
}

fn c12() -> Res {
    let good = generate::leader_set_certified()?.graph;
    let leaders = good.leaders();
    let certified = is_robust_following_wrt(&good, leaders, 2, 2, 1)?.holds;
    let liar = Adversary::new(Strategy::SplitByDestination(vec![
        ((0..64).step_by(2).collect(), Strategy::Constant(-20.0)),
        ((1..64).step_by(2).collect(), Strategy::Constant(100.0)),
    ]));
    let cfg = with_adversaries(tracking(&good, 2, 1, Order::First, SIM_STEPS), NodeSet::singleton(0), liar);
    let trace = run(&cfg)?;
    let bound = error_bound(trace.normal.len(), cfg.eps)?;
    let m = steady(&trace, bound);

    let bad = generate::leader_set_rejected()?.graph;
    let verdict = is_robust_following_wrt(&bad, bad.leaders(), 2, 2, 1)?;
    let w = verdict.witness.clone().ok_or("rejected graph unexpectedly certified")?;
    let faulty_leader = !w.removed.intersection(bad.leaders()).is_empty();
    let stuck = run(&stuck_at(tracking(&bad, 2, 1, Order::First, SIM_STEPS), &w, LEADER_START - 20.0))?;
    let held = some_follower_stuck(&stuck);
    Ok((
        certified && m.within_bound && !verdict.holds && faulty_leader && held.is_some(),
        format!(
            "certified graph with leader 0 faulty: steady {:.3} <= {bound:.3}; rejected graph F={} S={}: {}",
            m.max_steady_error,
            w.removed,
            w.stuck,
            held.map_or("converged".to_string(), |i| format!("node {i} stuck"))
        ),
    ))
}

fn csv_bytes(trace: &Trace) -> Result<Vec<u8>, Box<dyn Error + Send + Sync>> {
    let mut out = Vec::new();
    for a in &trace.axes {
        write_csv(a, &mut out)?;
    }
    Ok(out)
}

fn c13() -> Res {
    let g = generate::example2_analog()?.graph;
    let first = with_adversaries(tracking(&g, 3, 2, Order::First, 2000), [1, 2].into_iter().collect(), split_attack());
    let second = with_adversaries(
        tracking(&generate::example1_analog()?.graph, 2, 1, Order::Second, 2000),
        NodeSet::singleton(3),
        split_attack(),
    );
    let mut same = true;
    let mut bytes = 0;
    for cfg in [first, second] {
        let a = csv_bytes(&run(&cfg)?)?;
        let b = csv_bytes(&run(&cfg)?)?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
        let c = csv_bytes(&pool.install(|| run(&cfg))?)?;
        same &= a == b && a == c;
        bytes += a.len();
    }
    Ok((same, format!("2 scenarios x 3 runs (one single-threaded), {bytes} bytes per pass")))
}

fn c14() -> Res {
    let g = generate::example1_analog()?.graph;
    let mut cfg = with_adversaries(tracking(&g, 2, 1, Order::Second, 4000), NodeSet::singleton(3), split_attack());
    let n = g.n();
    let corners = [(5.0, 5.0), (-5.0, 5.0), (-5.0, -5.0), (5.0, -5.0)];
    let mut x = cfg.axes[0].clone();
    x.leader_input = InputSchedule::zero();
    x.leader_velocity = 1.0;
    x.rho = (0..n).map(|i| if i == 0 { 0.0 } else { corners[i % 4].0 }).collect();
    let mut y = x.clone();
    y.name = "y".into();
    y.stream = 1;
    y.leader_position = 85.0;
    y.leader_velocity = 0.0;
    y.leader_input = InputSchedule {
        constant: 0.0,
        terms: vec![Sinusoid { wave: Wave::Sin, amplitude: -1.0, frequency: 0.6, phase: 0.0 }],
    };
    y.initial = sample_initial(n, 70.0, 100.0, cfg.seed, 1)?;
    y.rho = (0..n).map(|i| if i == 0 { 0.0 } else { corners[i % 4].1 }).collect();
    cfg.axes = vec![x, y];
    let joint = run(&cfg)?;
    let mut equal = true;
    let mut errs = Vec::new();
    for (k, axis) in joint.axes.iter().enumerate() {
        let alone = run(&cfg.project(k))?;
        equal &= alone.axes[0] == *axis;
        let m = error_metrics(&axis.name, &axis.e, joint.normal, axis.bounds.layered, None)?;
        errs.push(format!("{} steady {:.3}", axis.name, m.max_steady_error));
    }
    Ok((equal, format!("square offsets, {}; traces equal: {equal}", errs.join(", "))))
}
