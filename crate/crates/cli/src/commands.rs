use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use relaycons::engine::{self, error_metrics, read_error_columns, scenario_bounds, write_csv, AxisMetrics, EngineError};
use relaycons::generate::{self, GenerateError, Generated};
use relaycons::msr::{self, MsrError};
use relaycons::robustness::{
    is_robust_following_with, is_robust_following_wrt_with, is_robust_leader_follower_2f1, structure_of,
    CheckOptions, PathPolicy, RobustnessError,
};
use relaycons::scenario::{ScenarioConfig, ScenarioError};
use relaycons::{Digraph, GraphError, NodeSet};
use thiserror::Error;

use crate::{BoundArgs, CheckArgs, Family, GenerateArgs, OrderArg, ReportArgs, SimulateArgs};

/// Checks on more followers than this need `--override-size-guard`.
pub const SIZE_GUARD: usize = 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Graph { path: String, source: GraphError },
    #[error(transparent)]
    Robustness(#[from] RobustnessError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Msr(#[from] MsrError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("graph has {0} followers; the check is exponential beyond {SIZE_GUARD} (pass --override-size-guard)")]
    SizeGuard(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Generate(GenerateError::Exhausted(_)) => 1,
            _ => 2,
        }
    }
}

pub struct Context {
    pub corpus: Option<PathBuf>,
}

impl Context {
    /// `path` as given when it exists, else under the corpus directory.
    fn resolve(&self, path: &Path) -> PathBuf {
        if path.exists() || path.is_absolute() {
            return path.to_path_buf();
        }
        match &self.corpus {
            Some(dir) if dir.join(path).exists() => {
                log::info!("using {} from the corpus directory", path.display());
                dir.join(path)
            }
            _ => path.to_path_buf(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load_graph(path: &Path) -> Result<Digraph, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Digraph::parse(&text).map_err(|source| CliError::Graph {
        path: path.display().to_string(),
        source,
    })
}

fn yes(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

pub fn check(ctx: &Context, a: &CheckArgs) -> Result<bool, CliError> {
    let path = ctx.resolve(&a.graph);
    let g = load_graph(&path)?;
    let followers = g.followers().len();
    if followers > SIZE_GUARD && !a.override_size_guard {
        return Err(CliError::SizeGuard(followers));
    }
    let opts = CheckOptions {
        policy: if a.strict_paths { PathPolicy::Strict } else { PathPolicy::Relaxed },
        parallel: a.parallel,
    };
    let leader_set = g.leaders().len() > 1;
    let verdict = if leader_set {
        is_robust_following_wrt_with(&g, g.leaders(), a.r, a.l, a.f, opts)?
    } else {
        is_robust_following_with(&g, a.r, a.l, a.f, opts)?
    };
    println!(
        "graph: {} ({} nodes, {} edges, leaders {})",
        path.display(),
        g.n(),
        g.edge_count(),
        g.leaders()
    );
    println!(
        "property: {}-robust following with {} hops under the {}-local model{}{}",
        a.r,
        a.l,
        a.f,
        if leader_set { ", w.r.t. the leader set" } else { "" },
        if a.strict_paths { ", strict paths" } else { "" }
    );
    println!("verdict: {}", yes(verdict.holds));
    if let Some(w) = &verdict.witness {
        println!("witness: removed {}, stuck {}", w.removed, w.stuck);
    }
    println!(
        "removal sets examined: {} of {} f-local sets",
        verdict.sets_examined, verdict.f_local_sets
    );

    if !leader_set {
        let s = structure_of(&g, a.f, a.l).map_err(RobustnessError::from)?;
        let all_direct = g.direct_followers() == g.followers();
        println!(
            "structure (f={}, l={}): direct followers {} (need {}), hub {}, low in-degree {}, edges {} (floor {}){}",
            a.f,
            a.l,
            s.direct_count,
            s.required,
            s.hub.map_or("none".into(), |h| h.to_string()),
            if s.low_in_degree.is_empty() {
                "none".to_string()
            } else {
                format!("{:?}", s.low_in_degree)
            },
            s.edge_count,
            s.edge_floor,
            if all_direct { "; every follower is direct" } else { "" }
        );
        if verdict.holds && a.r == a.f + 1 && !all_direct && !s.all_hold() {
            println!("warning: certified graph misses a necessary structural clause");
        }
        let baseline = is_robust_leader_follower_2f1(&g, a.f)?;
        let consistent = !(baseline && a.r <= a.f + 1 && !verdict.holds);
        println!(
            "one-hop baseline ({}-robust leader-follower): {}{}",
            2 * a.f + 1,
            yes(baseline),
            if consistent { "" } else { "; INCONSISTENT with the checker" }
        );
        if a.r == 1 && a.f == 0 {
            let tree = g.has_spanning_tree_rooted(g.single_leader().unwrap_or(0)).map_err(|source| CliError::Graph {
                path: path.display().to_string(),
                source,
            })?;
            println!(
                "spanning tree from the leader: {}; cross-check {}",
                if tree { "yes" } else { "no" },
                if tree == verdict.holds { "agrees" } else { "DISAGREES" }
            );
        }
    }
    Ok(verdict.holds)
}

fn verdict_line(m: &AxisMetrics, threshold: f64) -> (bool, String) {
    let ok = m.within_bound && m.max_steady_error <= threshold;
    let line = format!(
        "axis {}: max steady error {} (steps {}..), bound {}, threshold {threshold}, converged from {}: {}",
        m.name,
        m.max_steady_error,
        m.window_start,
        m.bound,
        m.convergence_step.map_or("never".to_string(), |k| format!("step {k}")),
        if ok { "converged" } else { "not converged" }
    );
    (ok, line)
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<bool, CliError> {
    let path = ctx.resolve(&a.scenario);
    let cfg = ScenarioConfig::load_seeded(&path, a.seed)?;
    let threshold = a.threshold.unwrap_or(10.0 * cfg.eps);
    let trace = engine::run(&cfg)?;

    let mut report = format!(
        "scenario: {} ({} order, {} leaders, {} hops, f={}, {} steps, seed {})\n",
        path.display(),
        format!("{:?}", trace.order).to_lowercase(),
        format!("{:?}", trace.mode).to_lowercase(),
        trace.hops,
        trace.f,
        trace.steps,
        trace.seed
    );
    let mut all_ok = true;
    let mut csvs = Vec::new();
    for axis in &trace.axes {
        let b = axis.bounds;
        let m = error_metrics(&axis.name, &axis.e, trace.normal, b.layered, a.window)?;
        let (ok, line) = verdict_line(&m, threshold);
        all_ok &= ok;
        writeln!(report, "{line}").unwrap();
        writeln!(
            report,
            "  bounds: total {}, layered {}{}",
            b.total,
            b.layered,
            b.direct_only.map_or(String::new(), |d| format!(", all-direct {d}"))
        )
        .unwrap();
        let jumps: usize = axis.diag.iter().flatten().filter(|d| d.jump).count();
        if jumps > 0 {
            writeln!(report, "  filter cover jumps: {jumps}").unwrap();
        }
        let mut buf = Vec::new();
        write_csv(axis, &mut buf)?;
        csvs.push((format!("trace_{}.csv", axis.name), buf));
    }

    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    for (name, bytes) in csvs {
        let p = a.out.join(name);
        fs::write(&p, bytes).map_err(io_err(&p))?;
    }
    let p = a.out.join("metrics.txt");
    fs::write(&p, &report).map_err(io_err(&p))?;
    print!("{report}");
    Ok(all_ok)
}

pub fn bound(a: &BoundArgs) -> Result<bool, CliError> {
    let total = msr::error_bound(a.n, a.eps)?;
    let layers = msr::layer_bounds(a.n, a.eps);
    println!("layer terms: {layers:?}");
    println!("error bound: {total}");
    if let Some(direct) = a.direct {
        let term = match a.order {
            OrderArg::Second => a.eps,
            OrderArg::First => match (a.period, a.alpha, a.eta) {
                (Some(t), Some(alpha), Some(eta)) => msr::direct_term_first(t, alpha, eta, a.eps),
                _ => {
                    return Err(CliError::Usage(
                        "the first-order layered bound needs --period, --alpha and --eta".into(),
                    ))
                }
            },
        };
        println!("layered bound: {}", msr::error_bound_layered(a.n, direct, a.eps, term)?);
    }
    Ok(true)
}

pub fn generate(a: &GenerateArgs) -> Result<bool, CliError> {
    let need = |v: Option<usize>, what: &str| v.ok_or_else(|| CliError::Usage(format!("this family needs --{what}")));
    let g: Generated = match a.family {
        Family::Star => generate::star(need(a.n, "n")?)?,
        Family::Layered => generate::layered(a.f, a.layers)?,
        Family::Example1Analog => generate::example1_analog()?,
        Family::Example2Analog => generate::example2_analog()?,
        Family::LeaderSetCertified => generate::leader_set_certified()?,
        Family::LeaderSetRejected => generate::leader_set_rejected()?,
        Family::Random => {
            let p = a.p.ok_or_else(|| CliError::Usage("random needs --p".into()))?;
            generate::random(need(a.n, "n")?, p, a.seed, a.target, a.attempts)?
        }
    };
    let mut note = g.note();
    if g.certificates.is_empty() {
        note.push_str("no robustness property verified\n");
    }
    match &a.out {
        Some(out) => {
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            fs::write(out, g.graph.to_text()).map_err(io_err(out))?;
            let note_path = out.with_extension("note");
            fs::write(&note_path, &note).map_err(io_err(&note_path))?;
            println!("wrote {} and {}", out.display(), note_path.display());
            print!("{note}");
        }
        None => {
            print!("{}", g.graph.to_text());
            for line in note.lines() {
                println!("# {line}");
            }
        }
    }
    Ok(true)
}

pub fn report(ctx: &Context, a: &ReportArgs) -> Result<bool, CliError> {
    let file = fs::File::open(&a.csv).map_err(io_err(&a.csv))?;
    let (ids, rows) = read_error_columns(file)?;
    if ids.is_empty() {
        return Err(CliError::Usage(format!("{} has no error columns", a.csv.display())));
    }
    let scenario = match &a.scenario {
        Some(p) => Some(ScenarioConfig::load(&ctx.resolve(p))?),
        None => None,
    };
    let n = ids.iter().max().unwrap() + 1;
    let mut e = vec![vec![0.0; n]; rows.len()];
    for (k, row) in rows.iter().enumerate() {
        for (c, &id) in ids.iter().enumerate() {
            e[k][id] = row[c];
        }
    }
    let normal: NodeSet = match (&a.nodes, &scenario) {
        (Some(list), _) => list.iter().copied().collect(),
        (None, Some(cfg)) => cfg.normal_followers(),
        (None, None) => ids.iter().copied().filter(|&i| e.iter().any(|r| r[i] != 0.0)).collect(),
    };
    if let Some(bad) = normal.iter().find(|&i| !ids.contains(&i)) {
        return Err(CliError::Usage(format!("node {bad} has no error column")));
    }
    let bound = match (a.bound, &scenario) {
        (Some(b), _) => b,
        (None, Some(cfg)) => {
            if a.axis >= cfg.axes.len() {
                return Err(CliError::Usage(format!("scenario has {} axes", cfg.axes.len())));
            }
            scenario_bounds(cfg, a.axis)?.layered
        }
        (None, None) => return Err(CliError::Usage("pass --bound or --scenario".into())),
    };
    let threshold = a
        .threshold
        .or(scenario.as_ref().map(|c| 10.0 * c.eps))
        .unwrap_or(f64::INFINITY);
    let name = a.csv.file_stem().map_or("trace".into(), |s| s.to_string_lossy().into_owned());
    let m = error_metrics(&name, &e, normal, bound, a.window)?;
    let (ok, line) = verdict_line(&m, threshold);
    println!("nodes: {normal}");
    println!("{line}");
    Ok(ok)
}
