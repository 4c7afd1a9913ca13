//! Python module `relaycons`: graphs, robustness checks, the message cover,
//! error bounds and scenario runs.

use std::fs::File;
use std::path::PathBuf;

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use relaycons::engine::{self, AxisTrace, Trace};
use relaycons::msr::{self, Message};
use relaycons::robustness::{self, CheckOptions, PathPolicy, RobustnessVerdict};
use relaycons::scenario::ScenarioConfig;
use relaycons::{Digraph, NodeSet};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn list(s: NodeSet) -> Vec<usize> {
    s.iter().collect()
}

#[pyclass(name = "Graph", module = "relaycons", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGraph {
    inner: Digraph,
}

#[pymethods]
impl PyGraph {
    /// `edges` are `(from, to)` pairs.
    #[new]
    #[pyo3(signature = (n, edges, leaders = vec![0]))]
    fn new(n: usize, edges: Vec<(usize, usize)>, leaders: Vec<usize>) -> PyResult<Self> {
        let inner = Digraph::new(n, edges, leaders).map_err(err)?;
        Ok(Self { inner })
    }

    /// Graph from the text format used by the CLI.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: Digraph::parse(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn leaders(&self) -> Vec<usize> {
        list(self.inner.leaders())
    }

    #[getter]
    fn followers(&self) -> Vec<usize> {
        list(self.inner.followers())
    }

    #[getter]
    fn direct_followers(&self) -> Vec<usize> {
        list(self.inner.direct_followers())
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    /// Nodes with a path of at most `hops` hops into `i`.
    fn in_neighbors(&self, i: usize, hops: usize) -> PyResult<Vec<usize>> {
        self.inner.in_neighbors_l(i, hops).map(list).map_err(err)
    }

    /// Every simple path of at most `hops` hops ending at `i`, as node lists.
    fn paths_to(&self, i: usize, hops: usize) -> PyResult<Vec<Vec<usize>>> {
        let paths = self.inner.enumerate_paths_to(i, hops, self.inner.nodes()).map_err(err)?;
        Ok(paths.iter().map(|p| p.nodes().to_vec()).collect())
    }

    fn has_spanning_tree(&self, root: usize) -> PyResult<bool> {
        self.inner.has_spanning_tree_rooted(root).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, edges={}, leaders={:?})",
            self.inner.n(),
            self.inner.edge_count(),
            self.leaders()
        )
    }
}

#[pyclass(name = "Verdict", module = "relaycons", frozen, get_all)]
pub struct PyVerdict {
    holds: bool,
    /// Removed set of the counterexample, if any.
    removed: Option<Vec<usize>>,
    /// Nodes that no removal-free path set can reach, if any.
    stuck: Option<Vec<usize>>,
    sets_examined: usize,
    f_local_sets: usize,
}

impl From<RobustnessVerdict> for PyVerdict {
    fn from(v: RobustnessVerdict) -> Self {
        Self {
            holds: v.holds,
            removed: v.witness.as_ref().map(|w| list(w.removed)),
            stuck: v.witness.as_ref().map(|w| list(w.stuck)),
            sets_examined: v.sets_examined,
            f_local_sets: v.f_local_sets,
        }
    }
}

#[pymethods]
impl PyVerdict {
    fn __bool__(&self) -> bool {
        self.holds
    }

    fn __repr__(&self) -> String {
        match (&self.removed, &self.stuck) {
            (Some(r), Some(s)) => format!("Verdict(holds=False, removed={r:?}, stuck={s:?})"),
            _ => format!("Verdict(holds={})", if self.holds { "True" } else { "False" }),
        }
    }
}

/// Robust following check. With `leaders`, or when the graph has several
/// leaders, the leaders are not trusted and removal sets range over all
/// nodes.
#[pyfunction]
#[pyo3(signature = (graph, r, hops, f, *, leaders = None, strict_paths = false, parallel = false))]
fn check(
    py: Python<'_>,
    graph: &PyGraph,
    r: usize,
    hops: usize,
    f: usize,
    leaders: Option<Vec<usize>>,
    strict_paths: bool,
    parallel: bool,
) -> PyResult<PyVerdict> {
    let opts = CheckOptions {
        policy: if strict_paths { PathPolicy::Strict } else { PathPolicy::Relaxed },
        parallel,
    };
    let g = &graph.inner;
    let v = py.detach(|| match leaders {
        Some(ls) => robustness::is_robust_following_wrt_with(g, ls.into_iter().collect(), r, hops, f, opts),
        None if g.leaders().len() > 1 => robustness::is_robust_following_wrt_with(g, g.leaders(), r, hops, f, opts),
        None => robustness::is_robust_following_with(g, r, hops, f, opts),
    });
    v.map(PyVerdict::from).map_err(err)
}

/// Largest number of node-disjoint paths of at most `hops` hops into `i`
/// from outside `outside_of`, with the paths found.
#[pyfunction]
#[pyo3(signature = (graph, i, outside_of, hops))]
fn independent_paths(graph: &PyGraph, i: usize, outside_of: Vec<usize>, hops: usize) -> PyResult<Vec<Vec<usize>>> {
    let s: NodeSet = outside_of.into_iter().collect();
    let (_, set) = robustness::independent_path_count(&graph.inner, i, s, hops, None).map_err(err)?;
    Ok(set.paths.iter().map(|p| p.nodes().to_vec()).collect())
}

fn messages(graph: &PyGraph, msgs: Vec<(f64, Vec<usize>)>, hops: usize) -> PyResult<Vec<Message>> {
    msgs.into_iter()
        .map(|(v, nodes)| {
            let p = match nodes[..] {
                [i] => relaycons::Path::trivial(i),
                _ => relaycons::Path::new(&graph.inner, nodes, hops).map_err(err)?,
            };
            Ok(Message::new(v, p))
        })
        .collect()
}

/// Smallest node set meeting every path (destination excluded). Paths are
/// node lists ending at `dest`.
#[pyfunction]
fn minimum_message_cover(graph: &PyGraph, paths: Vec<Vec<usize>>, dest: usize, hops: usize) -> PyResult<(usize, Vec<usize>)> {
    let msgs = messages(graph, paths.into_iter().map(|p| (0.0, p)).collect(), hops)?;
    let (size, cover) = msr::minimum_message_cover(&msgs, dest).map_err(err)?;
    Ok((size, list(cover)))
}

/// One filtering step at a node holding `own`. `msgs` are `(value, path)`
/// pairs and should include the node's own value under the one-node path
/// `[i]`. Returns the filtered average and message indices.
#[pyfunction]
fn filter_messages<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    msgs: Vec<(f64, Vec<usize>)>,
    own: f64,
    f: usize,
    hops: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let msgs = messages(graph, msgs, hops)?;
    let out = msr::mwmsr_phi(&msgs, own, f).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("phi", out.phi)?;
    d.set_item("retained", out.retained)?;
    d.set_item("removed_high", out.removed_high)?;
    d.set_item("removed_low", out.removed_low)?;
    d.set_item("cover_high", out.cover_high)?;
    d.set_item("cover_low", out.cover_low)?;
    Ok(d)
}

/// Worst-case consensus error over `n` normal followers.
#[pyfunction]
#[pyo3(signature = (n, eps = 0.1))]
fn error_bound(n: usize, eps: f64) -> PyResult<f64> {
    msr::error_bound(n, eps).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, eps = 0.1))]
fn layer_bounds(n: usize, eps: f64) -> Vec<f64> {
    msr::layer_bounds(n, eps)
}

/// Bound when `direct` of the `n` normal followers hear the leader.
#[pyfunction]
fn error_bound_layered(n: usize, direct: usize, eps: f64, direct_term: f64) -> PyResult<f64> {
    msr::error_bound_layered(n, direct, eps, direct_term).map_err(err)
}

#[pyclass(name = "Scenario", module = "relaycons")]
pub struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    #[pyo3(signature = (path, seed = None))]
    fn load(path: PathBuf, seed: Option<u64>) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::load_seeded(&path, seed).map_err(err)?,
        })
    }

    /// Relative graph paths in `text` resolve against `base_dir`.
    #[staticmethod]
    #[pyo3(signature = (text, base_dir = PathBuf::from("."), seed = None))]
    fn from_toml(text: &str, base_dir: PathBuf, seed: Option<u64>) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::from_toml_seeded(text, &base_dir, seed).map_err(err)?,
        })
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.graph.clone(),
        }
    }

    #[getter]
    fn hops(&self) -> usize {
        self.inner.hops
    }

    #[getter]
    fn f(&self) -> usize {
        self.inner.f
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[setter]
    fn set_steps(&mut self, steps: usize) {
        self.inner.steps = steps;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn axes(&self) -> Vec<String> {
        self.inner.axes.iter().map(|a| a.name.clone()).collect()
    }

    #[getter]
    fn normal_followers(&self) -> Vec<usize> {
        list(self.inner.normal_followers())
    }

    fn run(&self, py: Python<'_>) -> PyResult<PyTrace> {
        let cfg = &self.inner;
        let trace = py.detach(|| engine::run(cfg)).map_err(err)?;
        Ok(PyTrace { inner: trace })
    }
}

#[pyclass(name = "Trace", module = "relaycons", frozen)]
pub struct PyTrace {
    inner: Trace,
}

impl PyTrace {
    fn axis(&self, axis: usize) -> PyResult<&AxisTrace> {
        self.inner
            .axes
            .get(axis)
            .ok_or_else(|| PyIndexError::new_err(format!("no axis {axis}")))
    }
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn axes(&self) -> Vec<String> {
        self.inner.axes.iter().map(|a| a.name.clone()).collect()
    }

    #[getter]
    fn normal(&self) -> Vec<usize> {
        list(self.inner.normal)
    }

    /// `x[k][i]`, one row per step.
    #[pyo3(signature = (axis = 0))]
    fn positions(&self, axis: usize) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.axis(axis)?.x.clone())
    }

    #[pyo3(signature = (axis = 0))]
    fn errors(&self, axis: usize) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.axis(axis)?.e.clone())
    }

    /// `total`, `layered` and `direct_only` (None when some follower has no
    /// leader link).
    #[pyo3(signature = (axis = 0))]
    fn bounds<'py>(&self, py: Python<'py>, axis: usize) -> PyResult<Bound<'py, PyDict>> {
        let b = self.axis(axis)?.bounds;
        let d = PyDict::new(py);
        d.set_item("total", b.total)?;
        d.set_item("layered", b.layered)?;
        d.set_item("direct_only", b.direct_only)?;
        Ok(d)
    }

    /// Steady-window metrics per axis against `bound` (default: each axis's
    /// layered bound).
    #[pyo3(signature = (bound = None, window = None))]
    fn metrics<'py>(&self, py: Python<'py>, bound: Option<f64>, window: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .axes
            .iter()
            .map(|a| {
                let m = engine::error_metrics(&a.name, &a.e, self.inner.normal, bound.unwrap_or(a.bounds.layered), window)
                    .map_err(err)?;
                let d = PyDict::new(py);
                d.set_item("axis", m.name)?;
                d.set_item("max_steady_error", m.max_steady_error)?;
                d.set_item("bound", m.bound)?;
                d.set_item("within_bound", m.within_bound)?;
                d.set_item("convergence_step", m.convergence_step)?;
                d.set_item("window_start", m.window_start)?;
                Ok(d)
            })
            .collect()
    }

    #[pyo3(signature = (path, axis = 0))]
    fn write_csv(&self, path: PathBuf, axis: usize) -> PyResult<()> {
        let file = File::create(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        engine::write_csv(self.axis(axis)?, file).map_err(err)
    }
}

#[pymodule(name = "relaycons")]
pub fn relaycons_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyVerdict>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(independent_paths, m)?)?;
    m.add_function(wrap_pyfunction!(minimum_message_cover, m)?)?;
    m.add_function(wrap_pyfunction!(filter_messages, m)?)?;
    m.add_function(wrap_pyfunction!(error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(layer_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(error_bound_layered, m)?)?;
    Ok(())
}
