// SPDX-License-Identifier: MIT OR Apache-2.0
//! Python bindings. Probabilities cross the boundary as "num/den"
//! strings in both directions, so nothing is ever rounded.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ccx_core::doc::{parse_document, render_document, Document};
use ccx_core::error::Error;
use ccx_core::graph::DSepQuery;
use ccx_core::rational::{format_q, parse_q};
use ccx_core::scenario::pad_scenario;
use ccx_core::verify::CorollaryVerdict;

fn err(e: Error) -> PyErr {
    match e {
        Error::Resource(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_rows(rows: Vec<Vec<String>>) -> PyResult<Vec<Vec<ccx_core::Q>>> {
    rows.iter()
        .map(|r| r.iter().map(|s| parse_q(s)).collect())
        .collect::<Result<_, _>>()
        .map_err(err)
}

/// Measurement scenario: measurements, shared outcomes, contexts, and an
/// optional party partition.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: ccx_core::scenario::Scenario,
}

#[pymethods]
impl Scenario {
    #[new]
    #[pyo3(signature = (measurements, outcomes, contexts, bell_partition=None))]
    fn new(
        measurements: Vec<String>,
        outcomes: Vec<String>,
        contexts: Vec<Vec<String>>,
        bell_partition: Option<Vec<Vec<String>>>,
    ) -> PyResult<Self> {
        ccx_core::scenario::Scenario::new(measurements, outcomes, contexts, bell_partition)
            .map(|inner| Scenario { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn chsh() -> Self {
        Scenario { inner: ccx_core::scenario::chsh_scenario() }
    }

    #[staticmethod]
    fn kcbs() -> Self {
        Scenario { inner: ccx_core::scenario::kcbs_scenario() }
    }

    fn to_json(&self) -> PyResult<String> {
        render_document(&Document::Scenario(self.inner.clone())).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario({} measurements, {} contexts)",
            self.inner.measurements.len(),
            self.inner.contexts.len()
        )
    }
}

/// Operational distribution: one exact row of outcome-tuple
/// probabilities per context.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Phenomenon {
    inner: ccx_core::scenario::Phenomenon,
}

#[pymethods]
impl Phenomenon {
    #[new]
    #[pyo3(signature = (scenario, rows, context_weights=None))]
    fn new(
        scenario: &Scenario,
        rows: Vec<Vec<String>>,
        context_weights: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let padded = pad_scenario(&scenario.inner).map_err(err)?;
        let rows = parse_rows(rows)?;
        let weights = context_weights
            .map(|w| w.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>, _>>())
            .transpose()
            .map_err(err)?;
        ccx_core::scenario::Phenomenon::new(padded, rows, weights)
            .map(|inner| Phenomenon { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse_document(text).map_err(err)? {
            Document::Phenomenon(inner) => Ok(Phenomenon { inner }),
            other => Err(PyValueError::new_err(format!(
                "expected a phenomenon document, got {}",
                other.kind()
            ))),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        render_document(&Document::Phenomenon(self.inner.clone())).map_err(err)
    }

    /// Marginal-mismatch descriptions; empty means no-disturbance holds.
    fn no_disturbance_violations(&self) -> Vec<String> {
        ccx_core::scenario::check_no_disturbance(&self.inner)
            .violations
            .iter()
            .map(|v| {
                format!(
                    "contexts {} vs {} on slots {:?}, outcomes {:?}: {} != {}",
                    v.ctx_a,
                    v.ctx_b,
                    v.gamma,
                    v.outcomes,
                    format_q(&v.lhs),
                    format_q(&v.rhs)
                )
            })
            .collect()
    }

    /// Decides membership in the deterministic-strategy polytope.
    #[pyo3(signature = (allow_disturbing=false))]
    fn factorisable(&self, allow_disturbing: bool) -> PyResult<Certificate> {
        let cert = ccx_core::polytope::is_factorisable(&self.inner, allow_disturbing)
            .map_err(err)?;
        Ok(Certificate::from_core(cert))
    }

    /// One of "fine-tuning-required", "factorisable", "nd-fails".
    fn classify(&self) -> PyResult<String> {
        match ccx_core::verify::corollary_report(&self.inner).map_err(err)? {
            CorollaryVerdict::FineTuningRequired { value, witness } => Ok(format!(
                "fine-tuning-required (witness value {} vs bound {})",
                format_q(&value),
                format_q(&witness.classical_bound)
            )),
            CorollaryVerdict::Factorisable { .. } => Ok("factorisable".into()),
            CorollaryVerdict::NdFails { violations } => {
                Ok(format!("nd-fails ({violations} mismatches)"))
            }
        }
    }

    fn __repr__(&self) -> String {
        format!("Phenomenon({} contexts)", self.inner.rows.len())
    }
}

/// Outcome of the polytope membership decision.
#[pyclass(frozen, skip_from_py_object)]
struct Certificate {
    #[pyo3(get)]
    feasible: bool,
    /// Strategy weights as "num/den" strings when feasible.
    #[pyo3(get)]
    weights: Option<Vec<String>>,
    /// (value, classical bound) of the separating functional when not.
    #[pyo3(get)]
    witness: Option<(String, String)>,
}

impl Certificate {
    fn from_core(cert: ccx_core::polytope::FeasibilityCertificate) -> Self {
        Certificate {
            feasible: cert.feasible,
            weights: cert.weights.map(|w| w.iter().map(format_q).collect()),
            witness: cert
                .witness
                .map(|(f, value)| (format_q(&value), format_q(&f.classical_bound))),
        }
    }
}

#[pymethods]
impl Certificate {
    fn __repr__(&self) -> String {
        if self.feasible {
            "Certificate(feasible)".into()
        } else {
            format!("Certificate(infeasible, witness {:?})", self.witness)
        }
    }
}

/// Directed acyclic graph with setting/outcome/latent roles.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Graph {
    inner: ccx_core::graph::Dag,
}

#[pymethods]
impl Graph {
    #[new]
    fn new(nodes: Vec<(String, String)>, edges: Vec<(String, String)>) -> PyResult<Self> {
        let mut owned = Vec::with_capacity(nodes.len());
        for (name, role) in &nodes {
            owned.push((name.clone(), ccx_core::graph::Role::parse(role).map_err(err)?));
        }
        let index = |name: &str| -> PyResult<usize> {
            nodes
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| PyValueError::new_err(format!("unknown node {name:?}")))
        };
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (u, v) in &edges {
            idx_edges.push((index(u)?, index(v)?));
        }
        ccx_core::graph::Dag::new(owned, &idx_edges)
            .map(|inner| Graph { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse_document(text).map_err(err)? {
            Document::Graph(inner) => Ok(Graph { inner }),
            Document::Model(m) => Ok(Graph { inner: m.dag }),
            other => Err(PyValueError::new_err(format!(
                "expected a graph document, got {}",
                other.kind()
            ))),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        render_document(&Document::Graph(self.inner.clone())).map_err(err)
    }

    #[pyo3(signature = (x, y, z=vec![]))]
    fn d_separated(&self, x: Vec<String>, y: Vec<String>, z: Vec<String>) -> PyResult<bool> {
        let mask = |names: &[String]| -> PyResult<u64> {
            let mut m = 0u64;
            for n in names {
                m |= 1 << self.inner.node(n).map_err(err)?;
            }
            Ok(m)
        };
        let q = DSepQuery::new(&self.inner, mask(&x)?, mask(&y)?, mask(&z)?).map_err(err)?;
        Ok(ccx_core::graph::d_separated(&self.inner, &q))
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph({} nodes, {} edges)",
            self.inner.len(),
            self.inner.edges().len()
        )
    }
}

/// Causal model: graph, cardinalities, exact CPTs.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Model {
    inner: ccx_core::model::CausalModel,
}

#[pymethods]
impl Model {
    #[new]
    fn new(graph: &Graph, cards: Vec<usize>, cpts: Vec<Vec<Vec<String>>>) -> PyResult<Self> {
        let cpts = cpts
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|r| r.iter().map(|s| parse_q(s)).collect())
                    .collect::<Result<Vec<Vec<_>>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        ccx_core::model::CausalModel::new(graph.inner.clone(), cards, cpts)
            .map(|inner| Model { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse_document(text).map_err(err)? {
            Document::Model(inner) => Ok(Model { inner }),
            other => Err(PyValueError::new_err(format!(
                "expected a model document, got {}",
                other.kind()
            ))),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (graph, cards, seed, denom_bound=100))]
    fn random(graph: &Graph, cards: Vec<usize>, seed: u64, denom_bound: u64) -> Self {
        Model {
            inner: ccx_core::model::random_compatible_model(
                &graph.inner,
                &cards,
                seed,
                denom_bound,
            ),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        render_document(&Document::Model(self.inner.clone())).map_err(err)
    }

    fn graph(&self) -> Graph {
        Graph { inner: self.inner.dag.clone() }
    }

    /// Projects the model onto a scenario's observables.
    fn observable_phenomenon(&self, scenario: &Scenario) -> PyResult<Phenomenon> {
        let padded = pad_scenario(&scenario.inner).map_err(err)?;
        ccx_core::model::observable_phenomenon(&self.inner, &padded)
            .map(|inner| Phenomenon { inner })
            .map_err(err)
    }

    /// Fine-tuning witnesses against the phenomenon; empty means the
    /// model is faithful. Raises when it does not reproduce it.
    fn fine_tuning_witnesses(&self, phenomenon: &Phenomenon) -> PyResult<Vec<String>> {
        let report = ccx_core::faithfulness::check_faithfulness(&self.inner, &phenomenon.inner)
            .map_err(err)?;
        Ok(report
            .witnesses
            .iter()
            .map(|w| {
                format!(
                    "{} despite path {}",
                    w.statement.render(),
                    w.evidence.render(&self.inner.dag)
                )
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Model({} nodes)", self.inner.dag.len())
    }
}

/// Names of the bundled example documents.
#[pyfunction]
fn corpus_names() -> Vec<&'static str> {
    ccx_core::corpus::NAMES.to_vec()
}

/// Serialized text of a bundled document.
#[pyfunction]
fn corpus_text(name: &str) -> PyResult<String> {
    ccx_core::corpus::text(name).map_err(err)
}

/// Runs a command-line invocation in process; returns (exit_code, output).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String) {
    ccx_core::cli::run(&args)
}

/// Exhaustive chained-graph sweep; returns the report text.
#[pyfunction]
#[pyo3(signature = (max_set_size=2))]
fn verify_lemma(max_set_size: usize) -> String {
    ccx_core::verify::verify_lemma_chain(max_set_size).to_string()
}

#[pymodule]
fn ccx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", ccx_core::VERSION)?;
    m.add_class::<Scenario>()?;
    m.add_class::<Phenomenon>()?;
    m.add_class::<Certificate>()?;
    m.add_class::<Graph>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(corpus_names, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_text, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemma, m)?)?;
    Ok(())
}
