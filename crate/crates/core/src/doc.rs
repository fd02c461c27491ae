// SPDX-License-Identifier: MIT OR Apache-2.0
//! Versioned JSON document format for scenarios, phenomena, graphs,
//! models, inequality functionals, and CI sets.
//!
//! Rationals travel as "num/den" strings and are rejected in any other
//! shape. Parsing runs the same constructors as programmatic use, so a
//! document that loads is a document that validates. Serialization is
//! canonical: parse, render, parse is the identity.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ci::{Axiom, CISet, CIStatement, Origin};
use crate::error::{Error, Result};
use crate::graph::{Dag, Role};
use crate::model::CausalModel;
use crate::polytope::InequalityFunctional;
use crate::rational::{format_q, parse_q, Q};
use crate::scenario::{pad_scenario, Phenomenon, Scenario};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub enum Document {
    Scenario(Scenario),
    Phenomenon(Phenomenon),
    Graph(Dag),
    Model(CausalModel),
    /// An inequality functional together with the scenario it lives in.
    /// The classical bound is recomputed on load, never read from disk.
    Functional { scenario: Scenario, functional: InequalityFunctional },
    CiSet(CISet),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Scenario(_) => "scenario",
            Document::Phenomenon(_) => "phenomenon",
            Document::Graph(_) => "graph",
            Document::Model(_) => "model",
            Document::Functional { .. } => "functional",
            Document::CiSet(_) => "ci-set",
        }
    }
}

// -- wire structs -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct Envelope {
    kind: String,
    version: u32,
    body: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioBody {
    measurements: Vec<String>,
    outcomes: Vec<String>,
    contexts: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bell_partition: Option<Vec<Vec<String>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhenomenonBody {
    scenario: ScenarioBody,
    /// One row per context, outcome tuples in mixed-radix order.
    rows: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context_weights: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphNodeBody {
    name: String,
    role: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphBody {
    nodes: Vec<GraphNodeBody>,
    edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelBody {
    graph: GraphBody,
    cards: Vec<usize>,
    /// cpts[node][parent_row][value], parent rows mixed-radix over
    /// parents in ascending node order.
    cpts: Vec<Vec<Vec<String>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalTermBody {
    context: usize,
    entry: usize,
    coefficient: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalBody {
    scenario: ScenarioBody,
    terms: Vec<FunctionalTermBody>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiStatementBody {
    x: Vec<String>,
    y: Vec<String>,
    z: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiEntryBody {
    #[serde(flatten)]
    statement: CiStatementBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    derived_by: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    premises: Vec<CiStatementBody>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiSetBody {
    statements: Vec<CiEntryBody>,
}

// -- conversions ------------------------------------------------------------

fn qs(values: &[Q]) -> Vec<String> {
    values.iter().map(format_q).collect()
}

fn parse_qs(values: &[String]) -> Result<Vec<Q>> {
    values.iter().map(|s| parse_q(s)).collect()
}

fn scenario_body(s: &Scenario) -> ScenarioBody {
    let name = |i: &usize| s.measurements[*i].clone();
    ScenarioBody {
        measurements: s.measurements.clone(),
        outcomes: s.outcomes.clone(),
        contexts: s.contexts.iter().map(|c| c.iter().map(name).collect()).collect(),
        bell_partition: s
            .bell_partition
            .as_ref()
            .map(|p| p.iter().map(|part| part.iter().map(name).collect()).collect()),
    }
}

fn scenario_from_body(b: ScenarioBody) -> Result<Scenario> {
    Scenario::new(b.measurements, b.outcomes, b.contexts, b.bell_partition)
}

fn graph_body(g: &Dag) -> GraphBody {
    GraphBody {
        nodes: (0..g.len())
            .map(|v| GraphNodeBody {
                name: g.name(v).to_string(),
                role: g.role(v).as_str().to_string(),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|&(u, v)| (g.name(u).to_string(), g.name(v).to_string()))
            .collect(),
    }
}

fn graph_from_body(b: GraphBody) -> Result<Dag> {
    let mut nodes = Vec::with_capacity(b.nodes.len());
    for n in &b.nodes {
        nodes.push((n.name.clone(), Role::parse(&n.role)?));
    }
    let index = |name: &str| -> Result<usize> {
        b.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::Parse(format!("edge endpoint {name:?} is not a node")))
    };
    let mut edges = Vec::with_capacity(b.edges.len());
    for (u, v) in &b.edges {
        edges.push((index(u)?, index(v)?));
    }
    Dag::new(nodes, &edges)
}

fn statement_body(s: &CIStatement) -> CiStatementBody {
    let v = |set: &std::collections::BTreeSet<String>| set.iter().cloned().collect();
    CiStatementBody { x: v(&s.x), y: v(&s.y), z: v(&s.z) }
}

fn statement_from_body(b: &CiStatementBody) -> Result<CIStatement> {
    CIStatement::new(b.x.iter().cloned(), b.y.iter().cloned(), b.z.iter().cloned())
}

fn to_body(d: &Document) -> Result<serde_json::Value> {
    let val = match d {
        Document::Scenario(s) => serde_json::to_value(scenario_body(s)),
        Document::Phenomenon(p) => serde_json::to_value(PhenomenonBody {
            scenario: scenario_body(&p.scenario.base),
            rows: p.rows.iter().map(|r| qs(r)).collect(),
            context_weights: p.context_weights.as_ref().map(|w| qs(w)),
        }),
        Document::Graph(g) => serde_json::to_value(graph_body(g)),
        Document::Model(m) => serde_json::to_value(ModelBody {
            graph: graph_body(&m.dag),
            cards: m.cards.clone(),
            cpts: m
                .cpts
                .iter()
                .map(|rows| rows.iter().map(|r| qs(r)).collect())
                .collect(),
        }),
        Document::Functional { scenario, functional } => serde_json::to_value(FunctionalBody {
            scenario: scenario_body(scenario),
            terms: functional
                .coefficients
                .iter()
                .map(|(&(context, entry), coefficient)| FunctionalTermBody {
                    context,
                    entry,
                    coefficient: format_q(coefficient),
                })
                .collect(),
        }),
        Document::CiSet(set) => serde_json::to_value(CiSetBody {
            statements: set
                .statements
                .iter()
                .map(|(s, origin)| {
                    let (derived_by, premises) = match origin {
                        Origin::Ground => (None, Vec::new()),
                        Origin::Derived { axiom, premises } => (
                            Some(axiom.as_str().to_string()),
                            premises.iter().map(statement_body).collect(),
                        ),
                    };
                    CiEntryBody { statement: statement_body(s), derived_by, premises }
                })
                .collect(),
        }),
    };
    val.map_err(|e| Error::Parse(format!("serialization failed: {e}")))
}

fn axiom_from_str(s: &str) -> Result<Axiom> {
    match s {
        "decomposition" => Ok(Axiom::Decomposition),
        "weak-union" => Ok(Axiom::WeakUnion),
        "contraction" => Ok(Axiom::Contraction),
        "intersection" => Ok(Axiom::Intersection),
        _ => Err(Error::Parse(format!("unknown axiom {s:?}"))),
    }
}

/// Serializes a document as pretty-printed JSON with a trailing newline.
pub fn render_document(d: &Document) -> Result<String> {
    let envelope = Envelope {
        kind: d.kind().to_string(),
        version: FORMAT_VERSION,
        body: to_body(d)?,
    };
    let mut text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_document(text: &str) -> Result<Document> {
    let envelope: Envelope = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("invalid document: {e}")))?;
    if envelope.version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format version {} (this build reads {FORMAT_VERSION})",
            envelope.version
        )));
    }
    let body = envelope.body;
    let take = |e: serde_json::Error| Error::Parse(format!("invalid {} body: {e}", envelope.kind));
    match envelope.kind.as_str() {
        "scenario" => {
            let b: ScenarioBody = serde_json::from_value(body).map_err(take)?;
            Ok(Document::Scenario(scenario_from_body(b)?))
        }
        "phenomenon" => {
            let b: PhenomenonBody = serde_json::from_value(body).map_err(take)?;
            let scenario = scenario_from_body(b.scenario)?;
            let padded = pad_scenario(&scenario)?;
            let rows = b.rows.iter().map(|r| parse_qs(r)).collect::<Result<Vec<_>>>()?;
            let weights = b.context_weights.as_deref().map(parse_qs).transpose()?;
            Ok(Document::Phenomenon(Phenomenon::new(padded, rows, weights)?))
        }
        "graph" => {
            let b: GraphBody = serde_json::from_value(body).map_err(take)?;
            Ok(Document::Graph(graph_from_body(b)?))
        }
        "model" => {
            let b: ModelBody = serde_json::from_value(body).map_err(take)?;
            let dag = graph_from_body(b.graph)?;
            let cpts = b
                .cpts
                .iter()
                .map(|rows| rows.iter().map(|r| parse_qs(r)).collect())
                .collect::<Result<Vec<_>>>()?;
            Ok(Document::Model(CausalModel::new(dag, b.cards, cpts)?))
        }
        "functional" => {
            let b: FunctionalBody = serde_json::from_value(body).map_err(take)?;
            let scenario = scenario_from_body(b.scenario)?;
            let padded = pad_scenario(&scenario)?;
            let mut coefficients = std::collections::BTreeMap::new();
            for t in &b.terms {
                if coefficients
                    .insert((t.context, t.entry), parse_q(&t.coefficient)?)
                    .is_some()
                {
                    return Err(Error::Parse(format!(
                        "duplicate functional term (context {}, entry {})",
                        t.context, t.entry
                    )));
                }
            }
            let functional = InequalityFunctional::new(&padded, coefficients)?;
            Ok(Document::Functional { scenario, functional })
        }
        "ci-set" => {
            let b: CiSetBody = serde_json::from_value(body).map_err(take)?;
            let mut statements = std::collections::BTreeMap::new();
            for entry in &b.statements {
                let stmt = statement_from_body(&entry.statement)?;
                let origin = match &entry.derived_by {
                    None => Origin::Ground,
                    Some(axiom) => Origin::Derived {
                        axiom: axiom_from_str(axiom)?,
                        premises: entry
                            .premises
                            .iter()
                            .map(statement_from_body)
                            .collect::<Result<Vec<_>>>()?,
                    },
                };
                statements.insert(stmt, origin);
            }
            Ok(Document::CiSet(CISet { statements }))
        }
        other => Err(Error::Parse(format!("unknown document kind {other:?}"))),
    }
}

/// Hex SHA-256 of a document's text, embedded in reports so identical
/// inputs are recognizable.
pub fn digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::scenario::chsh_scenario;

    fn roundtrip(d: &Document) -> Document {
        let text = render_document(d).unwrap();
        let back = parse_document(&text).unwrap();
        assert_eq!(render_document(&back).unwrap(), text);
        back
    }

    #[test]
    fn scenario_roundtrip() {
        let d = Document::Scenario(chsh_scenario());
        match roundtrip(&d) {
            Document::Scenario(s) => assert_eq!(s, chsh_scenario()),
            _ => panic!("kind changed"),
        }
    }

    #[test]
    fn phenomenon_roundtrip() {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let p = Phenomenon::new(padded, vec![vec![q(1, 4); 4]; 4], None).unwrap();
        match roundtrip(&Document::Phenomenon(p.clone())) {
            Document::Phenomenon(back) => assert_eq!(back, p),
            _ => panic!("kind changed"),
        }
    }

    #[test]
    fn graph_and_model_roundtrip() {
        let g = Dag::from_names(
            &[("X1", Role::Setting), ("A1", Role::Outcome), ("L", Role::Latent)],
            &[("X1", "A1"), ("L", "A1")],
        )
        .unwrap();
        roundtrip(&Document::Graph(g.clone()));

        let bell = Dag::from_names(
            &[
                ("X1", Role::Setting),
                ("X2", Role::Setting),
                ("A1", Role::Outcome),
                ("A2", Role::Outcome),
                ("L", Role::Latent),
            ],
            &[("X1", "A1"), ("L", "A1"), ("L", "A2"), ("X2", "A2")],
        )
        .unwrap();
        let m = crate::model::random_compatible_model(&bell, &[2, 2, 2, 2, 4], 9, 100);
        match roundtrip(&Document::Model(m.clone())) {
            Document::Model(back) => {
                assert_eq!(back.cards, m.cards);
                assert_eq!(back.cpts, m.cpts);
            }
            _ => panic!("kind changed"),
        }
    }

    #[test]
    fn functional_roundtrip_recomputes_bound() {
        for b in crate::polytope::builtin_functionals() {
            let d = Document::Functional {
                scenario: b.scenario.base.clone(),
                functional: b.functional.clone(),
            };
            match roundtrip(&d) {
                Document::Functional { functional, .. } => {
                    assert_eq!(functional.classical_bound, b.functional.classical_bound);
                    assert_eq!(functional.coefficients, b.functional.coefficients);
                }
                _ => panic!("kind changed"),
            }
        }
    }

    #[test]
    fn ci_set_roundtrip_keeps_traces() {
        let ground = CISet::from_ground(crate::ci::nd_ci_statements(2));
        let closed = crate::ci::graphoid_closure(&ground, crate::ci::AxiomSelection::semigraphoid());
        match roundtrip(&Document::CiSet(closed.clone())) {
            Document::CiSet(back) => assert_eq!(back, closed),
            _ => panic!("kind changed"),
        }
    }

    #[test]
    fn decimals_rejected() {
        let text = r#"{
  "kind": "phenomenon",
  "version": 1,
  "body": {
    "scenario": {
      "measurements": ["m"],
      "outcomes": ["0", "1"],
      "contexts": [["m"]]
    },
    "rows": [["0.5", "0.5"]]
  }
}"#;
        assert!(matches!(parse_document(text), Err(Error::Parse(_))));
    }

    #[test]
    fn bad_version_and_kind_rejected() {
        assert!(parse_document(r#"{"kind":"scenario","version":2,"body":{}}"#).is_err());
        assert!(parse_document(r#"{"kind":"mystery","version":1,"body":{}}"#).is_err());
        assert!(parse_document("not json").is_err());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(""), digest(""));
        assert_ne!(digest("a"), digest("b"));
        assert_eq!(digest("abc").len(), 64);
    }
}
