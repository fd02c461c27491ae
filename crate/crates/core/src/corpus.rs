// SPDX-License-Identifier: MIT OR Apache-2.0
//! Bundled example documents. Every command can run against these by the
//! `corpus:<name>` reference, so nothing external is needed to exercise
//! the full pipeline. Builders are deterministic; the checked-in JSON
//! files under `corpus/` are goldens regenerated from them.
//!
//! Quantitative anchors (the 27/10 violation, the parity-functional value
//! 4, the five-cycle sum -5) are re-verified on every load.

use num_bigint::BigInt;

use crate::doc::{render_document, Document};
use crate::error::{Error, Result};
use crate::graph::{Dag, Role};
use crate::model::{observable_phenomenon, random_compatible_model, CausalModel};
use crate::polytope::{builtin_functionals, evaluate_inequality};
use crate::rational::{q, Q};
use crate::scenario::{
    chsh_scenario, ghz_scenario, kcbs_scenario, pad_scenario, Phenomenon,
};

pub const NAMES: &[&str] = &[
    "pr-box",
    "tsirelson-rational",
    "ghz-mermin",
    "kcbs-maximal",
    "uniform-noise",
    "signalling-box",
    "bell-dag",
    "bell-dag-phenomenon",
    "prbox-hidden-edge",
    "chsh-functional",
    "mermin3-functional",
    "kcbs-functional",
];

/// P(ab|xy) = 1/2 iff a xor b = x and y.
pub fn pr_box() -> Phenomenon {
    let padded = pad_scenario(&chsh_scenario()).unwrap();
    let mut rows = Vec::new();
    for c in 0..4usize {
        let (x, y) = (c / 2, c % 2);
        rows.push(
            (0..4)
                .map(|idx: usize| {
                    let (a, b) = (idx / 2, idx % 2);
                    if a ^ b == x & y {
                        q(1, 2)
                    } else {
                        q(0, 1)
                    }
                })
                .collect(),
        );
    }
    Phenomenon::new(padded, rows, None).unwrap()
}

/// Correlators 27/40 (sign-flipped in the last context), the largest
/// denominator-40 magnitude staying below the quadratic bound; the
/// two-party functional reaches 27/10 on it.
pub fn tsirelson_rational() -> Phenomenon {
    let padded = pad_scenario(&chsh_scenario()).unwrap();
    let mut rows = Vec::new();
    for c in 0..4usize {
        let e = if c == 3 { q(-27, 40) } else { q(27, 40) };
        rows.push(
            (0..4)
                .map(|idx: usize| {
                    let (a, b) = (idx / 2, idx % 2);
                    let parity = if a ^ b == 0 { q(1, 1) } else { q(-1, 1) };
                    (q(1, 1) + parity * &e) / q(4, 1)
                })
                .collect(),
        );
    }
    Phenomenon::new(padded, rows, None).unwrap()
}

/// Perfect three-party parity correlations: even outcome parity in the
/// first context, odd in the other three.
pub fn ghz_mermin() -> Phenomenon {
    let padded = pad_scenario(&ghz_scenario()).unwrap();
    let mut rows = Vec::new();
    for c in 0..4usize {
        let want = if c == 0 { 0 } else { 1 };
        rows.push(
            (0..8)
                .map(|idx: usize| {
                    if (idx.count_ones() as usize) % 2 == want {
                        q(1, 4)
                    } else {
                        q(0, 1)
                    }
                })
                .collect(),
        );
    }
    Phenomenon::new(padded, rows, None).unwrap()
}

/// Perfect anticorrelation on every edge of the five-cycle; correlator
/// sum -5 against the assignment bound -3.
pub fn kcbs_maximal() -> Phenomenon {
    let padded = pad_scenario(&kcbs_scenario()).unwrap();
    let row = vec![q(0, 1), q(1, 2), q(1, 2), q(0, 1)];
    Phenomenon::new(padded, vec![row; 5], None).unwrap()
}

pub fn uniform_noise() -> Phenomenon {
    let padded = pad_scenario(&chsh_scenario()).unwrap();
    Phenomenon::new(padded, vec![vec![q(1, 4); 4]; 4], None).unwrap()
}

/// Deterministic box where the first outcome copies the remote setting:
/// the plainest marginal-disturbance violation.
pub fn signalling_box() -> Phenomenon {
    let padded = pad_scenario(&chsh_scenario()).unwrap();
    let mut rows = Vec::new();
    for c in 0..4usize {
        let y = c % 2;
        let mut row = vec![q(0, 1); 4];
        row[y * 2] = q(1, 1); // (a1, a2) = (y, 0)
        rows.push(row);
    }
    Phenomenon::new(padded, rows, None).unwrap()
}

fn bell_dag_graph() -> Dag {
    Dag::from_names(
        &[
            ("X1", Role::Setting),
            ("X2", Role::Setting),
            ("A1", Role::Outcome),
            ("A2", Role::Outcome),
            ("L", Role::Latent),
        ],
        &[("X1", "A1"), ("L", "A1"), ("L", "A2"), ("X2", "A2")],
    )
    .unwrap()
}

/// Common-cause model on the two-party graph with generic strictly
/// positive CPTs (fixed seed). Its observable phenomenon is faithful to
/// the graph.
pub fn bell_dag_model() -> CausalModel {
    random_compatible_model(&bell_dag_graph(), &[2, 2, 2, 2, 4], 5, 100)
}

pub fn bell_dag_phenomenon() -> Phenomenon {
    let padded = pad_scenario(&chsh_scenario()).unwrap();
    observable_phenomenon(&bell_dag_model(), &padded).unwrap()
}

/// Reproduces the extremal no-signalling box through a hidden direct
/// X2 -> A1 edge: L uniform, A2 = L, A1 = L xor (x1 and x2). Passes
/// reproduction, fails faithfulness.
pub fn prbox_hidden_edge_model() -> CausalModel {
    let g = Dag::from_names(
        &[
            ("X1", Role::Setting),
            ("X2", Role::Setting),
            ("A1", Role::Outcome),
            ("A2", Role::Outcome),
            ("L", Role::Latent),
        ],
        &[("X1", "A1"), ("X2", "A1"), ("L", "A1"), ("L", "A2")],
    )
    .unwrap();
    let uniform = vec![vec![q(1, 2), q(1, 2)]];
    // A1 parents ascending: X1, X2, L
    let mut a1_rows = Vec::new();
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for l in 0..2usize {
                let a = l ^ (x1 & x2);
                let mut row = vec![q(0, 1), q(0, 1)];
                row[a] = q(1, 1);
                a1_rows.push(row);
            }
        }
    }
    let mut a2_rows = Vec::new();
    for l in 0..2usize {
        let mut row = vec![q(0, 1), q(0, 1)];
        row[l] = q(1, 1);
        a2_rows.push(row);
    }
    CausalModel::new(
        g,
        vec![2, 2, 2, 2, 2],
        vec![uniform.clone(), uniform.clone(), a1_rows, a2_rows, uniform],
    )
    .unwrap()
}

fn functional_document(name: &str) -> Document {
    let b = builtin_functionals()
        .into_iter()
        .find(|b| b.name == name)
        .expect("builtin functional exists");
    Document::Functional { scenario: b.scenario.base.clone(), functional: b.functional }
}

fn anchor(p: &Phenomenon, functional_name: &str, value: Q, bound: Q) -> Result<()> {
    let b = builtin_functionals()
        .into_iter()
        .find(|b| b.name == functional_name)
        .expect("builtin functional exists");
    let eval = evaluate_inequality(p, &b.functional)?;
    if eval.value != value || eval.bound != bound {
        return Err(Error::Validation(format!(
            "corpus anchor drifted: {functional_name} gives {} against bound {}, expected {value} vs {bound}",
            eval.value, eval.bound
        )));
    }
    Ok(())
}

/// Builds a bundled document by name, re-verifying its quantitative
/// anchors.
pub fn document(name: &str) -> Result<Document> {
    let int = |n: i64| Q::from(BigInt::from(n));
    match name {
        "pr-box" => {
            let p = pr_box();
            anchor(&p, "chsh", int(4), int(2))?;
            Ok(Document::Phenomenon(p))
        }
        "tsirelson-rational" => {
            let p = tsirelson_rational();
            anchor(&p, "chsh", q(27, 10), int(2))?;
            Ok(Document::Phenomenon(p))
        }
        "ghz-mermin" => {
            let p = ghz_mermin();
            anchor(&p, "mermin3", int(4), int(2))?;
            Ok(Document::Phenomenon(p))
        }
        "kcbs-maximal" => {
            let p = kcbs_maximal();
            anchor(&p, "kcbs", int(5), int(3))?;
            Ok(Document::Phenomenon(p))
        }
        "uniform-noise" => Ok(Document::Phenomenon(uniform_noise())),
        "signalling-box" => Ok(Document::Phenomenon(signalling_box())),
        "bell-dag" => Ok(Document::Model(bell_dag_model())),
        "bell-dag-phenomenon" => Ok(Document::Phenomenon(bell_dag_phenomenon())),
        "prbox-hidden-edge" => Ok(Document::Model(prbox_hidden_edge_model())),
        "chsh-functional" => Ok(functional_document("chsh")),
        "mermin3-functional" => Ok(functional_document("mermin3")),
        "kcbs-functional" => Ok(functional_document("kcbs")),
        _ => Err(Error::Validation(format!(
            "unknown corpus document {name:?}; available: {}",
            NAMES.join(", ")
        ))),
    }
}

/// Canonical serialized text of a bundled document.
pub fn text(name: &str) -> Result<String> {
    render_document(&document(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::parse_document;
    use crate::faithfulness::check_faithfulness;
    use crate::polytope::is_factorisable;
    use crate::scenario::check_no_disturbance;

    #[test]
    fn all_documents_build_and_roundtrip() {
        for name in NAMES {
            let t = text(name).unwrap();
            let back = parse_document(&t).unwrap();
            assert_eq!(render_document(&back).unwrap(), t, "{name}");
        }
    }

    #[test]
    fn nd_verdicts() {
        for name in [
            "pr-box",
            "tsirelson-rational",
            "ghz-mermin",
            "kcbs-maximal",
            "uniform-noise",
            "bell-dag-phenomenon",
        ] {
            match document(name).unwrap() {
                Document::Phenomenon(p) => {
                    assert!(check_no_disturbance(&p).holds(), "{name}")
                }
                _ => panic!("{name} is not a phenomenon"),
            }
        }
        let Document::Phenomenon(sig) = document("signalling-box").unwrap() else {
            panic!("signalling-box is not a phenomenon");
        };
        assert!(!check_no_disturbance(&sig).holds());
    }

    #[test]
    fn factorisability_verdicts() {
        let feasible = |name: &str| {
            let Document::Phenomenon(p) = document(name).unwrap() else {
                panic!("{name} is not a phenomenon");
            };
            is_factorisable(&p, false).unwrap().feasible
        };
        assert!(!feasible("pr-box"));
        assert!(!feasible("tsirelson-rational"));
        assert!(!feasible("ghz-mermin"));
        assert!(!feasible("kcbs-maximal"));
        assert!(feasible("uniform-noise"));
        assert!(feasible("bell-dag-phenomenon"));
    }

    #[test]
    fn bell_dag_pair_is_faithful() {
        let m = bell_dag_model();
        let p = bell_dag_phenomenon();
        assert!(check_faithfulness(&m, &p).unwrap().faithful);
    }

    #[test]
    fn hidden_edge_model_reproduces_pr_box_unfaithfully() {
        let m = prbox_hidden_edge_model();
        let report = check_faithfulness(&m, &pr_box()).unwrap();
        assert!(!report.faithful);
    }

    /// The checked-in JSON files match the builders byte for byte.
    #[test]
    fn golden_files_match() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
        for name in NAMES {
            let path = dir.join(format!("{name}.json"));
            let on_disk = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()));
            assert_eq!(on_disk, text(name).unwrap(), "{name}");
        }
    }
}
