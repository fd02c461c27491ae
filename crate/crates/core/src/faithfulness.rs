// SPDX-License-Identifier: MIT OR Apache-2.0
//! Faithfulness checking: every conditional independence of the
//! phenomenon must be mirrored by a d-separation of the model's graph.
//! CI statements that hold operationally while the graph d-connects their
//! sets are fine-tuning witnesses, each carried with a concrete
//! d-connecting path.

use crate::ci::{enumerate_ci, CIStatement, DEFAULT_CI_VAR_CAP};
use crate::error::{Error, Result};
use crate::graph::{d_separated, find_connecting_path, DSepQuery, Dag, Path};
use crate::model::{observable_phenomenon, phenomenon_joint, CausalModel};
use crate::scenario::{PaddedScenario, Phenomenon};

/// A CI statement of the phenomenon whose sets the model's graph
/// d-connects, together with an unblocked path as evidence.
#[derive(Debug, Clone)]
pub struct FineTuningWitness {
    pub statement: CIStatement,
    pub evidence: Path,
}

#[derive(Debug, Clone)]
pub struct FaithfulnessReport {
    pub faithful: bool,
    pub witnesses: Vec<FineTuningWitness>,
    /// Canonical CI statements of the phenomenon that were examined.
    pub checked_count: usize,
    /// Set when uniform context weights were assumed; marginal
    /// independences among settings reflect that choice.
    pub uniform_weights_note: bool,
}

/// The d-separation queries over the graph corresponding to a CI
/// statement on observed variables.
fn query_for(dag: &Dag, s: &CIStatement) -> Result<DSepQuery> {
    let mask = |set: &std::collections::BTreeSet<String>| -> Result<u64> {
        let mut m = 0u64;
        for name in set {
            m |= 1 << dag.node(name)?;
        }
        Ok(m)
    };
    DSepQuery::new(dag, mask(&s.x)?, mask(&s.y)?, mask(&s.z)?)
}

/// Checks faithfulness of `m` against `p`. The model must reproduce the
/// phenomenon exactly; that is verified first.
pub fn check_faithfulness(m: &CausalModel, p: &Phenomenon) -> Result<FaithfulnessReport> {
    let reproduced = observable_phenomenon(m, &p.scenario)?;
    for (c, (got, want)) in reproduced.rows.iter().zip(&p.rows).enumerate() {
        if got != want {
            let idx = got.iter().zip(want).position(|(a, b)| a != b).unwrap();
            return Err(Error::Reproduction(format!(
                "context {c}, entry {idx}: model gives {}, phenomenon has {}",
                got[idx], want[idx]
            )));
        }
    }

    let joint = phenomenon_joint(p);
    let ci = enumerate_ci(&joint, DEFAULT_CI_VAR_CAP)?;
    let mut witnesses = Vec::new();
    for s in ci.iter() {
        let q = query_for(&m.dag, s)?;
        if !d_separated(&m.dag, &q) {
            let evidence = find_connecting_path(&m.dag, &q)
                .expect("d-connected query has an unblocked path");
            witnesses.push(FineTuningWitness { statement: s.clone(), evidence });
        }
    }
    Ok(FaithfulnessReport {
        faithful: witnesses.is_empty(),
        checked_count: ci.len(),
        witnesses,
        uniform_weights_note: p.context_weights.is_none(),
    })
}

/// The d-separation obligations any faithful model of a no-disturbance
/// phenomenon must satisfy: one query per nonempty proper slot subset.
pub fn nd_dsep_obligations(s: &PaddedScenario) -> Vec<CIStatement> {
    crate::ci::nd_ci_statements(s.n)
}

/// Runs the obligations of [`nd_dsep_obligations`] against a graph,
/// returning the failing statements.
pub fn failed_obligations(dag: &Dag, s: &PaddedScenario) -> Result<Vec<CIStatement>> {
    let mut failed = Vec::new();
    for stmt in nd_dsep_obligations(s) {
        let q = query_for(dag, &stmt)?;
        if !d_separated(dag, &q) {
            failed.push(stmt);
        }
    }
    Ok(failed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_blocked, Role};
    use crate::model::{random_compatible_model, CausalModel};
    use crate::rational::q;
    use crate::scenario::{chsh_scenario, pad_scenario};

    fn bell_dag() -> Dag {
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

    #[test]
    fn generic_bell_model_is_faithful() {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let g = bell_dag();
        let m = random_compatible_model(&g, &[2, 2, 2, 2, 4], 5, 100);
        let p = observable_phenomenon(&m, &padded).unwrap();
        let report = check_faithfulness(&m, &p).unwrap();
        assert!(report.faithful, "witnesses: {:?}", report.witnesses);
        assert!(report.checked_count > 0);
    }

    /// L uniform, A2 = L, A1 = L xor (x1 and x2): reproduces the extremal
    /// no-signalling box through a direct X2 -> A1 edge.
    pub(crate) fn hidden_edge_pr_model() -> CausalModel {
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
        // A2 parent: L
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

    fn pr_box() -> Phenomenon {
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

    #[test]
    fn hidden_edge_model_reproduces_but_is_fine_tuned() {
        let m = hidden_edge_pr_model();
        let p = pr_box();
        let report = check_faithfulness(&m, &p).unwrap();
        assert!(!report.faithful);
        let expected = CIStatement::new(["A1"], ["X2"], ["X1"]).unwrap();
        let w = report
            .witnesses
            .iter()
            .find(|w| w.statement == expected)
            .expect("hidden-edge witness present");
        // Evidence replays against the blocking rules.
        let z = 1u64 << m.dag.node("X1").unwrap();
        assert!(!path_blocked(&m.dag, &w.evidence, z));
    }

    #[test]
    fn mismatched_pair_is_reproduction_error() {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let m = hidden_edge_pr_model();
        let uniform = Phenomenon::new(padded, vec![vec![q(1, 4); 4]; 4], None).unwrap();
        assert!(matches!(
            check_faithfulness(&m, &uniform),
            Err(Error::Reproduction(_))
        ));
    }

    #[test]
    fn isolated_latent_changes_nothing() {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let g = Dag::from_names(
            &[
                ("X1", Role::Setting),
                ("X2", Role::Setting),
                ("A1", Role::Outcome),
                ("A2", Role::Outcome),
                ("L", Role::Latent),
                ("Lspare", Role::Latent),
            ],
            &[("X1", "A1"), ("L", "A1"), ("L", "A2"), ("X2", "A2")],
        )
        .unwrap();
        let m = random_compatible_model(&g, &[2, 2, 2, 2, 4, 2], 5, 100);
        let p = observable_phenomenon(&m, &padded).unwrap();
        let report = check_faithfulness(&m, &p).unwrap();
        assert!(report.faithful);
    }

    #[test]
    fn obligation_counts() {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        assert_eq!(nd_dsep_obligations(&padded).len(), 2);
        let g = bell_dag();
        assert!(failed_obligations(&g, &padded).unwrap().is_empty());

        let signalling = Dag::from_names(
            &[
                ("X1", Role::Setting),
                ("X2", Role::Setting),
                ("A1", Role::Outcome),
                ("A2", Role::Outcome),
            ],
            &[("X1", "A1"), ("X2", "A1"), ("X2", "A2")],
        )
        .unwrap();
        let failed = failed_obligations(&signalling, &padded).unwrap();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0], CIStatement::new(["A1"], ["X2"], ["X1"]).unwrap());
    }
}
