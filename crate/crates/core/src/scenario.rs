// SPDX-License-Identifier: MIT OR Apache-2.0
//! Measurement scenarios, context padding, phenomena and the
//! no-disturbance check.
//!
//! A scenario lists measurements, a shared outcome set, and the contexts
//! (jointly measurable subsets). Padding brings every context up to the
//! same width `n` by appending a reserved trivial measurement with a
//! single outcome, so that a run is always described by setting variables
//! `X1..Xn` and outcome variables `A1..An`.

use std::collections::{BTreeMap, BTreeSet};


use crate::error::{Error, Result};
use crate::rational::{q_one, q_zero, Q};

/// Reserved identifier for the trivial (always-same-outcome) measurement.
/// User scenarios may not declare it.
pub const TRIVIAL_MEASUREMENT: &str = "_";
/// Display name of the trivial measurement's single outcome.
pub const TRIVIAL_OUTCOME: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    /// Ordered measurement identifiers.
    pub measurements: Vec<String>,
    /// Shared outcome set.
    pub outcomes: Vec<String>,
    /// Contexts as ordered lists of measurement indices. The declared
    /// order fixes slot assignment after padding.
    pub contexts: Vec<Vec<usize>>,
    /// Optional Bell partition: disjoint measurement-index subsets
    /// covering all measurements, one per party.
    pub bell_partition: Option<Vec<Vec<usize>>>,
}

impl Scenario {
    pub fn new(
        measurements: Vec<String>,
        outcomes: Vec<String>,
        contexts: Vec<Vec<String>>,
        bell_partition: Option<Vec<Vec<String>>>,
    ) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::Validation("scenario has no measurements".into()));
        }
        if outcomes.is_empty() {
            return Err(Error::Validation("scenario has no outcomes".into()));
        }
        if contexts.is_empty() {
            return Err(Error::Validation("scenario has no contexts".into()));
        }
        let mut index = BTreeMap::new();
        for (i, m) in measurements.iter().enumerate() {
            if m == TRIVIAL_MEASUREMENT {
                return Err(Error::Validation(format!(
                    "measurement identifier {TRIVIAL_MEASUREMENT:?} is reserved for padding"
                )));
            }
            if index.insert(m.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate measurement {m:?}")));
            }
        }
        {
            let mut seen = BTreeSet::new();
            for o in &outcomes {
                if !seen.insert(o) {
                    return Err(Error::Validation(format!("duplicate outcome {o:?}")));
                }
            }
        }
        let lookup = |m: &String| -> Result<usize> {
            index
                .get(m)
                .copied()
                .ok_or_else(|| Error::Validation(format!("unknown measurement {m:?}")))
        };
        let mut ctx_idx = Vec::with_capacity(contexts.len());
        for c in &contexts {
            if c.is_empty() {
                return Err(Error::Validation("empty context".into()));
            }
            let ids: Vec<usize> = c.iter().map(lookup).collect::<Result<_>>()?;
            if ids.iter().collect::<BTreeSet<_>>().len() != ids.len() {
                return Err(Error::Validation(format!("repeated measurement in context {c:?}")));
            }
            ctx_idx.push(ids);
        }
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        for c in &ctx_idx {
            covered.extend(c.iter().copied());
        }
        if covered.len() != measurements.len() {
            let missing: Vec<&String> = measurements
                .iter()
                .enumerate()
                .filter(|(i, _)| !covered.contains(i))
                .map(|(_, m)| m)
                .collect();
            return Err(Error::Validation(format!(
                "measurements appear in no context: {missing:?}"
            )));
        }
        let partition_idx = match bell_partition {
            None => None,
            Some(parts) => {
                let mut seen: BTreeSet<usize> = BTreeSet::new();
                let mut parts_idx = Vec::with_capacity(parts.len());
                for part in &parts {
                    let ids: Vec<usize> = part.iter().map(lookup).collect::<Result<_>>()?;
                    for &m in &ids {
                        if !seen.insert(m) {
                            return Err(Error::Validation(format!(
                                "bell partition subsets overlap at {:?}",
                                measurements[m]
                            )));
                        }
                    }
                    parts_idx.push(ids);
                }
                if seen.len() != measurements.len() {
                    return Err(Error::Validation("bell partition does not cover all measurements".into()));
                }
                for c in &ctx_idx {
                    for part in &parts_idx {
                        let hits = c.iter().filter(|m| part.contains(m)).count();
                        if hits > 1 {
                            return Err(Error::Validation(format!(
                                "context contains {hits} measurements of one party"
                            )));
                        }
                    }
                }
                Some(parts_idx)
            }
        };
        Ok(Scenario {
            measurements,
            outcomes,
            contexts: ctx_idx,
            bell_partition: partition_idx,
        })
    }

    pub fn measurement_index(&self, name: &str) -> Result<usize> {
        self.measurements
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| Error::Validation(format!("unknown measurement {name:?}")))
    }

    pub fn outcome_index(&self, name: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::Validation(format!("unknown outcome {name:?}")))
    }
}

/// A subset of the slot index set `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSubset {
    indices: BTreeSet<usize>,
}

impl IndexSubset {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Validation(format!(
                "slot index {bad} out of range for n = {n}"
            )));
        }
        Ok(IndexSubset { indices })
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Scenario with every context brought up to width `n`.
///
/// Slot assignment is deterministic: with a Bell partition, party `i`
/// occupies slot `i`; otherwise measurements keep their declared context
/// order and trivial slots are appended at the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedScenario {
    pub base: Scenario,
    pub n: usize,
    /// Per context, the `n` measurement ids occupying each slot.
    /// `base.measurements.len()` denotes the trivial measurement.
    pub slots: Vec<Vec<usize>>,
}

impl PaddedScenario {
    /// Measurement id of the injected trivial measurement.
    pub fn trivial_meas(&self) -> usize {
        self.base.measurements.len()
    }

    /// Outcome code of the trivial outcome. Real outcomes use their index
    /// into `base.outcomes`.
    pub fn trivial_outcome(&self) -> usize {
        self.base.outcomes.len()
    }

    pub fn meas_name(&self, id: usize) -> &str {
        if id == self.trivial_meas() {
            TRIVIAL_MEASUREMENT
        } else {
            &self.base.measurements[id]
        }
    }

    pub fn outcome_name(&self, code: usize) -> &str {
        if code == self.trivial_outcome() {
            TRIVIAL_OUTCOME
        } else {
            &self.base.outcomes[code]
        }
    }

    /// Total number of measurements including the trivial one when any
    /// context uses it.
    pub fn num_measurements(&self) -> usize {
        if self.has_padding() {
            self.base.measurements.len() + 1
        } else {
            self.base.measurements.len()
        }
    }

    pub fn has_padding(&self) -> bool {
        let t = self.trivial_meas();
        self.slots.iter().any(|c| c.contains(&t))
    }

    /// Outcome codes available at a slot of a context.
    pub fn slot_outcomes(&self, ctx: usize, slot: usize) -> Vec<usize> {
        if self.slots[ctx][slot] == self.trivial_meas() {
            vec![self.trivial_outcome()]
        } else {
            (0..self.base.outcomes.len()).collect()
        }
    }

    /// Per-slot outcome counts of a context (the mixed radix of its row).
    pub fn ctx_cards(&self, ctx: usize) -> Vec<usize> {
        (0..self.n)
            .map(|s| if self.slots[ctx][s] == self.trivial_meas() { 1 } else { self.base.outcomes.len() })
            .collect()
    }

    pub fn row_len(&self, ctx: usize) -> usize {
        self.ctx_cards(ctx).iter().product()
    }

    /// Decodes a row index into per-slot outcome codes.
    pub fn tuple_of_index(&self, ctx: usize, mut idx: usize) -> Vec<usize> {
        let cards = self.ctx_cards(ctx);
        let mut tuple = vec![0usize; self.n];
        for slot in (0..self.n).rev() {
            let card = cards[slot];
            let v = idx % card;
            idx /= card;
            tuple[slot] = if card == 1 { self.trivial_outcome() } else { v };
        }
        tuple
    }

    /// Inverse of [`tuple_of_index`].
    pub fn index_of_tuple(&self, ctx: usize, tuple: &[usize]) -> usize {
        let cards = self.ctx_cards(ctx);
        let mut idx = 0usize;
        for slot in 0..self.n {
            let v = if cards[slot] == 1 { 0 } else { tuple[slot] };
            idx = idx * cards[slot] + v;
        }
        idx
    }

    /// Slots on which two contexts install the same measurement.
    pub fn agreeing_slots(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.n).filter(|&s| self.slots[a][s] == self.slots[b][s]).collect()
    }

    /// Measurement ids that can occupy slot `i`, in order of first
    /// appearance across contexts. These are the values of the setting
    /// variable `X_{i+1}`.
    pub fn slot_setting_domain(&self, slot: usize) -> Vec<usize> {
        let mut dom = Vec::new();
        for c in &self.slots {
            if !dom.contains(&c[slot]) {
                dom.push(c[slot]);
            }
        }
        dom
    }

    /// Outcome codes the variable `A_{i+1}` can take: the shared outcome
    /// set, plus the trivial outcome when some context pads slot `i`.
    pub fn slot_outcome_domain(&self, slot: usize) -> Vec<usize> {
        let mut dom: Vec<usize> = (0..self.base.outcomes.len()).collect();
        if self.slots.iter().any(|c| c[slot] == self.trivial_meas()) {
            dom.push(self.trivial_outcome());
        }
        dom
    }
}

/// Pads every context of `s` to the common width `n`.
pub fn pad_scenario(s: &Scenario) -> Result<PaddedScenario> {
    let max_ctx = s.contexts.iter().map(Vec::len).max().unwrap_or(0);
    let trivial = s.measurements.len();
    let (n, slots) = match &s.bell_partition {
        Some(parts) => {
            // Party i occupies slot i; absent parties get the trivial slot.
            let n = parts.len().max(max_ctx);
            let mut slots = Vec::with_capacity(s.contexts.len());
            for c in &s.contexts {
                let mut row = vec![trivial; n];
                for &m in c {
                    let party = parts
                        .iter()
                        .position(|p| p.contains(&m))
                        .expect("partition covers all measurements");
                    row[party] = m;
                }
                slots.push(row);
            }
            (n, slots)
        }
        None => {
            let n = max_ctx;
            let slots = s
                .contexts
                .iter()
                .map(|c| {
                    let mut row = c.clone();
                    row.resize(n, trivial);
                    row
                })
                .collect();
            (n, slots)
        }
    };
    Ok(PaddedScenario { base: s.clone(), n, slots })
}

/// An exact conditional distribution P(A|X) over the contexts of a padded
/// scenario, with optional context weights P(X).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phenomenon {
    pub scenario: PaddedScenario,
    /// One row per context, indexed by the context's outcome-tuple radix.
    pub rows: Vec<Vec<Q>>,
    pub context_weights: Option<Vec<Q>>,
}

impl Phenomenon {
    pub fn new(
        scenario: PaddedScenario,
        rows: Vec<Vec<Q>>,
        context_weights: Option<Vec<Q>>,
    ) -> Result<Self> {
        if rows.len() != scenario.slots.len() {
            return Err(Error::Validation(format!(
                "expected {} rows, got {}",
                scenario.slots.len(),
                rows.len()
            )));
        }
        for (c, row) in rows.iter().enumerate() {
            if row.len() != scenario.row_len(c) {
                return Err(Error::Validation(format!(
                    "context {c}: expected {} entries, got {}",
                    scenario.row_len(c),
                    row.len()
                )));
            }
            let mut sum = q_zero();
            for p in row {
                if *p < q_zero() {
                    return Err(Error::Validation(format!("negative probability in context {c}")));
                }
                sum += p;
            }
            if sum != q_one() {
                return Err(Error::Validation(format!(
                    "context {c}: probabilities sum to {} (expected 1)",
                    sum
                )));
            }
        }
        if let Some(w) = &context_weights {
            if w.len() != rows.len() {
                return Err(Error::Validation("context weight count mismatch".into()));
            }
            let mut sum = q_zero();
            for p in w {
                if *p < q_zero() {
                    return Err(Error::Validation("negative context weight".into()));
                }
                sum += p;
            }
            if sum != q_one() {
                return Err(Error::Validation(format!("context weights sum to {sum} (expected 1)")));
            }
        }
        Ok(Phenomenon { scenario, rows, context_weights })
    }

    pub fn prob(&self, ctx: usize, tuple: &[usize]) -> &Q {
        &self.rows[ctx][self.scenario.index_of_tuple(ctx, tuple)]
    }
}

/// Exact marginal distribution of the outcomes on slots `gamma` in one
/// context, obtained by summation over the remaining slots.
pub fn marginal(
    p: &Phenomenon,
    gamma: &IndexSubset,
    ctx: usize,
) -> Result<BTreeMap<Vec<usize>, Q>> {
    if ctx >= p.rows.len() {
        return Err(Error::Validation(format!("unknown context {ctx}")));
    }
    let slots: Vec<usize> = gamma.iter().collect();
    let mut out: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
    for (idx, prob) in p.rows[ctx].iter().enumerate() {
        let tuple = p.scenario.tuple_of_index(ctx, idx);
        let key: Vec<usize> = slots.iter().map(|&s| tuple[s]).collect();
        *out.entry(key).or_insert_with(q_zero) += prob;
    }
    Ok(out)
}

/// One exact marginal mismatch between two contexts agreeing on `gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdViolation {
    pub gamma: Vec<usize>,
    pub ctx_a: usize,
    pub ctx_b: usize,
    /// Outcome codes on the slots of `gamma`.
    pub outcomes: Vec<usize>,
    pub lhs: Q,
    pub rhs: Q,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NdReport {
    pub violations: Vec<NdViolation>,
}

impl NdReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares, for every slot subset and every context pair agreeing on it,
/// the exact marginals of the shared outcomes. Empty report iff the
/// phenomenon satisfies no-disturbance.
pub fn check_no_disturbance(p: &Phenomenon) -> NdReport {
    let n = p.scenario.n;
    let mut report = NdReport::default();
    for a in 0..p.rows.len() {
        for b in (a + 1)..p.rows.len() {
            let agree = p.scenario.agreeing_slots(a, b);
            // Every nonempty subset of the agreeing slots.
            for mask in 1u64..(1u64 << agree.len()) {
                let gamma_slots: Vec<usize> = agree
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &s)| s)
                    .collect();
                let gamma = IndexSubset::new(gamma_slots.iter().copied(), n).unwrap();
                let ma = marginal(p, &gamma, a).unwrap();
                let mb = marginal(p, &gamma, b).unwrap();
                let keys: BTreeSet<&Vec<usize>> = ma.keys().chain(mb.keys()).collect();
                for key in keys {
                    let lhs = ma.get(key).cloned().unwrap_or_else(q_zero);
                    let rhs = mb.get(key).cloned().unwrap_or_else(q_zero);
                    if lhs != rhs {
                        report.violations.push(NdViolation {
                            gamma: gamma_slots.clone(),
                            ctx_a: a,
                            ctx_b: b,
                            outcomes: key.clone(),
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
    }
    report
}

/// The four-measurement, four-context bipartite scenario with binary
/// outcomes (two settings per party).
pub fn chsh_scenario() -> Scenario {
    let m = |s: &str| s.to_string();
    Scenario::new(
        vec![m("a0"), m("a1"), m("b0"), m("b1")],
        vec![m("0"), m("1")],
        vec![
            vec![m("a0"), m("b0")],
            vec![m("a0"), m("b1")],
            vec![m("a1"), m("b0")],
            vec![m("a1"), m("b1")],
        ],
        Some(vec![vec![m("a0"), m("a1")], vec![m("b0"), m("b1")]]),
    )
    .expect("valid scenario")
}

/// Five binary measurements on a 5-cycle; context i pairs `m_i` with
/// `m_{i+1 mod 5}`.
pub fn kcbs_scenario() -> Scenario {
    let meas: Vec<String> = (0..5).map(|i| format!("m{i}")).collect();
    let contexts: Vec<Vec<String>> = (0..5)
        .map(|i| vec![meas[i].clone(), meas[(i + 1) % 5].clone()])
        .collect();
    Scenario::new(meas, vec!["0".into(), "1".into()], contexts, None).expect("valid scenario")
}

/// Tripartite Bell scenario with two binary measurements per party and
/// the four contexts used by the three-party parity functional.
pub fn ghz_scenario() -> Scenario {
    let m = |s: &str| s.to_string();
    Scenario::new(
        vec![m("x1"), m("y1"), m("x2"), m("y2"), m("x3"), m("y3")],
        vec![m("0"), m("1")],
        vec![
            vec![m("x1"), m("x2"), m("x3")],
            vec![m("x1"), m("y2"), m("y3")],
            vec![m("y1"), m("x2"), m("y3")],
            vec![m("y1"), m("y2"), m("x3")],
        ],
        Some(vec![
            vec![m("x1"), m("y1")],
            vec![m("x2"), m("y2")],
            vec![m("x3"), m("y3")],
        ]),
    )
    .expect("valid scenario")
}
