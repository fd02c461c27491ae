// SPDX-License-Identifier: MIT OR Apache-2.0
//! Factorisability as exact linear feasibility over deterministic global
//! assignments, plus inequality functionals with machine-computed
//! classical bounds.
//!
//! A phenomenon is factorisable iff it is a convex mixture of
//! deterministic strategies (one outcome per measurement). Infeasibility
//! comes with a separating functional whose classical bound is recomputed
//! from the strategies, never trusted from input.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{q_zero, Q};
use crate::scenario::{check_no_disturbance, PaddedScenario, Phenomenon};
use crate::simplex::{solve_equality_feasibility, Feasibility};

/// Default cap on |O|^|M|.
pub const DEFAULT_STRATEGY_CAP: usize = 1_000_000;

/// A global assignment of one outcome to every measurement, including the
/// trivial one when present. Entry `assignment[m]` is the outcome code of
/// measurement `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub assignment: Vec<usize>,
}

impl DeterministicStrategy {
    /// Outcome tuple this strategy produces in a context.
    pub fn tuple(&self, padded: &PaddedScenario, ctx: usize) -> Vec<usize> {
        padded.slots[ctx].iter().map(|&m| self.assignment[m]).collect()
    }
}

/// All |O|^|M| deterministic strategies in lexicographic order.
pub fn enumerate_strategies(
    padded: &PaddedScenario,
    cap: usize,
) -> Result<Vec<DeterministicStrategy>> {
    let n_meas = padded.num_measurements();
    let n_real = padded.base.measurements.len();
    let n_out = padded.base.outcomes.len();
    let total = (n_out as u128).checked_pow(n_real as u32).ok_or_else(|| {
        Error::Resource("strategy count overflows".into())
    })?;
    if total > cap as u128 {
        return Err(Error::Resource(format!(
            "{total} strategies exceed cap {cap}"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut current = vec![0usize; n_real];
    loop {
        let mut assignment = current.clone();
        if n_meas > n_real {
            assignment.push(padded.trivial_outcome());
        }
        out.push(DeterministicStrategy { assignment });
        // lexicographic increment, last measurement fastest
        let mut k = n_real;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            current[k] += 1;
            if current[k] < n_out {
                break;
            }
            current[k] = 0;
        }
    }
}

/// A linear functional on behaviors with its exact noncontextual bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityFunctional {
    /// Coefficients on (context, outcome-row-index) entries.
    pub coefficients: BTreeMap<(usize, usize), Q>,
    /// Exact maximum over all deterministic strategies. Computed, not
    /// user-supplied.
    pub classical_bound: Q,
}

impl InequalityFunctional {
    pub fn new(
        padded: &PaddedScenario,
        coefficients: BTreeMap<(usize, usize), Q>,
    ) -> Result<Self> {
        for &(c, idx) in coefficients.keys() {
            if c >= padded.slots.len() || idx >= padded.row_len(c) {
                return Err(Error::Validation(format!(
                    "coefficient on unknown entry (context {c}, row {idx})"
                )));
            }
        }
        let strategies = enumerate_strategies(padded, DEFAULT_STRATEGY_CAP)?;
        let classical_bound = strategies
            .iter()
            .map(|s| strategy_value(padded, &coefficients, s))
            .max()
            .ok_or_else(|| Error::Validation("no strategies".into()))?;
        Ok(InequalityFunctional { coefficients, classical_bound })
    }
}

fn strategy_value(
    padded: &PaddedScenario,
    coefficients: &BTreeMap<(usize, usize), Q>,
    s: &DeterministicStrategy,
) -> Q {
    let mut v = q_zero();
    for c in 0..padded.slots.len() {
        let idx = padded.index_of_tuple(c, &s.tuple(padded, c));
        if let Some(coef) = coefficients.get(&(c, idx)) {
            v += coef;
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityEvaluation {
    pub value: Q,
    pub bound: Q,
    pub violated: bool,
}

/// value = sum of coefficients times P(a|x); the bound is recomputed by
/// strategy maximization; violated iff value exceeds the bound.
pub fn evaluate_inequality(
    p: &Phenomenon,
    f: &InequalityFunctional,
) -> Result<InequalityEvaluation> {
    let padded = &p.scenario;
    let mut value = q_zero();
    for (&(c, idx), coef) in &f.coefficients {
        if c >= p.rows.len() || idx >= p.rows[c].len() {
            return Err(Error::Validation(format!(
                "functional entry (context {c}, row {idx}) outside phenomenon support"
            )));
        }
        value += coef * &p.rows[c][idx];
    }
    let strategies = enumerate_strategies(padded, DEFAULT_STRATEGY_CAP)?;
    let bound = strategies
        .iter()
        .map(|s| strategy_value(padded, &f.coefficients, s))
        .max()
        .expect("at least one strategy");
    let violated = value > bound;
    Ok(InequalityEvaluation { value, bound, violated })
}

/// Outcome of the factorisability decision, with an independently
/// re-verified certificate either way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityCertificate {
    pub feasible: bool,
    /// Strategy weights reproducing the phenomenon, when feasible.
    pub weights: Option<Vec<Q>>,
    /// Separating functional and its value on the phenomenon, when
    /// infeasible. The functional's bound is its strategy maximum; the
    /// value is strictly larger.
    pub witness: Option<(InequalityFunctional, Q)>,
}

/// Decides factorisability by exact linear feasibility over the full
/// strategy set. Requires no-disturbance unless `allow_disturbing`, in
/// which case the result is plain polytope membership.
pub fn is_factorisable(p: &Phenomenon, allow_disturbing: bool) -> Result<FeasibilityCertificate> {
    if !allow_disturbing {
        let report = check_no_disturbance(p);
        if !report.holds() {
            return Err(Error::Precondition(format!(
                "phenomenon is disturbing ({} marginal mismatches); rerun with the disturbing override for polytope membership only",
                report.violations.len()
            )));
        }
    }
    let padded = &p.scenario;
    let strategies = enumerate_strategies(padded, DEFAULT_STRATEGY_CAP)?;

    // Equality system: one row per (context, outcome tuple), plus
    // normalization.
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    let mut row_keys: Vec<(usize, usize)> = Vec::new();
    for c in 0..padded.slots.len() {
        let row_len = padded.row_len(c);
        let mut consistent: Vec<usize> = Vec::with_capacity(strategies.len());
        for s in &strategies {
            consistent.push(padded.index_of_tuple(c, &s.tuple(padded, c)));
        }
        for idx in 0..row_len {
            let row: Vec<Q> = consistent
                .iter()
                .map(|&k| if k == idx { Q::one() } else { q_zero() })
                .collect();
            rows.push(row);
            rhs.push(p.rows[c][idx].clone());
            row_keys.push((c, idx));
        }
    }
    rows.push(vec![Q::one(); strategies.len()]);
    rhs.push(Q::one());

    match solve_equality_feasibility(&rows, &rhs) {
        Feasibility::Feasible(w) => {
            verify_weights(p, &strategies, &w)?;
            Ok(FeasibilityCertificate { feasible: true, weights: Some(w), witness: None })
        }
        Feasibility::Infeasible(y) => {
            // Prefer a violated stock functional as the presented
            // certificate; it is the recognizable tight form and its
            // bound and value are recomputed here, not trusted.
            for b in builtin_functionals() {
                if &b.scenario != padded {
                    continue;
                }
                let eval = evaluate_inequality(p, &b.functional)?;
                if eval.violated {
                    return Ok(FeasibilityCertificate {
                        feasible: false,
                        weights: None,
                        witness: Some((b.functional, eval.value)),
                    });
                }
            }
            // Drop the normalization component; it shifts value and bound
            // equally. Scale to integer coefficients for readability.
            let mut coefficients = BTreeMap::new();
            let scale = integer_scale(&y[..row_keys.len()]);
            for (key, yi) in row_keys.iter().zip(&y) {
                let c = yi * &scale;
                if !c.is_zero() {
                    coefficients.insert(*key, c);
                }
            }
            let functional = InequalityFunctional::new(padded, coefficients)?;
            let eval = evaluate_inequality(p, &functional)?;
            if !eval.violated {
                return Err(Error::Validation(
                    "internal: infeasibility witness fails substitution check".into(),
                ));
            }
            Ok(FeasibilityCertificate {
                feasible: false,
                weights: None,
                witness: Some((functional, eval.value)),
            })
        }
    }
}

/// Substitution check on an independent code path from the solver.
fn verify_weights(
    p: &Phenomenon,
    strategies: &[DeterministicStrategy],
    w: &[Q],
) -> Result<()> {
    if w.iter().any(|v| *v < q_zero()) {
        return Err(Error::Validation("internal: negative certificate weight".into()));
    }
    let total: Q = w.iter().sum();
    if !total.is_one() {
        return Err(Error::Validation("internal: certificate weights do not sum to 1".into()));
    }
    let padded = &p.scenario;
    for c in 0..padded.slots.len() {
        let mut acc = vec![q_zero(); padded.row_len(c)];
        for (s, wi) in strategies.iter().zip(w) {
            if !wi.is_zero() {
                acc[padded.index_of_tuple(c, &s.tuple(padded, c))] += wi;
            }
        }
        if acc != p.rows[c] {
            return Err(Error::Validation(format!(
                "internal: certificate does not reproduce context {c}"
            )));
        }
    }
    Ok(())
}

/// Smallest positive rational that clears all denominators.
fn integer_scale(values: &[Q]) -> Q {
    let mut l = BigInt::one();
    for v in values {
        l = l.lcm(&v.denom().abs());
    }
    Q::from(l)
}

/// The stock functionals: each is rebuilt against its scenario with the
/// bound recomputed at construction.
pub struct BuiltinFunctional {
    pub name: &'static str,
    pub scenario: PaddedScenario,
    pub functional: InequalityFunctional,
}

pub fn builtin_functionals() -> Vec<BuiltinFunctional> {
    use crate::scenario::{chsh_scenario, ghz_scenario, kcbs_scenario, pad_scenario};
    let mut out = Vec::new();

    // Two-party correlator functional: E00 + E01 + E10 - E11.
    {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let mut coefficients = BTreeMap::new();
        for c in 0..4 {
            let sign: i64 = if c == 3 { -1 } else { 1 };
            for idx in 0..4 {
                let (a, b) = (idx / 2, idx % 2);
                let parity: i64 = if (a ^ b) == 0 { 1 } else { -1 };
                coefficients.insert((c, idx), Q::from(BigInt::from(sign * parity)));
            }
        }
        let functional = InequalityFunctional::new(&padded, coefficients).unwrap();
        out.push(BuiltinFunctional { name: "chsh", scenario: padded, functional });
    }

    // Three-party parity functional: <XXX> - <XYY> - <YXY> - <YYX>.
    {
        let padded = pad_scenario(&ghz_scenario()).unwrap();
        let signs: [i64; 4] = [1, -1, -1, -1];
        let mut coefficients = BTreeMap::new();
        for c in 0..4 {
            for idx in 0..8 {
                let ones = (idx & 1) + (idx >> 1 & 1) + (idx >> 2 & 1);
                let parity: i64 = if ones % 2 == 0 { 1 } else { -1 };
                coefficients.insert((c, idx), Q::from(BigInt::from(signs[c] * parity)));
            }
        }
        let functional = InequalityFunctional::new(&padded, coefficients).unwrap();
        out.push(BuiltinFunctional { name: "mermin3", scenario: padded, functional });
    }

    // Five-cycle anticorrelation functional: -sum_i <A_i A_{i+1}>, the
    // sign-normalized form of minimizing the correlator sum.
    {
        let padded = pad_scenario(&kcbs_scenario()).unwrap();
        let mut coefficients = BTreeMap::new();
        for c in 0..5 {
            for idx in 0..4 {
                let (a, b) = (idx / 2, idx % 2);
                let parity: i64 = if (a ^ b) == 0 { 1 } else { -1 };
                coefficients.insert((c, idx), Q::from(BigInt::from(-parity)));
            }
        }
        let functional = InequalityFunctional::new(&padded, coefficients).unwrap();
        out.push(BuiltinFunctional { name: "kcbs", scenario: padded, functional });
    }

    out
}
