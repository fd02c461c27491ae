// SPDX-License-Identifier: MIT OR Apache-2.0
//! Mechanical verification of the layered-graph closure lemma and of the
//! "no-disturbance + faithfulness implies factorisability" pipeline on
//! enumerated desk-scale graph classes.
//!
//! The candidate enumeration deliberately allows edges that the filters
//! later exclude (for example a direct setting-to-remote-outcome edge),
//! so the exclusions are derived rather than assumed.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::faithfulness::failed_obligations;
use crate::graph::{
    count_labeled_dags, d_separated, enumerate_dags, DSepQuery, Dag, NodeSet, Role,
};
use crate::model::{
    default_cards, observable_phenomenon, random_compatible_model, CausalModel,
};
use crate::polytope::{enumerate_strategies, is_factorisable, DEFAULT_STRATEGY_CAP};
use crate::rational::{format_q, Q};
use crate::scenario::{check_no_disturbance, PaddedScenario, Phenomenon};

// ---------------------------------------------------------------------------
// Chained-graph lemma sweep

/// Exhaustive check over four-layer chained graphs: whenever the first
/// layer is d-separated from the third given the second, it is also
/// d-separated from the third-plus-fourth given the second, and from the
/// fourth given second-plus-third.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaReport {
    pub max_set_size: usize,
    pub graphs_seen: u64,
    pub acyclic: u64,
    pub premise_holds: u64,
    pub counterexamples: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chained-graph sweep (set sizes 1..={})", self.max_set_size)?;
        writeln!(f, "  graphs enumerated: {}", self.graphs_seen)?;
        writeln!(f, "  acyclic:           {}", self.acyclic)?;
        writeln!(f, "  premise holds:     {}", self.premise_holds)?;
        writeln!(f, "  counterexamples:   {}", self.counterexamples.len())?;
        for c in &self.counterexamples {
            writeln!(f, "  !! {c}")?;
        }
        Ok(())
    }
}

pub fn verify_lemma_chain(max_set_size: usize) -> LemmaReport {
    let mut combos = Vec::new();
    for a in 1..=max_set_size {
        for b in 1..=max_set_size {
            for c in 1..=max_set_size {
                for d in 1..=max_set_size {
                    combos.push((a, b, c, d));
                }
            }
        }
    }
    let partials: Vec<LemmaReport> = combos
        .par_iter()
        .map(|&(a, b, c, d)| sweep_chained_sizes(max_set_size, a, b, c, d))
        .collect();
    let mut total = LemmaReport {
        max_set_size,
        graphs_seen: 0,
        acyclic: 0,
        premise_holds: 0,
        counterexamples: Vec::new(),
    };
    for p in partials {
        total.graphs_seen += p.graphs_seen;
        total.acyclic += p.acyclic;
        total.premise_holds += p.premise_holds;
        total.counterexamples.extend(p.counterexamples);
    }
    total
}

fn sweep_chained_sizes(max_set_size: usize, a: usize, b: usize, c: usize, d: usize) -> LemmaReport {
    // Node layout: A-layer, B-layer, C-layer, D-layer in index order.
    let n = a + b + c + d;
    let layer_ranges = [(0, a), (a, a + b), (a + b, a + b + c), (a + b + c, n)];
    let mask = |k: usize| -> NodeSet {
        let (lo, hi) = layer_ranges[k];
        ((1u64 << hi) - 1) & !((1u64 << lo) - 1)
    };
    let (a_set, b_set, c_set, d_set) = (mask(0), mask(1), mask(2), mask(3));

    // Edges only between adjacent layers; each pair absent / down / up.
    let mut pairs = Vec::new();
    for k in 0..3 {
        let (lo1, hi1) = layer_ranges[k];
        let (lo2, hi2) = layer_ranges[k + 1];
        for i in lo1..hi1 {
            for j in lo2..hi2 {
                pairs.push((i, j));
            }
        }
    }

    let nodes: Vec<(String, Role)> = (0..n).map(|i| (format!("v{i}"), Role::Latent)).collect();
    let mut report = LemmaReport {
        max_set_size,
        graphs_seen: 0,
        acyclic: 0,
        premise_holds: 0,
        counterexamples: Vec::new(),
    };
    let mut states = vec![0u8; pairs.len()];
    loop {
        report.graphs_seen += 1;
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .zip(&states)
            .filter_map(|(&(i, j), &s)| match s {
                1 => Some((i, j)),
                2 => Some((j, i)),
                _ => None,
            })
            .collect();
        if let Ok(g) = Dag::new(nodes.clone(), &edges) {
            report.acyclic += 1;
            let premise = DSepQuery::new(&g, a_set, c_set, b_set).unwrap();
            if d_separated(&g, &premise) {
                report.premise_holds += 1;
                let concl1 = DSepQuery::new(&g, a_set, c_set | d_set, b_set).unwrap();
                let concl2 = DSepQuery::new(&g, a_set, d_set, b_set | c_set).unwrap();
                if !d_separated(&g, &concl1) || !d_separated(&g, &concl2) {
                    report.counterexamples.push(format!(
                        "sizes ({a},{b},{c},{d}) edges {edges:?}"
                    ));
                }
            }
        }
        let mut k = 0;
        loop {
            if k == states.len() {
                return report;
            }
            states[k] += 1;
            if states[k] < 3 {
                break;
            }
            states[k] = 0;
            k += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Candidate enumeration

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateBudget {
    /// Maximum number of latent common causes.
    pub max_latents: usize,
    /// Maximum size of the observable subset a latent feeds.
    pub max_subset: usize,
    /// Cardinality of each latent in sampled models.
    pub latent_card: usize,
    /// Cap on the total candidate count.
    pub cap: usize,
}

impl Default for CandidateBudget {
    fn default() -> Self {
        CandidateBudget { max_latents: 2, max_subset: 4, latent_card: 4, cap: 1_000_000 }
    }
}

/// Streams every DAG over the observables (all edge orientations allowed)
/// extended by latents as parentless common causes of observable subsets,
/// deduplicated up to latent relabeling.
pub fn enumerate_candidates(padded: &PaddedScenario, budget: &CandidateBudget) -> Result<Vec<Dag>> {
    let n = padded.n;
    let n_obs = 2 * n;
    // Observable subsets a latent may feed (size 2..=max_subset).
    let mut subsets: Vec<NodeSet> = Vec::new();
    for mask in 1u64..(1 << n_obs) {
        let size = mask.count_ones() as usize;
        if size >= 2 && size <= budget.max_subset.min(n_obs) {
            subsets.push(mask);
        }
    }
    // Multisets of at most max_latents subsets, nondecreasing, so latent
    // relabelings collapse.
    let mut patterns: Vec<Vec<NodeSet>> = vec![vec![]];
    let mut level: Vec<Vec<NodeSet>> = vec![vec![]];
    for _ in 0..budget.max_latents {
        let mut next = Vec::new();
        for p in &level {
            let start = p.last().copied().unwrap_or(0);
            for &s in subsets.iter().filter(|&&s| s >= start) {
                let mut q = p.clone();
                q.push(s);
                next.push(q);
            }
        }
        patterns.extend(next.iter().cloned());
        level = next;
    }

    let obs_dag_count = count_labeled_dags(n_obs) as usize;
    let total = obs_dag_count.saturating_mul(patterns.len());
    if total > budget.cap {
        return Err(Error::Resource(format!(
            "candidate class has {total} graphs, cap is {}",
            budget.cap
        )));
    }

    let mut nodes: Vec<(String, Role)> = Vec::with_capacity(n_obs);
    for i in 0..n {
        nodes.push((format!("X{}", i + 1), Role::Setting));
    }
    for i in 0..n {
        nodes.push((format!("A{}", i + 1), Role::Outcome));
    }

    let mut out = Vec::with_capacity(total);
    for edges in enumerate_dags(n_obs) {
        for pattern in &patterns {
            let mut all_nodes = nodes.clone();
            let mut all_edges = edges.clone();
            for (k, &subset) in pattern.iter().enumerate() {
                let latent = all_nodes.len();
                all_nodes.push((format!("L{}", k + 1), Role::Latent));
                let mut s = subset;
                while s != 0 {
                    let v = s.trailing_zeros() as usize;
                    s &= s - 1;
                    all_edges.push((latent, v));
                }
            }
            out.push(Dag::new(all_nodes, &all_edges).expect("candidate is acyclic"));
        }
    }
    Ok(out)
}

/// Keeps exactly the candidates whose graph d-separates every
/// no-disturbance obligation.
pub fn filter_no_disturbance_dsep(candidates: Vec<Dag>, padded: &PaddedScenario) -> Vec<Dag> {
    candidates
        .into_par_iter()
        .filter(|g| failed_obligations(g, padded).map(|f| f.is_empty()).unwrap_or(false))
        .collect()
}

// ---------------------------------------------------------------------------
// Partition of survivors

/// Grouping of a surviving graph's nodes by causal connection: outcomes
/// without any directed path to or from a setting (`b_part`) versus the
/// rest (`c_part`); settings connected to `c_part` (`z_part`) versus the
/// rest (`y_part`); latents feeding some outcome (`lambda_part`) versus
/// latents feeding settings only (`omega_part`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub b_part: NodeSet,
    pub c_part: NodeSet,
    pub y_part: NodeSet,
    pub z_part: NodeSet,
    pub lambda_part: NodeSet,
    pub omega_part: NodeSet,
    /// Per c_part node, the settings it is causally connected to.
    pub c_settings: Vec<(usize, NodeSet)>,
    pub diagnostics: Vec<String>,
}

pub fn compute_partition(g: &Dag) -> Partition {
    let settings = g.nodes_with_role(Role::Setting);
    let outcomes = g.nodes_with_role(Role::Outcome);
    let latents = g.nodes_with_role(Role::Latent);

    let mut b_part = 0u64;
    let mut c_part = 0u64;
    let mut c_settings = Vec::new();
    let mut diagnostics = Vec::new();
    for &a in &outcomes {
        let mut connected = 0u64;
        for &x in &settings {
            if g.causally_connected(a, x) {
                connected |= 1 << x;
            }
        }
        if connected == 0 {
            b_part |= 1 << a;
        } else {
            c_part |= 1 << a;
            if connected.count_ones() > 1 {
                let names: Vec<&str> = settings
                    .iter()
                    .filter(|&&x| connected >> x & 1 == 1)
                    .map(|&x| g.name(x))
                    .collect();
                diagnostics.push(format!(
                    "outcome {} is causally connected to several settings: {names:?}",
                    g.name(a)
                ));
            }
            c_settings.push((a, connected));
        }
    }
    let mut z_part = 0u64;
    for &(_, conn) in &c_settings {
        z_part |= conn;
    }
    let mut y_part = 0u64;
    for &x in &settings {
        if z_part >> x & 1 == 0 {
            y_part |= 1 << x;
        }
    }
    let mut lambda_part = 0u64;
    let mut omega_part = 0u64;
    for &l in &latents {
        let desc = g.descendants(l);
        let feeds_outcome = outcomes.iter().any(|&a| desc >> a & 1 == 1);
        if feeds_outcome {
            lambda_part |= 1 << l;
            if settings.iter().any(|&x| desc >> x & 1 == 1) {
                diagnostics.push(format!(
                    "latent {} feeds both outcomes and settings",
                    g.name(l)
                ));
            }
        } else {
            omega_part |= 1 << l;
        }
    }
    Partition {
        b_part,
        c_part,
        y_part,
        z_part,
        lambda_part,
        omega_part,
        c_settings,
        diagnostics,
    }
}

/// The four derived d-separations every survivor must satisfy, plus the
/// structural edge exclusions. Returns human-readable failure messages
/// (expected: none).
pub fn verify_derived_dseps(g: &Dag, part: &Partition) -> Vec<String> {
    let mut failures = Vec::new();
    let a_all = part.b_part | part.c_part;
    let z = part.z_part;
    let lambda = part.lambda_part;

    let mut check = |label: &str, x: NodeSet, y: NodeSet, cond: NodeSet| {
        if x == 0 || y == 0 {
            return;
        }
        let q = DSepQuery::new(g, x, y & !x & !cond, cond).unwrap();
        if q.y_set == 0 {
            return;
        }
        if !d_separated(g, &q) {
            failures.push(format!("{label} fails"));
        }
    };

    // Outcomes disconnected from settings are independent of the active
    // settings given the outcome-side latents.
    check("(B _||_ Z | Lambda)_d", part.b_part, z, lambda);
    // All outcomes are independent of the inactive settings given active
    // settings and outcome-side latents.
    check("(A _||_ Y | Z Lambda)_d", a_all, part.y_part, z | lambda);
    for &(ci, ci_settings) in &part.c_settings {
        let rest = part.c_part & !(1 << ci);
        // Each connected outcome is independent of its peers given all
        // active settings, latents, and the disconnected outcomes.
        check(
            &format!("(C_i _||_ C_rest | Z B Lambda)_d at {}", g.name(ci)),
            1 << ci,
            rest,
            z | lambda | part.b_part,
        );
        // ... and independent of the other active settings given its own.
        check(
            &format!("(C_i _||_ Z_rest | Z_i Lambda)_d at {}", g.name(ci)),
            1 << ci,
            z & !ci_settings,
            ci_settings | lambda,
        );
    }
    failures
}

/// Structural exclusions that the d-separation filter is expected to have
/// carried out. Returns failure messages (expected: none).
pub fn structural_exclusions(g: &Dag, part: &Partition) -> Vec<String> {
    let mut failures = Vec::new();
    let settings = g.nodes_with_role(Role::Setting);
    let outcomes = g.nodes_with_role(Role::Outcome);
    // No direct link between an outcome and a remote setting.
    for &a in &outcomes {
        for &x in &settings {
            let same_slot = g.name(a)[1..] == g.name(x)[1..];
            if !same_slot && g.adjacent(a, x) {
                failures.push(format!(
                    "edge between {} and {} survived the filter",
                    g.name(a),
                    g.name(x)
                ));
            }
        }
    }
    // No direct edge from a connected outcome into a disconnected one.
    let mut c = part.c_part;
    while c != 0 {
        let ci = c.trailing_zeros() as usize;
        c &= c - 1;
        let mut b = part.b_part;
        while b != 0 {
            let bi = b.trailing_zeros() as usize;
            b &= b - 1;
            if g.has_edge(ci, bi) {
                failures.push(format!("edge {} -> {} into the disconnected block", g.name(ci), g.name(bi)));
            }
        }
        // No direct edge between two connected outcomes.
        let mut c2 = part.c_part & !(1 << ci);
        while c2 != 0 {
            let cj = c2.trailing_zeros() as usize;
            c2 &= c2 - 1;
            if g.has_edge(ci, cj) {
                failures.push(format!("edge {} -> {} between connected outcomes", g.name(ci), g.name(cj)));
            }
        }
    }
    failures
}

// ---------------------------------------------------------------------------
// Theorem sweep

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    pub n: usize,
    pub budget: CandidateBudget,
    pub trials: usize,
    pub seed: u64,
    pub candidates_total: usize,
    pub survivors: usize,
    pub partition_diagnostics: usize,
    pub structural_failures: Vec<String>,
    pub dsep_failures: Vec<String>,
    pub trial_failures: Vec<String>,
    pub trials_run: usize,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.structural_failures.is_empty()
            && self.dsep_failures.is_empty()
            && self.trial_failures.is_empty()
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "factorisability sweep (n = {})", self.n)?;
        writeln!(
            f,
            "  budget: <= {} latents over subsets of size <= {}, latent cardinality {}, cap {}",
            self.budget.max_latents, self.budget.max_subset, self.budget.latent_card, self.budget.cap
        )?;
        writeln!(f, "  seed: {}  trials per survivor: {}", self.seed, self.trials)?;
        writeln!(f, "  candidates:            {}", self.candidates_total)?;
        writeln!(f, "  survivors:             {}", self.survivors)?;
        writeln!(f, "  partition diagnostics: {}", self.partition_diagnostics)?;
        writeln!(f, "  trials run:            {}", self.trials_run)?;
        writeln!(f, "  structural failures:   {}", self.structural_failures.len())?;
        writeln!(f, "  d-separation failures: {}", self.dsep_failures.len())?;
        writeln!(f, "  trial failures:        {}", self.trial_failures.len())?;
        for s in self
            .structural_failures
            .iter()
            .chain(&self.dsep_failures)
            .chain(&self.trial_failures)
        {
            writeln!(f, "  !! {s}")?;
        }
        Ok(())
    }
}

fn mix_seed(base: u64, survivor: u64, trial: u64) -> u64 {
    let mut z = base
        .wrapping_add(survivor.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(trial.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn describe_graph(g: &Dag) -> String {
    let edges: Vec<String> = g
        .edges()
        .iter()
        .map(|&(u, v)| format!("{}->{}", g.name(u), g.name(v)))
        .collect();
    format!("[{}]", edges.join(", "))
}

fn dump_model(m: &CausalModel) -> String {
    let mut s = describe_graph(&m.dag);
    for v in 0..m.dag.len() {
        let rows: Vec<String> = m.cpts[v]
            .iter()
            .map(|row| {
                let cells: Vec<String> = row.iter().map(format_q).collect();
                cells.join(",")
            })
            .collect();
        s.push_str(&format!(" {}:[{}]", m.dag.name(v), rows.join(";")));
    }
    s
}

/// Full pipeline: enumerate candidates, filter by the no-disturbance
/// d-separations, verify structural exclusions and derived d-separations
/// on each survivor, then sample random strictly positive models per
/// survivor and assert their observable phenomena are no-disturbance and
/// factorisable.
pub fn verify_theorem(
    padded: &PaddedScenario,
    budget: &CandidateBudget,
    trials: usize,
    seed: u64,
) -> Result<TheoremReport> {
    enumerate_strategies(padded, DEFAULT_STRATEGY_CAP)?;
    let candidates = enumerate_candidates(padded, budget)?;
    let candidates_total = candidates.len();
    let survivors = filter_no_disturbance_dsep(candidates, padded);

    struct SurvivorResult {
        diagnostics: usize,
        structural: Vec<String>,
        dsep: Vec<String>,
        trial: Vec<String>,
        trials_run: usize,
    }

    let results: Vec<SurvivorResult> = survivors
        .par_iter()
        .enumerate()
        .map(|(s_idx, g)| {
            let part = compute_partition(g);
            let mut res = SurvivorResult {
                diagnostics: part.diagnostics.len(),
                structural: structural_exclusions(g, &part)
                    .into_iter()
                    .map(|m| format!("survivor {s_idx} {}: {m}", describe_graph(g)))
                    .collect(),
                dsep: verify_derived_dseps(g, &part)
                    .into_iter()
                    .map(|m| format!("survivor {s_idx} {}: {m}", describe_graph(g)))
                    .collect(),
                trial: Vec::new(),
                trials_run: 0,
            };
            let cards = match default_cards(g, padded, budget.latent_card) {
                Ok(c) => c,
                Err(e) => {
                    res.trial.push(format!("survivor {s_idx}: {e}"));
                    return res;
                }
            };
            for t in 0..trials {
                res.trials_run += 1;
                let model_seed = mix_seed(seed, s_idx as u64, t as u64);
                let model = random_compatible_model(g, &cards, model_seed, 100);
                let phenomenon = match observable_phenomenon(&model, padded) {
                    Ok(p) => p,
                    Err(e) => {
                        res.trial.push(format!(
                            "survivor {s_idx} trial {t}: projection failed: {e}; model {}",
                            dump_model(&model)
                        ));
                        continue;
                    }
                };
                if !check_no_disturbance(&phenomenon).holds() {
                    res.trial.push(format!(
                        "survivor {s_idx} trial {t}: observable phenomenon disturbs; model {}",
                        dump_model(&model)
                    ));
                    continue;
                }
                match is_factorisable(&phenomenon, false) {
                    Ok(cert) if cert.feasible => {}
                    Ok(_) => res.trial.push(format!(
                        "survivor {s_idx} trial {t}: phenomenon not factorisable; model {}",
                        dump_model(&model)
                    )),
                    Err(e) => res.trial.push(format!(
                        "survivor {s_idx} trial {t}: feasibility error: {e}; model {}",
                        dump_model(&model)
                    )),
                }
            }
            res
        })
        .collect();

    let mut report = TheoremReport {
        n: padded.n,
        budget: *budget,
        trials,
        seed,
        candidates_total,
        survivors: survivors.len(),
        partition_diagnostics: 0,
        structural_failures: Vec::new(),
        dsep_failures: Vec::new(),
        trial_failures: Vec::new(),
        trials_run: 0,
    };
    for r in results {
        report.partition_diagnostics += r.diagnostics;
        report.structural_failures.extend(r.structural);
        report.dsep_failures.extend(r.dsep);
        report.trial_failures.extend(r.trial);
        report.trials_run += r.trials_run;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Corollary verdict

/// Outcome of the no-disturbance + factorisability screen on one
/// phenomenon.
#[derive(Debug, Clone)]
pub enum CorollaryVerdict {
    /// ND holds, the phenomenon is outside the noncontextual polytope: no
    /// faithful classical causal model exists. Carries the separating
    /// functional and its value.
    FineTuningRequired { witness: crate::polytope::InequalityFunctional, value: Q },
    /// ND holds and the phenomenon is factorisable: an explicit faithful
    /// candidate model is constructed from the feasible weights.
    Factorisable { weights: Vec<Q>, model: CausalModel },
    /// ND fails; the screen does not apply.
    NdFails { violations: usize },
}

pub fn corollary_report(p: &Phenomenon) -> Result<CorollaryVerdict> {
    let nd = check_no_disturbance(p);
    if !nd.holds() {
        return Ok(CorollaryVerdict::NdFails { violations: nd.violations.len() });
    }
    let cert = is_factorisable(p, false)?;
    if cert.feasible {
        let weights = cert.weights.expect("feasible certificate carries weights");
        let model = model_from_weights(p, &weights)?;
        Ok(CorollaryVerdict::Factorisable { weights, model })
    } else {
        let (witness, value) = cert.witness.expect("infeasible certificate carries witness");
        Ok(CorollaryVerdict::FineTuningRequired { witness, value })
    }
}

/// Builds the canonical common-cause model from feasible strategy
/// weights: one latent whose values are the supported strategies, each
/// outcome responding deterministically to its own setting and the
/// latent.
pub fn model_from_weights(p: &Phenomenon, weights: &[Q]) -> Result<CausalModel> {
    use num_traits::Zero;
    let padded = &p.scenario;
    let n = padded.n;
    let strategies = enumerate_strategies(padded, DEFAULT_STRATEGY_CAP)?;
    let support: Vec<usize> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_zero())
        .map(|(i, _)| i)
        .collect();
    if support.is_empty() {
        return Err(Error::Validation("empty weight support".into()));
    }

    let mut nodes: Vec<(String, Role)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        nodes.push((format!("X{}", i + 1), Role::Setting));
    }
    for i in 0..n {
        nodes.push((format!("A{}", i + 1), Role::Outcome));
        edges.push((i, n + i));
    }
    let latent = nodes.len();
    nodes.push(("L".into(), Role::Latent));
    for i in 0..n {
        edges.push((latent, n + i));
    }
    let dag = Dag::new(nodes, &edges)?;

    let mut cards = Vec::new();
    let setting_domains: Vec<Vec<usize>> = (0..n).map(|i| padded.slot_setting_domain(i)).collect();
    let outcome_domains: Vec<Vec<usize>> = (0..n).map(|i| padded.slot_outcome_domain(i)).collect();
    for i in 0..n {
        cards.push(setting_domains[i].len());
    }
    for i in 0..n {
        cards.push(outcome_domains[i].len());
    }
    cards.push(support.len());

    let mut cpts: Vec<Vec<Vec<Q>>> = Vec::new();
    for i in 0..n {
        let k = setting_domains[i].len();
        cpts.push(vec![vec![
            Q::new(1.into(), (k as i64).into());
            k
        ]]);
    }
    for i in 0..n {
        // parents ascending: X_i (index i) then L (last index)
        let mut rows = Vec::new();
        for x_val in 0..setting_domains[i].len() {
            for &s_idx in &support {
                let meas = setting_domains[i][x_val];
                let code = if meas == padded.trivial_meas() {
                    padded.trivial_outcome()
                } else {
                    strategies[s_idx].assignment[meas]
                };
                let pos = outcome_domains[i]
                    .iter()
                    .position(|&c| c == code)
                    .expect("strategy outcome in slot domain");
                let mut row = vec![crate::rational::q_zero(); outcome_domains[i].len()];
                row[pos] = crate::rational::q_one();
                rows.push(row);
            }
        }
        cpts.push(rows);
    }
    cpts.push(vec![support.iter().map(|&i| weights[i].clone()).collect()]);
    CausalModel::new(dag, cards, cpts)
}
