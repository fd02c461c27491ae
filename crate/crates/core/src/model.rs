// SPDX-License-Identifier: MIT OR Apache-2.0
//! Causal models: a DAG plus conditional probability tables, exact joint
//! enumeration, and the projection to an observable phenomenon.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeSet, Role};
use crate::rational::{q_one, q_zero, Q};
use crate::scenario::{PaddedScenario, Phenomenon};
use num_bigint::BigInt;

/// Default cap on the number of joint states enumerated exactly.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;
/// Default cardinality of latent nodes in generated models.
pub const DEFAULT_LATENT_CARD: usize = 4;

/// Exact joint distribution over a list of named finite variables.
/// `probs` is row-major with the first variable slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTable {
    pub vars: Vec<String>,
    pub cards: Vec<usize>,
    pub probs: Vec<Q>,
}

impl JointTable {
    pub fn new(vars: Vec<String>, cards: Vec<usize>, probs: Vec<Q>) -> Result<Self> {
        let expect: usize = cards.iter().product();
        if probs.len() != expect {
            return Err(Error::Validation(format!(
                "joint table has {} entries, expected {expect}",
                probs.len()
            )));
        }
        let mut sum = q_zero();
        for p in &probs {
            if *p < q_zero() {
                return Err(Error::Validation("negative joint probability".into()));
            }
            sum += p;
        }
        if sum != q_one() {
            return Err(Error::Validation(format!("joint sums to {sum}, expected 1")));
        }
        Ok(JointTable { vars, cards, probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Validation(format!("unknown variable {name:?}")))
    }

    pub fn index_of(&self, assignment: &[usize]) -> usize {
        let mut idx = 0;
        for (v, &val) in assignment.iter().enumerate() {
            idx = idx * self.cards[v] + val;
        }
        idx
    }

    pub fn assignment_of(&self, mut idx: usize) -> Vec<usize> {
        let mut a = vec![0usize; self.cards.len()];
        for v in (0..self.cards.len()).rev() {
            a[v] = idx % self.cards[v];
            idx /= self.cards[v];
        }
        a
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|p| *p > q_zero())
    }
}

/// Iterates all assignments of the given cardinalities in row-major order.
pub fn assignments(cards: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = cards.iter().product();
    (0..total).map(move |mut idx| {
        let mut a = vec![0usize; cards.len()];
        for v in (0..cards.len()).rev() {
            a[v] = idx % cards[v];
            idx /= cards[v];
        }
        a
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalModel {
    pub dag: Dag,
    /// Value count per node, aligned with the DAG's node indices.
    pub cards: Vec<usize>,
    /// cpts[v][parent_row] is a distribution over node v's values; parent
    /// rows are mixed-radix over v's parents in ascending node order.
    pub cpts: Vec<Vec<Vec<Q>>>,
}

impl CausalModel {
    pub fn new(dag: Dag, cards: Vec<usize>, cpts: Vec<Vec<Vec<Q>>>) -> Result<Self> {
        if cards.len() != dag.len() || cpts.len() != dag.len() {
            return Err(Error::Validation("cards/cpts length must match node count".into()));
        }
        for v in 0..dag.len() {
            if cards[v] == 0 {
                return Err(Error::Validation(format!("node {} has zero values", dag.name(v))));
            }
            let parent_rows: usize = parent_list(&dag, v).iter().map(|&p| cards[p]).product();
            if cpts[v].len() != parent_rows {
                return Err(Error::Validation(format!(
                    "node {}: {} CPT rows, expected {parent_rows}",
                    dag.name(v),
                    cpts[v].len()
                )));
            }
            for row in &cpts[v] {
                if row.len() != cards[v] {
                    return Err(Error::Validation(format!(
                        "node {}: CPT row width {} != {}",
                        dag.name(v),
                        row.len(),
                        cards[v]
                    )));
                }
                let mut sum = q_zero();
                for p in row {
                    if *p < q_zero() {
                        return Err(Error::Validation(format!(
                            "node {}: negative CPT entry",
                            dag.name(v)
                        )));
                    }
                    sum += p;
                }
                if sum != q_one() {
                    return Err(Error::Validation(format!(
                        "node {}: CPT row sums to {sum}",
                        dag.name(v)
                    )));
                }
            }
        }
        Ok(CausalModel { dag, cards, cpts })
    }

    pub fn state_space(&self) -> usize {
        self.cards.iter().product()
    }
}

/// Parents of `v` in ascending node order.
pub fn parent_list(dag: &Dag, v: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut pa: NodeSet = dag.parents(v);
    while pa != 0 {
        let p = pa.trailing_zeros() as usize;
        pa &= pa - 1;
        out.push(p);
    }
    out
}

/// Exact joint over all nodes as the product of CPT entries.
pub fn joint_distribution(m: &CausalModel, state_cap: usize) -> Result<JointTable> {
    let total = m.state_space();
    if total > state_cap {
        return Err(Error::Resource(format!(
            "joint state space {total} exceeds cap {state_cap}"
        )));
    }
    let n = m.dag.len();
    let parent_lists: Vec<Vec<usize>> = (0..n).map(|v| parent_list(&m.dag, v)).collect();
    let mut probs = Vec::with_capacity(total);
    for a in assignments(&m.cards) {
        let mut p = q_one();
        for v in 0..n {
            let mut row = 0usize;
            for &pa in &parent_lists[v] {
                row = row * m.cards[pa] + a[pa];
            }
            let entry = &m.cpts[v][row][a[v]];
            if entry.is_zero() {
                p = q_zero();
                break;
            }
            p *= entry;
        }
        probs.push(p);
    }
    let vars = (0..n).map(|v| m.dag.name(v).to_string()).collect();
    JointTable::new(vars, m.cards.clone(), probs)
}

/// Marginalizes latents out of the model's joint and conditions on the
/// settings of each context, yielding exactly the model's observable
/// content as a phenomenon over `padded`.
///
/// Model nodes must be named `X1..Xn` (settings) and `A1..An` (outcomes),
/// with cardinalities matching the scenario's slot domains.
pub fn observable_phenomenon(m: &CausalModel, padded: &PaddedScenario) -> Result<Phenomenon> {
    let n = padded.n;
    let mut setting_nodes = Vec::with_capacity(n);
    let mut outcome_nodes = Vec::with_capacity(n);
    let mut setting_domains = Vec::with_capacity(n);
    let mut outcome_domains = Vec::with_capacity(n);
    for i in 0..n {
        let x = m.dag.node(&format!("X{}", i + 1))?;
        let a = m.dag.node(&format!("A{}", i + 1))?;
        let xs = padded.slot_setting_domain(i);
        let os = padded.slot_outcome_domain(i);
        if m.cards[x] != xs.len() {
            return Err(Error::Validation(format!(
                "node X{}: cardinality {} does not match {} slot settings",
                i + 1,
                m.cards[x],
                xs.len()
            )));
        }
        if m.cards[a] != os.len() {
            return Err(Error::Validation(format!(
                "node A{}: cardinality {} does not match {} slot outcomes",
                i + 1,
                m.cards[a],
                os.len()
            )));
        }
        setting_nodes.push(x);
        outcome_nodes.push(a);
        setting_domains.push(xs);
        outcome_domains.push(os);
    }

    let joint = joint_distribution(m, DEFAULT_STATE_CAP)?;
    // Accumulate P(settings, outcomes) with latents summed out.
    let mut rows = Vec::with_capacity(padded.slots.len());
    for (c, ctx) in padded.slots.iter().enumerate() {
        // value index of each setting node for this context
        let x_vals: Vec<usize> = (0..n)
            .map(|i| {
                setting_domains[i]
                    .iter()
                    .position(|&mid| mid == ctx[i])
                    .expect("context measurement in slot domain")
            })
            .collect();
        let mut weight = q_zero(); // P(X = x)
        let row_len = padded.row_len(c);
        let mut numer = vec![q_zero(); row_len]; // P(A = a, X = x)
        for (idx, p) in joint.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let a = joint.assignment_of(idx);
            if (0..n).any(|i| a[setting_nodes[i]] != x_vals[i]) {
                continue;
            }
            weight += p;
            // Map outcome value indices to outcome codes, then to the row
            // index; tuples outside the context's slot radix cannot occur
            // when the model respects the trivial slots, and are dropped
            // otherwise (their mass shows up as a validation failure).
            let tuple: Vec<usize> = (0..n).map(|i| outcome_domains[i][a[outcome_nodes[i]]]).collect();
            let cards = padded.ctx_cards(c);
            let mut ok = true;
            for i in 0..n {
                let within = if cards[i] == 1 {
                    tuple[i] == padded.trivial_outcome()
                } else {
                    tuple[i] < padded.base.outcomes.len()
                };
                if !within {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            numer[padded.index_of_tuple(c, &tuple)] += p;
        }
        if weight.is_zero() {
            let names: Vec<&str> = ctx.iter().map(|&mid| padded.meas_name(mid)).collect();
            return Err(Error::Conditioning(format!(
                "settings {names:?} have zero probability in the model"
            )));
        }
        rows.push(numer.into_iter().map(|p| p / &weight).collect());
    }
    Phenomenon::new(padded.clone(), rows, None)
}

/// The observable joint P(A, X) of a phenomenon, over variables
/// `X1..Xn, A1..An`. Context weights default to uniform; assignments not
/// matching any context carry zero mass.
pub fn phenomenon_joint(p: &Phenomenon) -> JointTable {
    let padded = &p.scenario;
    let n = padded.n;
    let setting_domains: Vec<Vec<usize>> = (0..n).map(|i| padded.slot_setting_domain(i)).collect();
    let outcome_domains: Vec<Vec<usize>> = (0..n).map(|i| padded.slot_outcome_domain(i)).collect();
    let mut vars = Vec::with_capacity(2 * n);
    let mut cards = Vec::with_capacity(2 * n);
    for i in 0..n {
        vars.push(format!("X{}", i + 1));
        cards.push(setting_domains[i].len());
    }
    for i in 0..n {
        vars.push(format!("A{}", i + 1));
        cards.push(outcome_domains[i].len());
    }
    let num_ctx = padded.slots.len();
    let uniform = Q::new(BigInt::from(1), BigInt::from(num_ctx as u64));
    let mut probs = Vec::new();
    for a in assignments(&cards) {
        let meas: Vec<usize> = (0..n).map(|i| setting_domains[i][a[i]]).collect();
        let ctx = padded.slots.iter().position(|c| *c == meas);
        let p_entry = match ctx {
            None => q_zero(),
            Some(c) => {
                let weight = match &p.context_weights {
                    Some(w) => w[c].clone(),
                    None => uniform.clone(),
                };
                let tuple: Vec<usize> = (0..n).map(|i| outcome_domains[i][a[n + i]]).collect();
                let ctx_cards = padded.ctx_cards(c);
                let valid = (0..n).all(|i| {
                    if ctx_cards[i] == 1 {
                        tuple[i] == padded.trivial_outcome()
                    } else {
                        tuple[i] < padded.base.outcomes.len()
                    }
                });
                if valid {
                    weight * &p.rows[c][padded.index_of_tuple(c, &tuple)]
                } else {
                    q_zero()
                }
            }
        };
        probs.push(p_entry);
    }
    JointTable::new(vars, cards, probs).expect("phenomenon joint is a distribution")
}

/// Deterministic random model compatible with `g`: every CPT entry is a
/// strictly positive rational with denominator dividing `denom_bound`.
pub fn random_compatible_model(
    g: &Dag,
    cards: &[usize],
    seed: u64,
    denom_bound: u64,
) -> CausalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.len();
    let mut cpts = Vec::with_capacity(n);
    for v in 0..n {
        let rows: usize = parent_list(g, v).iter().map(|&p| cards[p]).product();
        let card = cards[v];
        let mut table = Vec::with_capacity(rows);
        for _ in 0..rows {
            table.push(random_row(&mut rng, card, denom_bound));
        }
        cpts.push(table);
    }
    CausalModel::new(g.clone(), cards.to_vec(), cpts).expect("generated model is valid")
}

/// Random composition of `denom` into `card` strictly positive parts.
fn random_row(rng: &mut ChaCha8Rng, card: usize, denom: u64) -> Vec<Q> {
    assert!(denom as usize >= card, "denominator bound below cardinality");
    // card-1 distinct cut points in 1..denom
    let mut cuts: Vec<u64> = Vec::with_capacity(card - 1);
    while cuts.len() < card - 1 {
        let c = rng.gen_range(1..denom);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    cuts.push(denom);
    let mut prev = 0u64;
    cuts.iter()
        .map(|&c| {
            let part = c - prev;
            prev = c;
            Q::new(BigInt::from(part), BigInt::from(denom))
        })
        .collect()
}

/// Default cardinalities for a DAG over scenario variables: settings and
/// outcomes take their slot-domain sizes, latents take `latent_card`.
pub fn default_cards(g: &Dag, padded: &PaddedScenario, latent_card: usize) -> Result<Vec<usize>> {
    let mut cards = vec![0usize; g.len()];
    for v in 0..g.len() {
        cards[v] = match g.role(v) {
            Role::Latent => latent_card,
            Role::Setting | Role::Outcome => {
                let name = g.name(v);
                let slot: usize = name[1..]
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i >= 1 && i <= padded.n)
                    .ok_or_else(|| {
                        Error::Validation(format!("node {name:?} is not a slot variable"))
                    })?
                    - 1;
                if g.role(v) == Role::Setting {
                    padded.slot_setting_domain(slot).len()
                } else {
                    padded.slot_outcome_domain(slot).len()
                }
            }
        };
    }
    Ok(cards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::scenario::{chsh_scenario, pad_scenario};

    #[test]
    fn single_node_joint() {
        let g = Dag::from_names(&[("v", Role::Latent)], &[]).unwrap();
        let m = CausalModel::new(g, vec![2], vec![vec![vec![q(1, 3), q(2, 3)]]]).unwrap();
        let j = joint_distribution(&m, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(j.probs, vec![q(1, 3), q(2, 3)]);
    }

    #[test]
    fn independent_uniform_product() {
        let g = Dag::from_names(&[("u", Role::Latent), ("v", Role::Latent)], &[]).unwrap();
        let uniform = vec![vec![q(1, 2), q(1, 2)]];
        let m = CausalModel::new(g, vec![2, 2], vec![uniform.clone(), uniform]).unwrap();
        let j = joint_distribution(&m, DEFAULT_STATE_CAP).unwrap();
        assert!(j.probs.iter().all(|p| *p == q(1, 4)));
    }

    #[test]
    fn state_cap_enforced() {
        let g = Dag::from_names(&[("v", Role::Latent)], &[]).unwrap();
        let m = CausalModel::new(g, vec![4], vec![vec![vec![q(1, 4); 4]]]).unwrap();
        let err = joint_distribution(&m, 2).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    /// X1 -> A1 <- L -> A2 <- X2 with A_i = X_i xor L deterministic, L and
    /// settings uniform, reproduces P(a1 a2 | x1 x2) = 1/2 iff a1^a2 = x1^x2.
    pub(crate) fn parity_bell_model() -> (CausalModel, PaddedScenario) {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let g = Dag::from_names(
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
        let uniform = vec![vec![q(1, 2), q(1, 2)]];
        let xor_cpt = |_: ()| -> Vec<Vec<Q>> {
            // parent order is ascending node index: X before L for A1/A2
            let mut rows = Vec::new();
            for x in 0..2usize {
                for l in 0..2usize {
                    let a = x ^ l;
                    let mut row = vec![q(0, 1), q(0, 1)];
                    row[a] = q(1, 1);
                    rows.push(row);
                }
            }
            rows
        };
        let m = CausalModel::new(
            g,
            vec![2, 2, 2, 2, 2],
            vec![uniform.clone(), uniform.clone(), xor_cpt(()), xor_cpt(()), uniform],
        )
        .unwrap();
        (m, padded)
    }

    #[test]
    fn parity_bell_joint_and_phenomenon() {
        let (m, padded) = parity_bell_model();
        let p = observable_phenomenon(&m, &padded).unwrap();
        for c in 0..4 {
            let (x, y) = (c / 2, c % 2);
            for idx in 0..4 {
                let (a, b) = (idx / 2, idx % 2);
                let expect = if a ^ b == x ^ y { q(1, 2) } else { q(0, 1) };
                assert_eq!(p.rows[c][idx], expect, "ctx {c} idx {idx}");
            }
        }
        assert!(crate::scenario::check_no_disturbance(&p).holds());
    }

    #[test]
    fn no_latent_product_model_factorises_by_construction() {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let g = Dag::from_names(
            &[
                ("X1", Role::Setting),
                ("X2", Role::Setting),
                ("A1", Role::Outcome),
                ("A2", Role::Outcome),
            ],
            &[("X1", "A1"), ("X2", "A2")],
        )
        .unwrap();
        let uniform = vec![vec![q(1, 2), q(1, 2)]];
        let biased = vec![vec![q(1, 3), q(2, 3)], vec![q(1, 4), q(3, 4)]];
        let m = CausalModel::new(
            g,
            vec![2, 2, 2, 2],
            vec![uniform.clone(), uniform, biased.clone(), biased],
        )
        .unwrap();
        let p = observable_phenomenon(&m, &padded).unwrap();
        assert!(crate::scenario::check_no_disturbance(&p).holds());
        // product structure: P(ab|xy) = P(a|x) P(b|y)
        assert_eq!(p.rows[0][0], q(1, 9));
    }

    #[test]
    fn signalling_edge_disturbs() {
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let g = Dag::from_names(
            &[
                ("X1", Role::Setting),
                ("X2", Role::Setting),
                ("A1", Role::Outcome),
                ("A2", Role::Outcome),
            ],
            &[("X1", "A1"), ("X2", "A1"), ("X2", "A2")],
        )
        .unwrap();
        let cards = vec![2, 2, 2, 2];
        let m = random_compatible_model(&g, &cards, 11, 100);
        let p = observable_phenomenon(&m, &padded).unwrap();
        assert!(!crate::scenario::check_no_disturbance(&p).holds());
    }

    #[test]
    fn random_model_deterministic_and_positive() {
        let g = Dag::from_names(
            &[("u", Role::Latent), ("v", Role::Latent)],
            &[("u", "v")],
        )
        .unwrap();
        let a = random_compatible_model(&g, &[4, 2], 42, 100);
        let b = random_compatible_model(&g, &[4, 2], 42, 100);
        assert_eq!(a, b);
        let c = random_compatible_model(&g, &[4, 2], 43, 100);
        assert_ne!(a, c);
        let j = joint_distribution(&a, DEFAULT_STATE_CAP).unwrap();
        assert!(j.is_strictly_positive());
        for table in &a.cpts {
            for row in table {
                for p in row {
                    assert!(*p > q(0, 1));
                    assert!(*p.denom() <= 100.into());
                }
            }
        }
    }
}
