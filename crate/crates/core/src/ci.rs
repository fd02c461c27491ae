// SPDX-License-Identifier: MIT OR Apache-2.0
//! Exact conditional-independence testing on finite joints, CI-statement
//! enumeration, and a graphoid-axiom closure engine with derivation
//! traces.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::JointTable;
use crate::rational::{q_zero, Q};
use crate::scenario::{check_no_disturbance, Phenomenon};

/// Default cap on the variable count for CI enumeration.
pub const DEFAULT_CI_VAR_CAP: usize = 8;

/// A triple of disjoint variable sets read as "x is independent of y
/// given z". Stored canonically: the lexicographically smaller of x and y
/// comes first (symmetry is a normalization, not a production rule).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CIStatement {
    pub x: BTreeSet<String>,
    pub y: BTreeSet<String>,
    pub z: BTreeSet<String>,
}

impl CIStatement {
    pub fn new<I, J, K>(x: I, y: J, z: K) -> Result<Self>
    where
        I: IntoIterator,
        J: IntoIterator,
        K: IntoIterator,
        I::Item: Into<String>,
        J::Item: Into<String>,
        K::Item: Into<String>,
    {
        let x: BTreeSet<String> = x.into_iter().map(Into::into).collect();
        let y: BTreeSet<String> = y.into_iter().map(Into::into).collect();
        let z: BTreeSet<String> = z.into_iter().map(Into::into).collect();
        if x.is_empty() || y.is_empty() {
            return Err(Error::Validation("x and y sets must be non-empty".into()));
        }
        if !x.is_disjoint(&y) || !x.is_disjoint(&z) || !y.is_disjoint(&z) {
            return Err(Error::Validation("statement sets must be pairwise disjoint".into()));
        }
        Ok(CIStatement { x, y, z }.canonical())
    }

    fn canonical(mut self) -> Self {
        if self.y < self.x {
            std::mem::swap(&mut self.x, &mut self.y);
        }
        self
    }

    /// The same statement with x and y swapped, in canonical form this is
    /// identical to `self`; callers that need the raw orientation use the
    /// fields directly.
    pub fn vars(&self) -> BTreeSet<String> {
        self.x.union(&self.y).chain(self.z.iter()).cloned().collect()
    }

    pub fn render(&self) -> String {
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
        if self.z.is_empty() {
            format!("({} _||_ {})", join(&self.x), join(&self.y))
        } else {
            format!("({} _||_ {} | {})", join(&self.x), join(&self.y), join(&self.z))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    Decomposition,
    WeakUnion,
    Contraction,
    Intersection,
}

impl Axiom {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axiom::Decomposition => "decomposition",
            Axiom::WeakUnion => "weak-union",
            Axiom::Contraction => "contraction",
            Axiom::Intersection => "intersection",
        }
    }
}

/// Which axioms the closure engine applies. Intersection is only valid on
/// strictly positive distributions and is gated separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomSelection {
    pub decomposition: bool,
    pub weak_union: bool,
    pub contraction: bool,
    pub intersection: bool,
}

impl AxiomSelection {
    pub fn semigraphoid() -> Self {
        AxiomSelection {
            decomposition: true,
            weak_union: true,
            contraction: true,
            intersection: false,
        }
    }

    pub fn graphoid() -> Self {
        AxiomSelection { intersection: true, ..Self::semigraphoid() }
    }

    pub fn only(axiom: Axiom) -> Self {
        let mut s = AxiomSelection {
            decomposition: false,
            weak_union: false,
            contraction: false,
            intersection: false,
        };
        match axiom {
            Axiom::Decomposition => s.decomposition = true,
            Axiom::WeakUnion => s.weak_union = true,
            Axiom::Contraction => s.contraction = true,
            Axiom::Intersection => s.intersection = true,
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Ground,
    Derived { axiom: Axiom, premises: Vec<CIStatement> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CISet {
    pub statements: BTreeMap<CIStatement, Origin>,
}

impl CISet {
    pub fn from_ground<I: IntoIterator<Item = CIStatement>>(stmts: I) -> Self {
        CISet {
            statements: stmts.into_iter().map(|s| (s, Origin::Ground)).collect(),
        }
    }

    pub fn contains(&self, s: &CIStatement) -> bool {
        self.statements.contains_key(s)
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CIStatement> {
        self.statements.keys()
    }

    /// Text listing, one statement per line, derivation traces as
    /// comments.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (s, origin) in &self.statements {
            let sets = |set: &BTreeSet<String>| set.iter().cloned().collect::<Vec<_>>().join(" ");
            out.push_str(&format!("{},{}|{}", sets(&s.x), sets(&s.y), sets(&s.z)));
            if let Origin::Derived { axiom, premises } = origin {
                out.push_str(&format!("  # by {} from", axiom.as_str()));
                for p in premises {
                    out.push_str(&format!(" {}", p.render()));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Exact CI test: true iff P(x,y|z) = P(x|z) P(y|z) for every value
/// combination with P(z) > 0.
pub fn ci_holds(joint: &JointTable, s: &CIStatement) -> Result<bool> {
    let idx = |set: &BTreeSet<String>| -> Result<Vec<usize>> {
        set.iter().map(|v| joint.var_index(v)).collect()
    };
    let xi = idx(&s.x)?;
    let yi = idx(&s.y)?;
    let zi = idx(&s.z)?;

    let project = |a: &[usize], vars: &[usize]| -> Vec<usize> {
        vars.iter().map(|&v| a[v]).collect()
    };
    let mut p_xyz: BTreeMap<(Vec<usize>, Vec<usize>, Vec<usize>), Q> = BTreeMap::new();
    let mut p_xz: BTreeMap<(Vec<usize>, Vec<usize>), Q> = BTreeMap::new();
    let mut p_yz: BTreeMap<(Vec<usize>, Vec<usize>), Q> = BTreeMap::new();
    let mut p_z: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
    for (i, p) in joint.probs.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let a = joint.assignment_of(i);
        let (x, y, z) = (project(&a, &xi), project(&a, &yi), project(&a, &zi));
        *p_xyz.entry((x.clone(), y.clone(), z.clone())).or_insert_with(q_zero) += p;
        *p_xz.entry((x, z.clone())).or_insert_with(q_zero) += p;
        *p_yz.entry((y, z.clone())).or_insert_with(q_zero) += p;
        *p_z.entry(z).or_insert_with(q_zero) += p;
    }
    // Factorization must hold at every (x, y, z); entries absent from the
    // support are zero. It suffices to check all (x,z) x (y,z) pairs with
    // matching z, since elsewhere both sides vanish.
    for ((x, zx), pxz) in &p_xz {
        for ((y, zy), pyz) in &p_yz {
            if zx != zy {
                continue;
            }
            let pz = &p_z[zx];
            let lhs = p_xyz
                .get(&(x.clone(), y.clone(), zx.clone()))
                .cloned()
                .unwrap_or_else(q_zero);
            if &lhs * pz != pxz * pyz {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All canonical CI statements over the joint's variables that hold
/// exactly.
pub fn enumerate_ci(joint: &JointTable, var_cap: usize) -> Result<CISet> {
    let n = joint.vars.len();
    if n > var_cap {
        return Err(Error::Resource(format!("{n} variables exceed CI enumeration cap {var_cap}")));
    }
    let mut found = Vec::new();
    // Assign each variable to x / y / z / unused.
    for assignment in 0..4u32.pow(n as u32) {
        let mut x = BTreeSet::new();
        let mut y = BTreeSet::new();
        let mut z = BTreeSet::new();
        let mut a = assignment;
        for v in 0..n {
            match a % 4 {
                0 => {
                    x.insert(joint.vars[v].clone());
                }
                1 => {
                    y.insert(joint.vars[v].clone());
                }
                2 => {
                    z.insert(joint.vars[v].clone());
                }
                _ => {}
            }
            a /= 4;
        }
        if x.is_empty() || y.is_empty() || y < x {
            continue; // canonical orientation only
        }
        let stmt = CIStatement { x, y, z };
        if ci_holds(joint, &stmt)? {
            found.push(stmt);
        }
    }
    Ok(CISet::from_ground(found))
}

/// One-step application of an axiom to exactly the given premises; used
/// both by the closure engine and to replay derivation traces.
pub fn apply_axiom(axiom: Axiom, premises: &[CIStatement]) -> Vec<CIStatement> {
    let mut out = Vec::new();
    // Each premise is considered in both orientations.
    let orientations = |s: &CIStatement| {
        vec![
            (s.x.clone(), s.y.clone(), s.z.clone()),
            (s.y.clone(), s.x.clone(), s.z.clone()),
        ]
    };
    match axiom {
        Axiom::Decomposition | Axiom::WeakUnion => {
            let [s] = premises else { return out };
            for (x, yw, z) in orientations(s) {
                if yw.len() < 2 {
                    continue;
                }
                let members: Vec<&String> = yw.iter().collect();
                for mask in 1..(1u32 << members.len()) - 1 {
                    let ysub: BTreeSet<String> = members
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mask >> k & 1 == 1)
                        .map(|(_, m)| (*m).clone())
                        .collect();
                    let rest: BTreeSet<String> = yw.difference(&ysub).cloned().collect();
                    let stmt = match axiom {
                        Axiom::Decomposition => CIStatement { x: x.clone(), y: ysub, z: z.clone() },
                        _ => CIStatement {
                            x: x.clone(),
                            y: ysub,
                            z: z.union(&rest).cloned().collect(),
                        },
                    };
                    out.push(stmt.canonical());
                }
            }
        }
        Axiom::Contraction => {
            let [s, t] = premises else { return out };
            for (sx, sy, sz) in orientations(s) {
                for (tx, tw, tz) in orientations(t) {
                    // (x _||_ y | z) & (x _||_ w | z+y)  =>  (x _||_ y+w | z)
                    if sx != tx {
                        continue;
                    }
                    let zy: BTreeSet<String> = sz.union(&sy).cloned().collect();
                    if tz != zy {
                        continue;
                    }
                    if !tw.is_disjoint(&sy) {
                        continue;
                    }
                    let yw: BTreeSet<String> = sy.union(&tw).cloned().collect();
                    out.push(CIStatement { x: sx.clone(), y: yw, z: sz.clone() }.canonical());
                }
            }
        }
        Axiom::Intersection => {
            let [s, t] = premises else { return out };
            for (sx, sw, szy) in orientations(s) {
                for (tx, ty, tzw) in orientations(t) {
                    // (x _||_ w | z+y) & (x _||_ y | z+w)  =>  (x _||_ y+w | z)
                    if sx != tx || !ty.is_subset(&szy) || !sw.is_subset(&tzw) {
                        continue;
                    }
                    let z1: BTreeSet<String> = szy.difference(&ty).cloned().collect();
                    let z2: BTreeSet<String> = tzw.difference(&sw).cloned().collect();
                    if z1 != z2 {
                        continue;
                    }
                    let yw: BTreeSet<String> = ty.union(&sw).cloned().collect();
                    out.push(CIStatement { x: sx.clone(), y: yw, z: z1 }.canonical());
                }
            }
        }
    }
    out
}

/// Least fixed point of the selected axioms applied to the seed. Every
/// derived statement carries the axiom and premises that produced it.
pub fn graphoid_closure(seed: &CISet, axioms: AxiomSelection) -> CISet {
    let mut closed: BTreeMap<CIStatement, Origin> = seed.statements.clone();
    loop {
        let mut additions: Vec<(CIStatement, Origin)> = Vec::new();
        let stmts: Vec<CIStatement> = closed.keys().cloned().collect();
        let consider = |axiom: Axiom, premises: Vec<CIStatement>, closed: &BTreeMap<CIStatement, Origin>, additions: &mut Vec<(CIStatement, Origin)>| {
            for derived in apply_axiom(axiom, &premises) {
                if !closed.contains_key(&derived)
                    && !additions.iter().any(|(s, _)| s == &derived)
                {
                    additions.push((
                        derived,
                        Origin::Derived { axiom, premises: premises.clone() },
                    ));
                }
            }
        };
        for s in &stmts {
            if axioms.decomposition {
                consider(Axiom::Decomposition, vec![s.clone()], &closed, &mut additions);
            }
            if axioms.weak_union {
                consider(Axiom::WeakUnion, vec![s.clone()], &closed, &mut additions);
            }
        }
        if axioms.contraction || axioms.intersection {
            for s in &stmts {
                for t in &stmts {
                    if axioms.contraction {
                        consider(Axiom::Contraction, vec![s.clone(), t.clone()], &closed, &mut additions);
                    }
                    if axioms.intersection {
                        consider(Axiom::Intersection, vec![s.clone(), t.clone()], &closed, &mut additions);
                    }
                }
            }
        }
        if additions.is_empty() {
            return CISet { statements: closed };
        }
        closed.extend(additions);
    }
}

/// The CI statements a no-disturbance phenomenon satisfies by definition:
/// (A_g _||_ X_rest | X_g) for every nonempty proper slot subset g.
pub fn nd_as_ci(p: &Phenomenon) -> Result<CISet> {
    let report = check_no_disturbance(p);
    if !report.holds() {
        return Err(Error::Precondition(format!(
            "no-disturbance fails with {} violations",
            report.violations.len()
        )));
    }
    Ok(CISet::from_ground(nd_ci_statements(p.scenario.n)))
}

/// The statement family above for slot count `n`, independent of any
/// phenomenon.
pub fn nd_ci_statements(n: usize) -> Vec<CIStatement> {
    let mut out = Vec::new();
    for mask in 1u64..(1 << n) {
        if mask == (1 << n) - 1 {
            continue; // full subset: the complement is empty
        }
        let a_gamma: Vec<String> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| format!("A{}", i + 1)).collect();
        let x_rest: Vec<String> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| format!("X{}", i + 1)).collect();
        let x_gamma: Vec<String> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| format!("X{}", i + 1)).collect();
        out.push(CIStatement::new(a_gamma, x_rest, x_gamma).expect("valid statement"));
    }
    out
}
