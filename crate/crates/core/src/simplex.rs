// SPDX-License-Identifier: MIT OR Apache-2.0
//! Exact rational linear feasibility.
//!
//! Phase-one simplex with Bland's rule over arbitrary-precision rationals:
//! decides whether `A x = b, x >= 0` has a solution, returning either a
//! solution or a separating functional `y` with `y A <= 0` and `y b > 0`
//! (checked by the caller by substitution). Bland's rule guarantees
//! termination; there is no floating point anywhere.

use num_traits::Zero;

use crate::rational::{q_one, q_zero, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<Q>),
    /// A row functional `y` with `y A <= 0` and `y b > 0`.
    Infeasible(Vec<Q>),
}

pub fn solve_equality_feasibility(a: &[Vec<Q>], b: &[Q]) -> Feasibility {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    assert_eq!(b.len(), m);

    // Orient rows so the right-hand side is nonnegative.
    let flip: Vec<bool> = b.iter().map(|v| *v < q_zero()).collect();
    // Tableau: columns [structural | artificial | rhs].
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Q> = Vec::with_capacity(width);
        for j in 0..n {
            row.push(if flip[i] { -&a[i][j] } else { a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i { q_one() } else { q_zero() });
        }
        row.push(if flip[i] { -&b[i] } else { b[i].clone() });
        t.push(row);
    }
    // Reduced-cost row for minimizing the artificial sum; its rhs cell
    // holds the negated objective.
    let mut cost: Vec<Q> = vec![q_zero(); width];
    for j in 0..width {
        if j >= n && j < n + m {
            continue; // artificial columns start with reduced cost 0
        }
        let mut s = q_zero();
        for row in &t {
            s += &row[j];
        }
        cost[j] = -s;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: entering variable is the lowest-index negative reduced cost.
        let Some(enter) = (0..n + m).find(|&j| cost[j] < q_zero()) else {
            break;
        };
        // Ratio test, ties broken by smallest basic variable index.
        let mut pivot: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][enter] > q_zero() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &pivot {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && basis[i] < basis[*bi])
                    }
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        let (pr, _) = pivot.expect("phase-one objective is bounded below");
        // Pivot on (pr, enter).
        let inv = {
            let p = t[pr][enter].clone();
            t[pr].iter_mut().for_each(|v| *v /= &p);
            p
        };
        let _ = inv;
        for i in 0..m {
            if i != pr && !t[i][enter].is_zero() {
                let f = t[i][enter].clone();
                for j in 0..width {
                    let delta = &f * &t[pr][j];
                    t[i][j] -= delta;
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for j in 0..width {
                let delta = &f * &t[pr][j];
                cost[j] -= delta;
            }
        }
        basis[pr] = enter;
    }

    let objective = -cost[width - 1].clone();
    if objective.is_zero() {
        let mut x = vec![q_zero(); n];
        for i in 0..m {
            if basis[i] < n {
                x[basis[i]] = t[i][width - 1].clone();
            }
        }
        Feasibility::Feasible(x)
    } else {
        // Simplex multipliers: the artificial column j of row i carries
        // reduced cost 1 - y_i; undo the row orientation afterwards.
        let mut y = Vec::with_capacity(m);
        for i in 0..m {
            let yi = q_one() - &cost[n + i];
            y.push(if flip[i] { -yi } else { yi });
        }
        Feasibility::Infeasible(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn qv(vals: &[(i64, i64)]) -> Vec<Q> {
        vals.iter().map(|&(a, b)| q(a, b)).collect()
    }

    fn check_feasible(a: &[Vec<Q>], b: &[Q], x: &[Q]) {
        for (row, rhs) in a.iter().zip(b) {
            let mut s = q(0, 1);
            for (c, v) in row.iter().zip(x) {
                s += c * v;
            }
            assert_eq!(&s, rhs);
        }
        assert!(x.iter().all(|v| *v >= q(0, 1)));
    }

    fn check_infeasible(a: &[Vec<Q>], b: &[Q], y: &[Q]) {
        let n = a[0].len();
        for j in 0..n {
            let mut s = q(0, 1);
            for i in 0..a.len() {
                s += &y[i] * &a[i][j];
            }
            assert!(s <= q(0, 1), "y A has positive column {j}");
        }
        let mut yb = q(0, 1);
        for i in 0..a.len() {
            yb += &y[i] * &b[i];
        }
        assert!(yb > q(0, 1) * q(0, 1), "y b = {yb} not positive");
    }

    #[test]
    fn simple_feasible_system() {
        // x1 + x2 = 1, x1 - x2 = 0  =>  x = (1/2, 1/2)
        let a = vec![qv(&[(1, 1), (1, 1)]), qv(&[(1, 1), (-1, 1)])];
        let b = qv(&[(1, 1), (0, 1)]);
        match solve_equality_feasibility(&a, &b) {
            Feasibility::Feasible(x) => check_feasible(&a, &b, &x),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_handled() {
        // x1 - x2 = -1 with x <= probabilities: feasible (x1=0, x2=1)
        let a = vec![qv(&[(1, 1), (-1, 1)]), qv(&[(1, 1), (1, 1)])];
        let b = qv(&[(-1, 1), (1, 1)]);
        match solve_equality_feasibility(&a, &b) {
            Feasibility::Feasible(x) => check_feasible(&a, &b, &x),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_sum_conflict() {
        // x1 + x2 = 1 and x1 + x2 = 2 cannot both hold.
        let a = vec![qv(&[(1, 1), (1, 1)]), qv(&[(1, 1), (1, 1)])];
        let b = qv(&[(1, 1), (2, 1)]);
        match solve_equality_feasibility(&a, &b) {
            Feasibility::Infeasible(y) => check_infeasible(&a, &b, &y),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_by_nonnegativity() {
        // x1 = -1 has no nonnegative solution.
        let a = vec![vec![q(1, 1)]];
        let b = vec![q(-1, 1)];
        match solve_equality_feasibility(&a, &b) {
            Feasibility::Infeasible(y) => check_infeasible(&a, &b, &y),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn redundant_rows_fine() {
        let a = vec![
            qv(&[(1, 1), (1, 1)]),
            qv(&[(2, 1), (2, 1)]),
            qv(&[(1, 1), (0, 1)]),
        ];
        let b = qv(&[(1, 1), (2, 1), (1, 3)]);
        match solve_equality_feasibility(&a, &b) {
            Feasibility::Feasible(x) => check_feasible(&a, &b, &x),
            other => panic!("expected feasible, got {other:?}"),
        }
    }
}
