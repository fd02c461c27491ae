// SPDX-License-Identifier: MIT OR Apache-2.0
//! Cross-checks and randomized properties beyond the acceptance gate:
//! agreement of the two d-separation implementations on larger graphs,
//! noise monotonicity of polytope membership, and round-trip laws.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ccx_core::doc::{parse_document, render_document, Document};
use ccx_core::graph::{
    d_separated, d_separated_by_paths, enumerate_dags, DSepQuery, Dag, Role,
};
use ccx_core::polytope::{evaluate_inequality, is_factorisable};
use ccx_core::rational::{format_q, parse_q, q};
use ccx_core::scenario::{chsh_scenario, pad_scenario, Phenomenon};

/// Mixes the extremal box with white noise at weight `w`.
fn noisy_pr(w: ccx_core::Q) -> Phenomenon {
    let pr = ccx_core::corpus::pr_box();
    let uniform = q(1, 4);
    let rows = pr
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| &w * p + (q(1, 1) - &w) * &uniform)
                .collect()
        })
        .collect();
    Phenomenon::new(pr.scenario.clone(), rows, None).unwrap()
}

#[test]
fn membership_threshold_of_noisy_extremal_box() {
    // The two-party functional reaches 4w + 0 on the mixture, so the
    // boundary sits exactly at w = 1/2.
    for (num, den, feasible) in [(0, 1, true), (1, 4, true), (1, 2, true), (51, 100, false), (3, 4, false), (1, 1, false)] {
        let p = noisy_pr(q(num, den));
        let cert = is_factorisable(&p, false).unwrap();
        assert_eq!(cert.feasible, feasible, "w = {num}/{den}");
    }
}

#[test]
fn witness_value_scales_linearly_with_noise() {
    let b = ccx_core::polytope::builtin_functionals()
        .into_iter()
        .find(|b| b.name == "chsh")
        .unwrap();
    for (num, den) in [(3, 4), (9, 10), (1, 1)] {
        let p = noisy_pr(q(num, den));
        let eval = evaluate_inequality(&p, &b.functional).unwrap();
        assert_eq!(eval.value, q(4 * num, den));
        assert!(eval.violated);
    }
}

/// The ancestral-moralization decision and the path-enumeration decision
/// agree on every query over a seeded sample of five- and six-node DAGs.
#[test]
fn dsep_implementations_agree_on_larger_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..1500 {
        let n = if case % 2 == 0 { 5 } else { 6 };
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(0.5) {
                    edges.push((order[i], order[j]));
                }
            }
        }
        let nodes: Vec<(String, Role)> =
            (0..n).map(|v| (format!("v{v}"), Role::Latent)).collect();
        let g = Dag::new(nodes, &edges).unwrap();
        for _ in 0..8 {
            let (mut x, mut y, mut z) = (0u64, 0u64, 0u64);
            for v in 0..n {
                match rng.gen_range(0..4) {
                    0 => x |= 1 << v,
                    1 => y |= 1 << v,
                    2 => z |= 1 << v,
                    _ => {}
                }
            }
            if x == 0 || y == 0 {
                continue;
            }
            let query = DSepQuery::new(&g, x, y, z).unwrap();
            assert_eq!(
                d_separated(&g, &query),
                d_separated_by_paths(&g, &query),
                "edges {edges:?}, query {x:b}/{y:b}/{z:b}"
            );
        }
    }
}

/// Exhaustive agreement on all four-node DAGs and all queries.
#[test]
fn dsep_implementations_agree_exhaustively_n4() {
    let nodes: Vec<(String, Role)> =
        (0..4).map(|v| (format!("v{v}"), Role::Latent)).collect();
    for edges in enumerate_dags(4) {
        let g = Dag::new(nodes.clone(), &edges).unwrap();
        for assignment in 0..4u32.pow(4) {
            let (mut x, mut y, mut z) = (0u64, 0u64, 0u64);
            for v in 0..4 {
                match assignment >> (2 * v) & 3 {
                    0 => x |= 1 << v,
                    1 => y |= 1 << v,
                    2 => z |= 1 << v,
                    _ => {}
                }
            }
            if x == 0 || y == 0 {
                continue;
            }
            let query = DSepQuery::new(&g, x, y, z).unwrap();
            assert_eq!(d_separated(&g, &query), d_separated_by_paths(&g, &query));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_text_roundtrip(num in -1000i64..1000, den in 1i64..1000) {
        let v = q(num, den);
        let back = parse_q(&format_q(&v)).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn phenomenon_documents_roundtrip(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let rows: Vec<Vec<ccx_core::Q>> = (0..4)
            .map(|_| {
                let mut counts = [0i64; 4];
                let mut remaining = 24i64;
                for c in counts.iter_mut().take(3) {
                    *c = rng.gen_range(0..=remaining);
                    remaining -= *c;
                }
                counts[3] = remaining;
                counts.iter().map(|&c| q(c, 24)).collect()
            })
            .collect();
        let p = Phenomenon::new(padded, rows, None).unwrap();
        let text = render_document(&Document::Phenomenon(p.clone())).unwrap();
        match parse_document(&text).unwrap() {
            Document::Phenomenon(back) => prop_assert_eq!(back, p),
            _ => prop_assert!(false, "kind changed"),
        }
    }

    /// Convex mixtures of feasible phenomena stay feasible.
    #[test]
    fn mixtures_of_local_boxes_stay_local(seed in 0u64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let padded = pad_scenario(&chsh_scenario()).unwrap();
        let strategies =
            ccx_core::polytope::enumerate_strategies(&padded, 1 << 20).unwrap();
        let mut rows = vec![vec![q(0, 1); 4]; 4];
        let k = rng.gen_range(1..=5usize);
        let picks: Vec<usize> = (0..k).map(|_| rng.gen_range(0..strategies.len())).collect();
        for pick in &picks {
            for c in 0..4 {
                let idx = padded.index_of_tuple(c, &strategies[*pick].tuple(&padded, c));
                rows[c][idx] += q(1, k as i64);
            }
        }
        let p = Phenomenon::new(padded, rows, None).unwrap();
        let cert = is_factorisable(&p, false).unwrap();
        prop_assert!(cert.feasible);
    }
}
