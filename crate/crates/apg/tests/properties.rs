//! Cross-module property suites on randomized instances.

mod common;

use apg::equiv::{decide_equivalence, fingerprint, EquivalenceVerdict};
use apg::forms::{congruence_admissible, BinaryFormPair, ClassicalInvariants};
use apg::graph::PlumbingGraph;
use apg::invariants::{graph_rank, invariant_system};
use apg::reduce::reduce;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

fn random_unimodular(rng: &mut impl Rng) -> [[BigInt; 2]; 2] {
    loop {
        let e: Vec<i64> = (0..4).map(|_| rng.gen_range(-5..=5)).collect();
        let det = e[0] * e[3] - e[1] * e[2];
        if det == 1 || det == -1 {
            return [[b(e[0]), b(e[1])], [b(e[2]), b(e[3])]];
        }
    }
}

#[test]
fn classical_invariants_survive_unimodular_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..1000 {
        // Middle cubic coefficients stay divisible by 3, matching every
        // pair extracted from an invariant system.
        let fp = BinaryFormPair::new(
            [
                b(rng.gen_range(-9..=9)),
                b(3 * rng.gen_range(-3..=3)),
                b(3 * rng.gen_range(-3..=3)),
                b(rng.gen_range(-9..=9)),
            ],
            [b(rng.gen_range(-9..=9)), b(rng.gen_range(-9..=9))],
        )
        .expect("coefficients accepted");
        let m = random_unimodular(&mut rng);
        let before = ClassicalInvariants::from_form_pair(&fp);
        let after = ClassicalInvariants::from_form_pair(&fp.substitute(&m));
        assert_eq!(before, after, "trial {trial}");
    }
}

#[test]
fn triple_invariants_agree_across_computations() {
    for a1 in -8i64..=8 {
        for a2 in a1..=8 {
            for a3 in a2..=8 {
                let direct = ClassicalInvariants::from_triple(&b(a1), &b(a2), &b(a3));
                let s1 = b(a1) + b(a2) + b(a3);
                let s2 = b(a1 * a2 + a1 * a3 + a2 * a3);
                let s3 = b(a1 * a2 * a3);
                let via_sigmas = ClassicalInvariants::from_sigmas(&s1, &s2, &s3);
                let fp = BinaryFormPair::from_triple(&b(a1), &b(a2), &b(a3));
                let general = ClassicalInvariants::from_form_pair(&fp);
                assert_eq!(direct, via_sigmas, "({a1},{a2},{a3})");
                assert_eq!(direct, general, "({a1},{a2},{a3})");
            }
        }
    }
}

/// Rebuilds a graph with renamed ids and shuffled declaration order.
fn relabeled_shuffle(g: &PlumbingGraph, rng: &mut impl Rng) -> PlumbingGraph {
    let n_u = g.u_vertices().len();
    let n_v = g.v_vertices().len();
    let mut u_perm: Vec<usize> = (0..n_u).collect();
    u_perm.shuffle(rng);
    let mut v_perm: Vec<usize> = (0..n_v).collect();
    v_perm.shuffle(rng);
    let mut out = PlumbingGraph::new();
    let mut u_name = vec![String::new(); n_u];
    let mut v_name = vec![String::new(); n_v];
    for (new_idx, &old_idx) in u_perm.iter().enumerate() {
        let u = &g.u_vertices()[old_idx];
        let id = format!("x{new_idx}");
        out.add_u_vertex(&id, u.alpha.clone(), u.k_plus, u.k_minus)
            .expect("fresh id");
        u_name[old_idx] = id;
    }
    for (new_idx, &old_idx) in v_perm.iter().enumerate() {
        let id = format!("y{new_idx}");
        out.add_v_vertex(&id).expect("fresh id");
        v_name[old_idx] = id;
    }
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    edges.shuffle(rng);
    for (ui, vi) in edges {
        out.add_edge(&u_name[ui], &v_name[vi]).expect("new edge");
    }
    out
}

#[test]
fn canonical_encoding_ignores_names_order_and_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for trial in 0..300 {
        let g = common::random_tree(&mut rng, 7, 6, 2);
        let base = g.canonical_reduced_class().expect("tree").canonical_encoding;
        let shuffled = relabeled_shuffle(&g, &mut rng);
        let enc = shuffled
            .canonical_reduced_class()
            .expect("tree")
            .canonical_encoding;
        assert_eq!(base, enc, "trial {trial}: renaming changed the encoding");
        let mut negated = g.clone();
        for comp in negated.components() {
            negated.negate_component(&comp);
        }
        let enc = negated
            .canonical_reduced_class()
            .expect("tree")
            .canonical_encoding;
        assert_eq!(base, enc, "trial {trial}: negation changed the encoding");
    }
}

#[test]
fn rank_matches_full_system_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..300 {
        let g = common::random_graph(&mut rng, 7, 6, 2);
        let s = invariant_system(&g, 1).expect("degree 1");
        assert_eq!(graph_rank(&g), s.rank());
        assert_eq!(g.is_spin(), s.is_spin());
    }
}

#[test]
fn equivalence_verdict_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let kind = |v: &EquivalenceVerdict| match v {
        EquivalenceVerdict::Equivalent { .. } => 0u8,
        EquivalenceVerdict::Inequivalent { .. } => 1,
        EquivalenceVerdict::Unknown { .. } => 2,
    };
    for trial in 0..120 {
        let g1 = common::random_tree_rank_capped(&mut rng, 3, 5, 4, 1);
        let g2 = common::random_tree_rank_capped(&mut rng, 3, 5, 4, 1);
        let s1 = invariant_system(&g1, 1).expect("degree 1");
        let s2 = invariant_system(&g2, 1).expect("degree 1");
        if s1.rank() != s2.rank() {
            continue;
        }
        let ab = decide_equivalence(&s1, &s2).expect("same degree");
        let ba = decide_equivalence(&s2, &s1).expect("same degree");
        assert_eq!(kind(&ab), kind(&ba), "trial {trial}");
    }
}

#[test]
fn reduction_reaches_a_stable_fingerprint() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for trial in 0..200 {
        let g = common::random_tree(&mut rng, 7, 5, 2);
        let (r1, _) = reduce(&g).expect("forest input");
        let shuffled = relabeled_shuffle(&g, &mut rng);
        let (r2, _) = reduce(&shuffled).expect("forest input");
        let s1 = invariant_system(&r1, 1).expect("degree 1");
        let s2 = invariant_system(&r2, 1).expect("degree 1");
        assert_eq!(
            fingerprint(&s1),
            fingerprint(&s2),
            "trial {trial}: declaration order changed the reduced fingerprint"
        );
        let (r3, trace) = reduce(&r1).expect("forest input");
        assert!(trace.steps.is_empty(), "reduced output must be a fixpoint");
        assert_eq!(
            r1.canonical_reduced_class().expect("tree").canonical_encoding,
            r3.canonical_reduced_class().expect("tree").canonical_encoding
        );
    }
}

#[test]
fn congruence_counterexamples_actually_violate() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let modulus = b(48);
    let mut failures = 0usize;
    for _ in 0..150 {
        let g = common::random_graph_rank_capped(&mut rng, 3, 6, 9, 2);
        let mut s = invariant_system(&g, 1).expect("degree 1");
        // Corrupt p in half the trials to exercise the failing branch.
        if rng.gen_bool(0.5) && s.rank() > 0 {
            s.p[0] += b(rng.gen_range(1..=5));
        }
        let verdict = congruence_admissible(&s).expect("degree 1");
        match verdict.counterexample {
            Some(w) => {
                failures += 1;
                assert!(!verdict.admissible);
                let diff = s.eval_mu(&w, &w, &w) - s.eval_p(&w);
                assert!(
                    !(diff % &modulus).is_zero(),
                    "reported witness must break the congruence"
                );
                for (wi, bit) in w.iter().zip(&s.w) {
                    assert_eq!(
                        (wi % 2 + 2) % 2,
                        b(*bit as i64),
                        "witness must lift the characteristic class"
                    );
                }
            }
            None => assert!(verdict.admissible),
        }
    }
    assert!(failures > 0, "corruption should produce some failing systems");
}
