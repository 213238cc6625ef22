//! Shared random-instance builders for the integration suites.

use apg::graph::PlumbingGraph;
use apg::invariants::graph_rank;
use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::Rng;

fn random_alpha(rng: &mut impl Rng, alpha_abs: i64) -> BigInt {
    BigInt::from(rng.gen_range(-alpha_abs..=alpha_abs))
}

fn random_label(rng: &mut impl Rng, label_max: u32) -> u32 {
    if label_max > 0 && rng.gen_bool(0.3) {
        rng.gen_range(0..=label_max)
    } else {
        0
    }
}

/// Random connected bipartite tree; every edge joins a labeled vertex to a
/// dot, and dots only appear attached.
pub fn random_tree(
    rng: &mut impl Rng,
    max_u: usize,
    alpha_abs: i64,
    label_max: u32,
) -> PlumbingGraph {
    let n_u = rng.gen_range(1..=max_u);
    let n_v = if n_u == 1 {
        usize::from(rng.gen_bool(0.5))
    } else {
        rng.gen_range(1..n_u)
    };
    let mut g = PlumbingGraph::new();
    g.add_u_vertex(
        "u0",
        random_alpha(rng, alpha_abs),
        random_label(rng, label_max),
        random_label(rng, label_max),
    )
    .expect("fresh id");
    let mut n_us = 1usize;
    let mut n_vs = 0usize;
    let mut rem_u = n_u - 1;
    let mut rem_v = n_v;
    while rem_u + rem_v > 0 {
        let pick_u = if n_vs == 0 || rem_u == 0 {
            false
        } else if rem_v == 0 {
            true
        } else {
            rng.gen_ratio(rem_u as u32, (rem_u + rem_v) as u32)
        };
        if pick_u {
            let id = format!("u{n_us}");
            g.add_u_vertex(
                &id,
                random_alpha(rng, alpha_abs),
                random_label(rng, label_max),
                random_label(rng, label_max),
            )
            .expect("fresh id");
            let v = format!("v{}", rng.gen_range(0..n_vs));
            g.add_edge(&id, &v).expect("new edge");
            n_us += 1;
            rem_u -= 1;
        } else {
            let id = format!("v{n_vs}");
            g.add_v_vertex(&id).expect("fresh id");
            let u = format!("u{}", rng.gen_range(0..n_us));
            g.add_edge(&u, &id).expect("new edge");
            n_vs += 1;
            rem_v -= 1;
        }
    }
    g
}

/// Random tree whose invariant-system rank does not exceed `cap`,
/// produced by rejection.
pub fn random_tree_rank_capped(
    rng: &mut impl Rng,
    cap: usize,
    max_u: usize,
    alpha_abs: i64,
    label_max: u32,
) -> PlumbingGraph {
    loop {
        let g = random_tree(rng, max_u, alpha_abs, label_max);
        if graph_rank(&g) <= cap {
            return g;
        }
    }
}

/// Random bipartite graph, possibly disconnected or with cycles; every dot
/// keeps degree at least one.
pub fn random_graph(
    rng: &mut impl Rng,
    max_u: usize,
    alpha_abs: i64,
    label_max: u32,
) -> PlumbingGraph {
    let n_u = rng.gen_range(1..=max_u);
    let n_v = rng.gen_range(0..=n_u);
    let mut g = PlumbingGraph::new();
    for i in 0..n_u {
        g.add_u_vertex(
            format!("u{i}"),
            random_alpha(rng, alpha_abs),
            random_label(rng, label_max),
            random_label(rng, label_max),
        )
        .expect("fresh id");
    }
    for j in 0..n_v {
        g.add_v_vertex(format!("v{j}")).expect("fresh id");
        let d = rng.gen_range(1..=n_u.min(3));
        for i in sample(rng, n_u, d) {
            g.add_edge(&format!("u{i}"), &format!("v{j}")).expect("new edge");
        }
    }
    g
}

/// Random bipartite graph of bounded invariant-system rank.
pub fn random_graph_rank_capped(
    rng: &mut impl Rng,
    cap: usize,
    max_u: usize,
    alpha_abs: i64,
    label_max: u32,
) -> PlumbingGraph {
    loop {
        let g = random_graph(rng, max_u, alpha_abs, label_max);
        if graph_rank(&g) <= cap {
            return g;
        }
    }
}
