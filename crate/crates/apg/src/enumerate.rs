//! Bounded enumeration of reduced graphs and invariant-collision reporting.
//!
//! Reduced graphs are disjoint unions of reduced components: isolated
//! weighted vertices, at most one marked dot-and-vertex pair, and trees
//! whose dots all have degree at least three. Components are generated
//! within the bounds, deduplicated by canonical encoding, and assembled
//! into multisets whose total rank stays within budget.

use crate::equiv::{decide_equivalence, fingerprint, EquivalenceVerdict, Fingerprint};
use crate::graph::PlumbingGraph;
use crate::invariants::{invariant_system, InvariantError};
use crate::reduce::is_reduced;
use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnumError {
    #[error("enumeration work exceeded the safety cap of {cap} steps")]
    CapExceeded { cap: u64 },
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

pub const DEFAULT_SAFETY_CAP: u64 = 5_000_000;

/// Finite search box for reduced-graph enumeration.
#[derive(Debug, Clone)]
pub struct EnumerationBounds {
    /// Largest allowed lattice rank.
    pub rank_max: usize,
    /// Largest allowed absolute vertex weight.
    pub alpha_max: i64,
    /// Cap on the sum of all bundle labels over the graph.
    pub label_sum_max: u32,
    /// Degree parameter for the invariant systems of the results.
    pub k: u32,
    /// Hard limit on enumeration steps; exceeding it is an error.
    pub safety_cap: u64,
}

impl EnumerationBounds {
    pub fn new(rank_max: usize, alpha_max: i64, label_sum_max: u32, k: u32) -> Self {
        Self {
            rank_max,
            alpha_max,
            label_sum_max,
            k,
            safety_cap: DEFAULT_SAFETY_CAP,
        }
    }
}

/// One reduced class: a canonical representative graph, its encoding, and
/// the cheap invariant fingerprint of its system.
#[derive(Debug, Clone)]
pub struct EnumeratedClass {
    pub graph: PlumbingGraph,
    pub encoding: String,
    pub fingerprint: Fingerprint,
}

impl EnumeratedClass {
    pub fn to_json(&self) -> Value {
        json!({
            "encoding": self.encoding,
            "fingerprint": self.fingerprint.to_json(),
            "graph": self.graph.serialize(),
        })
    }
}

struct ComponentClass {
    graph: PlumbingGraph,
    rank: usize,
    label_sum: u32,
    encoding: String,
}

struct Budget {
    used: u64,
    cap: u64,
}

impl Budget {
    fn spend(&mut self, steps: u64) -> Result<(), EnumError> {
        self.used = self.used.saturating_add(steps);
        if self.used > self.cap {
            Err(EnumError::CapExceeded { cap: self.cap })
        } else {
            Ok(())
        }
    }
}

fn component_rank(g: &PlumbingGraph) -> usize {
    crate::invariants::graph_rank(g)
}

fn component_label_sum(g: &PlumbingGraph) -> u32 {
    g.u_vertices().iter().map(|u| u.k_plus + u.k_minus).sum()
}

fn push_class(classes: &mut BTreeMap<String, ComponentClass>, mut g: PlumbingGraph) {
    g.canonicalize_signs().expect("components are trees");
    let encoding = g
        .canonical_reduced_class()
        .expect("components are trees")
        .canonical_encoding;
    classes.entry(encoding.clone()).or_insert_with(|| ComponentClass {
        rank: component_rank(&g),
        label_sum: component_label_sum(&g),
        graph: g,
        encoding,
    });
}

/// Single weighted vertices with no edges.
fn isolated_classes(
    b: &EnumerationBounds,
    budget: &mut Budget,
    classes: &mut BTreeMap<String, ComponentClass>,
) -> Result<(), EnumError> {
    if b.rank_max == 0 {
        return Ok(());
    }
    let m_max = u32::try_from(b.rank_max - 1)
        .unwrap_or(u32::MAX)
        .min(b.label_sum_max);
    for m in 0..=m_max {
        for k_plus in 0..=m {
            let k_minus = m - k_plus;
            for alpha in -b.alpha_max..=b.alpha_max {
                budget.spend(1)?;
                let mut g = PlumbingGraph::new();
                g.add_u_vertex("u0", BigInt::from(alpha), k_plus, k_minus)
                    .expect("fresh id");
                if is_reduced(&g) {
                    push_class(classes, g);
                }
            }
        }
    }
    Ok(())
}

/// The marked dot-and-vertex pair.
fn marked_class(
    b: &EnumerationBounds,
    classes: &mut BTreeMap<String, ComponentClass>,
) {
    if b.rank_max == 0 || b.label_sum_max == 0 {
        return;
    }
    let mut g = PlumbingGraph::new();
    g.add_u_vertex("u0", BigInt::from(0), 1, 0).expect("fresh id");
    g.add_v_vertex("v0").expect("fresh id");
    g.add_edge("u0", "v0").expect("valid edge");
    debug_assert!(is_reduced(&g));
    push_class(classes, g);
}

/// Decodes a Pruefer sequence over `n` nodes into tree edges.
fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut leaves: BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&i| degree[i] == 1)
        .map(std::cmp::Reverse)
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("leaf exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().expect("two leaves remain");
    let std::cmp::Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a, b));
    edges
}

/// All bipartite tree skeletons on `n_u` weighted vertices and `n_v` dots
/// with every dot of degree at least three, up to isomorphism. Nodes
/// `0..n_u` are weighted vertices, `n_u..n_u+n_v` are dots; edges are
/// `(vertex, dot)` index pairs.
fn tree_skeletons(
    n_u: usize,
    n_v: usize,
    budget: &mut Budget,
) -> Result<Vec<Vec<(usize, usize)>>, EnumError> {
    let n = n_u + n_v;
    let seq_len = n - 2;
    let mut seen: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    let mut seq = vec![0usize; seq_len];
    loop {
        budget.spend(1)?;
        let edges = prufer_decode(&seq, n);
        let bipartite = edges
            .iter()
            .all(|&(a, c)| (a < n_u) != (c < n_u));
        if bipartite {
            let mut v_degree = vec![0usize; n_v];
            for &(a, c) in &edges {
                let dot = if a >= n_u { a } else { c };
                v_degree[dot - n_u] += 1;
            }
            if v_degree.iter().all(|&d| d >= 3) {
                let normalized: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, c)| if a < n_u { (a, c - n_u) } else { (c, a - n_u) })
                    .collect();
                let mut g = PlumbingGraph::new();
                for i in 0..n_u {
                    g.add_u_vertex(format!("u{i}"), BigInt::from(0), 0, 0)
                        .expect("fresh id");
                }
                for j in 0..n_v {
                    g.add_v_vertex(format!("v{j}")).expect("fresh id");
                }
                for &(ui, vj) in &normalized {
                    g.add_edge(&format!("u{ui}"), &format!("v{vj}"))
                        .expect("valid edge");
                }
                let encoding = g
                    .canonical_reduced_class()
                    .expect("skeleton is a tree")
                    .canonical_encoding;
                seen.entry(encoding).or_insert(normalized);
            }
        }
        // Advance the odometer over all sequences.
        let mut pos = 0;
        loop {
            if pos == seq_len {
                return Ok(seen.into_values().collect());
            }
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

/// Tree components: assigns weights and bundle labels over each skeleton
/// and keeps the reduced ones.
fn tree_classes(
    b: &EnumerationBounds,
    budget: &mut Budget,
    classes: &mut BTreeMap<String, ComponentClass>,
) -> Result<(), EnumError> {
    if b.rank_max < 2 {
        return Ok(());
    }
    for n_v in 1..b.rank_max {
        let min_u = 2 * n_v + 1;
        let max_u = b.rank_max + n_v;
        for n_u in min_u..=max_u {
            let m_budget = u32::try_from(b.rank_max - (n_u - n_v))
                .unwrap_or(0)
                .min(b.label_sum_max);
            for skeleton in tree_skeletons(n_u, n_v, budget)? {
                assign_labels(b, budget, classes, n_u, n_v, &skeleton, m_budget)?;
            }
        }
    }
    Ok(())
}

fn assign_labels(
    b: &EnumerationBounds,
    budget: &mut Budget,
    classes: &mut BTreeMap<String, ComponentClass>,
    n_u: usize,
    n_v: usize,
    skeleton: &[(usize, usize)],
    m_budget: u32,
) -> Result<(), EnumError> {
    // Per-vertex choices: weight and a label pair; the label total over all
    // vertices stays within the budget.
    let mut assignment: Vec<(i64, u32, u32)> = vec![(0, 0, 0); n_u];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        b: &EnumerationBounds,
        budget: &mut Budget,
        classes: &mut BTreeMap<String, ComponentClass>,
        n_u: usize,
        n_v: usize,
        skeleton: &[(usize, usize)],
        assignment: &mut Vec<(i64, u32, u32)>,
        pos: usize,
        labels_left: u32,
    ) -> Result<(), EnumError> {
        if pos == n_u {
            budget.spend(1)?;
            let mut g = PlumbingGraph::new();
            for (i, &(alpha, kp, km)) in assignment.iter().enumerate() {
                g.add_u_vertex(format!("u{i}"), BigInt::from(alpha), kp, km)
                    .expect("fresh id");
            }
            for j in 0..n_v {
                g.add_v_vertex(format!("v{j}")).expect("fresh id");
            }
            for &(ui, vj) in skeleton {
                g.add_edge(&format!("u{ui}"), &format!("v{vj}"))
                    .expect("valid edge");
            }
            if is_reduced(&g) {
                push_class(classes, g);
            }
            return Ok(());
        }
        for alpha in -b.alpha_max..=b.alpha_max {
            for m in 0..=labels_left {
                for kp in 0..=m {
                    assignment[pos] = (alpha, kp, m - kp);
                    rec(
                        b,
                        budget,
                        classes,
                        n_u,
                        n_v,
                        skeleton,
                        assignment,
                        pos + 1,
                        labels_left - m,
                    )?;
                }
            }
        }
        Ok(())
    }
    rec(
        b,
        budget,
        classes,
        n_u,
        n_v,
        skeleton,
        &mut assignment,
        0,
        m_budget,
    )
}

/// Disjoint unions of component classes, chosen as non-decreasing index
/// multisets so each union appears once.
fn assemble(
    b: &EnumerationBounds,
    comps: &[ComponentClass],
    budget: &mut Budget,
) -> Result<Vec<(PlumbingGraph, String)>, EnumError> {
    let mut out: Vec<(PlumbingGraph, String)> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        comps: &[ComponentClass],
        budget: &mut Budget,
        stack: &mut Vec<usize>,
        start: usize,
        rank_left: usize,
        labels_left: u32,
        out: &mut Vec<(PlumbingGraph, String)>,
    ) -> Result<(), EnumError> {
        budget.spend(1)?;
        let mut union = PlumbingGraph::new();
        let mut encodings: Vec<&str> = Vec::new();
        for (pos, &ci) in stack.iter().enumerate() {
            let comp = &comps[ci];
            for u in comp.graph.u_vertices() {
                union
                    .add_u_vertex(
                        format!("g{pos}{}", u.id),
                        u.alpha.clone(),
                        u.k_plus,
                        u.k_minus,
                    )
                    .expect("fresh id");
            }
            for v in comp.graph.v_vertices() {
                union
                    .add_v_vertex(format!("g{pos}{v}"))
                    .expect("fresh id");
            }
            for &(ui, vi) in comp.graph.edges() {
                union
                    .add_edge(
                        &format!("g{pos}{}", comp.graph.u_vertices()[ui].id),
                        &format!("g{pos}{}", comp.graph.v_vertices()[vi]),
                    )
                    .expect("valid edge");
            }
            encodings.push(&comp.encoding);
        }
        if is_reduced(&union) {
            encodings.sort_unstable();
            out.push((union, encodings.join("|")));
        }
        for ci in start..comps.len() {
            let comp = &comps[ci];
            if comp.rank > rank_left || comp.label_sum > labels_left {
                continue;
            }
            stack.push(ci);
            rec(
                comps,
                budget,
                stack,
                ci,
                rank_left - comp.rank,
                labels_left - comp.label_sum,
                out,
            )?;
            stack.pop();
        }
        Ok(())
    }
    rec(
        comps,
        budget,
        &mut stack,
        0,
        b.rank_max,
        b.label_sum_max,
        &mut out,
    )?;
    Ok(out)
}

/// Enumerates one canonical representative per reduced class within the
/// bounds, sorted by encoding.
pub fn enumerate_reduced(
    b: &EnumerationBounds,
    parallel: bool,
) -> Result<Vec<EnumeratedClass>, EnumError> {
    let mut budget = Budget {
        used: 0,
        cap: b.safety_cap,
    };
    let mut comp_map: BTreeMap<String, ComponentClass> = BTreeMap::new();
    isolated_classes(b, &mut budget, &mut comp_map)?;
    marked_class(b, &mut comp_map);
    tree_classes(b, &mut budget, &mut comp_map)?;
    let comps: Vec<ComponentClass> = comp_map.into_values().collect();
    let unions = assemble(b, &comps, &mut budget)?;
    let k = b.k;
    let build = |(graph, encoding): &(PlumbingGraph, String)| -> Result<EnumeratedClass, EnumError> {
        let system = invariant_system(graph, k)?;
        Ok(EnumeratedClass {
            graph: graph.clone(),
            encoding: encoding.clone(),
            fingerprint: fingerprint(&system),
        })
    };
    let mut classes: Vec<EnumeratedClass> = if parallel {
        unions
            .par_iter()
            .map(build)
            .collect::<Result<Vec<_>, _>>()?
    } else {
        unions.iter().map(build).collect::<Result<Vec<_>, _>>()?
    };
    classes.sort_by(|a, c| a.encoding.cmp(&c.encoding));
    classes.dedup_by(|a, c| a.encoding == c.encoding);
    Ok(classes)
}

/// Distinct reduced classes sharing a full fingerprint, annotated with the
/// equivalence verdict for each pair of members.
#[derive(Debug)]
pub struct CollisionGroup {
    pub fingerprint: Fingerprint,
    pub members: Vec<EnumeratedClass>,
    /// One verdict per unordered pair, indexed into `members`.
    pub verdicts: Vec<(usize, usize, EquivalenceVerdict)>,
}

impl CollisionGroup {
    pub fn to_json(&self) -> Value {
        json!({
            "fingerprint": self.fingerprint.to_json(),
            "members": self.members.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
            "verdicts": self
                .verdicts
                .iter()
                .map(|(a, b, v)| json!({ "left": a, "right": b, "verdict": v.to_json() }))
                .collect::<Vec<_>>(),
        })
    }
}

/// Groups enumerated classes by fingerprint and decides equivalence within
/// each group of two or more.
pub fn collision_report(
    b: &EnumerationBounds,
    parallel: bool,
) -> Result<Vec<CollisionGroup>, EnumError> {
    let classes = enumerate_reduced(b, parallel)?;
    let mut groups: BTreeMap<Fingerprint, Vec<EnumeratedClass>> = BTreeMap::new();
    for class in classes {
        groups.entry(class.fingerprint.clone()).or_default().push(class);
    }
    let mut out = Vec::new();
    for (fp, members) in groups {
        if members.len() < 2 {
            continue;
        }
        let systems: Vec<_> = members
            .iter()
            .map(|m| invariant_system(&m.graph, b.k))
            .collect::<Result<Vec<_>, _>>()?;
        let mut verdicts = Vec::new();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let verdict = decide_equivalence(&systems[i], &systems[j])
                    .expect("same degree parameter");
                verdicts.push((i, j, verdict));
            }
        }
        out.push(CollisionGroup {
            fingerprint: fp,
            members,
            verdicts,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::reduce;
    use crate::topology::family_homotopy_cp3;

    fn bounds(rank_max: usize, alpha_max: i64, label_sum_max: u32) -> EnumerationBounds {
        EnumerationBounds::new(rank_max, alpha_max, label_sum_max, 1)
    }

    #[test]
    fn rank_zero_is_only_the_empty_graph() {
        let classes = enumerate_reduced(&bounds(0, 5, 5), false).expect("in cap");
        assert_eq!(classes.len(), 1);
        assert!(classes[0].graph.u_vertices().is_empty());
        assert_eq!(classes[0].fingerprint.rank, 0);
    }

    #[test]
    fn rank_one_spin_classes() {
        let classes = enumerate_reduced(&bounds(1, 2, 0), false).expect("in cap");
        // Empty graph plus isolated weights 0, 1, 2 up to sign. The
        // canonical orientation of each mirror pair is the negative one.
        assert_eq!(classes.len(), 4);
        let mut weights: Vec<i64> = classes
            .iter()
            .filter(|c| c.fingerprint.rank == 1)
            .map(|c| {
                i64::try_from(&c.graph.u_vertices()[0].alpha).expect("small weight")
            })
            .collect();
        weights.sort_unstable();
        assert_eq!(weights, vec![-2, -1, 0]);
    }

    #[test]
    fn rank_one_with_labels_adds_the_marked_pair() {
        let classes = enumerate_reduced(&bounds(1, 2, 1), false).expect("in cap");
        assert_eq!(classes.len(), 5);
        let marked: Vec<_> = classes
            .iter()
            .filter(|c| !c.graph.v_vertices().is_empty())
            .collect();
        assert_eq!(marked.len(), 1);
        let u = &marked[0].graph.u_vertices()[0];
        assert!(u.alpha == BigInt::from(0) && u.k_plus + u.k_minus == 1);
    }

    #[test]
    fn rank_two_spin_census() {
        let classes = enumerate_reduced(&bounds(2, 3, 0), false).expect("in cap");
        // Empty, 4 singles, 10 pairs, 28 triples.
        assert_eq!(classes.len(), 43);
        let mut shape_counts = BTreeMap::new();
        for c in &classes {
            let n_u = c.graph.u_vertices().len();
            let n_v = c.graph.v_vertices().len();
            *shape_counts.entry((n_u, n_v)).or_insert(0usize) += 1;
        }
        assert_eq!(shape_counts.get(&(0, 0)), Some(&1));
        assert_eq!(shape_counts.get(&(1, 0)), Some(&4));
        assert_eq!(shape_counts.get(&(2, 0)), Some(&10));
        assert_eq!(shape_counts.get(&(3, 1)), Some(&28));
        assert_eq!(shape_counts.len(), 4);
        // Rank-2 spin shapes are exactly vertex pairs and triple stars.
        for c in &classes {
            if c.fingerprint.rank == 2 {
                let shape = (c.graph.u_vertices().len(), c.graph.v_vertices().len());
                assert!(shape == (2, 0) || shape == (3, 1));
            }
        }
    }

    #[test]
    fn rank_two_with_labels_census() {
        let classes = enumerate_reduced(&bounds(2, 2, 2), false).expect("in cap");
        // Base spin census at weight bound 2: empty, 3 singles, 6 pairs,
        // 10 triples. Labels add: marked pair alone, marked plus spin
        // vertex (3), and the isolated one-label vertex (5 weights).
        assert_eq!(classes.len(), 29);
        let marked_combos: Vec<_> = classes
            .iter()
            .filter(|c| {
                c.graph
                    .u_vertices()
                    .iter()
                    .any(|u| u.alpha == BigInt::from(0) && u.k_plus + u.k_minus == 1)
                    && !c.graph.v_vertices().is_empty()
            })
            .collect();
        assert_eq!(marked_combos.len(), 4);
        for c in &marked_combos {
            // The marked pair carries the only bundle label; companions are
            // spin vertices.
            let labeled = c
                .graph
                .u_vertices()
                .iter()
                .filter(|u| u.k_plus + u.k_minus > 0)
                .count();
            assert_eq!(labeled, 1);
            assert!(c.graph.u_vertices().len() <= 2);
        }
    }

    #[test]
    fn enumeration_is_deterministic_and_parallel_agrees() {
        let b = bounds(2, 3, 1);
        let serial = enumerate_reduced(&b, false).expect("in cap");
        let parallel = enumerate_reduced(&b, true).expect("in cap");
        let s: Vec<&str> = serial.iter().map(|c| c.encoding.as_str()).collect();
        let p: Vec<&str> = parallel.iter().map(|c| c.encoding.as_str()).collect();
        assert_eq!(s, p);
        let again = enumerate_reduced(&b, false).expect("in cap");
        let a: Vec<&str> = again.iter().map(|c| c.encoding.as_str()).collect();
        assert_eq!(s, a);
    }

    #[test]
    fn reduction_lands_in_the_enumerated_atlas() {
        // The first projective-family graph reduces to a rank-2 class that
        // the atlas contains.
        let fam = family_homotopy_cp3(0);
        let (reduced, _) = reduce(&fam.graph).expect("forest");
        let encoding = reduced
            .canonical_reduced_class()
            .expect("forest")
            .canonical_encoding;
        let classes = enumerate_reduced(&bounds(2, 1, 0), false).expect("in cap");
        assert!(classes.iter().any(|c| c.encoding == encoding));
    }

    #[test]
    fn no_collisions_at_small_weights() {
        let groups = collision_report(&bounds(2, 3, 0), false).expect("in cap");
        assert!(groups.is_empty());
        let groups = collision_report(&bounds(1, 10, 1), false).expect("in cap");
        assert!(groups.is_empty());
    }

    #[test]
    fn safety_cap_triggers() {
        let mut b = bounds(2, 30, 0);
        b.safety_cap = 1_000;
        assert!(matches!(
            enumerate_reduced(&b, false),
            Err(EnumError::CapExceeded { .. })
        ));
    }

    #[test]
    fn skeleton_generator_matches_hand_counts() {
        let mut budget = Budget {
            used: 0,
            cap: 10_000_000,
        };
        // One dot with three branches.
        let stars = tree_skeletons(3, 1, &mut budget).expect("in cap");
        assert_eq!(stars.len(), 1);
        // Two dots need at least five vertices: the (2, 2) split around a
        // bridge vertex.
        let doubles = tree_skeletons(5, 2, &mut budget).expect("in cap");
        assert_eq!(doubles.len(), 1);
        let bridge = &doubles[0];
        assert_eq!(bridge.len(), 6);
        // No skeleton exists with four vertices and two dots.
        let none = tree_skeletons(4, 2, &mut budget).expect("in cap");
        assert!(none.is_empty());
    }
}
