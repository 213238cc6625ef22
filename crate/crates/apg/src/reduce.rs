//! Rewriting moves on forests and a normalization engine.
//!
//! Seven moves rewrite a graph without changing its equivalence class:
//! consuming a labeled vertex through a leaf dot, deleting an unlabeled leaf
//! vertex pair, merging two labeled vertices across a degree-2 dot, fusing
//! two dots across a trivially labeled degree-2 vertex, deleting an isolated
//! dot, collapsing a marked-dot component next to another non-spin component,
//! and negating a whole component. `reduce` applies them until the graph is
//! in normal form and returns a replayable trace.

use crate::graph::{Component, GraphError, PlumbingGraph};
use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("move not applicable: {0}")]
    NotApplicable(String),
    #[error("graph contains a cycle; moves are defined on forests only")]
    NotAForest,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A single rewriting step, identified by the vertices it touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Remove a labeled vertex together with one of its leaf dots, detach
    /// its remaining edges, and spawn one marked-dot component per unit of
    /// its bundle counts.
    RemoveLeafPair { u_id: String, v_id: String },
    /// Remove a trivially labeled degree-1 vertex together with the dot it
    /// hangs on, detaching the dot's other branches.
    RemoveTrivialLeaf { u_id: String, v_id: String },
    /// Merge the two labeled neighbors of a degree-2 dot into one vertex,
    /// negating the branches of the absorbed side.
    MergeThroughDot {
        v_id: String,
        keep_u_id: String,
        absorb_u_id: String,
    },
    /// Fuse the two dot neighbors of a trivially labeled degree-2 vertex,
    /// negating the branches of the absorbed dot.
    FuseDots {
        u_id: String,
        keep_v_id: String,
        absorb_v_id: String,
    },
    /// Delete a dot with no edges.
    DeleteIsolatedDot { v_id: String },
    /// Replace a marked-dot component by an isolated trivially labeled
    /// vertex; requires another non-spin component elsewhere in the graph.
    CollapseMarkedDot { v_id: String, u_id: String },
    /// Negate the component containing the named vertex.
    NegateComponent { id: String },
}

impl Move {
    pub fn kind(&self) -> &'static str {
        match self {
            Move::RemoveLeafPair { .. } => "remove_leaf_pair",
            Move::RemoveTrivialLeaf { .. } => "remove_trivial_leaf",
            Move::MergeThroughDot { .. } => "merge_through_dot",
            Move::FuseDots { .. } => "fuse_dots",
            Move::DeleteIsolatedDot { .. } => "delete_isolated_dot",
            Move::CollapseMarkedDot { .. } => "collapse_marked_dot",
            Move::NegateComponent { .. } => "negate_component",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Move::RemoveLeafPair { u_id, v_id } => {
                json!({ "kind": self.kind(), "u": u_id, "v": v_id })
            }
            Move::RemoveTrivialLeaf { u_id, v_id } => {
                json!({ "kind": self.kind(), "u": u_id, "v": v_id })
            }
            Move::MergeThroughDot {
                v_id,
                keep_u_id,
                absorb_u_id,
            } => json!({
                "kind": self.kind(),
                "v": v_id,
                "keep": keep_u_id,
                "absorb": absorb_u_id,
            }),
            Move::FuseDots {
                u_id,
                keep_v_id,
                absorb_v_id,
            } => json!({
                "kind": self.kind(),
                "u": u_id,
                "keep": keep_v_id,
                "absorb": absorb_v_id,
            }),
            Move::DeleteIsolatedDot { v_id } => json!({ "kind": self.kind(), "v": v_id }),
            Move::CollapseMarkedDot { v_id, u_id } => {
                json!({ "kind": self.kind(), "u": u_id, "v": v_id })
            }
            Move::NegateComponent { id } => json!({ "kind": self.kind(), "at": id }),
        }
    }
}

/// One applied move together with the hash of the graph after it.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub mv: Move,
    pub result_hash: String,
}

/// A replayable record of a normalization run.
#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub initial_hash: String,
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    pub fn to_json(&self) -> Value {
        json!({
            "initial_hash": self.initial_hash,
            "steps": self
                .steps
                .iter()
                .map(|s| json!({ "move": s.mv.to_json(), "hash": s.result_hash }))
                .collect::<Vec<_>>(),
        })
    }
}

/// Content hash of a graph's serialized form.
pub fn graph_hash(g: &PlumbingGraph) -> String {
    let digest = Sha256::digest(g.serialize().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn require_forest(g: &PlumbingGraph) -> Result<(), ReduceError> {
    if g.is_forest() {
        Ok(())
    } else {
        Err(ReduceError::NotAForest)
    }
}

/// True for a component that is exactly one dot attached to one vertex with
/// labels `(0, 1, 0)`.
fn is_marked_component(g: &PlumbingGraph, comp: &Component) -> bool {
    if comp.u_indices.len() != 1 || comp.v_indices.len() != 1 {
        return false;
    }
    let u = &g.u_vertices()[comp.u_indices[0]];
    u.alpha.is_zero() && u.k_plus == 1 && u.k_minus == 0 && g.u_degree(comp.u_indices[0]) == 1
}

fn component_is_spin(g: &PlumbingGraph, comp: &Component) -> bool {
    comp.u_indices
        .iter()
        .all(|&i| g.u_vertices()[i].k_plus == 0 && g.u_vertices()[i].k_minus == 0)
}

/// Nodes reachable from a start node without passing through a banned node.
/// Nodes are `(is_labeled, index)` pairs.
fn reachable_without(
    g: &PlumbingGraph,
    start: (bool, usize),
    banned: (bool, usize),
) -> BTreeSet<(bool, usize)> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(node) = stack.pop() {
        if node == banned || !seen.insert(node) {
            continue;
        }
        let nexts: Vec<(bool, usize)> = if node.0 {
            g.neighbors_of_u(node.1).into_iter().map(|v| (false, v)).collect()
        } else {
            g.neighbors_of_v(node.1).into_iter().map(|u| (true, u)).collect()
        };
        stack.extend(nexts);
    }
    seen
}

fn negate_u_set(g: &mut PlumbingGraph, u_indices: Vec<usize>) {
    let comp = Component {
        u_indices,
        v_indices: Vec::new(),
    };
    g.negate_component(&comp);
}

/// All move instances applicable to the current graph, in a fixed order.
pub fn applicable_moves(g: &PlumbingGraph) -> Result<Vec<Move>, ReduceError> {
    require_forest(g)?;
    let mut moves = Vec::new();
    for (vi, v_id) in g.v_vertices().iter().enumerate() {
        if g.v_degree(vi) == 0 {
            moves.push(Move::DeleteIsolatedDot { v_id: v_id.clone() });
        }
    }
    for &(ui, vi) in g.edges() {
        if g.v_degree(vi) == 1 {
            moves.push(Move::RemoveLeafPair {
                u_id: g.u_vertices()[ui].id.clone(),
                v_id: g.v_vertices()[vi].clone(),
            });
        }
    }
    for (ui, u) in g.u_vertices().iter().enumerate() {
        if u.alpha.is_zero() && u.k_plus == 0 && u.k_minus == 0 && g.u_degree(ui) == 1 {
            let vi = g.neighbors_of_u(ui)[0];
            moves.push(Move::RemoveTrivialLeaf {
                u_id: u.id.clone(),
                v_id: g.v_vertices()[vi].clone(),
            });
        }
    }
    for (ui, u) in g.u_vertices().iter().enumerate() {
        if u.alpha.is_zero() && u.k_plus == 0 && u.k_minus == 0 && g.u_degree(ui) == 2 {
            let dots = g.neighbors_of_u(ui);
            for (keep, absorb) in [(dots[0], dots[1]), (dots[1], dots[0])] {
                moves.push(Move::FuseDots {
                    u_id: u.id.clone(),
                    keep_v_id: g.v_vertices()[keep].clone(),
                    absorb_v_id: g.v_vertices()[absorb].clone(),
                });
            }
        }
    }
    for (vi, v_id) in g.v_vertices().iter().enumerate() {
        if g.v_degree(vi) == 2 {
            let us = g.neighbors_of_v(vi);
            for (keep, absorb) in [(us[0], us[1]), (us[1], us[0])] {
                moves.push(Move::MergeThroughDot {
                    v_id: v_id.clone(),
                    keep_u_id: g.u_vertices()[keep].id.clone(),
                    absorb_u_id: g.u_vertices()[absorb].id.clone(),
                });
            }
        }
    }
    let comps = g.components();
    let marked: Vec<&Component> = comps.iter().filter(|c| is_marked_component(g, c)).collect();
    for comp in &marked {
        let other_non_spin = comps
            .iter()
            .any(|c| *c != **comp && !component_is_spin(g, c));
        if other_non_spin {
            moves.push(Move::CollapseMarkedDot {
                v_id: g.v_vertices()[comp.v_indices[0]].clone(),
                u_id: g.u_vertices()[comp.u_indices[0]].id.clone(),
            });
        }
    }
    for comp in &comps {
        let id = comp
            .u_indices
            .first()
            .map(|&i| g.u_vertices()[i].id.clone())
            .unwrap_or_else(|| g.v_vertices()[comp.v_indices[0]].clone());
        moves.push(Move::NegateComponent { id });
    }
    Ok(moves)
}

/// Applies one move, validating its pattern first.
pub fn apply_move(g: &PlumbingGraph, mv: &Move) -> Result<PlumbingGraph, ReduceError> {
    require_forest(g)?;
    let fail = |msg: String| Err(ReduceError::NotApplicable(msg));
    match mv {
        Move::DeleteIsolatedDot { v_id } => {
            let vi = g
                .v_index(v_id)
                .ok_or_else(|| GraphError::UnknownId(v_id.clone()))?;
            if g.v_degree(vi) != 0 {
                return fail(format!("dot {v_id:?} is not isolated"));
            }
            let mut out = g.clone();
            out.remove_v_vertex(v_id)?;
            Ok(out)
        }
        Move::RemoveLeafPair { u_id, v_id } => {
            let ui = g
                .u_index(u_id)
                .ok_or_else(|| GraphError::UnknownId(u_id.clone()))?;
            let vi = g
                .v_index(v_id)
                .ok_or_else(|| GraphError::UnknownId(v_id.clone()))?;
            if !g.neighbors_of_u(ui).contains(&vi) {
                return fail(format!("{u_id:?} and {v_id:?} are not adjacent"));
            }
            if g.v_degree(vi) != 1 {
                return fail(format!("dot {v_id:?} is not a leaf"));
            }
            let spawn = g.u_vertices()[ui].k_plus + g.u_vertices()[ui].k_minus;
            let mut out = g.clone();
            out.remove_u_vertex(u_id)?;
            out.remove_v_vertex(v_id)?;
            for _ in 0..spawn {
                let nu = out.fresh_id("mu");
                let nv = out.fresh_id("md");
                out.add_u_vertex(nu.clone(), BigInt::zero(), 1, 0)?;
                out.add_v_vertex(nv.clone())?;
                out.add_edge(&nu, &nv)?;
            }
            Ok(out)
        }
        Move::RemoveTrivialLeaf { u_id, v_id } => {
            let ui = g
                .u_index(u_id)
                .ok_or_else(|| GraphError::UnknownId(u_id.clone()))?;
            let vi = g
                .v_index(v_id)
                .ok_or_else(|| GraphError::UnknownId(v_id.clone()))?;
            let u = &g.u_vertices()[ui];
            if !u.alpha.is_zero() || u.k_plus != 0 || u.k_minus != 0 {
                return fail(format!("vertex {u_id:?} is not trivially labeled"));
            }
            if g.u_degree(ui) != 1 || !g.neighbors_of_u(ui).contains(&vi) {
                return fail(format!("vertex {u_id:?} is not a leaf on dot {v_id:?}"));
            }
            let mut out = g.clone();
            out.remove_u_vertex(u_id)?;
            out.remove_v_vertex(v_id)?;
            Ok(out)
        }
        Move::MergeThroughDot {
            v_id,
            keep_u_id,
            absorb_u_id,
        } => {
            let vi = g
                .v_index(v_id)
                .ok_or_else(|| GraphError::UnknownId(v_id.clone()))?;
            let keep = g
                .u_index(keep_u_id)
                .ok_or_else(|| GraphError::UnknownId(keep_u_id.clone()))?;
            let absorb = g
                .u_index(absorb_u_id)
                .ok_or_else(|| GraphError::UnknownId(absorb_u_id.clone()))?;
            if g.v_degree(vi) != 2 {
                return fail(format!("dot {v_id:?} does not have degree 2"));
            }
            let us = g.neighbors_of_v(vi);
            if !(us.contains(&keep) && us.contains(&absorb) && keep != absorb) {
                return fail(format!(
                    "dot {v_id:?} does not join {keep_u_id:?} and {absorb_u_id:?}"
                ));
            }
            let side = reachable_without(g, (true, absorb), (false, vi));
            let negate_us: Vec<usize> = side
                .iter()
                .filter(|&&(is_u, i)| is_u && i != absorb)
                .map(|&(_, i)| i)
                .collect();
            let absorbed_dots: Vec<String> = g
                .neighbors_of_u(absorb)
                .into_iter()
                .filter(|&d| d != vi)
                .map(|d| g.v_vertices()[d].clone())
                .collect();
            let ku = &g.u_vertices()[keep];
            let au = &g.u_vertices()[absorb];
            let merged = (
                ku.alpha.clone() - au.alpha.clone(),
                ku.k_plus + au.k_minus,
                ku.k_minus + au.k_plus,
            );
            let mut out = g.clone();
            negate_u_set(&mut out, negate_us);
            out.remove_u_vertex(absorb_u_id)?;
            out.remove_v_vertex(v_id)?;
            out.set_u_labels(keep_u_id, merged.0, merged.1, merged.2)?;
            for d in &absorbed_dots {
                out.add_edge(keep_u_id, d)?;
            }
            Ok(out)
        }
        Move::FuseDots {
            u_id,
            keep_v_id,
            absorb_v_id,
        } => {
            let ui = g
                .u_index(u_id)
                .ok_or_else(|| GraphError::UnknownId(u_id.clone()))?;
            let keep = g
                .v_index(keep_v_id)
                .ok_or_else(|| GraphError::UnknownId(keep_v_id.clone()))?;
            let absorb = g
                .v_index(absorb_v_id)
                .ok_or_else(|| GraphError::UnknownId(absorb_v_id.clone()))?;
            let u = &g.u_vertices()[ui];
            if !u.alpha.is_zero() || u.k_plus != 0 || u.k_minus != 0 {
                return fail(format!("vertex {u_id:?} is not trivially labeled"));
            }
            if g.u_degree(ui) != 2 {
                return fail(format!("vertex {u_id:?} does not have degree 2"));
            }
            let dots = g.neighbors_of_u(ui);
            if !(dots.contains(&keep) && dots.contains(&absorb) && keep != absorb) {
                return fail(format!(
                    "vertex {u_id:?} does not join {keep_v_id:?} and {absorb_v_id:?}"
                ));
            }
            let side = reachable_without(g, (false, absorb), (true, ui));
            let negate_us: Vec<usize> = side
                .iter()
                .filter(|&&(is_u, _)| is_u)
                .map(|&(_, i)| i)
                .collect();
            let absorbed_us: Vec<String> = g
                .neighbors_of_v(absorb)
                .into_iter()
                .filter(|&w| w != ui)
                .map(|w| g.u_vertices()[w].id.clone())
                .collect();
            let mut out = g.clone();
            negate_u_set(&mut out, negate_us);
            out.remove_u_vertex(u_id)?;
            out.remove_v_vertex(absorb_v_id)?;
            for w in &absorbed_us {
                out.add_edge(w, keep_v_id)?;
            }
            Ok(out)
        }
        Move::CollapseMarkedDot { v_id, u_id } => {
            let comp = g.component_containing(u_id)?;
            if !is_marked_component(g, &comp)
                || g.v_vertices()[comp.v_indices[0]] != *v_id
                || g.u_vertices()[comp.u_indices[0]].id != *u_id
            {
                return fail(format!("{u_id:?} -- {v_id:?} is not a marked-dot component"));
            }
            let comps = g.components();
            let other_non_spin = comps
                .iter()
                .any(|c| *c != comp && !component_is_spin(g, c));
            if !other_non_spin {
                return fail("no other non-spin component".to_string());
            }
            let mut out = g.clone();
            out.remove_v_vertex(v_id)?;
            out.set_u_labels(u_id, BigInt::zero(), 0, 0)?;
            Ok(out)
        }
        Move::NegateComponent { id } => {
            let comp = g.component_containing(id)?;
            let mut out = g.clone();
            out.negate_component(&comp);
            Ok(out)
        }
    }
}

/// Normal-form predicate: a forest in which every dot has degree at least 3,
/// every trivially labeled vertex has degree 0 or at least 3, and a
/// marked-dot component appears only as the sole non-spin component.
pub fn is_reduced(g: &PlumbingGraph) -> bool {
    if !g.is_forest() {
        return false;
    }
    let comps = g.components();
    let mut marked = 0usize;
    let mut other_non_spin = 0usize;
    for comp in &comps {
        if is_marked_component(g, comp) {
            marked += 1;
            continue;
        }
        if !component_is_spin(g, comp) {
            other_non_spin += 1;
        }
        for &vi in &comp.v_indices {
            if g.v_degree(vi) < 3 {
                return false;
            }
        }
        for &ui in &comp.u_indices {
            let u = &g.u_vertices()[ui];
            let trivial = u.alpha.is_zero() && u.k_plus == 0 && u.k_minus == 0;
            let deg = g.u_degree(ui);
            if trivial && deg != 0 && deg < 3 {
                return false;
            }
        }
    }
    marked == 0 || (marked == 1 && other_non_spin == 0)
}

fn next_progress_move(g: &PlumbingGraph) -> Option<Move> {
    for (vi, v_id) in g.v_vertices().iter().enumerate() {
        if g.v_degree(vi) == 0 {
            return Some(Move::DeleteIsolatedDot { v_id: v_id.clone() });
        }
    }
    for &(ui, vi) in g.edges() {
        if g.v_degree(vi) == 1 {
            let comp = g
                .component_containing(&g.u_vertices()[ui].id)
                .expect("vertex exists");
            if !is_marked_component(g, &comp) {
                return Some(Move::RemoveLeafPair {
                    u_id: g.u_vertices()[ui].id.clone(),
                    v_id: g.v_vertices()[vi].clone(),
                });
            }
        }
    }
    for (ui, u) in g.u_vertices().iter().enumerate() {
        if u.alpha.is_zero() && u.k_plus == 0 && u.k_minus == 0 && g.u_degree(ui) == 1 {
            let vi = g.neighbors_of_u(ui)[0];
            return Some(Move::RemoveTrivialLeaf {
                u_id: u.id.clone(),
                v_id: g.v_vertices()[vi].clone(),
            });
        }
    }
    for (ui, u) in g.u_vertices().iter().enumerate() {
        if u.alpha.is_zero() && u.k_plus == 0 && u.k_minus == 0 && g.u_degree(ui) == 2 {
            let dots = g.neighbors_of_u(ui);
            return Some(Move::FuseDots {
                u_id: u.id.clone(),
                keep_v_id: g.v_vertices()[dots[0]].clone(),
                absorb_v_id: g.v_vertices()[dots[1]].clone(),
            });
        }
    }
    for (vi, v_id) in g.v_vertices().iter().enumerate() {
        if g.v_degree(vi) == 2 {
            let us = g.neighbors_of_v(vi);
            return Some(Move::MergeThroughDot {
                v_id: v_id.clone(),
                keep_u_id: g.u_vertices()[us[0]].id.clone(),
                absorb_u_id: g.u_vertices()[us[1]].id.clone(),
            });
        }
    }
    None
}

fn next_collapse_move(g: &PlumbingGraph) -> Option<Move> {
    let comps = g.components();
    for comp in &comps {
        if !is_marked_component(g, comp) {
            continue;
        }
        let other_non_spin = comps
            .iter()
            .any(|c| c != comp && !component_is_spin(g, c));
        if other_non_spin {
            return Some(Move::CollapseMarkedDot {
                v_id: g.v_vertices()[comp.v_indices[0]].clone(),
                u_id: g.u_vertices()[comp.u_indices[0]].id.clone(),
            });
        }
    }
    None
}

/// Rewrites a forest to normal form and records the steps taken.
pub fn reduce(g: &PlumbingGraph) -> Result<(PlumbingGraph, ReductionTrace), ReduceError> {
    require_forest(g)?;
    let mut cur = g.clone();
    let mut trace = ReductionTrace {
        initial_hash: graph_hash(&cur),
        steps: Vec::new(),
    };
    loop {
        let mv = next_progress_move(&cur).or_else(|| next_collapse_move(&cur));
        match mv {
            Some(mv) => {
                cur = apply_move(&cur, &mv)?;
                trace.steps.push(TraceStep {
                    result_hash: graph_hash(&cur),
                    mv,
                });
            }
            None => break,
        }
    }
    debug_assert!(is_reduced(&cur));
    Ok((cur, trace))
}
