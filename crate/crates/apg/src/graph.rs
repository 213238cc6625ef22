//! Labeled bipartite graphs with a text format, validation, and canonical
//! encodings.
//!
//! A graph has two kinds of vertices: labeled vertices (an integer weight
//! `alpha` and two nonnegative counts `k_plus`, `k_minus`) and unlabeled dot
//! vertices. Edges always join a labeled vertex to a dot. The text format is
//! line-based: `u ID [alpha=INT] [kplus=UINT] [kminus=UINT]` declares a
//! labeled vertex, `v ID` a dot, `e UID VID` an edge, and `k UINT` attaches an
//! advisory degree to the file. `#` starts a comment.

use crate::linalg::IntMatrix;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

/// Errors from graph construction, parsing, and structural queries.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate vertex id {0:?}")]
    DuplicateId(String),
    #[error("unknown vertex id {0:?}")]
    UnknownId(String),
    #[error("duplicate edge {0:?} -- {1:?}")]
    DuplicateEdge(String, String),
    #[error("component containing {0:?} is not a tree")]
    NotATree(String),
}

/// A labeled vertex: integer weight plus two bundle counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UVertex {
    pub id: String,
    pub alpha: BigInt,
    pub k_plus: u32,
    pub k_minus: u32,
}

/// A bipartite graph of labeled vertices and dots.
///
/// Vertex order is declaration order and is preserved by all operations;
/// edges are kept as a sorted set of index pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlumbingGraph {
    u_vertices: Vec<UVertex>,
    v_vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
    advisory_k: Option<u32>,
}

/// One connected component, as index lists into the parent graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub u_indices: Vec<usize>,
    pub v_indices: Vec<usize>,
}

/// Validation summary for one component.
#[derive(Debug, Clone)]
pub struct ComponentReport {
    pub u_ids: Vec<String>,
    pub v_ids: Vec<String>,
    pub edge_count: usize,
    pub simply_connected: bool,
    pub spin: bool,
}

/// Validation summary for a whole graph.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub components: Vec<ComponentReport>,
    pub is_forest: bool,
    pub spin: bool,
}

/// Canonical form of a graph whose components are all trees.
///
/// Each component is encoded as a rooted-tree string, minimized over the
/// choice of center root and over global sign flip of the component; the
/// graph encoding is the sorted multiset of component encodings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedClass {
    pub components: Vec<String>,
    pub canonical_encoding: String,
}

impl PlumbingGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u_vertices(&self) -> &[UVertex] {
        &self.u_vertices
    }

    pub fn v_vertices(&self) -> &[String] {
        &self.v_vertices
    }

    /// Edges as `(u index, v index)` pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn advisory_k(&self) -> Option<u32> {
        self.advisory_k
    }

    pub fn set_advisory_k(&mut self, k: Option<u32>) {
        self.advisory_k = k;
    }

    fn id_in_use(&self, id: &str) -> bool {
        self.u_vertices.iter().any(|u| u.id == id) || self.v_vertices.iter().any(|v| v == id)
    }

    /// Adds a labeled vertex and returns its index.
    pub fn add_u_vertex(
        &mut self,
        id: impl Into<String>,
        alpha: BigInt,
        k_plus: u32,
        k_minus: u32,
    ) -> Result<usize, GraphError> {
        let id = id.into();
        if self.id_in_use(&id) {
            return Err(GraphError::DuplicateId(id));
        }
        self.u_vertices.push(UVertex {
            id,
            alpha,
            k_plus,
            k_minus,
        });
        Ok(self.u_vertices.len() - 1)
    }

    /// Adds a dot vertex and returns its index.
    pub fn add_v_vertex(&mut self, id: impl Into<String>) -> Result<usize, GraphError> {
        let id = id.into();
        if self.id_in_use(&id) {
            return Err(GraphError::DuplicateId(id));
        }
        self.v_vertices.push(id);
        Ok(self.v_vertices.len() - 1)
    }

    pub fn u_index(&self, id: &str) -> Option<usize> {
        self.u_vertices.iter().position(|u| u.id == id)
    }

    pub fn v_index(&self, id: &str) -> Option<usize> {
        self.v_vertices.iter().position(|v| v == id)
    }

    pub fn add_edge(&mut self, u_id: &str, v_id: &str) -> Result<(), GraphError> {
        let ui = self
            .u_index(u_id)
            .ok_or_else(|| GraphError::UnknownId(u_id.to_string()))?;
        let vi = self
            .v_index(v_id)
            .ok_or_else(|| GraphError::UnknownId(v_id.to_string()))?;
        match self.edges.binary_search(&(ui, vi)) {
            Ok(_) => Err(GraphError::DuplicateEdge(
                u_id.to_string(),
                v_id.to_string(),
            )),
            Err(pos) => {
                self.edges.insert(pos, (ui, vi));
                Ok(())
            }
        }
    }

    pub fn remove_edge(&mut self, u_id: &str, v_id: &str) -> Result<(), GraphError> {
        let ui = self
            .u_index(u_id)
            .ok_or_else(|| GraphError::UnknownId(u_id.to_string()))?;
        let vi = self
            .v_index(v_id)
            .ok_or_else(|| GraphError::UnknownId(v_id.to_string()))?;
        match self.edges.binary_search(&(ui, vi)) {
            Ok(pos) => {
                self.edges.remove(pos);
                Ok(())
            }
            Err(_) => Err(GraphError::UnknownId(format!("{u_id} -- {v_id}"))),
        }
    }

    /// Removes a labeled vertex together with its incident edges.
    pub fn remove_u_vertex(&mut self, id: &str) -> Result<(), GraphError> {
        let ui = self
            .u_index(id)
            .ok_or_else(|| GraphError::UnknownId(id.to_string()))?;
        self.u_vertices.remove(ui);
        self.edges.retain(|&(u, _)| u != ui);
        for e in &mut self.edges {
            if e.0 > ui {
                e.0 -= 1;
            }
        }
        self.edges.sort_unstable();
        Ok(())
    }

    /// Removes a dot vertex together with its incident edges.
    pub fn remove_v_vertex(&mut self, id: &str) -> Result<(), GraphError> {
        let vi = self
            .v_index(id)
            .ok_or_else(|| GraphError::UnknownId(id.to_string()))?;
        self.v_vertices.remove(vi);
        self.edges.retain(|&(_, v)| v != vi);
        for e in &mut self.edges {
            if e.1 > vi {
                e.1 -= 1;
            }
        }
        self.edges.sort_unstable();
        Ok(())
    }

    pub fn u_degree(&self, ui: usize) -> usize {
        self.edges.iter().filter(|&&(u, _)| u == ui).count()
    }

    pub fn v_degree(&self, vi: usize) -> usize {
        self.edges.iter().filter(|&&(_, v)| v == vi).count()
    }

    /// Dot neighbors of a labeled vertex, as sorted indices.
    pub fn neighbors_of_u(&self, ui: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(u, _)| u == ui)
            .map(|&(_, v)| v)
            .collect()
    }

    /// Labeled neighbors of a dot, as sorted indices.
    pub fn neighbors_of_v(&self, vi: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, v)| v == vi)
            .map(|&(u, _)| u)
            .collect()
    }

    /// Returns an id starting with `prefix` that is unused by any vertex.
    pub fn fresh_id(&self, prefix: &str) -> String {
        (0..)
            .map(|n| format!("{prefix}{n}"))
            .find(|id| !self.id_in_use(id))
            .expect("unbounded id search")
    }

    /// Connected components, ordered by smallest contained vertex index
    /// (labeled vertices first).
    pub fn components(&self) -> Vec<Component> {
        let n_u = self.u_vertices.len();
        let n = n_u + self.v_vertices.len();
        let mut dsu = Dsu::new(n);
        for &(u, v) in &self.edges {
            dsu.union(u, n_u + v);
        }
        let mut groups: BTreeMap<usize, Component> = BTreeMap::new();
        for i in 0..n {
            let root = dsu.find(i);
            let comp = groups.entry(root).or_insert_with(|| Component {
                u_indices: Vec::new(),
                v_indices: Vec::new(),
            });
            if i < n_u {
                comp.u_indices.push(i);
            } else {
                comp.v_indices.push(i - n_u);
            }
        }
        let mut out: Vec<(usize, Component)> = groups
            .into_values()
            .map(|c| {
                let key = c
                    .u_indices
                    .first()
                    .copied()
                    .unwrap_or_else(|| n_u + c.v_indices[0]);
                (key, c)
            })
            .collect();
        out.sort_by_key(|&(key, _)| key);
        out.into_iter().map(|(_, c)| c).collect()
    }

    /// Component containing the vertex with the given id.
    pub fn component_containing(&self, id: &str) -> Result<Component, GraphError> {
        let comps = self.components();
        if let Some(ui) = self.u_index(id) {
            return Ok(comps
                .into_iter()
                .find(|c| c.u_indices.contains(&ui))
                .expect("vertex in some component"));
        }
        if let Some(vi) = self.v_index(id) {
            return Ok(comps
                .into_iter()
                .find(|c| c.v_indices.contains(&vi))
                .expect("vertex in some component"));
        }
        Err(GraphError::UnknownId(id.to_string()))
    }

    /// Copies one component into a standalone graph, preserving ids and order.
    pub fn component_subgraph(&self, comp: &Component) -> PlumbingGraph {
        let mut g = PlumbingGraph::new();
        g.advisory_k = self.advisory_k;
        for &ui in &comp.u_indices {
            let u = &self.u_vertices[ui];
            g.add_u_vertex(u.id.clone(), u.alpha.clone(), u.k_plus, u.k_minus)
                .expect("ids unique in parent");
        }
        for &vi in &comp.v_indices {
            g.add_v_vertex(self.v_vertices[vi].clone())
                .expect("ids unique in parent");
        }
        for &(u, v) in &self.edges {
            if comp.u_indices.contains(&u) {
                g.add_edge(&self.u_vertices[u].id, &self.v_vertices[v])
                    .expect("edge endpoints copied");
            }
        }
        g
    }

    /// Overwrites the labels of one labeled vertex.
    pub fn set_u_labels(
        &mut self,
        id: &str,
        alpha: BigInt,
        k_plus: u32,
        k_minus: u32,
    ) -> Result<(), GraphError> {
        let ui = self
            .u_index(id)
            .ok_or_else(|| GraphError::UnknownId(id.to_string()))?;
        let u = &mut self.u_vertices[ui];
        u.alpha = alpha;
        u.k_plus = k_plus;
        u.k_minus = k_minus;
        Ok(())
    }

    /// Flips the sign of every weight in the component and swaps the two
    /// bundle counts of each of its labeled vertices.
    pub fn negate_component(&mut self, comp: &Component) {
        for &ui in &comp.u_indices {
            let u = &mut self.u_vertices[ui];
            u.alpha = -u.alpha.clone();
            std::mem::swap(&mut u.k_plus, &mut u.k_minus);
        }
    }

    /// True when a component's edge set forms a tree on its vertices.
    pub fn component_is_tree(&self, comp: &Component) -> bool {
        let nodes = comp.u_indices.len() + comp.v_indices.len();
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, _)| comp.u_indices.contains(&u))
            .count();
        edges + 1 == nodes
    }

    pub fn is_forest(&self) -> bool {
        self.components().iter().all(|c| self.component_is_tree(c))
    }

    /// True when no labeled vertex carries bundle counts.
    pub fn is_spin(&self) -> bool {
        self.u_vertices
            .iter()
            .all(|u| u.k_plus == 0 && u.k_minus == 0)
    }

    pub fn validate(&self) -> ValidationReport {
        let components = self
            .components()
            .iter()
            .map(|c| {
                let edge_count = self
                    .edges
                    .iter()
                    .filter(|&&(u, _)| c.u_indices.contains(&u))
                    .count();
                ComponentReport {
                    u_ids: c
                        .u_indices
                        .iter()
                        .map(|&i| self.u_vertices[i].id.clone())
                        .collect(),
                    v_ids: c
                        .v_indices
                        .iter()
                        .map(|&i| self.v_vertices[i].clone())
                        .collect(),
                    edge_count,
                    simply_connected: self.component_is_tree(c),
                    spin: c
                        .u_indices
                        .iter()
                        .all(|&i| self.u_vertices[i].k_plus == 0 && self.u_vertices[i].k_minus == 0),
                }
            })
            .collect::<Vec<_>>();
        ValidationReport {
            is_forest: components.iter().all(|c| c.simply_connected),
            spin: components.iter().all(|c| c.spin),
            components,
        }
    }

    /// Biadjacency matrix: rows are labeled vertices, columns are dots.
    pub fn biadjacency_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.u_vertices.len(), self.v_vertices.len());
        for &(u, v) in &self.edges {
            *m.get_mut(u, v) = BigInt::from(1);
        }
        m
    }

    /// Parses the line-based text format.
    pub fn parse(input: &str) -> Result<Self, GraphError> {
        let mut g = PlumbingGraph::new();
        for (lineno, raw) in input.lines().enumerate() {
            let line = lineno + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let mut parts = text.split_whitespace();
            let directive = parts.next().expect("nonempty line");
            let err = |message: String| GraphError::Parse { line, message };
            match directive {
                "k" => {
                    if g.advisory_k.is_some() {
                        return Err(err("duplicate k line".to_string()));
                    }
                    let val = parts
                        .next()
                        .ok_or_else(|| err("k requires a value".to_string()))?;
                    let k: u32 = val
                        .parse()
                        .map_err(|_| err(format!("invalid k value {val:?}")))?;
                    if parts.next().is_some() {
                        return Err(err("trailing tokens after k value".to_string()));
                    }
                    g.advisory_k = Some(k);
                }
                "u" => {
                    let id = parts
                        .next()
                        .ok_or_else(|| err("u requires an id".to_string()))?;
                    let mut alpha = BigInt::zero();
                    let mut k_plus = 0u32;
                    let mut k_minus = 0u32;
                    for attr in parts {
                        let (key, val) = attr
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected key=value, found {attr:?}")))?;
                        match key {
                            "alpha" => {
                                alpha = val
                                    .parse()
                                    .map_err(|_| err(format!("invalid integer {val:?}")))?;
                            }
                            "kplus" => {
                                k_plus = val
                                    .parse()
                                    .map_err(|_| err(format!("invalid count {val:?}")))?;
                            }
                            "kminus" => {
                                k_minus = val
                                    .parse()
                                    .map_err(|_| err(format!("invalid count {val:?}")))?;
                            }
                            other => return Err(err(format!("unknown attribute {other:?}"))),
                        }
                    }
                    g.add_u_vertex(id, alpha, k_plus, k_minus)
                        .map_err(|e| err(e.to_string()))?;
                }
                "v" => {
                    let id = parts
                        .next()
                        .ok_or_else(|| err("v requires an id".to_string()))?;
                    if parts.next().is_some() {
                        return Err(err("trailing tokens after v id".to_string()));
                    }
                    g.add_v_vertex(id).map_err(|e| err(e.to_string()))?;
                }
                "e" => {
                    let u_id = parts
                        .next()
                        .ok_or_else(|| err("e requires two ids".to_string()))?;
                    let v_id = parts
                        .next()
                        .ok_or_else(|| err("e requires two ids".to_string()))?;
                    if parts.next().is_some() {
                        return Err(err("trailing tokens after edge".to_string()));
                    }
                    g.add_edge(u_id, v_id).map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        Ok(g)
    }

    /// Writes the text format; `parse` of the output reproduces the graph.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(k) = self.advisory_k {
            writeln!(out, "k {k}").expect("string write");
        }
        for u in &self.u_vertices {
            write!(out, "u {}", u.id).expect("string write");
            if !u.alpha.is_zero() {
                write!(out, " alpha={}", u.alpha).expect("string write");
            }
            if u.k_plus != 0 {
                write!(out, " kplus={}", u.k_plus).expect("string write");
            }
            if u.k_minus != 0 {
                write!(out, " kminus={}", u.k_minus).expect("string write");
            }
            writeln!(out).expect("string write");
        }
        for v in &self.v_vertices {
            writeln!(out, "v {v}").expect("string write");
        }
        for &(u, v) in &self.edges {
            writeln!(out, "e {} {}", self.u_vertices[u].id, self.v_vertices[v])
                .expect("string write");
        }
        out
    }

    /// Graphviz rendering with weights shown on labeled vertices and dots as
    /// points.
    pub fn export_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "graph {{").expect("string write");
        for u in &self.u_vertices {
            writeln!(
                out,
                "  {:?} [shape=circle label=\"{} [{},{}]\"];",
                u.id, u.alpha, u.k_plus, u.k_minus
            )
            .expect("string write");
        }
        for v in &self.v_vertices {
            writeln!(out, "  {v:?} [shape=point];").expect("string write");
        }
        for &(u, v) in &self.edges {
            writeln!(out, "  {:?} -- {:?};", self.u_vertices[u].id, self.v_vertices[v])
                .expect("string write");
        }
        writeln!(out, "}}").expect("string write");
        out
    }

    /// Canonical encoding of a forest, invariant under vertex renaming,
    /// declaration reordering, and per-component sign flips.
    pub fn canonical_reduced_class(&self) -> Result<ReducedClass, GraphError> {
        let comps = self.components();
        for c in &comps {
            if !self.component_is_tree(c) {
                let id = c
                    .u_indices
                    .first()
                    .map(|&i| self.u_vertices[i].id.clone())
                    .unwrap_or_else(|| self.v_vertices[c.v_indices[0]].clone());
                return Err(GraphError::NotATree(id));
            }
        }
        let mut components: Vec<String> = comps
            .iter()
            .map(|c| {
                let plain = self.encode_tree_component(c, false);
                let negated = self.encode_tree_component(c, true);
                plain.min(negated)
            })
            .collect();
        components.sort();
        let canonical_encoding = components.join("|");
        Ok(ReducedClass {
            components,
            canonical_encoding,
        })
    }

    /// Flips the sign of every component whose negated encoding is
    /// smaller, so the stored labels match the canonical encoding.
    ///
    /// The marked pair keeps its orientation: its mirror swaps the
    /// sign labels and the mirrored form is not a valid normal form.
    pub fn canonicalize_signs(&mut self) -> Result<(), GraphError> {
        let comps = self.components();
        for c in &comps {
            if !self.component_is_tree(c) {
                let id = c
                    .u_indices
                    .first()
                    .map(|&i| self.u_vertices[i].id.clone())
                    .unwrap_or_else(|| self.v_vertices[c.v_indices[0]].clone());
                return Err(GraphError::NotATree(id));
            }
        }
        for c in &comps {
            if self.is_marked_pair(c) {
                continue;
            }
            let plain = self.encode_tree_component(c, false);
            let negated = self.encode_tree_component(c, true);
            if negated < plain {
                self.negate_component(c);
            }
        }
        Ok(())
    }

    /// True when the component is a single weight-zero vertex with
    /// sign labels (1, 0) joined to one dot.
    fn is_marked_pair(&self, comp: &Component) -> bool {
        if comp.u_indices.len() != 1 || comp.v_indices.len() != 1 {
            return false;
        }
        let u = &self.u_vertices[comp.u_indices[0]];
        u.alpha.is_zero()
            && u.k_plus == 1
            && u.k_minus == 0
            && self.u_degree(comp.u_indices[0]) == 1
    }

    /// Minimal rooted encoding of a tree component over its center roots.
    fn encode_tree_component(&self, comp: &Component, negate: bool) -> String {
        let n_u = self.u_vertices.len();
        let nodes: Vec<usize> = comp
            .u_indices
            .iter()
            .copied()
            .chain(comp.v_indices.iter().map(|&v| n_u + v))
            .collect();
        let mut adj: BTreeMap<usize, BTreeSet<usize>> =
            nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
        for &(u, v) in &self.edges {
            if comp.u_indices.contains(&u) {
                adj.get_mut(&u).expect("node present").insert(n_u + v);
                adj.get_mut(&(n_u + v)).expect("node present").insert(u);
            }
        }
        let label = |node: usize| -> String {
            if node < n_u {
                let u = &self.u_vertices[node];
                if negate {
                    format!("U:{},{},{}", -u.alpha.clone(), u.k_minus, u.k_plus)
                } else {
                    format!("U:{},{},{}", u.alpha, u.k_plus, u.k_minus)
                }
            } else {
                "V".to_string()
            }
        };
        tree_centers(&nodes, &adj)
            .into_iter()
            .map(|root| encode_rooted(root, usize::MAX, &adj, &label))
            .min()
            .expect("component nonempty")
    }
}

/// Centers of a tree: the one or two nodes left after repeatedly stripping
/// leaves.
fn tree_centers(nodes: &[usize], adj: &BTreeMap<usize, BTreeSet<usize>>) -> Vec<usize> {
    let mut degree: BTreeMap<usize, usize> =
        nodes.iter().map(|&n| (n, adj[&n].len())).collect();
    let mut alive: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut frontier: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|n| degree[n] <= 1)
        .collect();
    while alive.len() > 2 {
        let mut next = Vec::new();
        for &leaf in &frontier {
            alive.remove(&leaf);
        }
        for &leaf in &frontier {
            for &nb in &adj[&leaf] {
                if alive.contains(&nb) {
                    let d = degree.get_mut(&nb).expect("node present");
                    *d -= 1;
                    if *d <= 1 {
                        next.push(nb);
                    }
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        frontier = next;
    }
    alive.into_iter().collect()
}

fn encode_rooted(
    node: usize,
    parent: usize,
    adj: &BTreeMap<usize, BTreeSet<usize>>,
    label: &impl Fn(usize) -> String,
) -> String {
    let mut children: Vec<String> = adj[&node]
        .iter()
        .filter(|&&nb| nb != parent)
        .map(|&nb| encode_rooted(nb, node, adj, label))
        .collect();
    children.sort();
    format!("{}({})", label(node), children.join(","))
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
