//! Exact arithmetic for algebraic plumbing graphs.
//!
//! An algebraic plumbing graph is a bipartite graph whose first vertex class
//! carries an integer weight `alpha` and two nonnegative labels `k+`, `k-`,
//! while the second class ("dots") is unlabeled. Each such graph determines a
//! system of invariants: a free lattice `H`, a symmetric trilinear form `mu`,
//! a mod-2 class `w`, and a linear form `p`. This crate computes those systems
//! exactly, normalizes graphs under a family of equivalence-preserving moves,
//! decides equivalence of systems at small rank, and enumerates reduced graphs
//! within bounds.
//!
//! All arithmetic is arbitrary precision; there is no floating point anywhere.

pub mod enumerate;
pub mod equiv;
pub mod forms;
pub mod graph;
pub mod invariants;
pub mod jsonutil;
pub mod linalg;
pub mod reduce;
pub mod topology;
