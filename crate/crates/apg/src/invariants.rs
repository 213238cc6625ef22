//! Invariant systems attached to a graph: a symmetric trilinear form, a
//! linear functional, and a mod-2 class on a finitely generated free lattice.
//!
//! For a graph with labeled vertices `u` carrying `(alpha, k_plus, k_minus)`,
//! the lattice has one generator `u^i` per nonzero superscript
//! `-k_minus <= i <= k_plus` and one generator per basis vector of the
//! sum-zero lattice: integer combinations of the `u^0` whose coefficients sum
//! to zero around every dot. The trilinear form, the functional, and the
//! mod-2 class are filled in from the vertex labels and a degree parameter
//! `k >= 1`.

use crate::graph::PlumbingGraph;
use crate::jsonutil::json_int;
use crate::linalg::{kernel_basis, rank};
use num_bigint::BigInt;
use num_integer::{binomial, Integer};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("degree parameter must be at least 1")]
    InvalidDegree,
}

/// Degree-dependent coefficients.
///
/// `lambda` is always divisible by 4, and the binomial is always strictly
/// smaller than `lambda`; both facts are relied on elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constants {
    pub k: u32,
    pub mu_factor: BigInt,
    pub lambda: BigInt,
    pub binom: BigInt,
}

impl Constants {
    pub fn new(k: u32) -> Result<Self, InvariantError> {
        if k == 0 {
            return Err(InvariantError::InvalidDegree);
        }
        let mut factorial = BigInt::one();
        for i in 2..=(2 * k - 1) {
            factorial *= BigInt::from(i);
        }
        let mu_factor = if k % 2 == 1 {
            BigInt::from(2) * &factorial
        } else {
            factorial
        };
        let lambda = match k {
            1 | 4 => BigInt::from(2) * &mu_factor,
            2 => BigInt::from(8) * &mu_factor,
            _ => mu_factor.clone(),
        };
        let binom = binomial(BigInt::from(2 * k + 1), BigInt::from(k));
        Ok(Constants {
            k,
            mu_factor,
            lambda,
            binom,
        })
    }

    /// `lambda / 4`, which is exact.
    pub fn quarter_lambda(&self) -> BigInt {
        &self.lambda / BigInt::from(4)
    }
}

/// One basis element of the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisElement {
    /// The generator `u^i` for a nonzero superscript `i`.
    Superscript { u_id: String, index: i64 },
    /// An integer combination of `u^0` generators with coefficients summing
    /// to zero around every dot. Only nonzero coefficients are listed.
    KernelCombo { coefficients: Vec<(String, BigInt)> },
}

/// The invariant system of a graph at a fixed degree.
///
/// `mu` stores the nonzero values of the symmetric trilinear form on sorted
/// basis index triples, `p` the values of the linear functional on the basis,
/// and `w` the mod-2 coordinates of the characteristic element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSystem {
    pub k: u32,
    pub basis: Vec<BasisElement>,
    pub mu: BTreeMap<(usize, usize, usize), BigInt>,
    pub w: Vec<u8>,
    pub p: Vec<BigInt>,
}

impl InvariantSystem {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// True when every labeled vertex of the source graph was free of
    /// superscript generators.
    pub fn is_spin(&self) -> bool {
        self.w.iter().all(|&b| b == 0)
    }

    /// Value of the trilinear form on a sorted basis triple.
    pub fn mu_value(&self, a: usize, b: usize, c: usize) -> BigInt {
        let mut idx = [a, b, c];
        idx.sort_unstable();
        self.mu
            .get(&(idx[0], idx[1], idx[2]))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// Trilinear form on coordinate vectors.
    pub fn eval_mu(&self, x: &[BigInt], y: &[BigInt], z: &[BigInt]) -> BigInt {
        let mut total = BigInt::zero();
        for (&(a, b, c), m) in &self.mu {
            let part = if a == b && b == c {
                &x[a] * &y[a] * &z[a]
            } else if a == b {
                &x[a] * &y[a] * &z[c] + &x[a] * &y[c] * &z[a] + &x[c] * &y[a] * &z[a]
            } else if b == c {
                &x[a] * &y[b] * &z[b] + &x[b] * &y[a] * &z[b] + &x[b] * &y[b] * &z[a]
            } else {
                &x[a] * &y[b] * &z[c]
                    + &x[a] * &y[c] * &z[b]
                    + &x[b] * &y[a] * &z[c]
                    + &x[b] * &y[c] * &z[a]
                    + &x[c] * &y[a] * &z[b]
                    + &x[c] * &y[b] * &z[a]
            };
            total += m * part;
        }
        total
    }

    /// Linear functional on a coordinate vector.
    pub fn eval_p(&self, x: &[BigInt]) -> BigInt {
        self.p.iter().zip(x).map(|(pi, xi)| pi * xi).sum()
    }

    /// Parity of the pairing of the mod-2 class with a coordinate vector.
    pub fn eval_w_parity(&self, x: &[BigInt]) -> u8 {
        let sum: BigInt = self
            .w
            .iter()
            .zip(x)
            .filter(|&(&wi, _)| wi == 1)
            .map(|(_, xi)| xi.clone())
            .sum();
        if sum.is_odd() {
            1
        } else {
            0
        }
    }

    /// Whether two systems have identical tables in their given bases.
    ///
    /// Basis element descriptions are ignored; only the numeric data is
    /// compared.
    pub fn same_tables(&self, other: &InvariantSystem) -> bool {
        self.k == other.k
            && self.rank() == other.rank()
            && self.mu == other.mu
            && self.w == other.w
            && self.p == other.p
    }

    pub fn to_json(&self) -> Value {
        let basis: Vec<Value> = self
            .basis
            .iter()
            .map(|b| match b {
                BasisElement::Superscript { u_id, index } => json!({
                    "kind": "superscript",
                    "vertex": u_id,
                    "index": index,
                }),
                BasisElement::KernelCombo { coefficients } => json!({
                    "kind": "kernel",
                    "coefficients": coefficients
                        .iter()
                        .map(|(id, c)| json!([id, json_int(c)]))
                        .collect::<Vec<_>>(),
                }),
            })
            .collect();
        let mu: Vec<Value> = self
            .mu
            .iter()
            .map(|(&(a, b, c), m)| json!([a, b, c, json_int(m)]))
            .collect();
        json!({
            "k": self.k,
            "rank": self.rank(),
            "basis": basis,
            "mu": mu,
            "w": self.w,
            "p": self.p.iter().map(json_int).collect::<Vec<_>>(),
        })
    }
}

/// Lattice rank without building the full system: superscript count plus the
/// corank of the biadjacency matrix.
pub fn graph_rank(g: &PlumbingGraph) -> usize {
    let sup: usize = g
        .u_vertices()
        .iter()
        .map(|u| (u.k_plus + u.k_minus) as usize)
        .sum();
    sup + g.u_vertices().len() - rank(&g.biadjacency_matrix())
}

/// Builds the invariant system of a graph at degree `k`.
pub fn invariant_system(g: &PlumbingGraph, k: u32) -> Result<InvariantSystem, InvariantError> {
    let consts = Constants::new(k)?;
    let quarter = consts.quarter_lambda();

    let mut basis = Vec::new();
    let mut superscripts: Vec<(usize, i64)> = Vec::new();
    for (ui, u) in g.u_vertices().iter().enumerate() {
        for i in -(u.k_minus as i64)..=(u.k_plus as i64) {
            if i != 0 {
                superscripts.push((ui, i));
                basis.push(BasisElement::Superscript {
                    u_id: u.id.clone(),
                    index: i,
                });
            }
        }
    }
    let n_sup = superscripts.len();

    let ker = kernel_basis(&g.biadjacency_matrix().transpose());
    let kernel_rows: Vec<Vec<BigInt>> = (0..ker.rows()).map(|r| ker.row(r).to_vec()).collect();
    for row in &kernel_rows {
        let coefficients: Vec<(String, BigInt)> = row
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(ui, c)| (g.u_vertices()[ui].id.clone(), c.clone()))
            .collect();
        basis.push(BasisElement::KernelCombo { coefficients });
    }
    let n = basis.len();

    let mut w = vec![0u8; n];
    for slot in w.iter_mut().take(n_sup) {
        *slot = 1;
    }

    let mut p = vec![BigInt::zero(); n];
    for (r, row) in kernel_rows.iter().enumerate() {
        let mut val = BigInt::zero();
        for (ui, coeff) in row.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let u = &g.u_vertices()[ui];
            let vertex_p = &consts.lambda * &u.alpha
                + &consts.binom * BigInt::from(u.k_plus as i64 - u.k_minus as i64);
            val += coeff * vertex_p;
        }
        p[n_sup + r] = val;
    }

    let mut mu = BTreeMap::new();
    for a in 0..kernel_rows.len() {
        for b in a..kernel_rows.len() {
            for c in b..kernel_rows.len() {
                let mut val = BigInt::zero();
                for (ui, u) in g.u_vertices().iter().enumerate() {
                    let prod = &kernel_rows[a][ui] * &kernel_rows[b][ui] * &kernel_rows[c][ui];
                    if !prod.is_zero() {
                        val += &quarter * &u.alpha * prod;
                    }
                }
                if !val.is_zero() {
                    mu.insert((n_sup + a, n_sup + b, n_sup + c), val);
                }
            }
        }
    }
    for (s, &(ui, i)) in superscripts.iter().enumerate() {
        for (r, row) in kernel_rows.iter().enumerate() {
            let coeff = &row[ui];
            if coeff.is_zero() {
                continue;
            }
            let val = BigInt::from(i.signum()) * coeff;
            mu.insert((s, s, n_sup + r), val);
        }
    }

    Ok(InvariantSystem {
        k,
        basis,
        mu,
        w,
        p,
    })
}
