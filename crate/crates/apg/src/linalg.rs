//! Exact integer linear algebra: Hermite normal form with transform, saturated
//! kernel bases, rank over the rationals, and Smith invariant factors.
//!
//! Sizes here are desk scale (at most a few dozen rows), so the algorithms
//! favor determinism and clarity over asymptotics. Entries are `BigInt`
//! because the constants downstream grow factorially.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry count {got} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix over the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch { rows, cols, got: entries.len() });
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Ok(IntMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    /// Convenience constructor for tests and small fixed matrices.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(),
        )
        .expect("literal rows must be rectangular")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.get(k, j);
                    *out.get_mut(i, j) += add;
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    fn row_is_zero(&self, i: usize) -> bool {
        self.row(i).iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j).clone();
            *self.get_mut(i, j) = v;
        }
    }

    /// row[dst] += q * row[src]
    fn add_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let add = q * self.get(src, j);
            *self.get_mut(dst, j) += add;
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    /// Panics if the matrix is not square.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for t in 0..n - 1 {
            if a.get(t, t).is_zero() {
                match (t + 1..n).find(|&i| !a.get(i, t).is_zero()) {
                    Some(i) => {
                        a.swap_rows(t, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in t + 1..n {
                for j in t + 1..n {
                    let num = a.get(i, j) * a.get(t, t) - a.get(i, t) * a.get(t, j);
                    *a.get_mut(i, j) = num / &prev;
                }
                *a.get_mut(i, t) = BigInt::zero();
            }
            prev = a.get(t, t).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }
}

/// Row-style Hermite normal form: returns `(h, u)` with `u * m = h`,
/// `det(u) = ±1`, pivots positive, entries above each pivot reduced into
/// `[0, pivot)`, and zero rows last. The output is unique for a given input,
/// which makes every derived basis reproducible.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut r = 0usize;
    for c in 0..h.cols {
        if r == h.rows {
            break;
        }
        // Gather the column below r to a single nonzero entry by repeated
        // division, always pulling the smallest magnitude up as the pivot.
        loop {
            let mut pivot: Option<usize> = None;
            for i in r..h.rows {
                if h.get(i, c).is_zero() {
                    continue;
                }
                pivot = match pivot {
                    None => Some(i),
                    Some(p) if h.get(i, c).abs() < h.get(p, c).abs() => Some(i),
                    keep => keep,
                };
            }
            let Some(p) = pivot else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut others = false;
            for i in r + 1..h.rows {
                if h.get(i, c).is_zero() {
                    continue;
                }
                others = true;
                let q = -(h.get(i, c) / h.get(r, c));
                h.add_multiple(i, r, &q);
                u.add_multiple(i, r, &q);
            }
            if !others {
                break;
            }
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            // Euclidean floor division leaves the residue in [0, pivot).
            let q = -h.get(i, c).div_floor(h.get(r, c));
            h.add_multiple(i, r, &q);
            u.add_multiple(i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// Rank over the rationals.
pub fn rank(m: &IntMatrix) -> usize {
    let (h, _) = hermite_normal_form(m);
    (0..h.rows).filter(|&i| !h.row_is_zero(i)).count()
}

/// Basis of the integer kernel `{x : m·x = 0}`, returned as rows.
///
/// The basis is saturated: every integer kernel vector is an integer
/// combination of the rows. Rows are normalized to the Hermite normal form of
/// the kernel lattice, so the result is deterministic.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let (h, u) = hermite_normal_form(&m.transpose());
    let mut rows = Vec::new();
    for i in 0..h.rows {
        if h.row_is_zero(i) {
            rows.push(u.row(i).to_vec());
        }
    }
    if rows.is_empty() {
        return IntMatrix::zeros(0, m.cols);
    }
    let k = IntMatrix::from_rows(rows).expect("kernel rows are rectangular");
    let (kh, _) = hermite_normal_form(&k);
    let nonzero: Vec<Vec<BigInt>> =
        (0..kh.rows).filter(|&i| !kh.row_is_zero(i)).map(|i| kh.row(i).to_vec()).collect();
    if nonzero.is_empty() {
        IntMatrix::zeros(0, m.cols)
    } else {
        IntMatrix::from_rows(nonzero).expect("rectangular")
    }
}

/// Nonzero Smith invariant factors `d1 | d2 | ...` of `m`, all positive.
pub fn smith_invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    let mut a = m.clone();
    let n = a.rows.min(a.cols);
    let mut t = 0usize;
    while t < n {
        // Locate a pivot of minimal magnitude in the trailing submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..a.rows {
            for j in t..a.cols {
                if a.get(i, j).is_zero() {
                    continue;
                }
                pivot = match pivot {
                    None => Some((i, j)),
                    Some((pi, pj)) if a.get(i, j).abs() < a.get(pi, pj).abs() => Some((i, j)),
                    keep => keep,
                };
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap_rows(t, pi);
        swap_cols(&mut a, t, pj);
        // Clear row and column t; repeat because remainders can reappear.
        loop {
            let mut dirty = false;
            for i in t + 1..a.rows {
                if !a.get(i, t).is_zero() {
                    let q = -(a.get(i, t) / a.get(t, t));
                    a.add_multiple(i, t, &q);
                    if !a.get(i, t).is_zero() {
                        a.swap_rows(t, i);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..a.cols {
                if !a.get(t, j).is_zero() {
                    let q = -(a.get(t, j) / a.get(t, t));
                    add_col_multiple(&mut a, j, t, &q);
                    if !a.get(t, j).is_zero() {
                        swap_cols(&mut a, t, j);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        // Divisibility fix: the pivot must divide the whole trailing block.
        let mut redo = false;
        'scan: for i in t + 1..a.rows {
            for j in t + 1..a.cols {
                if !(a.get(i, j) % a.get(t, t)).is_zero() {
                    a.add_multiple(t, i, &BigInt::one());
                    redo = true;
                    break 'scan;
                }
            }
        }
        if redo {
            continue;
        }
        t += 1;
    }
    let mut factors: Vec<BigInt> =
        (0..t).map(|i| a.get(i, i).abs()).filter(|d| !d.is_zero()).collect();
    factors.sort();
    factors
}

fn swap_cols(a: &mut IntMatrix, x: usize, y: usize) {
    if x == y {
        return;
    }
    for i in 0..a.rows {
        let cols = a.cols;
        a.entries.swap(i * cols + x, i * cols + y);
    }
}

fn add_col_multiple(a: &mut IntMatrix, dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for i in 0..a.rows {
        let add = q * a.get(i, src);
        *a.get_mut(i, dst) += add;
    }
}

/// Solve `y · basis = x` over the integers, if possible.
///
/// `basis` need not be in normal form. Returns the coefficient vector `y`
/// or `None` when `x` is not in the row lattice.
pub fn express_in_row_lattice(basis: &IntMatrix, x: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(x.len(), basis.cols, "vector length must match basis columns");
    let (h, u) = hermite_normal_form(basis);
    let mut rem: Vec<BigInt> = x.to_vec();
    let mut z = vec![BigInt::zero(); basis.rows];
    for (i, zi) in z.iter_mut().enumerate() {
        let Some(c) = (0..h.cols).find(|&j| !h.get(i, j).is_zero()) else { break };
        let (q, r) = rem[c].div_rem(h.get(i, c));
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (j, r) in rem.iter_mut().enumerate() {
                let sub = &q * h.get(i, j);
                *r -= sub;
            }
        }
        *zi = q;
    }
    if rem.iter().any(|v| !v.is_zero()) {
        return None;
    }
    // y = z · u maps the HNF coefficients back to the original rows.
    let mut y = vec![BigInt::zero(); basis.rows];
    for (i, zi) in z.iter().enumerate() {
        if zi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter_mut().enumerate() {
            let add = zi * u.get(i, j);
            *yj += add;
        }
    }
    Some(y)
}
