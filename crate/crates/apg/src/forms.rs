//! Binary cubic and linear form pairs extracted from rank-2 spin systems,
//! their classical invariants, exact recovery of weight triples from those
//! invariants, and a mod-48 congruence test.

use crate::invariants::{Constants, InvariantSystem};
use crate::jsonutil::json_int;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("system does not have rank 2")]
    NotRankTwo,
    #[error("system is not spin")]
    NotSpin,
    #[error("cubic coefficient {0} must be divisible by 3")]
    BadCubic(String),
    #[error("congruence test supports degree 1 only, got {0}")]
    DegreeUnsupported(u32),
}

/// A binary cubic form `c0 x^3 + c1 x^2 y + c2 x y^2 + c3 y^3` together with
/// a linear form `p0 x + p1 y`.
///
/// The middle cubic coefficients are always divisible by 3; this holds for
/// every pair extracted from a system and is required by the invariant
/// formulas below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFormPair {
    pub c: [BigInt; 4],
    pub p: [BigInt; 2],
}

impl BinaryFormPair {
    pub fn new(c: [BigInt; 4], p: [BigInt; 2]) -> Result<Self, FormsError> {
        let three = BigInt::from(3);
        if !(&c[1] % &three).is_zero() {
            return Err(FormsError::BadCubic(c[1].to_string()));
        }
        if !(&c[2] % &three).is_zero() {
            return Err(FormsError::BadCubic(c[2].to_string()));
        }
        Ok(BinaryFormPair { c, p })
    }

    /// The pair attached to a weight triple `(a1, a2, a3)`.
    pub fn from_triple(a1: &BigInt, a2: &BigInt, a3: &BigInt) -> Self {
        let big_a = a1 - a3;
        let big_b = a2 - a3;
        BinaryFormPair {
            c: [
                big_a.clone(),
                BigInt::from(-3) * a3,
                BigInt::from(-3) * a3,
                big_b.clone(),
            ],
            p: [big_a, big_b],
        }
    }

    /// The pair attached to a weight pair `(a1, a2)`.
    pub fn from_pair(a1: &BigInt, a2: &BigInt) -> Self {
        Self::from_triple(a1, a2, &BigInt::zero())
    }

    /// Extracts the pair from a rank-2 spin system, dividing out the
    /// degree-dependent scale.
    pub fn from_system(s: &InvariantSystem) -> Result<Self, FormsError> {
        if s.rank() != 2 {
            return Err(FormsError::NotRankTwo);
        }
        if !s.is_spin() {
            return Err(FormsError::NotSpin);
        }
        let consts = Constants::new(s.k).expect("system degree is valid");
        let quarter = consts.quarter_lambda();
        let scale = |v: BigInt| -> BigInt {
            let (q, r) = v.div_rem(&quarter);
            assert!(r.is_zero(), "spin trilinear values scale exactly");
            q
        };
        let scale_p = |v: &BigInt| -> BigInt {
            let (q, r) = v.div_rem(&consts.lambda);
            assert!(r.is_zero(), "spin functional values scale exactly");
            q
        };
        let three = BigInt::from(3);
        let c = [
            scale(s.mu_value(0, 0, 0)),
            &three * scale(s.mu_value(0, 0, 1)),
            &three * scale(s.mu_value(0, 1, 1)),
            scale(s.mu_value(1, 1, 1)),
        ];
        let p = [scale_p(&s.p[0]), scale_p(&s.p[1])];
        Ok(BinaryFormPair { c, p })
    }

    /// Evaluates the cubic at `(x, y)`.
    pub fn eval_cubic(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let x2 = x * x;
        let y2 = y * y;
        &self.c[0] * &x2 * x + &self.c[1] * &x2 * y + &self.c[2] * x * &y2 + &self.c[3] * &y2 * y
    }

    /// Applies a 2x2 integer substitution `(x, y) -> (a x + b y, c x + d y)`
    /// to both forms.
    pub fn substitute(&self, m: &[[BigInt; 2]; 2]) -> Self {
        let (a, b) = (&m[0][0], &m[0][1]);
        let (c, d) = (&m[1][0], &m[1][1]);
        let c0 = &self.c[0] * a * a * a + &self.c[1] * a * a * c + &self.c[2] * a * c * c
            + &self.c[3] * c * c * c;
        let c1 = &self.c[0] * BigInt::from(3) * a * a * b
            + &self.c[1] * (a * a * d + BigInt::from(2) * a * b * c)
            + &self.c[2] * (c * c * b + BigInt::from(2) * a * c * d)
            + &self.c[3] * BigInt::from(3) * c * c * d;
        let c2 = &self.c[0] * BigInt::from(3) * a * b * b
            + &self.c[1] * (b * b * c + BigInt::from(2) * a * b * d)
            + &self.c[2] * (a * d * d + BigInt::from(2) * b * c * d)
            + &self.c[3] * BigInt::from(3) * c * d * d;
        let c3 = &self.c[0] * b * b * b + &self.c[1] * b * b * d + &self.c[2] * b * d * d
            + &self.c[3] * d * d * d;
        let p0 = &self.p[0] * a + &self.p[1] * c;
        let p1 = &self.p[0] * b + &self.p[1] * d;
        BinaryFormPair {
            c: [c0, c1, c2, c3],
            p: [p0, p1],
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cubic": self.c.iter().map(json_int).collect::<Vec<_>>(),
            "linear": self.p.iter().map(json_int).collect::<Vec<_>>(),
        })
    }
}

/// The four classical invariants of a form pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassicalInvariants {
    pub d: BigInt,
    pub r_squared: BigInt,
    pub i: BigInt,
    pub j: BigInt,
}

impl ClassicalInvariants {
    /// Direct evaluation on a weight triple.
    pub fn from_triple(a1: &BigInt, a2: &BigInt, a3: &BigInt) -> Self {
        let s1 = a1 + a2 + a3;
        let sq = |x: &BigInt| x * x;
        let d = sq(a1) * sq(a2) + sq(a1) * sq(a3) + sq(a2) * sq(a3)
            - BigInt::from(2) * sq(a1) * a2 * a3
            - BigInt::from(2) * a1 * sq(a2) * a3
            - BigInt::from(2) * a1 * a2 * sq(a3);
        let r = (a1 - a3) * (a2 - a3) * (a2 - a1) * &s1;
        let i = sq(a1) * sq(a2) + sq(a1) * sq(a3) + sq(a2) * sq(a3)
            - sq(a1) * a2 * a3
            - a1 * sq(a2) * a3
            - a1 * a2 * sq(a3);
        let j = -sq(&sq(a1)) * sq(a2) - sq(a1) * sq(&sq(a2)) - sq(&sq(a1)) * sq(a3)
            - sq(a1) * sq(&sq(a3))
            - sq(&sq(a2)) * sq(a3)
            - sq(a2) * sq(&sq(a3))
            + BigInt::from(2) * sq(&sq(a1)) * a2 * a3
            + BigInt::from(2) * a1 * sq(&sq(a2)) * a3
            + BigInt::from(2) * a1 * a2 * sq(&sq(a3))
            + sq(a1) * a1 * sq(a2) * a3
            + sq(a1) * a1 * a2 * sq(a3)
            + sq(a1) * sq(a2) * a2 * a3
            + a1 * sq(a2) * a2 * sq(a3)
            + sq(a1) * a2 * sq(a3) * a3
            + a1 * sq(a2) * sq(a3) * a3
            - BigInt::from(6) * sq(a1) * sq(a2) * sq(a3);
        ClassicalInvariants {
            d,
            r_squared: &r * &r,
            i,
            j,
        }
    }

    /// Evaluation through the elementary symmetric functions of a triple.
    pub fn from_sigmas(s1: &BigInt, s2: &BigInt, s3: &BigInt) -> Self {
        let d = s2 * s2 - BigInt::from(4) * s1 * s3;
        let i = s2 * s2 - BigInt::from(3) * s1 * s3;
        let j = -(s1 * s1) * (s2 * s2) + BigInt::from(2) * s2 * s2 * s2
            + BigInt::from(4) * s1 * s1 * s1 * s3
            - BigInt::from(9) * s1 * s2 * s3;
        let disc = s1 * s1 * (s2 * s2) - BigInt::from(4) * s2 * s2 * s2
            - BigInt::from(4) * s1 * s1 * s1 * s3
            + BigInt::from(18) * s1 * s2 * s3
            - BigInt::from(27) * s3 * s3;
        let r_squared = s1 * s1 * disc;
        ClassicalInvariants {
            d,
            r_squared,
            i,
            j,
        }
    }

    /// Evaluation on a general form pair.
    ///
    /// The first invariant is a scaled discriminant of the cubic, the last
    /// two are the degree-2 and degree-3 invariants of the product quartic,
    /// and the square term is the cubic evaluated on the zero line of the
    /// linear form.
    pub fn from_form_pair(fp: &BinaryFormPair) -> Self {
        let [c0, c1, c2, c3] = &fp.c;
        let [p0, p1] = &fp.p;
        let delta = BigInt::from(18) * c0 * c1 * c2 * c3
            - BigInt::from(4) * c1 * c1 * c1 * c3
            + c1 * c1 * c2 * c2
            - BigInt::from(4) * c0 * c2 * c2 * c2
            - BigInt::from(27) * c0 * c0 * c3 * c3;
        let (d, rem) = (-delta).div_rem(&BigInt::from(27));
        assert!(rem.is_zero(), "middle cubic coefficients are multiples of 3");
        let r = fp.eval_cubic(p1, &(-p0.clone()));
        let e0 = c0 * p0;
        let e1 = c0 * p1 + c1 * p0;
        let e2 = c1 * p1 + c2 * p0;
        let e3 = c2 * p1 + c3 * p0;
        let e4 = c3 * p1;
        let (i, rem) = (BigInt::from(12) * &e0 * &e4 - BigInt::from(3) * &e1 * &e3
            + &e2 * &e2)
            .div_rem(&BigInt::from(9));
        assert!(rem.is_zero(), "quartic invariant scales exactly");
        let (j, rem) = (BigInt::from(72) * &e0 * &e2 * &e4 + BigInt::from(9) * &e1 * &e2 * &e3
            - BigInt::from(27) * &e0 * &e3 * &e3
            - BigInt::from(27) * &e1 * &e1 * &e4
            - BigInt::from(2) * &e2 * &e2 * &e2)
            .div_rem(&BigInt::from(27));
        assert!(rem.is_zero(), "quartic invariant scales exactly");
        ClassicalInvariants {
            d,
            r_squared: &r * &r,
            i,
            j,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": json_int(&self.d),
            "r_squared": json_int(&self.r_squared),
            "i": json_int(&self.i),
            "j": json_int(&self.j),
        })
    }
}

/// Elementary symmetric functions of a triple.
pub fn sigmas(a1: &BigInt, a2: &BigInt, a3: &BigInt) -> (BigInt, BigInt, BigInt) {
    (a1 + a2 + a3, a1 * a2 + a1 * a3 + a2 * a3, a1 * a2 * a3)
}

fn floor_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        None
    } else {
        Some(n.sqrt())
    }
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    let r = floor_sqrt(n)?;
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Integer roots of `y^3 - s1 y^2 + s2 y - s3`, with multiplicity, or `None`
/// when the cubic does not split into three integer factors.
fn split_monic_cubic(s1: &BigInt, s2: &BigInt, s3: &BigInt) -> Option<[BigInt; 3]> {
    let eval = |y: &BigInt| -> BigInt { ((y - s1) * y + s2) * y - s3 };
    let bound = BigInt::one() + s1.abs().max(s2.abs()).max(s3.abs());

    // Monotone interval ends around the critical points of the cubic.
    let disc = s1 * s1 - BigInt::from(3) * s2;
    let mut intervals: Vec<(BigInt, BigInt)> = Vec::new();
    if disc.is_positive() {
        let s = disc.sqrt();
        // floor of (s1 - sqrt(disc)) / 3: candidate from the integer square
        // root, corrected downward if it overshoots the critical point.
        let mut lo_end = (s1 - &s).div_floor(&BigInt::from(3));
        let below_low = |g: &BigInt| -> bool {
            let t = s1 - BigInt::from(3) * g;
            !t.is_negative() && &t * &t >= disc
        };
        if !below_low(&lo_end) {
            lo_end -= 1;
        }
        debug_assert!(below_low(&lo_end) && !below_low(&(&lo_end + 1)));
        // ceil of (s1 + sqrt(disc)) / 3, corrected upward symmetrically.
        let mut hi_start = (s1 + &s).div_ceil(&BigInt::from(3));
        let above_high = |g: &BigInt| -> bool {
            let t = BigInt::from(3) * g - s1;
            !t.is_negative() && &t * &t >= disc
        };
        if !above_high(&hi_start) {
            hi_start += 1;
        }
        debug_assert!(above_high(&hi_start) && !above_high(&(&hi_start - 1)));
        let mid_start = if BigInt::from(3) * &lo_end == s1 - &s && &s * &s == disc {
            lo_end.clone()
        } else {
            &lo_end + 1
        };
        let mid_end = if BigInt::from(3) * &hi_start == s1 + &s && &s * &s == disc {
            hi_start.clone()
        } else {
            &hi_start - 1
        };
        intervals.push((-&bound, lo_end.clone()));
        if mid_start <= mid_end {
            intervals.push((mid_start, mid_end));
        }
        intervals.push((hi_start, bound.clone()));
    } else {
        intervals.push((-&bound, bound.clone()));
    }

    let mut first_root: Option<BigInt> = None;
    for (mut lo, mut hi) in intervals {
        if lo > hi {
            continue;
        }
        let (flo, fhi) = (eval(&lo), eval(&hi));
        if flo.is_zero() {
            first_root = Some(lo);
            break;
        }
        if fhi.is_zero() {
            first_root = Some(hi);
            break;
        }
        if flo.sign() == fhi.sign() {
            continue;
        }
        let increasing = flo.is_negative();
        while &hi - &lo > BigInt::one() {
            let mid = (&lo + &hi).div_floor(&BigInt::from(2));
            let fm = eval(&mid);
            if fm.is_zero() {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if fm.is_negative() == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if eval(&lo).is_zero() {
            first_root = Some(lo);
            break;
        }
        if eval(&hi).is_zero() {
            first_root = Some(hi);
            break;
        }
    }

    let r = first_root?;
    // Divide out (y - r): the quotient is y^2 + b y + c.
    let b = &r - s1;
    let c = s2 + &r * &b;
    let disc_q = &b * &b - BigInt::from(4) * &c;
    let t = exact_sqrt(&disc_q)?;
    if (&b + &t).is_odd() {
        return None;
    }
    let r2 = (-&b + &t).div_floor(&BigInt::from(2));
    let r3 = (-&b - &t).div_floor(&BigInt::from(2));
    Some([r, r2, r3])
}

/// Canonical representative of a triple's orbit under permutation and global
/// sign flip: sorted ascending, with the sign chosen so the sum is positive,
/// and the lexicographically larger side on a zero sum.
pub fn canonical_triple(t: &[BigInt; 3]) -> [BigInt; 3] {
    let mut plus = t.clone();
    plus.sort();
    let mut minus = [-&t[0], -&t[1], -&t[2]];
    minus.sort();
    let sum: BigInt = t.iter().sum();
    if sum.is_positive() {
        plus
    } else if sum.is_negative() {
        minus
    } else if plus >= minus {
        plus
    } else {
        minus
    }
}

/// All weight triples with the given invariants, up to permutation and
/// global sign, as canonical representatives in ascending order.
///
/// When all four invariants vanish the solutions form the one-parameter
/// family `(t, 0, 0)`; the linear form hint pins down `t`, and without a
/// hint the degenerate case returns no candidates.
pub fn recover_triples(
    inv: &ClassicalInvariants,
    hint_p: Option<(&BigInt, &BigInt)>,
) -> Vec<[BigInt; 3]> {
    let q2 = BigInt::from(4) * &inv.i - BigInt::from(3) * &inv.d;
    let s13 = &inv.i - &inv.d;
    let mut found: Vec<[BigInt; 3]> = Vec::new();
    let push_verified = |cand: [BigInt; 3], out: &mut Vec<[BigInt; 3]>| {
        if ClassicalInvariants::from_triple(&cand[0], &cand[1], &cand[2]) == *inv {
            let rep = canonical_triple(&cand);
            if !out.contains(&rep) {
                out.push(rep);
            }
        }
    };

    if q2.is_zero() && s13.is_zero() {
        // Degenerate family (t, 0, 0); only a hint can select t.
        if let Some((p0, p1)) = hint_p {
            let zero = BigInt::zero();
            let t = if p1.is_zero() {
                Some(p0.clone())
            } else if p0.is_zero() {
                Some(p1.clone())
            } else if p0 == p1 {
                Some(-p0.clone())
            } else {
                None
            };
            if let Some(t) = t {
                push_verified([t, zero.clone(), zero], &mut found);
            }
        }
        found.sort();
        return found;
    }

    let sigma2_candidates: Vec<BigInt> = match exact_sqrt(&q2) {
        Some(r) if r.is_zero() => vec![BigInt::zero()],
        Some(r) => vec![r.clone(), -r],
        None => Vec::new(),
    };

    for s2 in &sigma2_candidates {
        if inv.d.is_zero() {
            // Here sigma1 * sigma3 = sigma2^2 / 4 is forced and nonzero.
            if BigInt::from(4) * &s13 != q2 || s13.is_zero() {
                continue;
            }
            let denom = BigInt::from(2) * s2 * &s13;
            let numer = BigInt::from(27) * &s13 * &s13 + &inv.r_squared;
            let (x, rem) = numer.div_rem(&denom);
            if !rem.is_zero() || x.is_negative() {
                continue;
            }
            if let Some(s1) = exact_sqrt(&x) {
                for s1 in [s1.clone(), -s1] {
                    if s1.is_zero() {
                        continue;
                    }
                    let (s3, rem) = s13.div_rem(&s1);
                    if !rem.is_zero() {
                        continue;
                    }
                    if let Some(t) = split_monic_cubic(&s1, s2, &s3) {
                        push_verified(t, &mut found);
                    }
                }
            }
            continue;
        }
        let numer = s2 * (BigInt::from(2) * &q2 - BigInt::from(9) * &s13) - &inv.j;
        if numer.is_zero() {
            // sigma1 = 0 branch: enumerate a^2 + a b + b^2 = -sigma2.
            if !s13.is_zero() {
                continue;
            }
            let n = -s2.clone();
            if !n.is_positive() {
                continue;
            }
            let four_n = BigInt::from(4) * &n;
            let a_bound = (&four_n / BigInt::from(3)).sqrt();
            let mut a = -&a_bound;
            while a <= a_bound {
                let rest = &four_n - BigInt::from(3) * &a * &a;
                if let Some(s) = exact_sqrt(&rest) {
                    for sgn in [s.clone(), -s] {
                        let num = -&a + sgn;
                        if num.is_even() {
                            let b = num.div_floor(&BigInt::from(2));
                            let c = -&a - &b;
                            push_verified([a.clone(), b, c], &mut found);
                        }
                    }
                }
                a += BigInt::one();
            }
            continue;
        }
        let (x, rem) = numer.div_rem(&inv.d);
        if !rem.is_zero() || x.is_negative() || x.is_zero() {
            continue;
        }
        if let Some(s1) = exact_sqrt(&x) {
            for s1 in [s1.clone(), -s1] {
                let (s3, rem) = s13.div_rem(&s1);
                if !rem.is_zero() {
                    continue;
                }
                if let Some(t) = split_monic_cubic(&s1, s2, &s3) {
                    push_verified(t, &mut found);
                }
            }
        }
    }

    found.sort();
    found
}

/// Outcome of the mod-48 congruence test.
#[derive(Debug, Clone)]
pub struct CongruenceVerdict {
    pub admissible: bool,
    pub exhaustive: bool,
    pub counterexample: Option<Vec<BigInt>>,
}

impl CongruenceVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "admissible": self.admissible,
            "exhaustive": self.exhaustive,
            "counterexample": self
                .counterexample
                .as_ref()
                .map(|w| w.iter().map(json_int).collect::<Vec<_>>()),
        })
    }
}

const CONGRUENCE_MODULUS: i64 = 48;
const EXHAUSTIVE_RANK_LIMIT: usize = 5;
const SAMPLE_COUNT: usize = 200_000;

/// Tests whether every lattice vector congruent to the characteristic
/// element mod 2 satisfies the cubic-linear congruence mod 48.
///
/// Only degree 1 carries this congruence. Vectors are reduced to a finite
/// check over residues; above rank 5 the verdict is sampled rather than
/// exhaustive.
pub fn congruence_admissible(s: &InvariantSystem) -> Result<CongruenceVerdict, FormsError> {
    if s.k != 1 {
        return Err(FormsError::DegreeUnsupported(s.k));
    }
    let n = s.rank();
    let m = CONGRUENCE_MODULUS;
    let to_i64_mod = |v: &BigInt| -> i64 {
        let r = v.mod_floor(&BigInt::from(m));
        i64::try_from(&r).expect("residue fits")
    };
    let entries: Vec<(usize, usize, usize, i64)> = s
        .mu
        .iter()
        .map(|(&(a, b, c), v)| (a, b, c, to_i64_mod(v)))
        .collect();
    let p: Vec<i64> = s.p.iter().map(to_i64_mod).collect();
    let w0: Vec<i64> = s.w.iter().map(|&b| b as i64).collect();

    let violation = |wv: &[i64]| -> bool {
        let mut mu = 0i64;
        for &(a, b, c, v) in &entries {
            let term = if a == b && b == c {
                wv[a] % m * (wv[a] % m) % m * (wv[a] % m) % m
            } else if a == b {
                3 * (wv[a] % m * (wv[a] % m) % m * (wv[c] % m) % m) % m
            } else if b == c {
                3 * (wv[a] % m * (wv[b] % m) % m * (wv[b] % m) % m) % m
            } else {
                6 * (wv[a] % m * (wv[b] % m) % m * (wv[c] % m) % m) % m
            };
            mu = (mu + v * term) % m;
        }
        let pw: i64 = p.iter().zip(wv).map(|(pi, wi)| pi * wi % m).sum::<i64>() % m;
        (mu - pw).rem_euclid(m) != 0
    };

    // Representatives: the 0/1 lift of w plus twice a residue vector mod 24.
    if n == 0 {
        return Ok(CongruenceVerdict {
            admissible: true,
            exhaustive: true,
            counterexample: None,
        });
    }
    let half = m / 2;
    if n <= EXHAUSTIVE_RANK_LIMIT {
        let mut x = vec![0i64; n];
        loop {
            let wv: Vec<i64> = x.iter().zip(&w0).map(|(xi, wi)| wi + 2 * xi).collect();
            if violation(&wv) {
                return Ok(CongruenceVerdict {
                    admissible: false,
                    exhaustive: true,
                    counterexample: Some(wv.into_iter().map(BigInt::from).collect()),
                });
            }
            let mut carry = 0;
            while carry < n {
                x[carry] += 1;
                if x[carry] < half {
                    break;
                }
                x[carry] = 0;
                carry += 1;
            }
            if carry == n {
                break;
            }
        }
        Ok(CongruenceVerdict {
            admissible: true,
            exhaustive: true,
            counterexample: None,
        })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..SAMPLE_COUNT {
            let wv: Vec<i64> = w0
                .iter()
                .map(|wi| wi + 2 * rng.gen_range(0..half))
                .collect();
            if violation(&wv) {
                return Ok(CongruenceVerdict {
                    admissible: false,
                    exhaustive: false,
                    counterexample: Some(wv.into_iter().map(BigInt::from).collect()),
                });
            }
        }
        Ok(CongruenceVerdict {
            admissible: true,
            exhaustive: false,
            counterexample: None,
        })
    }
}
