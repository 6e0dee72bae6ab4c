//! Codes defined by fixed-at-zero and fixed-at-equality constraints on
//! multipermutation matrices, and the Shieh-Tsai (ST) construction.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::perm::{Multipermutation, MultipermutationMatrix, MultiplicityVector};
use crate::ranking::{multinomial, RadixSystem};
use crate::{Error, Result};

/// Default cap on the number of codewords [`enumerate_codebook`] may return.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// A matrix entry, 0-based `(row, col)`. Row `i` is symbol `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
}

impl Entry {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Fixed-at-zero entries `Z` and fixed-at-equality pairs `E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    mult: MultiplicityVector,
    zeros: BTreeSet<Entry>,
    equalities: BTreeSet<(Entry, Entry)>,
}

impl ConstraintSet {
    /// No constraints: the code is all of `M(r)`.
    pub fn unconstrained(mult: MultiplicityVector) -> Self {
        Self {
            mult,
            zeros: BTreeSet::new(),
            equalities: BTreeSet::new(),
        }
    }

    /// Rejects out-of-grid entries, duplicated constraints and pairs that
    /// repeat one entry. Pairs are stored with the smaller entry first.
    pub fn new(
        mult: MultiplicityVector,
        zeros: impl IntoIterator<Item = Entry>,
        equalities: impl IntoIterator<Item = (Entry, Entry)>,
    ) -> Result<Self> {
        let mut set = Self::unconstrained(mult);
        for e in zeros {
            set.add_zero(e)?;
        }
        for (a, b) in equalities {
            set.add_equality(a, b)?;
        }
        Ok(set)
    }

    fn check_entry(&self, e: Entry) -> Result<()> {
        if e.row >= self.mult.m() || e.col >= self.mult.n() {
            return Err(Error::InvalidConstraints(format!(
                "entry ({}, {}) outside the {}x{} grid",
                e.row + 1,
                e.col + 1,
                self.mult.m(),
                self.mult.n()
            )));
        }
        Ok(())
    }

    pub fn add_zero(&mut self, e: Entry) -> Result<()> {
        self.check_entry(e)?;
        if !self.zeros.insert(e) {
            return Err(Error::InvalidConstraints(format!(
                "duplicated fixed-at-zero entry ({}, {})",
                e.row + 1,
                e.col + 1
            )));
        }
        Ok(())
    }

    pub fn add_equality(&mut self, a: Entry, b: Entry) -> Result<()> {
        self.check_entry(a)?;
        self.check_entry(b)?;
        if a == b {
            return Err(Error::InvalidConstraints("equality pair repeats one entry".into()));
        }
        let pair = if a < b { (a, b) } else { (b, a) };
        if !self.equalities.insert(pair) {
            return Err(Error::InvalidConstraints("duplicated fixed-at-equality pair".into()));
        }
        Ok(())
    }

    pub fn multiplicity(&self) -> &MultiplicityVector {
        &self.mult
    }

    pub fn zeros(&self) -> &BTreeSet<Entry> {
        &self.zeros
    }

    pub fn equalities(&self) -> &BTreeSet<(Entry, Entry)> {
        &self.equalities
    }

    /// `kappa = |Z|`.
    pub fn kappa(&self) -> usize {
        self.zeros.len()
    }

    /// `iota = |E|`.
    pub fn iota(&self) -> usize {
        self.equalities.len()
    }

    pub fn is_member(&self, x: &MultipermutationMatrix) -> Result<bool> {
        if x.multiplicity() != &self.mult {
            return Err(Error::DimensionMismatch {
                expected: self.mult.m() * self.mult.n(),
                got: x.rows() * x.cols(),
            });
        }
        Ok(self.is_member_symbols(&to_matrix_symbols(x)))
    }

    /// Membership test on the symbol form of a codeword.
    pub fn is_member_symbols(&self, symbols: &[usize]) -> bool {
        let on = |e: &Entry| symbols[e.col] == e.row + 1;
        self.zeros.iter().all(|e| !on(e)) && self.equalities.iter().all(|(a, b)| on(a) == on(b))
    }
}

fn to_matrix_symbols(x: &MultipermutationMatrix) -> Vec<usize> {
    (0..x.cols()).map(|j| x.symbol_at(j)).collect()
}

pub fn is_member(x: &MultipermutationMatrix, c: &ConstraintSet) -> Result<bool> {
    c.is_member(x)
}

/// Generalized derangements: symbol `i` may not occupy the positions `I_i`
/// it holds in the sorted multipermutation.
pub fn derangement_constraints(mult: &MultiplicityVector) -> ConstraintSet {
    let zeros = (1..=mult.m()).flat_map(|s| mult.index_set(s).map(move |j| Entry::new(s - 1, j)));
    ConstraintSet::new(mult.clone(), zeros, core::iter::empty()).expect("index sets are disjoint and inside the grid")
}

/// All codewords of `c` in increasing rank order.
///
/// Enumeration is a depth-first search over positions that never places a
/// symbol on a fixed-at-zero entry, so it scales with the code size rather
/// than with `|M(r)|`. Fails once more than `cap` codewords are found.
pub fn enumerate_codebook(c: &ConstraintSet, cap: usize) -> Result<Vec<Multipermutation>> {
    let mult = c.multiplicity();
    let (m, n) = (mult.m(), mult.n());
    let mut forbidden = vec![false; m * n];
    for e in c.zeros() {
        forbidden[e.row * n + e.col] = true;
    }
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut left = mult.counts().to_vec();
    let mut cur = Vec::with_capacity(n);
    let mut overflow = false;
    dfs(&forbidden, n, &mut left, &mut cur, &mut |w: &[usize]| {
        if c.equalities
            .iter()
            .all(|(a, b)| (w[a.col] == a.row + 1) == (w[b.col] == b.row + 1))
        {
            if found.len() == cap {
                overflow = true;
                return false;
            }
            found.push(w.to_vec());
        }
        true
    });
    if overflow {
        return Err(Error::CapExceeded {
            size: format!("more than {cap}"),
            cap,
        });
    }
    let sys = RadixSystem::new(mult);
    let mut ranked: Vec<(BigUint, Multipermutation)> = found
        .into_iter()
        .map(|s| {
            let x = Multipermutation::new(s, mult.clone()).expect("dfs respects multiplicity");
            (sys.rank(&x).expect("same multiplicity"), x)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ranked.into_iter().map(|(_, x)| x).collect())
}

/// Visits every multipermutation avoiding `forbidden` entries. The visitor
/// returns `false` to stop the search.
fn dfs(
    forbidden: &[bool],
    n: usize,
    left: &mut [usize],
    cur: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let j = cur.len();
    if j == n {
        return visit(cur);
    }
    for s in 0..left.len() {
        if left[s] == 0 || forbidden[s * n + j] {
            continue;
        }
        left[s] -= 1;
        cur.push(s + 1);
        let go_on = dfs(forbidden, n, left, cur, visit);
        cur.pop();
        left[s] += 1;
        if !go_on {
            return false;
        }
    }
    true
}

/// Number of codewords, by exhaustive search.
pub fn count_codebook(c: &ConstraintSet) -> usize {
    let mult = c.multiplicity();
    let (m, n) = (mult.m(), mult.n());
    let mut forbidden = vec![false; m * n];
    for e in c.zeros() {
        forbidden[e.row * n + e.col] = true;
    }
    let mut count = 0usize;
    dfs(
        &forbidden,
        n,
        &mut mult.counts().to_vec(),
        &mut Vec::with_capacity(n),
        &mut |w: &[usize]| {
            if c.equalities
                .iter()
                .all(|(a, b)| (w[a.col] == a.row + 1) == (w[b.col] == b.row + 1))
            {
                count += 1;
            }
            true
        },
    );
    count
}

/// Parameters of the ST code `C(r, m, d)`: `r`-regular multipermutations of
/// `1..=m` with `x_j = j (mod d)` at every position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StCodeParams {
    r: usize,
    d: usize,
    m: usize,
}

impl StCodeParams {
    pub fn new(r: usize, d: usize, m: usize) -> Result<Self> {
        if r == 0 || d == 0 || m == 0 {
            return Err(Error::InvalidParameters("r, d and m must be positive".into()));
        }
        if m % d != 0 {
            return Err(Error::InvalidParameters(format!("d = {d} does not divide m = {m}")));
        }
        Ok(Self { r, d, m })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `a = m / d`, the number of symbols in each residue class.
    pub fn a(&self) -> usize {
        self.m / self.d
    }

    pub fn n(&self) -> usize {
        self.m * self.r
    }

    pub fn multiplicity(&self) -> MultiplicityVector {
        MultiplicityVector::regular(self.r, self.m).expect("r and m positive")
    }

    /// Multiplicity of each interleaved sub-vector.
    pub fn sub_multiplicity(&self) -> MultiplicityVector {
        MultiplicityVector::regular(self.r, self.a()).expect("r and a positive")
    }

    /// `(ar)! / (r!)^a`, the radix of one sub-vector digit.
    pub fn sub_cardinality(&self) -> BigUint {
        multinomial(&self.sub_multiplicity())
    }

    /// `((ar)! / (r!)^a)^d`.
    pub fn cardinality(&self) -> BigUint {
        num_traits::pow(self.sub_cardinality(), self.d)
    }

    /// Residue class (1-based, `1..=d`) of the 0-based position `j`.
    pub fn class_of(&self, j: usize) -> usize {
        j % self.d + 1
    }
}

/// Fixed-at-zero set of the ST code: `X_ij = 0` whenever `i != j (mod d)`.
pub fn st_constraints(p: &StCodeParams) -> ConstraintSet {
    let n = p.n();
    let zeros = (0..p.m()).flat_map(|i| {
        (0..n)
            .filter(move |&j| (i + 1) % p.d() != (j + 1) % p.d())
            .map(move |j| Entry::new(i, j))
    });
    ConstraintSet::new(p.multiplicity(), zeros, core::iter::empty()).expect("entries are in range and distinct")
}

/// Encodes `message` in `0..|C|` as an ST codeword.
///
/// The message is written in radix `(ar)!/(r!)^a` with the first sub-vector
/// as the most significant digit. Digit `k` is unranked to an `r`-regular
/// multipermutation of `a` symbols, mapped through `(k, d+k, 2d+k, ...)`,
/// and placed on positions `k, d+k, 2d+k, ...`.
pub fn encode_st(message: &BigUint, p: &StCodeParams) -> Result<Multipermutation> {
    if message >= &p.cardinality() {
        return Err(Error::OutOfRange(format!(
            "message {message} is not below the code size {}",
            p.cardinality()
        )));
    }
    let radix = p.sub_cardinality();
    let sys = RadixSystem::new(&p.sub_multiplicity());
    let (d, n) = (p.d(), p.n());
    let mut digits = vec![BigUint::zero(); d];
    let mut rest = message.clone();
    for k in (0..d).rev() {
        let (q, rem) = rest.div_rem(&radix);
        digits[k] = rem;
        rest = q;
    }
    let mut symbols = vec![0usize; n];
    for (k, digit) in digits.iter().enumerate() {
        let sub = sys.unrank(digit)?;
        for (q, &s) in sub.symbols().iter().enumerate() {
            symbols[q * d + k] = (s - 1) * d + k + 1;
        }
    }
    Multipermutation::new(symbols, p.multiplicity())
}

/// Inverse of [`encode_st`].
pub fn decode_st(x: &[usize], p: &StCodeParams) -> Result<BigUint> {
    let (d, n) = (p.d(), p.n());
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let sys = RadixSystem::new(&p.sub_multiplicity());
    let radix = p.sub_cardinality();
    let mut message = BigUint::zero();
    for k in 0..d {
        let mut sub = Vec::with_capacity(n / d);
        for j in (k..n).step_by(d) {
            let v = x[j];
            if v == 0 || v > p.m() || (v - 1) % d != k {
                return Err(Error::InvalidCodeword(format!(
                    "symbol {v} at position {} violates the congruence mod {d}",
                    j + 1
                )));
            }
            sub.push((v - 1) / d + 1);
        }
        let sub =
            Multipermutation::new(sub, p.sub_multiplicity()).map_err(|e| Error::InvalidCodeword(e.to_string()))?;
        message = message * &radix + sys.rank(&sub)?;
    }
    Ok(message)
}

/// Structural bounded-distance decoder for ST codes.
///
/// Each position is snapped to the nearest symbol of its residue class; the
/// result is a codeword within Chebyshev radius `d/2` or `None`. A snap
/// distance of `d/2` or more, or a snapped word with wrong multiplicities,
/// is a decoding failure. This returns the unique codeword at distance
/// `< d/2` whenever one exists.
pub fn bounded_distance_decode(y: &[usize], p: &StCodeParams) -> Option<Multipermutation> {
    if y.len() != p.n() {
        return None;
    }
    let d = p.d();
    let mut out = Vec::with_capacity(y.len());
    for (j, &v) in y.iter().enumerate() {
        let k = p.class_of(j);
        // Candidates k, k+d, ..., k+(a-1)d.
        let steps = (v as f64 - k as f64) / d as f64;
        let q = libm::round(steps).clamp(0.0, (p.a() - 1) as f64) as usize;
        let snapped = k + q * d;
        let dist = (snapped as i64 - v as i64).unsigned_abs() as usize;
        if 2 * dist >= d {
            return None;
        }
        out.push(snapped);
    }
    Multipermutation::new(out, p.multiplicity()).ok()
}

/// `|C|` as `u64` when it fits; convenience for small codes.
pub fn st_cardinality_u64(p: &StCodeParams) -> Option<u64> {
    p.cardinality().to_u64()
}

/// `|M(r)|` for a multiplicity vector, as in the ranking module.
pub fn multipermutation_count(mult: &MultiplicityVector) -> BigUint {
    multinomial(mult)
}

/// Number of `Z` entries of the ST code, `n (m - m/d)`.
pub fn st_kappa(p: &StCodeParams) -> usize {
    p.n() * (p.m() - p.a())
}
