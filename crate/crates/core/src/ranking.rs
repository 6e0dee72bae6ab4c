//! Mixed-radix ranking of multipermutations.
//!
//! Symbol `i` contributes one digit: the rank, in the combinatorial number
//! system, of the positions it occupies once symbols `1..i` have been removed.
//! The digit for symbol `i` ranges over `C(n_y, r_i)` values where `n_y` is
//! the length remaining at that stage, and bases are cumulative products of
//! these ranges, so the map is a bijection onto `0..n!/prod(r_i!)`.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::perm::{Multipermutation, MultiplicityVector};
use crate::{Error, Result};

/// `C(a, b)`; zero when `b < 0` or `a < b`, and one when `b == 0`.
pub fn binomial(a: i64, b: i64) -> BigUint {
    if b < 0 {
        return BigUint::zero();
    }
    if b == 0 {
        return BigUint::one();
    }
    if a < b {
        return BigUint::zero();
    }
    let b = b.min(a - b) as u64;
    let a = a as u64;
    let mut acc = BigUint::one();
    for k in 0..b {
        acc *= a - k;
        acc /= k + 1;
    }
    acc
}

/// Bases and digit ranges for one multiplicity vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RadixSystem {
    mult: MultiplicityVector,
    bases: Vec<BigUint>,
    ranges: Vec<BigUint>,
    total: BigUint,
}

impl RadixSystem {
    pub fn new(mult: &MultiplicityVector) -> Self {
        let mut bases = Vec::with_capacity(mult.m());
        let mut ranges = Vec::with_capacity(mult.m());
        let mut base = BigUint::one();
        let mut remaining = mult.n();
        for &r in mult.counts() {
            let range = binomial(remaining as i64, r as i64);
            bases.push(base.clone());
            base *= &range;
            ranges.push(range);
            remaining -= r;
        }
        debug_assert_eq!(base, multinomial(mult));
        Self {
            mult: mult.clone(),
            bases,
            ranges,
            total: base,
        }
    }

    pub fn multiplicity(&self) -> &MultiplicityVector {
        &self.mult
    }

    /// `b_1 .. b_m`, with `b_1 = 1`.
    pub fn bases(&self) -> &[BigUint] {
        &self.bases
    }

    /// Per-digit range `C(n_y, r_i)`.
    pub fn digit_ranges(&self) -> &[BigUint] {
        &self.ranges
    }

    /// `N = n! / prod(r_i!)`.
    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn rank(&self, x: &Multipermutation) -> Result<BigUint> {
        if x.multiplicity() != &self.mult {
            return Err(Error::InvalidMultipermutation(format!(
                "multiplicity {} does not match radix system {}",
                x.multiplicity(),
                self.mult
            )));
        }
        let mut y: Vec<usize> = x.symbols().to_vec();
        let mut rank = BigUint::zero();
        for (idx, base) in self.bases.iter().enumerate() {
            let symbol = idx + 1;
            let mut digit = BigUint::zero();
            let mut j = 0i64;
            for (alpha, &s) in y.iter().enumerate() {
                if s == symbol {
                    j += 1;
                    digit += binomial(alpha as i64, j);
                }
            }
            y.retain(|&s| s != symbol);
            rank += digit * base;
        }
        Ok(rank)
    }

    pub fn unrank(&self, index: &BigUint) -> Result<Multipermutation> {
        if index >= &self.total {
            return Err(Error::OutOfRange(format!(
                "index {index} is not below N = {}",
                self.total
            )));
        }
        let n = self.mult.n();
        let mut symbols = alloc::vec![0usize; n];
        // Original positions not yet assigned, in order.
        let mut free: Vec<usize> = (0..n).collect();
        for (idx, (base, range)) in self.bases.iter().zip(&self.ranges).enumerate() {
            let symbol = idx + 1;
            let r = self.mult.counts()[idx];
            let mut rem = (index / base).mod_floor(range);
            let mut positions = Vec::with_capacity(r);
            // Greedy decoding of the combinatorial number system, largest j first.
            let mut upper = free.len();
            for j in (1..=r).rev() {
                let alpha = largest_alpha(j, &rem, upper);
                rem -= binomial(alpha as i64, j as i64);
                positions.push(alpha);
                upper = alpha;
            }
            for &alpha in &positions {
                symbols[free[alpha]] = symbol;
            }
            positions.sort_unstable();
            for &alpha in positions.iter().rev() {
                free.remove(alpha);
            }
        }
        Multipermutation::new(symbols, self.mult.clone())
    }
}

/// Largest `alpha < upper` with `C(alpha, j) <= value`.
fn largest_alpha(j: usize, value: &BigUint, upper: usize) -> usize {
    // C(alpha, j) is nondecreasing in alpha; scan upward from j - 1 where it is 0.
    let mut alpha = j - 1;
    let mut next = BigUint::one(); // C(j, j)
    while alpha + 1 < upper && &next <= value {
        alpha += 1;
        // C(alpha + 1, j) = C(alpha, j) * (alpha + 1) / (alpha + 1 - j)
        next = next * (alpha + 1) / (alpha + 1 - j);
    }
    alpha
}

/// `n! / prod(r_i!)`, the number of multipermutations with multiplicity `r`.
pub fn multinomial(mult: &MultiplicityVector) -> BigUint {
    let mut acc = BigUint::one();
    let mut placed = 0usize;
    for &r in mult.counts() {
        placed += r;
        acc *= binomial(placed as i64, r as i64);
    }
    acc
}

pub fn rank_mp(x: &Multipermutation) -> BigUint {
    RadixSystem::new(x.multiplicity())
        .rank(x)
        .expect("radix system built from the same multiplicity")
}

pub fn unrank_mp(index: &BigUint, mult: &MultiplicityVector) -> Result<Multipermutation> {
    RadixSystem::new(mult).unrank(index)
}

/// Natural log of a big integer, accurate for values far beyond `f64::MAX`.
pub fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return libm::log(v.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}
