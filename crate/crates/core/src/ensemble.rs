//! Random coding ensembles: codes whose fixed-at-zero set `Z` (or
//! fixed-at-equality set `E`) is drawn uniformly among all sets of a given
//! size.
//!
//! Counts are exact big integers. The Chebyshev ball bounds involve huge
//! factorials and are evaluated in the log domain.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::channels::NoiseSource;
use crate::codes::{count_codebook, ConstraintSet, Entry};
use crate::perm::{Multipermutation, MultiplicityVector};
use crate::ranking::{binomial, ln_biguint, multinomial};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// `count` distinct fixed-at-zero entries.
    Zeros,
    /// `count` distinct fixed-at-equality pairs.
    Equalities,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleParams {
    pub mult: MultiplicityVector,
    pub kind: EnsembleKind,
    /// `kappa` for zeros, `iota` for equalities.
    pub count: usize,
}

impl EnsembleParams {
    pub fn zeros(mult: MultiplicityVector, kappa: usize) -> Result<Self> {
        let p = Self {
            mult,
            kind: EnsembleKind::Zeros,
            count: kappa,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn equalities(mult: MultiplicityVector, iota: usize) -> Result<Self> {
        let p = Self {
            mult,
            kind: EnsembleKind::Equalities,
            count: iota,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let population = self.population();
        if BigUint::from(self.count) > population {
            return Err(Error::InvalidParameters(format!(
                "{} constraints requested but only {population} are available",
                self.count
            )));
        }
        Ok(())
    }

    fn cells(&self) -> u64 {
        (self.mult.m() * self.mult.n()) as u64
    }

    /// Number of distinct single constraints: `mn` entries or `C(mn, 2)` pairs.
    fn population(&self) -> BigUint {
        match self.kind {
            EnsembleKind::Zeros => BigUint::from(self.cells()),
            EnsembleKind::Equalities => binomial(self.cells() as i64, 2),
        }
    }
}

/// `|S(kappa)| = C(mn, kappa)` or `|S(iota)| = C(C(mn, 2), iota)`.
pub fn choice_space_size(p: &EnsembleParams) -> BigUint {
    big_binomial(&p.population(), p.count)
}

/// Number of constraint sets that keep one fixed codeword:
/// `C(mn - n, kappa)` or `C(C(mn - n, 2) + C(n, 2), iota)`.
pub fn compatible_count(p: &EnsembleParams) -> BigUint {
    let (mn, n) = (p.cells() as i64, p.mult.n() as i64);
    match p.kind {
        EnsembleKind::Zeros => binomial(mn - n, p.count as i64),
        EnsembleKind::Equalities => big_binomial(&(binomial(mn - n, 2) + binomial(n, 2)), p.count),
    }
}

/// `C(a, k)` for a big `a` and small `k`.
fn big_binomial(a: &BigUint, k: usize) -> BigUint {
    if &BigUint::from(k) > a {
        return BigUint::zero();
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= a - BigUint::from(i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Expected code size over the ensemble, `compatible * |M(r)| / |S|`.
pub fn expected_cardinality(p: &EnsembleParams) -> BigRational {
    let num = compatible_count(p) * multinomial(&p.mult);
    BigRational::new(num.into(), choice_space_size(p).into())
}

/// `ln` of the fraction of constraint sets compatible with a fixed codeword.
pub fn ln_compatible_fraction(p: &EnsembleParams) -> f64 {
    ln_biguint(&compatible_count(p)) - ln_biguint(&choice_space_size(p))
}

/// Log-domain bounds on `V(r, n, d)`, the number of `r`-regular
/// multipermutations of `m` symbols within Chebyshev distance `d` of a
/// fixed word (initial vector `1..=m`):
///
/// `ln[(2dr+r)^n n! / (2^(2dr) n^n (r!)^m)] <= ln V <= ln[((2dr+r)!)^(n/(2dr+r)) / (r!)^m]`.
pub fn ln_ball_volume_bounds(r: usize, m: usize, d: f64) -> (f64, f64) {
    let (r, m) = (r as f64, m as f64);
    let n = r * m;
    let w = 2.0 * d * r + r;
    let ln_rf = libm::lgamma(r + 1.0);
    let lower =
        n * libm::log(w) + libm::lgamma(n + 1.0) - 2.0 * d * r * core::f64::consts::LN_2 - n * libm::log(n) - m * ln_rf;
    let upper = n / w * libm::lgamma(w + 1.0) - m * ln_rf;
    (lower, upper)
}

/// Bounds on the expected number of codewords within distance `d` of a
/// fixed word, for an `r`-regular ensemble: the volume bounds scaled by the
/// compatible fraction.
pub fn ball_size_bounds(p: &EnsembleParams, d: f64) -> Result<(f64, f64)> {
    let r = p
        .mult
        .regular_multiplicity()
        .ok_or_else(|| Error::InvalidParameters("ball bounds need a regular multiplicity vector".into()))?;
    let (lo, hi) = ln_ball_volume_bounds(r, p.mult.m(), d);
    let f = ln_compatible_fraction(p);
    Ok((libm::exp(lo + f), libm::exp(hi + f)))
}

/// Draws `Z` (or `E`) uniformly among sets of the given size.
pub fn sample_constraints(p: &EnsembleParams, src: &mut NoiseSource) -> ConstraintSet {
    let n = p.mult.n() as u64;
    let entry = |k: u64| Entry::new((k / n) as usize, (k % n) as usize);
    let population = p.population().to_u64().expect("population fits in 64 bits");
    let picks = partial_shuffle(population, p.count, src);
    let result = match p.kind {
        EnsembleKind::Zeros => ConstraintSet::new(p.mult.clone(), picks.into_iter().map(entry), core::iter::empty()),
        EnsembleKind::Equalities => ConstraintSet::new(
            p.mult.clone(),
            core::iter::empty(),
            picks.into_iter().map(|k| {
                let (a, b) = unrank_pair(k);
                (entry(a), entry(b))
            }),
        ),
    };
    result.expect("distinct picks give distinct constraints")
}

/// The first `k` entries of a uniformly shuffled `0..population`, without
/// materializing the range.
fn partial_shuffle(population: u64, k: usize, src: &mut NoiseSource) -> Vec<u64> {
    let mut swapped: BTreeMap<u64, u64> = BTreeMap::new();
    let mut out = Vec::with_capacity(k);
    for i in 0..k as u64 {
        let j = i + src.below(population - i);
        let vi = *swapped.get(&i).unwrap_or(&i);
        let vj = *swapped.get(&j).unwrap_or(&j);
        swapped.insert(j, vi);
        out.push(vj);
    }
    out
}

/// `k`-th pair `(a, b)`, `a < b`, in colex order: `k = C(b, 2) + a`.
fn unrank_pair(k: u64) -> (u64, u64) {
    let mut b = ((1.0 + libm::sqrt(1.0 + 8.0 * k as f64)) / 2.0) as u64;
    while b * (b.saturating_sub(1)) / 2 > k {
        b -= 1;
    }
    while (b + 1) * b / 2 <= k {
        b += 1;
    }
    (k - b * (b - 1) / 2, b)
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: libm::sqrt(var / k),
            samples: xs.len(),
        }
    }
}

/// Monte Carlo code size: exhaustive count for each of `trials` draws.
pub fn monte_carlo_cardinality(p: &EnsembleParams, trials: usize, seed: u64) -> Estimate {
    let sizes: Vec<f64> = (0..trials as u64)
        .map(|k| {
            let mut src = NoiseSource::stream(seed, 0, k);
            count_codebook(&sample_constraints(p, &mut src)) as f64
        })
        .collect();
    Estimate::from_samples(&sizes)
}

/// Monte Carlo `E[L_d]`: each trial draws a uniformly random origin `y`
/// and a constraint set, then counts codewords within Chebyshev distance
/// `d` of `y` (initial vector `1..=m`).
pub fn monte_carlo_ball_size(p: &EnsembleParams, d: f64, trials: usize, seed: u64) -> Estimate {
    let sizes: Vec<f64> = (0..trials as u64)
        .map(|k| {
            let mut src = NoiseSource::stream(seed, 1, k);
            let mut y = Multipermutation::sorted(&p.mult).into_symbols();
            src.shuffle(&mut y);
            let c = sample_constraints(p, &mut src);
            ball_count(&c, &y, d) as f64
        })
        .collect();
    Estimate::from_samples(&sizes)
}

/// Codewords of `c` within Chebyshev distance `d` of the symbol word `y`.
pub fn ball_count(c: &ConstraintSet, y: &[usize], d: f64) -> usize {
    let mult = c.multiplicity();
    let (m, n) = (mult.m(), mult.n());
    let mut allowed = vec![false; m * n];
    for j in 0..n {
        for s in 1..=m {
            allowed[(s - 1) * n + j] = libm::fabs(s as f64 - y[j] as f64) <= d;
        }
    }
    for e in c.zeros() {
        allowed[e.row * n + e.col] = false;
    }
    let eq: Vec<(Entry, Entry)> = c.equalities().iter().copied().collect();
    let mut left = mult.counts().to_vec();
    let mut cur = Vec::with_capacity(n);
    let mut count = 0;
    ball_dfs(&allowed, n, &mut left, &mut cur, &eq, &mut count);
    count
}

fn ball_dfs(
    allowed: &[bool],
    n: usize,
    left: &mut [usize],
    cur: &mut Vec<usize>,
    eq: &[(Entry, Entry)],
    count: &mut usize,
) {
    let j = cur.len();
    if j == n {
        if eq
            .iter()
            .all(|(a, b)| (cur[a.col] == a.row + 1) == (cur[b.col] == b.row + 1))
        {
            *count += 1;
        }
        return;
    }
    for s in 0..left.len() {
        if left[s] > 0 && allowed[s * n + j] {
            left[s] -= 1;
            cur.push(s + 1);
            ball_dfs(allowed, n, left, cur, eq, count);
            cur.pop();
            left[s] += 1;
        }
    }
}

/// One row of the ST versus random-ensemble size comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub d: usize,
    pub m: usize,
    pub kappa: usize,
    /// `ln(|ST code|) / d`.
    pub c_st: f64,
    /// `ln(E[A]) / d` for a random code with the same number of zeros.
    pub c_r: f64,
}

/// For each `d`, the ST code with `m = ratio * d` and regular multiplicity
/// `r` against the random fixed-at-zero ensemble with the same `kappa`.
pub fn scaling_report(r: usize, ratio: usize, ds: impl IntoIterator<Item = usize>) -> Result<Vec<ScalingRow>> {
    ds.into_iter()
        .map(|d| {
            let m = ratio * d;
            let st = crate::codes::StCodeParams::new(r, d, m)?;
            let kappa = crate::codes::st_kappa(&st);
            let p = EnsembleParams::zeros(st.multiplicity(), kappa)?;
            let ln_ea = ln_biguint(&multinomial(&p.mult)) + ln_compatible_fraction(&p);
            Ok(ScalingRow {
                d,
                m,
                kappa,
                c_st: ln_biguint(&st.cardinality()) / d as f64,
                c_r: ln_ea / d as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn mult(r: &[usize]) -> MultiplicityVector {
        MultiplicityVector::new(r.to_vec()).unwrap()
    }

    fn rational(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    /// All k-subsets of 0..n.
    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn counts() {
        let p = EnsembleParams::zeros(mult(&[1, 2, 1]), 2).unwrap();
        assert_eq!(choice_space_size(&p), BigUint::from(66u32));
        assert_eq!(compatible_count(&p), BigUint::from(28u32));
        assert_eq!(expected_cardinality(&p), rational(56, 11));
        let p0 = EnsembleParams::zeros(mult(&[1, 2, 1]), 0).unwrap();
        assert_eq!(choice_space_size(&p0), BigUint::from(1u32));
        assert_eq!(expected_cardinality(&p0), rational(12, 1));
        let e = EnsembleParams::equalities(mult(&[1, 1]), 1).unwrap();
        assert_eq!(choice_space_size(&e), BigUint::from(6u32));
        assert_eq!(compatible_count(&e), BigUint::from(2u32));
        assert_eq!(expected_cardinality(&e), rational(2, 3));
        assert!(EnsembleParams::zeros(mult(&[1, 1]), 5).is_err());
    }

    #[test]
    fn expectation_matches_exhaustive_average() {
        let r = mult(&[1, 2, 1]);
        for kappa in 1..=3 {
            let p = EnsembleParams::zeros(r.clone(), kappa).unwrap();
            let all = subsets(12, kappa);
            let total: usize = all
                .iter()
                .map(|z| {
                    let c = ConstraintSet::new(r.clone(), z.iter().map(|&k| Entry::new(k / 4, k % 4)), []).unwrap();
                    count_codebook(&c)
                })
                .sum();
            assert_eq!(
                expected_cardinality(&p),
                BigRational::new(BigInt::from(total), BigInt::from(all.len()))
            );
        }
        // Equalities, r = (1,1): all 6 pairs.
        let r = mult(&[1, 1]);
        let total: usize = subsets(4, 2)
            .iter()
            .map(|pair| {
                let (a, b) = (pair[0], pair[1]);
                let c =
                    ConstraintSet::new(r.clone(), [], [(Entry::new(a / 2, a % 2), Entry::new(b / 2, b % 2))]).unwrap();
                count_codebook(&c)
            })
            .sum();
        let e = EnsembleParams::equalities(r, 1).unwrap();
        assert_eq!(
            expected_cardinality(&e),
            BigRational::new(BigInt::from(total), BigInt::from(6))
        );
    }

    #[test]
    fn sampling_is_uniform_and_complete() {
        let r = mult(&[1, 2]);
        let full = EnsembleParams::zeros(r.clone(), 6).unwrap();
        let mut src = NoiseSource::new(3);
        assert_eq!(sample_constraints(&full, &mut src).kappa(), 6);
        let p = EnsembleParams::zeros(r, 2).unwrap();
        let draws = 30_000;
        let mut hits = [0usize; 6];
        for _ in 0..draws {
            for e in sample_constraints(&p, &mut src).zeros() {
                hits[e.row * 3 + e.col] += 1;
            }
        }
        let q = 2.0 / 6.0;
        let sd = (draws as f64 * q * (1.0 - q)).sqrt();
        for h in hits {
            assert!((h as f64 - draws as f64 * q).abs() < 4.0 * sd);
        }
        let e = EnsembleParams::equalities(mult(&[2, 2]), 28).unwrap();
        assert_eq!(sample_constraints(&e, &mut src).iota(), 28);
    }

    #[test]
    fn pair_unranking() {
        let mut k = 0;
        for b in 1..200u64 {
            for a in 0..b {
                assert_eq!(unrank_pair(k), (a, b));
                k += 1;
            }
        }
    }

    #[test]
    fn ball_bounds() {
        let (lo, hi) = ln_ball_volume_bounds(2, 6, 1.0);
        assert!((lo.exp() - 114.0).abs() < 1.0, "{}", lo.exp());
        assert!((hi.exp() - 8100.0).abs() < 1e-6);
        let (lo, hi) = ln_ball_volume_bounds(1, 5, 0.0);
        assert!(lo <= 0.0 && 0.0 <= hi);
        for (r, m, d) in [(1, 4, 1.0), (3, 30, 3.5), (2, 10, 2.0)] {
            let (lo, hi) = ln_ball_volume_bounds(r, m, d);
            assert!(lo <= hi);
        }
        // d = 0: only the word itself.
        let y = [1, 2, 1, 2];
        assert_eq!(ball_count(&ConstraintSet::unconstrained(mult(&[2, 2])), &y, 0.0), 1);
    }

    #[test]
    fn scaling_constant() {
        for row in scaling_report(3, 5, 2..=6).unwrap() {
            assert!((row.c_st - 18.9405).abs() < 1e-3, "{}", row.c_st);
            assert!(row.c_r < row.c_st);
        }
    }
}
