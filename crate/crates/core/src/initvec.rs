//! Decoding when the initial vector is unknown.
//!
//! Two models: a fixed-spacing vector `t = (D, 2D, ..., mD) + eta` with an
//! unknown offset, and a grid model where every `t_i` is a multiple of `D`,
//! consecutive levels are at least `D` apart and (optionally) the top two
//! levels are exactly `D` apart. The grid model is decoded by alternating a
//! least-squares estimate of `t` with soft decoding.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::channels::{llr, quantize_rank, ChannelOutput, ChannelSpec};
use crate::codes::{bounded_distance_decode, ConstraintSet, StCodeParams};
use crate::decoders::chebyshev::ChebyshevDecoder;
use crate::decoders::{admm_decode, AdmmOptions, ChebyshevMode, DecodeResult, FactorGraph};
use crate::perm::{InitialVector, MultiplicityVector};
use crate::polytope::RelaxedMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub delta: f64,
    /// Enforce `t_m - t_(m-1) = delta`.
    pub largest_cell: bool,
}

impl GridSpec {
    pub fn new(delta: f64, largest_cell: bool) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "grid resolution must be positive, got {delta}"
            )));
        }
        Ok(Self { delta, largest_cell })
    }
}

/// `eta_hat = (sum_j y_j - sum_i r_i i D) / n`.
pub fn estimate_offset(y: &[f64], r: &MultiplicityVector, delta: f64) -> Result<f64> {
    if y.len() != r.n() {
        return Err(Error::DimensionMismatch {
            expected: r.n(),
            got: y.len(),
        });
    }
    let levels: f64 = r
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * (i + 1) as f64 * delta)
        .sum();
    Ok((y.iter().sum::<f64>() - levels) / y.len() as f64)
}

/// Least-squares initial vector for a decided word `x_hat` (1-based symbols
/// over `1..=m`):
///
/// `min sum_j (y_j - t_(x_j))^2` s.t. `t_(i+1) - t_i >= D`, `t_1 >= 0`, and
/// `t_m - t_(m-1) = D` when `largest_cell` is set.
///
/// With `u_i = t_i - (i-1) D` this is a weighted isotonic regression of the
/// per-symbol means, solved exactly by pool-adjacent-violators and clipped
/// at zero. Symbols absent from `x_hat` carry no weight and copy a
/// neighbouring level.
pub fn grid_qp(y: &[f64], x_hat: &[usize], m: usize, grid: &GridSpec) -> Result<InitialVector> {
    if y.len() != x_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: x_hat.len(),
            got: y.len(),
        });
    }
    if let Some(&s) = x_hat.iter().find(|&&s| s == 0 || s > m) {
        return Err(Error::InvalidMultipermutation(format!("symbol {s} outside 1..={m}")));
    }
    let d = grid.delta;
    let mut w = vec![0.0f64; m];
    let mut sum = vec![0.0f64; m];
    for (&s, &v) in x_hat.iter().zip(y) {
        w[s - 1] += 1.0;
        sum[s - 1] += v;
    }
    // Blocks of (first index, last index, weight, weighted sum of targets).
    let mut blocks: Vec<(usize, usize, f64, f64)> = Vec::with_capacity(m);
    let push = |blocks: &mut Vec<(usize, usize, f64, f64)>, b: (usize, usize, f64, f64)| {
        let mut b = b;
        while let Some(&prev) = blocks.last() {
            // Zero-weight blocks never violate; weighted ones pool when out of order.
            if prev.2 > 0.0 && b.2 > 0.0 && prev.3 / prev.2 > b.3 / b.2 {
                blocks.pop();
                b = (prev.0, b.1, prev.2 + b.2, prev.3 + b.3);
            } else {
                break;
            }
        }
        blocks.push(b);
    };
    let target_sum = |i: usize| sum[i] - w[i] * i as f64 * d;
    let last = if grid.largest_cell && m >= 2 { m - 2 } else { m - 1 };
    for i in 0..last {
        push(&mut blocks, (i, i, w[i], target_sum(i)));
    }
    let tail: Vec<usize> = (last..m).collect();
    push(
        &mut blocks,
        (
            last,
            m - 1,
            tail.iter().map(|&i| w[i]).sum(),
            tail.iter().map(|&i| target_sum(i)).sum(),
        ),
    );
    // Zero-weight blocks may sit between weighted blocks that still violate.
    let weighted: Vec<(usize, usize, f64, f64)> = blocks.iter().copied().filter(|b| b.2 > 0.0).collect();
    let mut pooled: Vec<(usize, usize, f64, f64)> = Vec::new();
    for b in weighted {
        push(&mut pooled, b);
    }
    let mut u = vec![f64::NAN; m];
    for &(a, b, wt, s) in &pooled {
        let v = (s / wt).max(0.0);
        u[a..=b].iter_mut().for_each(|x| *x = v);
    }
    // Fill unweighted symbols from the left neighbour, then the right.
    for i in 1..m {
        if u[i].is_nan() {
            u[i] = u[i - 1];
        }
    }
    for i in (0..m.saturating_sub(1)).rev() {
        if u[i].is_nan() {
            u[i] = u[i + 1];
        }
    }
    let t: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(i, &v)| if v.is_nan() { 0.0 } else { v } + i as f64 * d)
        .collect();
    InitialVector::new(t)
}

/// Nearest multiples of `D`, then pushed up left to right so consecutive
/// levels are at least `D` apart, then `t_m = t_(m-1) + D` under the
/// largest-cell condition.
pub fn round_to_grid(t: &InitialVector, grid: &GridSpec) -> InitialVector {
    let d = grid.delta;
    let mut out: Vec<f64> = t.values().iter().map(|&v| d * libm::round(v / d)).collect();
    if let Some(first) = out.first_mut() {
        *first = first.max(0.0);
    }
    for i in 1..out.len() {
        if out[i] < out[i - 1] + d {
            out[i] = out[i - 1] + d;
        }
    }
    let m = out.len();
    if grid.largest_cell && m >= 2 {
        out[m - 1] = out[m - 2] + d;
    }
    InitialVector::new(out).expect("levels are at least delta apart")
}

/// First-pass decoder on the quantized ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HardStart {
    ChebyshevLp,
    /// Bounded-distance decoding of an ST code; failures keep the ranking.
    Bdd(StCodeParams),
}

/// Decoder run with the estimated initial vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SoftStep {
    ChebyshevLp,
    /// ADMM on AWGN log-likelihoods with the given noise level.
    Admm {
        sigma: f64,
        opts: AdmmOptions,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurboOptions {
    pub grid: GridSpec,
    pub iterations: usize,
    pub hard: HardStart,
    pub soft: SoftStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboResult {
    pub result: DecodeResult,
    /// Rounded estimate used by each turbo iteration.
    pub estimates: Vec<InitialVector>,
}

/// Turbo decoder for one code.
#[derive(Debug, Clone)]
pub struct TurboDecoder {
    code: ConstraintSet,
    cheb: ChebyshevDecoder,
    graph: FactorGraph,
}

impl TurboDecoder {
    pub fn new(code: &ConstraintSet) -> Self {
        let cheb = ChebyshevDecoder::new(code);
        Self {
            code: code.clone(),
            graph: cheb.graph().clone(),
            cheb,
        }
    }

    pub fn decode(&self, y: &[f64], opts: &TurboOptions) -> Result<TurboResult> {
        let mult = self.code.multiplicity();
        let m = mult.m();
        let natural = InitialVector::natural(m);
        let mut result = match opts.hard {
            HardStart::ChebyshevLp => self.cheb.decode(y, &natural, ChebyshevMode::Hard)?,
            HardStart::Bdd(p) => {
                let q = quantize_rank(y, mult)?;
                let word = bounded_distance_decode(q.symbols(), &p).map(|x| x.into_symbols());
                hard_result(word.unwrap_or_else(|| q.into_symbols()), m)
            }
        };
        let mut estimates = Vec::with_capacity(opts.iterations);
        for _ in 0..opts.iterations {
            let t_star = grid_qp(y, &result.rounded, m, &opts.grid)?;
            let t_hat = round_to_grid(&t_star, &opts.grid);
            result = match opts.soft {
                SoftStep::ChebyshevLp => self.cheb.decode(y, &t_hat, ChebyshevMode::Soft)?,
                SoftStep::Admm { sigma, opts: admm } => {
                    let ch = ChannelSpec::awgn(sigma)?;
                    let gamma = llr(&ChannelOutput::Real(y.to_vec()), &t_hat, &ch)?;
                    admm_decode(&gamma, &self.graph, &admm)
                }
            };
            estimates.push(t_hat);
        }
        Ok(TurboResult { result, estimates })
    }
}

/// Wraps a hard decision as a decode result.
fn hard_result(word: Vec<usize>, m: usize) -> DecodeResult {
    let n = word.len();
    let mut matrix = RelaxedMatrix::zeros(m, n);
    for (j, &s) in word.iter().enumerate() {
        matrix.set(s - 1, j, 1.0);
    }
    DecodeResult {
        matrix,
        rounded: word,
        integral: false,
        iterations: 0,
        objective: 0.0,
        status: crate::decoders::DecodeStatus::Converged,
    }
}

pub fn turbo_decode(y: &[f64], c: &ConstraintSet, opts: &TurboOptions) -> Result<TurboResult> {
    TurboDecoder::new(c).decode(y, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::NoiseSource;
    use crate::codes::{encode_st, enumerate_codebook, st_constraints};
    use crate::perm::Multipermutation;
    use num_bigint::BigUint;

    fn objective(y: &[f64], x: &[usize], t: &[f64]) -> f64 {
        y.iter().zip(x).map(|(v, &s)| (v - t[s - 1]).powi(2)).sum()
    }

    /// Active-set oracle: every subset of the inequality constraints is set
    /// to equality, the equality-constrained least squares is solved by
    /// block means, and the best feasible candidate wins.
    fn oracle(y: &[f64], x: &[usize], m: usize, grid: &GridSpec) -> Vec<f64> {
        let d = grid.delta;
        let mut w = vec![0.0; m];
        let mut s = vec![0.0; m];
        for (&k, &v) in x.iter().zip(y) {
            w[k - 1] += 1.0;
            s[k - 1] += v;
        }
        // Constraint k in 0..m-1: gap between k and k+1 equals d. Constraint m-1: t_1 = 0.
        let n_gap = m - 1;
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 0u32..(1 << m) {
            let tight = |k: usize| mask >> k & 1 == 1;
            if grid.largest_cell && m >= 2 && !tight(m - 2) {
                continue;
            }
            let zero_anchor = tight(n_gap);
            // Blocks of indices joined by tight gaps; t_i = base_b + (i - start) d.
            let mut t = vec![0.0; m];
            let mut start = 0;
            while start < m {
                let mut end = start;
                while end < n_gap && tight(end) {
                    end += 1;
                }
                let (mut ww, mut ss) = (0.0, 0.0);
                for i in start..=end {
                    ww += w[i];
                    ss += s[i] - w[i] * (i - start) as f64 * d;
                }
                let base = if start == 0 && zero_anchor {
                    0.0
                } else if ww > 0.0 {
                    ss / ww
                } else {
                    f64::NAN
                };
                for i in start..=end {
                    t[i] = base + (i - start) as f64 * d;
                }
                start = end + 1;
            }
            if t.iter().any(|v| v.is_nan()) {
                continue;
            }
            let feasible = t[0] >= -1e-12
                && (0..n_gap).all(|k| t[k + 1] - t[k] >= d - 1e-12)
                && (!grid.largest_cell || m < 2 || (t[m - 1] - t[m - 2] - d).abs() < 1e-12);
            if feasible {
                let f = objective(y, x, &t);
                if best.as_ref().map_or(true, |b| f < b.0 - 1e-15) {
                    best = Some((f, t));
                }
            }
        }
        best.unwrap().1
    }

    #[test]
    fn grid_qp_matches_oracle() {
        let mut src = NoiseSource::new(51);
        for trial in 0..3000 {
            let m = 2 + src.below(4) as usize;
            let r = 1 + src.below(3) as usize;
            let mut x = Multipermutation::sorted(&MultiplicityVector::regular(r, m).unwrap()).into_symbols();
            src.shuffle(&mut x);
            let grid = GridSpec::new(0.5 + src.uniform(), trial % 2 == 0).unwrap();
            let y: Vec<f64> = x.iter().map(|&s| s as f64 * 0.7 + 1.5 * src.gaussian()).collect();
            let t = grid_qp(&y, &x, m, &grid).unwrap();
            let want = oracle(&y, &x, m, &grid);
            let err = t
                .values()
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "{:?} vs {want:?}", t.values());
            let tv = t.values();
            assert!(tv[0] >= -1e-12);
            for k in 0..m - 1 {
                assert!(tv[k + 1] - tv[k] >= grid.delta - 1e-12);
            }
            if grid.largest_cell {
                assert!((tv[m - 1] - tv[m - 2] - grid.delta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_qp_noise_free_and_missing_symbols() {
        let grid = GridSpec::new(1.0, true).unwrap();
        let t = [0.5, 2.0, 4.0, 5.0];
        let x = [1, 2, 3, 4, 4, 3, 2, 1];
        let y: Vec<f64> = x.iter().map(|&s| t[s - 1]).collect();
        let est = grid_qp(&y, &x, 4, &grid).unwrap();
        for (a, b) in est.values().iter().zip(t) {
            assert!((a - b).abs() < 1e-12);
        }
        // Symbol 2 absent.
        let x = [1, 3, 4, 1, 3, 4];
        let y = [0.0, 3.0, 4.0, 0.0, 3.0, 4.0];
        let est = grid_qp(&y, &x, 4, &grid).unwrap();
        let v = est.values();
        assert_eq!(v[0], 0.0);
        assert!(v[1] >= 1.0 && v[2] - v[1] >= 1.0);
        assert!((v[3] - v[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rounding_rules() {
        let free = GridSpec::new(1.0, false).unwrap();
        let t = InitialVector::new(vec![1.0, 3.0, 4.0]).unwrap();
        assert_eq!(round_to_grid(&t, &free), t);
        let t = InitialVector::new(vec![0.4, 1.6]).unwrap();
        assert_eq!(round_to_grid(&t, &free).values(), &[0.0, 2.0]);
        let t = InitialVector::new(vec![1.4, 1.6]).unwrap();
        assert_eq!(round_to_grid(&t, &free).values(), &[1.0, 2.0]);
        let cell = GridSpec::new(1.0, true).unwrap();
        assert_eq!(round_to_grid(&t, &cell).values(), &[1.0, 2.0]);
        let t = InitialVector::new(vec![0.2, 2.4, 2.6, 5.1]).unwrap();
        assert_eq!(round_to_grid(&t, &cell).values(), &[0.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn offset_estimate() {
        let p = StCodeParams::new(2, 3, 6).unwrap();
        let book = enumerate_codebook(&st_constraints(&p), 1000).unwrap();
        let r = p.multiplicity();
        for (k, x) in book.iter().enumerate() {
            let eta = 0.25 * k as f64 - 7.0;
            let y: Vec<f64> = x.symbols().iter().map(|&s| 0.5 * s as f64 + eta).collect();
            assert!((estimate_offset(&y, &r, 0.5).unwrap() - eta).abs() < 1e-12);
        }
        let x = &book[0];
        let y: Vec<f64> = x.symbols().iter().map(|&s| s as f64).collect();
        assert_eq!(estimate_offset(&y, &r, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn turbo_noise_free() {
        let p = StCodeParams::new(2, 3, 6).unwrap();
        let c = st_constraints(&p);
        let dec = TurboDecoder::new(&c);
        let x = encode_st(&BigUint::from(137u32), &p).unwrap();
        let t = InitialVector::new(vec![2.0, 3.0, 5.0, 6.0, 8.0, 9.0]).unwrap();
        let y = x.values(&t);
        for iterations in 0..3 {
            let opts = TurboOptions {
                grid: GridSpec::new(1.0, true).unwrap(),
                iterations,
                hard: HardStart::ChebyshevLp,
                soft: SoftStep::ChebyshevLp,
            };
            let out = dec.decode(&y, &opts).unwrap();
            assert_eq!(out.result.rounded, x.symbols());
            if iterations > 0 {
                assert_eq!(out.estimates.last().unwrap(), &t);
            }
        }
        let bdd = TurboOptions {
            grid: GridSpec::new(1.0, true).unwrap(),
            iterations: 1,
            hard: HardStart::Bdd(p),
            soft: SoftStep::Admm {
                sigma: 0.5,
                opts: AdmmOptions::default(),
            },
        };
        assert_eq!(dec.decode(&y, &bdd).unwrap().result.rounded, x.symbols());
    }
}
