//! Memoryless channels, negative log-likelihood matrices and quantization.
//!
//! Random streams are `ChaCha8Rng` instances keyed by `(seed, a, b)` through
//! a splitmix64 mix, so every trial of a simulation has its own independent
//! and reproducible stream. Gaussian noise uses the Marsaglia polar method
//! on 53-bit uniforms; the second variate of each pair is kept for the next
//! call.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::perm::{InitialVector, Multipermutation, MultiplicityVector};
use crate::{Error, Result};

/// Probabilities are clamped to this range before taking logs.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    /// Additive white Gaussian noise with standard deviation `sigma`.
    Awgn { sigma: f64 },
    /// q-ary symmetric channel: a symbol survives with probability `1 - p`
    /// and otherwise becomes one of the other `m - 1` symbols uniformly.
    Qsc { p: f64 },
}

impl ChannelSpec {
    pub fn awgn(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidChannel(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self::Awgn { sigma })
    }

    /// AWGN at `snr_db = 10 log10(1 / sigma^2)`.
    pub fn awgn_snr_db(snr_db: f64) -> Result<Self> {
        Self::awgn(sigma_from_snr_db(snr_db))
    }

    pub fn qsc(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("p must lie in [0, 1), got {p}")));
        }
        Ok(Self::Qsc { p })
    }
}

pub fn sigma_from_snr_db(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 20.0)
}

pub fn snr_db_from_sigma(sigma: f64) -> f64 {
    -20.0 * libm::log10(sigma)
}

/// What the receiver sees.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelOutput {
    Real(Vec<f64>),
    Symbols(Vec<usize>),
}

impl ChannelOutput {
    pub fn len(&self) -> usize {
        match self {
            Self::Real(v) => v.len(),
            Self::Symbols(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Real view; symbols are mapped through `t`.
    pub fn to_real(&self, t: &InitialVector) -> Vec<f64> {
        match self {
            Self::Real(v) => v.clone(),
            Self::Symbols(v) => v.iter().map(|&s| t.value(s)).collect(),
        }
    }
}

/// The `m x n` matrix `Gamma(y)` with `Gamma_ij = -log Pr(y_j | t_i)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrMatrix {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl LlrMatrix {
    pub fn new(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidChannel("non-finite log-likelihood".into()));
        }
        Ok(Self { m, n, data })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `Gamma . vec(X)` for a codeword given by its symbols.
    pub fn cost(&self, symbols: &[usize]) -> f64 {
        symbols.iter().enumerate().map(|(j, &s)| self.get(s - 1, j)).sum()
    }

    /// `Gamma . vec(Z)` for a relaxed `m x n` matrix, row-major.
    pub fn cost_relaxed(&self, z: &[f64]) -> f64 {
        self.data.iter().zip(z).map(|(g, x)| g * x).sum()
    }
}

/// Sends the codeword through the channel. AWGN transmits `t X`; the QSC
/// transmits symbols.
pub fn transmit(x: &Multipermutation, t: &InitialVector, ch: &ChannelSpec, rng: &mut NoiseSource) -> ChannelOutput {
    match *ch {
        ChannelSpec::Awgn { sigma } => ChannelOutput::Real(
            x.symbols()
                .iter()
                .map(|&s| t.value(s) + sigma * rng.gaussian())
                .collect(),
        ),
        ChannelSpec::Qsc { p } => {
            let m = x.multiplicity().m();
            ChannelOutput::Symbols(
                x.symbols()
                    .iter()
                    .map(|&s| {
                        if m > 1 && rng.uniform() < p {
                            let k = 1 + rng.below(m as u64 - 1) as usize;
                            // the k-th symbol after s, cyclically
                            (s - 1 + k) % m + 1
                        } else {
                            s
                        }
                    })
                    .collect(),
            )
        }
    }
}

/// Negative log-likelihoods of the received word.
///
/// AWGN: `gamma_i(y) = log(sqrt(2 pi) sigma) + (y - t_i)^2 / (2 sigma^2)`.
/// QSC: `-log(1 - p)` where `y = i`, `-log(p / (m - 1))` elsewhere, with `p`
/// clamped to `[1e-12, 1 - 1e-12]`.
pub fn llr(y: &ChannelOutput, t: &InitialVector, ch: &ChannelSpec) -> Result<LlrMatrix> {
    let (m, n) = (t.m(), y.len());
    let mut data = vec![0.0; m * n];
    match (ch, y) {
        (ChannelSpec::Awgn { sigma }, ChannelOutput::Real(y)) => {
            let phi = libm::log(libm::sqrt(2.0 * PI) * sigma);
            let theta = 1.0 / (2.0 * sigma * sigma);
            for i in 0..m {
                let ti = t.values()[i];
                for (j, &yj) in y.iter().enumerate() {
                    data[i * n + j] = phi + theta * (yj - ti) * (yj - ti);
                }
            }
        }
        (ChannelSpec::Qsc { p }, ChannelOutput::Symbols(y)) => {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let hit = -libm::log(1.0 - p);
            let miss = if m > 1 { -libm::log(p / (m - 1) as f64) } else { hit };
            for i in 0..m {
                for (j, &yj) in y.iter().enumerate() {
                    if yj == 0 || yj > m {
                        return Err(Error::InvalidChannel(format!("received symbol {yj} outside 1..={m}")));
                    }
                    data[i * n + j] = if yj == i + 1 { hit } else { miss };
                }
            }
        }
        _ => {
            return Err(Error::InvalidChannel(
                "channel output does not match the channel kind".into(),
            ))
        }
    }
    LlrMatrix::new(m, n, data)
}

/// Ranks the outputs: the `r_1` smallest get symbol 1, the next `r_2`
/// symbol 2, and so on. Ties go to the earlier position first.
pub fn quantize_rank(y: &[f64], mult: &MultiplicityVector) -> Result<Multipermutation> {
    if y.len() != mult.n() {
        return Err(Error::DimensionMismatch {
            expected: mult.n(),
            got: y.len(),
        });
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap_or_else(|| y[a].total_cmp(&y[b])));
    let mut symbols = vec![0usize; y.len()];
    let mut k = 0;
    for (idx, &r) in mult.counts().iter().enumerate() {
        for &pos in &order[k..k + r] {
            symbols[pos] = idx + 1;
        }
        k += r;
    }
    Multipermutation::new(symbols, mult.clone())
}

/// splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream `(seed, a, b)`.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b)
}

/// Seeded random source with uniform and Gaussian draws.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Independent stream for `(seed, a, b)`, e.g. (seed, snr index, trial index).
    pub fn stream(seed: u64, a: u64, b: u64) -> Self {
        Self::new(derive_seed(seed, a, b))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..bound` without modulo bias. `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Standard normal variate (Marsaglia polar method).
    pub fn gaussian(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// Shuffles `v` in place (Fisher-Yates).
    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            v.swap(i, j);
        }
    }
}
