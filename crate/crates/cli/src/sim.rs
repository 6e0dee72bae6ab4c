//! Word-error-rate simulation.
//!
//! Trials run in fixed-size chunks on the rayon pool and are reduced in
//! trial order, so the stopping point and every count depend only on the
//! config. Trial `k` at channel point `s` draws its codeword and noise from
//! the stream `(seed, s, k)`, which every decoder shares.

use std::io::{self, Write};
use std::time::Instant;

use multiperm::channels::{llr, quantize_rank, transmit, ChannelOutput, ChannelSpec, NoiseSource};
use multiperm::codes::{bounded_distance_decode, encode_st, enumerate_codebook, DEFAULT_ENUMERATION_CAP};
use multiperm::decoders::chebyshev::ChebyshevDecoder;
use multiperm::decoders::{
    admm_decode, exhaustive_min_chebyshev, exhaustive_ml, ChebyshevMode, DecodeStatus, FactorGraph,
};
use multiperm::initvec::{HardStart, SoftStep, TurboDecoder, TurboOptions};
use multiperm::{InitialVector, Multipermutation};
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::config::{ChannelPoint, CodewordChoice, DecoderKind, SimConfig, TurboHard, TurboSoft};

pub const CSV_HEADER: &str = "snr_db,decoder,trials,word_errors,wer,avg_iterations,avg_decode_ms";

const CHUNK: u64 = 256;

/// Outcome of one decode.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Decided word; `None` when the decoder declares failure.
    pub word: Option<Vec<usize>>,
    pub iterations: usize,
    /// ML certificate, for decoders that have one.
    pub integral: bool,
}

/// Everything the decoders of one code share. Immutable, so one instance
/// serves every worker.
pub struct Roster {
    cfg: SimConfig,
    graph: FactorGraph,
    cheb: ChebyshevDecoder,
    turbo: TurboDecoder,
    codebook: Option<Vec<Multipermutation>>,
    natural: InitialVector,
}

impl Roster {
    pub fn new(cfg: &SimConfig) -> multiperm::Result<Self> {
        let c = &cfg.code.constraints;
        let needs_book = cfg
            .decoders
            .iter()
            .any(|d| matches!(d, DecoderKind::Ml | DecoderKind::MinDist))
            || (cfg.codeword == CodewordChoice::Random && cfg.code.st.is_none());
        let codebook = if needs_book {
            let book = enumerate_codebook(c, DEFAULT_ENUMERATION_CAP)?;
            if book.is_empty() {
                return Err(multiperm::Error::InvalidCodeword("the code is empty".into()));
            }
            Some(book)
        } else {
            None
        };
        let cheb = ChebyshevDecoder::new(c);
        Ok(Self {
            graph: cheb.graph().clone(),
            turbo: TurboDecoder::new(c),
            cheb,
            codebook,
            natural: InitialVector::natural(c.multiplicity().m()),
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Transmitted word for a trial, drawn first from the trial's stream.
    pub fn codeword(&self, rng: &mut NoiseSource) -> Multipermutation {
        match &self.cfg.codeword {
            CodewordChoice::Fixed(x) => x.clone(),
            CodewordChoice::Random => match (&self.cfg.code.st, &self.codebook) {
                (_, Some(book)) => book[rng.below(book.len() as u64) as usize].clone(),
                (Some(p), None) => {
                    // Uniform message by rejection over whole 64-bit words.
                    let total = p.cardinality();
                    let bits = total.bits();
                    let msg = loop {
                        let words = (bits as usize).div_ceil(64);
                        let mut digits: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
                        let spare = words as u64 * 64 - bits;
                        if let Some(top) = digits.last_mut() {
                            *top >>= spare;
                        }
                        let v = BigUint::from_slice(
                            &digits
                                .iter()
                                .flat_map(|d| [*d as u32, (d >> 32) as u32])
                                .collect::<Vec<_>>(),
                        );
                        if v < total {
                            break v;
                        }
                    };
                    encode_st(&msg, p).expect("message below the cardinality")
                }
                (None, None) => unreachable!("non-ST codes keep a codebook"),
            },
        }
    }

    fn hard_word(&self, y: &ChannelOutput) -> multiperm::Result<Vec<usize>> {
        match y {
            ChannelOutput::Real(v) => Ok(quantize_rank(v, self.cfg.code.multiplicity())?.into_symbols()),
            ChannelOutput::Symbols(s) => Ok(s.clone()),
        }
    }

    /// Runs one decoder on a received word.
    pub fn decode(&self, kind: DecoderKind, y: &ChannelOutput, ch: &ChannelSpec) -> multiperm::Result<Decision> {
        let t = &self.cfg.initial_vector;
        let hard = |word: Option<Vec<usize>>| Decision {
            word,
            iterations: 0,
            integral: false,
        };
        let soft = |res: multiperm::decoders::DecodeResult| Decision {
            word: (res.status != DecodeStatus::Infeasible).then_some(res.rounded),
            iterations: res.iterations,
            integral: res.integral,
        };
        Ok(match kind {
            DecoderKind::Admm => {
                let gamma = llr(y, t, ch)?;
                soft(admm_decode(&gamma, &self.graph, &self.cfg.admm))
            }
            DecoderKind::Ml => {
                let gamma = llr(y, t, ch)?;
                let book = self.codebook.as_deref().expect("codebook");
                hard(Some(exhaustive_ml(&gamma, book)?.into_symbols()))
            }
            DecoderKind::MinDist => {
                let ranked: Vec<f64> = self.hard_word(y)?.iter().map(|&s| s as f64).collect();
                let book = self.codebook.as_deref().expect("codebook");
                hard(Some(
                    exhaustive_min_chebyshev(&ranked, book, &self.natural)?.into_symbols(),
                ))
            }
            DecoderKind::ChebLpSoft => soft(self.cheb.decode(&y.to_real(t), t, ChebyshevMode::Soft)?),
            DecoderKind::ChebLpHard => {
                let ranked: Vec<f64> = self.hard_word(y)?.iter().map(|&s| s as f64).collect();
                soft(self.cheb.decode(&ranked, &self.natural, ChebyshevMode::Soft)?)
            }
            DecoderKind::Bdd => {
                let p = self.cfg.code.st.as_ref().expect("validated ST code");
                hard(bounded_distance_decode(&self.hard_word(y)?, p).map(Multipermutation::into_symbols))
            }
            DecoderKind::Turbo => {
                let ChannelSpec::Awgn { sigma } = *ch else {
                    return Err(multiperm::Error::InvalidChannel("turbo decoding needs AWGN".into()));
                };
                let tc = &self.cfg.turbo;
                let opts = TurboOptions {
                    grid: tc.grid,
                    iterations: tc.iterations,
                    hard: match tc.hard {
                        TurboHard::ChebLp => HardStart::ChebyshevLp,
                        TurboHard::Bdd => HardStart::Bdd(self.cfg.code.st.expect("validated ST code")),
                    },
                    soft: match tc.soft {
                        TurboSoft::ChebLp => SoftStep::ChebyshevLp,
                        TurboSoft::Admm => SoftStep::Admm {
                            sigma,
                            opts: self.cfg.admm,
                        },
                    },
                };
                let ChannelOutput::Real(v) = y else {
                    return Err(multiperm::Error::InvalidChannel(
                        "turbo decoding needs real outputs".into(),
                    ));
                };
                soft(self.turbo.decode(v, &opts)?.result)
            }
        })
    }

    /// Codeword and channel output of trial `k` at point `s`.
    pub fn trial_input(&self, s: usize, k: u64) -> (Multipermutation, ChannelOutput) {
        let point = &self.cfg.points[s];
        let mut rng = NoiseSource::stream(self.cfg.seed, s as u64, k);
        let x = self.codeword(&mut rng);
        let y = transmit(&x, &self.cfg.initial_vector, &point.spec, &mut rng);
        (x, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub snr_db: f64,
    pub decoder: DecoderKind,
    pub trials: u64,
    pub word_errors: u64,
    pub total_iterations: u64,
    /// Total decode time in milliseconds, when timing is on.
    pub total_ms: Option<f64>,
}

impl SimRow {
    pub fn wer(&self) -> f64 {
        self.word_errors as f64 / self.trials as f64
    }

    pub fn avg_iterations(&self) -> f64 {
        self.total_iterations as f64 / self.trials as f64
    }

    /// Wilson score interval for the word-error rate.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.word_errors, self.trials, z)
    }

    pub fn csv(&self) -> String {
        let ms = self
            .total_ms
            .map(|t| format!("{}", t / self.trials as f64))
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.snr_db,
            self.decoder,
            self.trials,
            self.word_errors,
            self.wer(),
            self.avg_iterations(),
            ms
        )
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// z for a two-sided 95% interval.
pub const Z95: f64 = 1.959963984540054;

/// Simulates one (point, decoder) cell.
pub fn simulate_cell(roster: &Roster, s: usize, kind: DecoderKind) -> multiperm::Result<SimRow> {
    let cfg = roster.config();
    let point: &ChannelPoint = &cfg.points[s];
    let mut row = SimRow {
        snr_db: point.label,
        decoder: kind,
        trials: 0,
        word_errors: 0,
        total_iterations: 0,
        total_ms: cfg.timing.then_some(0.0),
    };
    let mut start = 0u64;
    while row.trials < cfg.max_trials && row.word_errors < cfg.target_errors {
        let end = (start + CHUNK).min(cfg.max_trials);
        let outcomes: Vec<multiperm::Result<(bool, usize, f64)>> = (start..end)
            .into_par_iter()
            .map(|k| {
                let (x, y) = roster.trial_input(s, k);
                let clock = cfg.timing.then(Instant::now);
                let d = roster.decode(kind, &y, &point.spec)?;
                let ms = clock.map_or(0.0, |c| c.elapsed().as_secs_f64() * 1e3);
                let error = d.word.as_deref() != Some(x.symbols());
                Ok((error, d.iterations, ms))
            })
            .collect();
        for out in outcomes {
            let (error, iters, ms) = out?;
            row.trials += 1;
            row.word_errors += error as u64;
            row.total_iterations += iters as u64;
            if let Some(t) = row.total_ms.as_mut() {
                *t += ms;
            }
            if row.word_errors >= cfg.target_errors {
                break;
            }
        }
        start = end;
    }
    Ok(row)
}

/// Every (point, decoder) cell, points outermost.
pub fn simulate(cfg: &SimConfig) -> multiperm::Result<Vec<SimRow>> {
    let roster = Roster::new(cfg)?;
    let mut rows = Vec::with_capacity(cfg.points.len() * cfg.decoders.len());
    for s in 0..cfg.points.len() {
        for &kind in &cfg.decoders {
            rows.push(simulate_cell(&roster, s, kind)?);
        }
    }
    Ok(rows)
}

pub fn write_csv(rows: &[SimRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv())?;
    }
    Ok(())
}
