//! Exhaustive reference decoders over an enumerated codebook.
//!
//! Codebooks from [`crate::codes::enumerate_codebook`] are in rank order, so
//! keeping the first minimizer breaks ties towards the lowest index.

use crate::channels::LlrMatrix;
use crate::perm::{chebyshev, InitialVector, Multipermutation};
use crate::{Error, Result};

/// The codeword minimizing `Gamma . vec(X)`.
pub fn exhaustive_ml(gamma: &LlrMatrix, codebook: &[Multipermutation]) -> Result<Multipermutation> {
    let mut best: Option<(f64, &Multipermutation)> = None;
    for x in codebook {
        if x.len() != gamma.cols() {
            return Err(Error::DimensionMismatch {
                expected: gamma.cols(),
                got: x.len(),
            });
        }
        let cost = gamma.cost(x.symbols());
        if best.map_or(true, |(b, _)| cost < b) {
            best = Some((cost, x));
        }
    }
    best.map(|(_, x)| x.clone())
        .ok_or_else(|| Error::InvalidCodeword("empty codebook".into()))
}

/// The codeword whose values `t X` are closest to `y` in Chebyshev distance.
pub fn exhaustive_min_chebyshev(
    y: &[f64],
    codebook: &[Multipermutation],
    t: &InitialVector,
) -> Result<Multipermutation> {
    let mut best: Option<(f64, &Multipermutation)> = None;
    for x in codebook {
        let d = chebyshev(&x.values(t), y)?;
        if best.map_or(true, |(b, _)| d < b) {
            best = Some((d, x));
        }
    }
    best.map(|(_, x)| x.clone())
        .ok_or_else(|| Error::InvalidCodeword("empty codebook".into()))
}
