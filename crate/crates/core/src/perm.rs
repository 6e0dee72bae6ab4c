//! Multiplicity vectors, multipermutations and multipermutation matrices.
//!
//! Symbols are 1-based (`1..=m`). Matrix rows are indexed by `symbol - 1`
//! and columns by 0-based position. The real-valued initial vector is only
//! applied at channel boundaries via [`Multipermutation::values`] or
//! [`from_matrix`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use crate::{Error, Result};

/// Histogram `r` of symbol counts: symbol `i` occurs `r_i` times.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiplicityVector {
    counts: Vec<usize>,
    n: usize,
}

impl MultiplicityVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidMultiplicity("empty multiplicity vector".into()));
        }
        if let Some(pos) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidMultiplicity(format!(
                "symbol {} has multiplicity 0",
                pos + 1
            )));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    /// The `r`-regular vector `(r, r, ..., r)` of length `m`.
    pub fn regular(r: usize, m: usize) -> Result<Self> {
        Self::new(vec![r; m])
    }

    /// Number of distinct symbols.
    pub fn m(&self) -> usize {
        self.counts.len()
    }

    /// Length of every multipermutation with this multiplicity.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Multiplicity of the 1-based `symbol`.
    pub fn count(&self, symbol: usize) -> usize {
        self.counts[symbol - 1]
    }

    /// Positions (0-based) that `symbol` occupies in the sorted multipermutation.
    pub fn index_set(&self, symbol: usize) -> Range<usize> {
        let start: usize = self.counts[..symbol - 1].iter().sum();
        start..start + self.counts[symbol - 1]
    }

    /// Returns `Some(r)` if every symbol has the same multiplicity `r`.
    pub fn regular_multiplicity(&self) -> Option<usize> {
        let r = self.counts[0];
        self.counts.iter().all(|&c| c == r).then_some(r)
    }
}

impl fmt::Display for MultiplicityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.counts)
    }
}

impl FromStr for MultiplicityVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = parse_usize_list(s).map_err(Error::InvalidMultiplicity)?;
        Self::new(counts)
    }
}

/// The `m` distinct real values that symbols are mapped to, in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialVector {
    values: Vec<f64>,
}

impl InitialVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInitialVector("empty initial vector".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInitialVector("non-finite entry".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInitialVector(
                "entries must be strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    /// `(1, 2, ..., m)`.
    pub fn natural(m: usize) -> Self {
        Self {
            values: (1..=m).map(|i| i as f64).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of the 1-based `symbol`.
    pub fn value(&self, symbol: usize) -> f64 {
        self.values[symbol - 1]
    }
}

/// A permutation of the multiset described by a [`MultiplicityVector`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multipermutation {
    symbols: Vec<usize>,
    mult: MultiplicityVector,
}

impl Multipermutation {
    /// Validates that symbol `i` occurs exactly `r_i` times.
    pub fn new(symbols: Vec<usize>, mult: MultiplicityVector) -> Result<Self> {
        if symbols.len() != mult.n() {
            return Err(Error::InvalidMultipermutation(format!(
                "length {} does not match n = {}",
                symbols.len(),
                mult.n()
            )));
        }
        let mut seen = vec![0usize; mult.m()];
        for &s in &symbols {
            if s == 0 || s > mult.m() {
                return Err(Error::InvalidMultipermutation(format!(
                    "symbol {s} outside 1..={}",
                    mult.m()
                )));
            }
            seen[s - 1] += 1;
        }
        if let Some(i) = (0..mult.m()).find(|&i| seen[i] != mult.counts()[i]) {
            return Err(Error::InvalidMultipermutation(format!(
                "symbol {} occurs {} times, expected {}",
                i + 1,
                seen[i],
                mult.counts()[i]
            )));
        }
        Ok(Self { symbols, mult })
    }

    /// Infers the multiplicity vector from the symbols; every symbol in
    /// `1..=m` must occur at least once.
    pub fn from_symbols(symbols: Vec<usize>, m: usize) -> Result<Self> {
        let mut counts = vec![0usize; m];
        for &s in &symbols {
            if s == 0 || s > m {
                return Err(Error::InvalidMultipermutation(format!("symbol {s} outside 1..={m}")));
            }
            counts[s - 1] += 1;
        }
        let mult = MultiplicityVector::new(counts)?;
        Ok(Self { symbols, mult })
    }

    /// The sorted multipermutation `(1,..,1, 2,..,2, ..., m,..,m)`.
    pub fn sorted(mult: &MultiplicityVector) -> Self {
        let symbols = mult
            .counts()
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| core::iter::repeat(i + 1).take(c))
            .collect();
        Self {
            symbols,
            mult: mult.clone(),
        }
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<usize> {
        self.symbols
    }

    pub fn multiplicity(&self) -> &MultiplicityVector {
        &self.mult
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The real vector `t X`.
    pub fn values(&self, t: &InitialVector) -> Vec<f64> {
        self.symbols.iter().map(|&s| t.value(s)).collect()
    }
}

impl fmt::Display for Multipermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.symbols)
    }
}

/// Binary `m x n` matrix with unit column sums and row sums `r_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultipermutationMatrix {
    mult: MultiplicityVector,
    data: Vec<u8>,
}

impl MultipermutationMatrix {
    /// Builds from row-major 0/1 data. Rejects any matrix whose column or
    /// row sums are wrong; nothing is normalized.
    pub fn new(mult: MultiplicityVector, data: Vec<u8>) -> Result<Self> {
        let (m, n) = (mult.m(), mult.n());
        if data.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: data.len(),
            });
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::InvalidMatrix("entries must be 0 or 1".into()));
        }
        for j in 0..n {
            let s: usize = (0..m).map(|i| data[i * n + j] as usize).sum();
            if s != 1 {
                return Err(Error::InvalidMatrix(format!("column {} sums to {s}", j + 1)));
            }
        }
        for i in 0..m {
            let s: usize = data[i * n..(i + 1) * n].iter().map(|&v| v as usize).sum();
            if s != mult.counts()[i] {
                return Err(Error::InvalidMatrix(format!(
                    "row {} sums to {s}, expected {}",
                    i + 1,
                    mult.counts()[i]
                )));
            }
        }
        Ok(Self { mult, data })
    }

    pub fn multiplicity(&self) -> &MultiplicityVector {
        &self.mult
    }

    pub fn rows(&self) -> usize {
        self.mult.m()
    }

    pub fn cols(&self) -> usize {
        self.mult.n()
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.cols() + col]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    /// The symbol (1-based row) selected in column `col`.
    pub fn symbol_at(&self, col: usize) -> usize {
        (0..self.rows())
            .find(|&i| self.get(i, col) == 1)
            .map(|i| i + 1)
            .expect("validated matrix has a one in every column")
    }

    pub fn to_multipermutation(&self) -> Multipermutation {
        Multipermutation {
            symbols: (0..self.cols()).map(|j| self.symbol_at(j)).collect(),
            mult: self.mult.clone(),
        }
    }
}

/// `X_{ij} = 1` iff `x_j = i`.
pub fn to_matrix(x: &Multipermutation) -> MultipermutationMatrix {
    let (m, n) = (x.mult.m(), x.mult.n());
    let mut data = vec![0u8; m * n];
    for (j, &s) in x.symbols.iter().enumerate() {
        data[(s - 1) * n + j] = 1;
    }
    MultipermutationMatrix {
        mult: x.mult.clone(),
        data,
    }
}

/// The product `t X`.
pub fn from_matrix(x: &MultipermutationMatrix, t: &InitialVector) -> Result<Vec<f64>> {
    if t.m() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: t.m(),
        });
    }
    Ok((0..x.cols()).map(|j| t.value(x.symbol_at(j))).collect())
}

/// Number of positions where `x` and `y` disagree.
pub fn hamming_vec(x: &[usize], y: &[usize]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.iter().zip(y).filter(|(a, b)| a != b).count())
}

/// Number of differing entries between two multipermutation matrices.
///
/// This is twice the vector distance of the corresponding multipermutations.
/// It is also `tr(X^T (E - Y)) + tr(Y^T (E - X))`; each trace alone counts
/// the ones of one matrix missing from the other (see [`trace_distance`]).
pub fn hamming_mat(x: &MultipermutationMatrix, y: &MultipermutationMatrix) -> Result<usize> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::DimensionMismatch {
            expected: x.data.len(),
            got: y.data.len(),
        });
    }
    let direct = x.data.iter().zip(&y.data).filter(|(a, b)| a != b).count();
    debug_assert_eq!(direct, trace_distance(x, y)? + trace_distance(y, x)?);
    Ok(direct)
}

/// `tr(X^T (E - Y)) = sum_ij X_ij (1 - Y_ij)`: the ones of `X` not shared by `Y`.
pub fn trace_distance(x: &MultipermutationMatrix, y: &MultipermutationMatrix) -> Result<usize> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::DimensionMismatch {
            expected: x.data.len(),
            got: y.data.len(),
        });
    }
    Ok(x.data
        .iter()
        .zip(&y.data)
        .map(|(&a, &b)| (a as usize) * (1 - b as usize))
        .sum())
}

/// `max_i |x_i - y_i|`.
pub fn chebyshev(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max))
}

pub(crate) fn parse_usize_list(s: &str) -> core::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<usize>()
                .map_err(|_| format!("cannot parse '{tok}' as a nonnegative integer"))
        })
        .collect()
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[usize]) -> fmt::Result {
    for (k, v) in items.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}
