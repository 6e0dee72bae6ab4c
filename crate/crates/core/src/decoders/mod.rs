//! Decoders: ADMM LP decoding, Chebyshev-distance LP decoding on dense LP
//! solvers, and exhaustive reference decoders.

use alloc::vec::Vec;

use crate::codes::ConstraintSet;
use crate::perm::Multipermutation;
use crate::polytope::RelaxedMatrix;

pub mod admm;
pub mod chebyshev;
pub mod exhaustive;
pub mod graph;
pub mod interior;
pub mod lp;

pub use admm::{admm_decode, AdmmOptions, AdmmSolver};
pub use chebyshev::{chebyshev_lp_decode, ChebyshevDecoder, ChebyshevMode, LpMethod};
pub use exhaustive::{exhaustive_min_chebyshev, exhaustive_ml};
pub use graph::{build_graph, FactorGraph};
pub use interior::lp_solve_interior;
pub use lp::{lp_solve, Bound, LinearProgram, LpSolution};

/// Default tolerance for calling an entry integral.
pub const INTEGRALITY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Final, possibly fractional, matrix.
    pub matrix: RelaxedMatrix,
    /// Column-wise argmax of `matrix` (1-based symbols). Not necessarily a
    /// multipermutation.
    pub rounded: Vec<usize>,
    /// ML certificate: the solver converged to an integral matrix that is a
    /// codeword.
    pub integral: bool,
    pub iterations: usize,
    pub objective: f64,
    pub status: DecodeStatus,
}

impl DecodeResult {
    /// The rounded word as a codeword of `c`, if it is one.
    pub fn codeword(&self, c: &ConstraintSet) -> Option<Multipermutation> {
        let x = Multipermutation::new(self.rounded.clone(), c.multiplicity().clone()).ok()?;
        c.is_member_symbols(x.symbols()).then_some(x)
    }

    pub(crate) fn infeasible(m: usize, n: usize) -> Self {
        Self {
            matrix: RelaxedMatrix::zeros(m, n),
            rounded: alloc::vec![1; n],
            integral: false,
            iterations: 0,
            objective: f64::INFINITY,
            status: DecodeStatus::Infeasible,
        }
    }
}

/// Column-wise argmax rounding.
pub fn round_matrix(z: &RelaxedMatrix) -> Vec<usize> {
    (0..z.cols()).map(|j| z.argmax_in_col(j)).collect()
}

/// `z` is within `tol` of the matrix of the codeword `rounded`, and that
/// word is a codeword of `c`.
pub fn is_integral_codeword(z: &RelaxedMatrix, rounded: &[usize], c: &ConstraintSet, tol: f64) -> bool {
    for j in 0..z.cols() {
        for i in 0..z.rows() {
            let want = if rounded[j] == i + 1 { 1.0 } else { 0.0 };
            if libm::fabs(z.get(i, j) - want) > tol {
                return false;
            }
        }
    }
    Multipermutation::new(rounded.to_vec(), c.multiplicity().clone()).is_ok() && c.is_member_symbols(rounded)
}
