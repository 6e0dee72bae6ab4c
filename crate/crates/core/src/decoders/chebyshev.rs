//! LP decoding in Chebyshev distance:
//! `min delta` over the code polytope subject to `-delta <= t X - y <= delta`.

use alloc::vec;
use alloc::vec::Vec;

use super::graph::FactorGraph;
use super::interior::lp_solve_interior;
use super::lp::{lp_solve, LinearProgram};
use super::{is_integral_codeword, round_matrix, DecodeResult, DecodeStatus, INTEGRALITY_TOL};
use crate::channels::quantize_rank;
use crate::codes::ConstraintSet;
use crate::perm::InitialVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebyshevMode {
    /// Use the received reals and the given initial vector.
    Soft,
    /// Rank the received values first and decode the ranking against
    /// `t = (1, ..., m)`.
    Hard,
}

/// LP solver behind the decoder. The optimum is often a whole face of the
/// polytope; the simplex method returns one of its vertices and the
/// interior-point method a point inside it, and the two round differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpMethod {
    Simplex,
    #[default]
    InteriorPoint,
}

/// Reusable Chebyshev LP decoder for one code.
#[derive(Debug, Clone)]
pub struct ChebyshevDecoder {
    code: ConstraintSet,
    graph: FactorGraph,
    method: LpMethod,
}

impl ChebyshevDecoder {
    pub fn new(code: &ConstraintSet) -> Self {
        Self::with_method(code, LpMethod::default())
    }

    pub fn with_method(code: &ConstraintSet, method: LpMethod) -> Self {
        Self {
            code: code.clone(),
            graph: FactorGraph::build(code),
            method,
        }
    }

    pub fn method(&self) -> LpMethod {
        self.method
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn decode(&self, y: &[f64], t: &InitialVector, mode: ChebyshevMode) -> Result<DecodeResult> {
        let mult = self.code.multiplicity();
        if y.len() != mult.n() {
            return Err(Error::DimensionMismatch {
                expected: mult.n(),
                got: y.len(),
            });
        }
        if t.m() != mult.m() {
            return Err(Error::DimensionMismatch {
                expected: mult.m(),
                got: t.m(),
            });
        }
        let (target, levels): (Vec<f64>, InitialVector) = match mode {
            ChebyshevMode::Soft => (y.to_vec(), t.clone()),
            ChebyshevMode::Hard => {
                let q = quantize_rank(y, mult)?;
                (
                    q.symbols().iter().map(|&s| s as f64).collect(),
                    InitialVector::natural(mult.m()),
                )
            }
        };
        Ok(self.solve(&target, &levels))
    }

    fn solve(&self, y: &[f64], t: &InitialVector) -> DecodeResult {
        let g = &self.graph;
        let (m, n) = (g.rows(), g.cols());
        let nv = g.num_vars();
        let delta = nv;
        let mut c = vec![0.0; nv + 1];
        c[delta] = 1.0;
        let mut lp = LinearProgram::new(c);
        for check in g.checks() {
            let mut row = vec![0.0; nv + 1];
            for e in &g.edges()[check.edges.clone()] {
                row[e.var] += e.weight as f64;
            }
            lp.equality(row, check.target);
        }
        // Column values (t X)_j as rows over the variables.
        let mut value_rows = vec![vec![0.0; nv + 1]; n];
        for v in 0..nv {
            for e in g.class(v) {
                value_rows[e.col][v] += t.values()[e.row];
            }
        }
        for (j, row) in value_rows.into_iter().enumerate() {
            let mut up = row.clone();
            up[delta] = -1.0;
            lp.inequality(up, y[j]);
            let mut down: Vec<f64> = row.iter().map(|a| -a).collect();
            down[delta] = -1.0;
            lp.inequality(down, -y[j]);
        }
        let solved = match self.method {
            LpMethod::Simplex => lp_solve(&lp),
            // A stalled interior-point run still has the vertex answer.
            LpMethod::InteriorPoint => lp_solve_interior(&lp).or_else(|_| lp_solve(&lp)),
        };
        let Ok(sol) = solved else {
            return DecodeResult::infeasible(m, n);
        };
        let x: Vec<f64> = sol.x[..nv].iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let matrix = g.expand(&x);
        let rounded = round_matrix(&matrix);
        DecodeResult {
            integral: is_integral_codeword(&matrix, &rounded, &self.code, INTEGRALITY_TOL),
            matrix,
            rounded,
            iterations: sol.pivots,
            objective: sol.x[delta],
            status: DecodeStatus::Converged,
        }
    }
}

/// One-shot decoding with the default solver.
pub fn chebyshev_lp_decode(
    y: &[f64],
    c: &ConstraintSet,
    t: &InitialVector,
    mode: ChebyshevMode,
) -> Result<DecodeResult> {
    ChebyshevDecoder::new(c).decode(y, t, mode)
}
