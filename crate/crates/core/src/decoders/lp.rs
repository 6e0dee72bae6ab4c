//! Dense two-phase primal simplex for small linear programs.
//!
//! Problems are `min c^T x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub`
//! and per-variable bounds. Bounds are removed by substitution (shift by a
//! finite lower bound, reflect a finite upper bound, or split a free
//! variable) and finite upper bounds of lower-bounded variables become
//! extra inequality rows. Pricing is Dantzig's rule; after a run of
//! degenerate pivots the solver falls back to Bland's rule, which cannot
//! cycle.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

const TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub const NONNEG: Bound = Bound {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bound = Bound {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    /// One bound per variable; empty means all variables are nonnegative.
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    pub fn new(c: Vec<f64>) -> Self {
        Self {
            c,
            ..Default::default()
        }
    }

    pub fn equality(&mut self, row: Vec<f64>, b: f64) -> &mut Self {
        self.a_eq.push(row);
        self.b_eq.push(b);
        self
    }

    pub fn inequality(&mut self, row: Vec<f64>, b: f64) -> &mut Self {
        self.a_ub.push(row);
        self.b_ub.push(b);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// The program rewritten over nonnegative variables `y`, with
/// `x_k = offset_k + sum coef * y_col`.
pub(super) struct Substituted {
    pub ny: usize,
    offset: Vec<f64>,
    map: Vec<Vec<(usize, f64)>>,
    pub eq_rows: Vec<(Vec<f64>, f64)>,
    pub ub_rows: Vec<(Vec<f64>, f64)>,
    pub cost: Vec<f64>,
}

impl Substituted {
    pub fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.offset
            .iter()
            .zip(&self.map)
            .map(|(o, cols)| o + cols.iter().map(|&(col, coef)| coef * y[col]).sum::<f64>())
            .collect()
    }
}

pub(super) fn substitute(lp: &LinearProgram) -> Result<Substituted> {
    let nv = lp.c.len();
    let check = |rows: &[Vec<f64>], rhs: &[f64]| -> Result<()> {
        if rows.len() != rhs.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: rhs.len(),
            });
        }
        match rows.iter().find(|r| r.len() != nv) {
            Some(r) => Err(Error::DimensionMismatch {
                expected: nv,
                got: r.len(),
            }),
            None => Ok(()),
        }
    };
    check(&lp.a_eq, &lp.b_eq)?;
    check(&lp.a_ub, &lp.b_ub)?;
    let bounds: Vec<Bound> = if lp.bounds.is_empty() {
        vec![Bound::NONNEG; nv]
    } else if lp.bounds.len() == nv {
        lp.bounds.clone()
    } else {
        return Err(Error::DimensionMismatch {
            expected: nv,
            got: lp.bounds.len(),
        });
    };

    let mut offset = vec![0.0; nv];
    let mut map: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nv);
    let mut ny = 0;
    let mut extra_ub: Vec<(usize, f64)> = Vec::new();
    for (k, b) in bounds.iter().enumerate() {
        if b.lower > b.upper {
            return Err(Error::Infeasible);
        }
        if b.lower.is_finite() {
            offset[k] = b.lower;
            map.push(vec![(ny, 1.0)]);
            if b.upper.is_finite() {
                extra_ub.push((ny, b.upper - b.lower));
            }
            ny += 1;
        } else if b.upper.is_finite() {
            offset[k] = b.upper;
            map.push(vec![(ny, -1.0)]);
            ny += 1;
        } else {
            map.push(vec![(ny, 1.0), (ny + 1, -1.0)]);
            ny += 2;
        }
    }
    let transform = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ny];
        let mut b = rhs;
        for (k, &a) in row.iter().enumerate() {
            if a != 0.0 {
                b -= a * offset[k];
                for &(col, coef) in &map[k] {
                    out[col] += a * coef;
                }
            }
        }
        (out, b)
    };
    let eq_rows: Vec<(Vec<f64>, f64)> = lp.a_eq.iter().zip(&lp.b_eq).map(|(r, &b)| transform(r, b)).collect();
    let mut ub_rows: Vec<(Vec<f64>, f64)> = lp.a_ub.iter().zip(&lp.b_ub).map(|(r, &b)| transform(r, b)).collect();
    for (col, u) in extra_ub {
        let mut row = vec![0.0; ny];
        row[col] = 1.0;
        ub_rows.push((row, u));
    }
    let cost = transform(&lp.c, 0.0).0;
    Ok(Substituted {
        ny,
        offset,
        map,
        eq_rows,
        ub_rows,
        cost,
    })
}

/// Solves the program by the simplex method; `Err(Infeasible)` or
/// `Err(Unbounded)` otherwise.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let sub = substitute(lp)?;
    let ny = sub.ny;
    let (eq_rows, ub_rows, cost_y) = (&sub.eq_rows, &sub.ub_rows, &sub.cost);
    // Standard form columns: y (ny), slacks (ub rows), artificials.
    let n_slack = ub_rows.len();
    let rows = eq_rows.len() + n_slack;
    let mut artificial_rows = Vec::new();
    let mut basis = vec![usize::MAX; rows];
    let mut sign = vec![1.0; rows];
    for (i, (_, b)) in eq_rows.iter().enumerate() {
        if *b < 0.0 {
            sign[i] = -1.0;
        }
        artificial_rows.push(i);
    }
    for (s, (_, b)) in ub_rows.iter().enumerate() {
        let i = eq_rows.len() + s;
        if *b < 0.0 {
            sign[i] = -1.0;
            artificial_rows.push(i);
        } else {
            basis[i] = ny + s;
        }
    }
    let n_art = artificial_rows.len();
    let cols = ny + n_slack + n_art;
    let width = cols + 1;
    let mut t = vec![0.0; rows * width];
    for (i, (row, b)) in eq_rows.iter().chain(ub_rows.iter()).enumerate() {
        let s = sign[i];
        for (j, &a) in row.iter().enumerate() {
            t[i * width + j] = s * a;
        }
        if i >= eq_rows.len() {
            t[i * width + ny + (i - eq_rows.len())] = s;
        }
        t[i * width + cols] = s * b;
    }
    for (a, &i) in artificial_rows.iter().enumerate() {
        t[i * width + ny + n_slack + a] = 1.0;
        basis[i] = ny + n_slack + a;
    }
    let mut tab = Tableau {
        t,
        rows,
        width,
        basis,
        pivots: 0,
    };

    if n_art > 0 {
        let mut c1 = vec![0.0; cols];
        c1[ny + n_slack..].iter_mut().for_each(|v| *v = 1.0);
        tab.optimize(&c1, cols)?;
        let infeas: f64 = (0..rows)
            .filter(|&i| tab.basis[i] >= ny + n_slack)
            .map(|i| tab.t[i * width + cols])
            .sum();
        let scale = 1.0
            + lp.b_eq
                .iter()
                .chain(&lp.b_ub)
                .map(|b| libm::fabs(*b))
                .fold(0.0, f64::max);
        if infeas > 1e-7 * scale {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..rows {
            if tab.basis[i] >= ny + n_slack {
                if let Some(j) = (0..ny + n_slack).find(|&j| libm::fabs(tab.t[i * width + j]) > TOL) {
                    tab.pivot(i, j);
                }
            }
        }
    }
    let mut c2 = vec![0.0; cols];
    c2[..ny].copy_from_slice(cost_y);
    tab.optimize(&c2, ny + n_slack)?;

    let mut y = vec![0.0; cols];
    for i in 0..rows {
        y[tab.basis[i]] = tab.t[i * width + cols];
    }
    let x = sub.recover(&y);
    let objective = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum::<f64>();
    Ok(LpSolution {
        x,
        objective,
        pivots: tab.pivots,
    })
}

struct Tableau {
    t: Vec<f64>,
    rows: usize,
    width: usize,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let pv = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= pv;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Minimizes `cost` over the current feasible basis, letting only
    /// columns `< allowed` enter.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let w = self.width;
        let rhs = w - 1;
        let mut bland = false;
        let mut streak = 0;
        let mut reduced = vec![0.0; allowed];
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::InvalidParameters("simplex pivot limit reached".into()));
            }
            for (j, d) in reduced.iter_mut().enumerate() {
                let mut v = cost[j];
                for i in 0..self.rows {
                    let a = self.t[i * w + j];
                    if a != 0.0 {
                        v -= cost[self.basis[i]] * a;
                    }
                }
                *d = v;
            }
            let enter = if bland {
                (0..allowed).find(|&j| reduced[j] < -TOL)
            } else {
                let mut best = None;
                let mut most = -TOL;
                for (j, &d) in reduced.iter().enumerate() {
                    if d < most {
                        most = d;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i * w + c];
                if a > TOL {
                    let ratio = self.t[i * w + rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            if ratio <= 1e-12 {
                streak += 1;
                if streak > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
    }
}
