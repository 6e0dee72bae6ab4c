//! Dense primal-dual interior-point method (Mehrotra predictor-corrector)
//! for the same programs as [`lp_solve`](super::lp_solve).
//!
//! Unlike the simplex method, which stops at a vertex, the iterates stay
//! strictly inside the feasible region, so on a program with many optima the
//! solution returned lies in the relative interior of the optimal face.

use alloc::vec;
use alloc::vec::Vec;

use super::lp::{substitute, LinearProgram, LpSolution};
use crate::{Error, Result};

const TOL: f64 = 1e-9;
/// Residual accepted once complementarity is exhausted and the normal
/// equations no longer resolve the last digits.
const STALL_TOL: f64 = 1e-6;
const MAX_ITER: usize = 200;
const STEP: f64 = 0.99;

/// Column-sparse constraint matrix.
struct Columns {
    rows: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl Columns {
    /// `A v`.
    fn mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (col, &x) in self.cols.iter().zip(v) {
            if x != 0.0 {
                for &(i, a) in col {
                    out[i] += a * x;
                }
            }
        }
        out
    }

    /// `A^T w`.
    fn mul_t(&self, w: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(i, a)| a * w[i]).sum())
            .collect()
    }

    /// `A diag(d) A^T`, dense row-major.
    fn normal(&self, d: &[f64]) -> Vec<f64> {
        let k = self.rows;
        let mut m = vec![0.0; k * k];
        for (col, &dj) in self.cols.iter().zip(d) {
            for &(i, a) in col {
                let ai = a * dj;
                for &(l, b) in col {
                    if l <= i {
                        m[i * k + l] += ai * b;
                    }
                }
            }
        }
        m
    }
}

/// In-place lower Cholesky factor of a dense symmetric matrix (lower
/// triangle read). Pivots that vanish are replaced by a huge value, which
/// effectively drops the corresponding direction.
fn cholesky(m: &mut [f64], k: usize) {
    let scale = (0..k).map(|i| m[i * k + i]).fold(0.0, f64::max).max(1.0);
    for j in 0..k {
        let mut d = m[j * k + j];
        for p in 0..j {
            d -= m[j * k + p] * m[j * k + p];
        }
        let d = if d > 1e-30 * scale { libm::sqrt(d) } else { 1e64 };
        m[j * k + j] = d;
        for i in j + 1..k {
            let mut v = m[i * k + j];
            for p in 0..j {
                v -= m[i * k + p] * m[j * k + p];
            }
            m[i * k + j] = v / d;
        }
    }
}

fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut v = b[i];
        for p in 0..i {
            v -= l[i * k + p] * b[p];
        }
        b[i] = v / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut v = b[i];
        for p in i + 1..k {
            v -= l[p * k + i] * b[p];
        }
        b[i] = v / l[i * k + i];
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

/// Largest `a <= 1` with `v + a dv >= 0`.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(1.0, f64::min)
}

/// Drops equality rows that are linear combinations of earlier ones.
/// A dependent row with an inconsistent right-hand side makes the program
/// infeasible.
fn independent_rows(rows: &[(Vec<f64>, f64)]) -> Result<Vec<usize>> {
    let mut basis: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    let mut keep = Vec::new();
    for (idx, (row, b)) in rows.iter().enumerate() {
        let mut r = row.clone();
        let mut rb = *b;
        for (p, pb, c) in &basis {
            let f = r[*c] / p[*c];
            if f != 0.0 {
                r.iter_mut().zip(p).for_each(|(x, y)| *x -= f * y);
                rb -= f * pb;
            }
        }
        let scale = inf_norm(row).max(1.0);
        let (c, big) = r.iter().enumerate().fold((0, 0.0), |(bc, bv), (j, &v)| {
            if libm::fabs(v) > bv {
                (j, libm::fabs(v))
            } else {
                (bc, bv)
            }
        });
        if big <= 1e-9 * scale {
            if libm::fabs(rb) > 1e-7 * (1.0 + libm::fabs(*b)) {
                return Err(Error::Infeasible);
            }
        } else {
            basis.push((r, rb, c));
            keep.push(idx);
        }
    }
    Ok(keep)
}

/// Solves the program by a primal-dual interior-point method. The program
/// must have an optimum; infeasible or unbounded programs end in
/// `Err(NoConvergence)` or, when detected, `Err(Infeasible)`.
pub fn lp_solve_interior(lp: &LinearProgram) -> Result<LpSolution> {
    let sub = substitute(lp)?;
    let ny = sub.ny;
    let keep = independent_rows(&sub.eq_rows)?;
    let n_ub = sub.ub_rows.len();
    let k = keep.len() + n_ub;
    let n = ny + n_ub;
    if n == 0 {
        let x = sub.recover(&[]);
        let objective = dot(&lp.c, &x);
        return Ok(LpSolution {
            x,
            objective,
            pivots: 0,
        });
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut b = Vec::with_capacity(k);
    for (i, (row, rhs)) in keep
        .iter()
        .map(|&r| &sub.eq_rows[r])
        .chain(sub.ub_rows.iter())
        .enumerate()
    {
        for (j, &a) in row.iter().enumerate() {
            if a != 0.0 {
                cols[j].push((i, a));
            }
        }
        b.push(*rhs);
    }
    for s in 0..n_ub {
        cols[ny + s].push((keep.len() + s, 1.0));
    }
    let a = Columns { rows: k, cols };
    let mut c = sub.cost.clone();
    c.resize(n, 0.0);

    // Starting point.
    let mut l0 = a.normal(&vec![1.0; n]);
    cholesky(&mut l0, k);
    let mut w = b.clone();
    cholesky_solve(&l0, k, &mut w);
    let mut x = a.mul_t(&w);
    let mut lambda = a.mul(&c);
    cholesky_solve(&l0, k, &mut lambda);
    let atl = a.mul_t(&lambda);
    let mut s: Vec<f64> = c.iter().zip(&atl).map(|(c, v)| c - v).collect();
    let dx = (-1.5 * x.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    let ds = (-1.5 * s.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    x.iter_mut().for_each(|v| *v += dx);
    s.iter_mut().for_each(|v| *v += ds);
    let xs = dot(&x, &s);
    let (sx, ss): (f64, f64) = (x.iter().sum(), s.iter().sum());
    let (hx, hs) = if xs > 0.0 {
        (0.5 * xs / ss, 0.5 * xs / sx)
    } else {
        (1.0, 1.0)
    };
    x.iter_mut().for_each(|v| *v = (*v + hx).max(1e-8));
    s.iter_mut().for_each(|v| *v = (*v + hs).max(1e-8));

    let nb = 1.0 + inf_norm(&b);
    let nc = 1.0 + inf_norm(&c);
    let mut iter = 0;
    loop {
        let ax = a.mul(&x);
        let r_b: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        let atl = a.mul_t(&lambda);
        let r_c: Vec<f64> = (0..n).map(|j| atl[j] + s[j] - c[j]).collect();
        let gap = dot(&x, &s);
        let pobj = dot(&c, &x);
        let (pres, dres) = (inf_norm(&r_b) / nb, inf_norm(&r_c) / nc);
        let rel_gap = gap / (1.0 + libm::fabs(pobj));
        if (pres <= TOL && dres <= TOL && rel_gap <= TOL)
            || (pres <= STALL_TOL && dres <= STALL_TOL && rel_gap <= 1e-14)
        {
            break;
        }
        if !gap.is_finite() {
            return Err(Error::NoConvergence);
        }
        if iter == MAX_ITER {
            let xmax = inf_norm(&x);
            return Err(if xmax > 1e10 {
                Error::Unbounded
            } else if inf_norm(&lambda) > 1e10 {
                Error::Infeasible
            } else {
                Error::NoConvergence
            });
        }
        iter += 1;
        let mu = gap / n as f64;
        let d: Vec<f64> = x.iter().zip(&s).map(|(x, s)| x / s).collect();
        let mut l = a.normal(&d);
        cholesky(&mut l, k);
        let direction = |r_xs: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
            let t: Vec<f64> = (0..n).map(|j| d[j] * r_c[j] - r_xs[j] / s[j]).collect();
            let at = a.mul(&t);
            let mut dl: Vec<f64> = (0..k).map(|i| -r_b[i] - at[i]).collect();
            cholesky_solve(&l, k, &mut dl);
            let atdl = a.mul_t(&dl);
            let dx: Vec<f64> = (0..n).map(|j| d[j] * (atdl[j] + r_c[j]) - r_xs[j] / s[j]).collect();
            let ds: Vec<f64> = (0..n).map(|j| -r_c[j] - atdl[j]).collect();
            (dx, dl, ds)
        };
        let xs_vec: Vec<f64> = x.iter().zip(&s).map(|(x, s)| x * s).collect();
        let (dx_a, _, ds_a) = direction(&xs_vec);
        let (ap, ad) = (max_step(&x, &dx_a), max_step(&s, &ds_a));
        let mu_aff = (0..n)
            .map(|j| (x[j] + ap * dx_a[j]) * (s[j] + ad * ds_a[j]))
            .sum::<f64>()
            / n as f64;
        let sigma = libm::pow(mu_aff / mu, 3.0).min(1.0);
        let r_xs: Vec<f64> = (0..n).map(|j| xs_vec[j] + dx_a[j] * ds_a[j] - sigma * mu).collect();
        let (dx, dl, ds) = direction(&r_xs);
        let ap = (STEP * max_step(&x, &dx)).min(1.0);
        let ad = (STEP * max_step(&s, &ds)).min(1.0);
        x.iter_mut().zip(&dx).for_each(|(v, d)| *v += ap * d);
        lambda.iter_mut().zip(&dl).for_each(|(v, d)| *v += ad * d);
        s.iter_mut().zip(&ds).for_each(|(v, d)| *v += ad * d);
    }
    let xr = sub.recover(&x[..ny]);
    let objective = dot(&lp.c, &xr);
    Ok(LpSolution {
        x: xr,
        objective,
        pivots: iter,
    })
}
