//! The multipermutation polytope: hull membership, convex decomposition and
//! the Euclidean projections used by the ADMM decoder.
//!
//! `S_m = {x : sum x = 1, x >= 0}` is the standard simplex and
//! `L_n^r = {x : sum x = r, 0 <= x <= 1}` the capped-sum set. Projection onto
//! `L_n^r` has the form `x_i = clamp(v_i - theta, 0, 1)` for the unique
//! `theta` with `sum x = r`; `theta` is located among the break points
//! `{v_i, v_i - 1}` by a median-pivoted search in linear time.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::perm::{MultipermutationMatrix, MultiplicityVector};
use crate::{Error, Result};

/// Default tolerance for [`in_hull`].
pub const HULL_TOL: f64 = 1e-9;

/// A real `m x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedMatrix {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl RelaxedMatrix {
    pub fn new(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: data.len(),
            });
        }
        Ok(Self { m, n, data })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            data: vec![0.0; m * n],
        }
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

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Row of the largest entry in column `j`, 1-based; ties go to the lower row.
    pub fn argmax_in_col(&self, j: usize) -> usize {
        let mut best = 0;
        for i in 1..self.m {
            if self.get(i, j) > self.get(best, j) {
                best = i;
            }
        }
        best + 1
    }

    /// Largest distance of an entry from `{0, 1}`.
    pub fn max_fractionality(&self) -> f64 {
        self.data
            .iter()
            .map(|&v| libm::fabs(v).min(libm::fabs(1.0 - v)))
            .fold(0.0, f64::max)
    }
}

impl From<&MultipermutationMatrix> for RelaxedMatrix {
    fn from(x: &MultipermutationMatrix) -> Self {
        Self {
            m: x.rows(),
            n: x.cols(),
            data: x.as_slice().iter().map(|&b| b as f64).collect(),
        }
    }
}

/// Column sums 1, row sums `r_i`, entries in `[0, 1]`, all within `tol`.
pub fn in_hull(z: &RelaxedMatrix, r: &MultiplicityVector, tol: f64) -> bool {
    hull_violation(z, r).map(|v| v <= tol).unwrap_or(false)
}

/// Largest violation of the hull conditions, or `None` on a shape mismatch.
fn hull_violation(z: &RelaxedMatrix, r: &MultiplicityVector) -> Option<f64> {
    let (m, n) = (r.m(), r.n());
    if z.m != m || z.n != n {
        return None;
    }
    let mut worst = 0.0f64;
    for &v in &z.data {
        worst = worst.max(-v).max(v - 1.0);
    }
    for i in 0..m {
        let s: f64 = z.data[i * n..(i + 1) * n].iter().sum();
        worst = worst.max(libm::fabs(s - r.counts()[i] as f64));
    }
    for j in 0..n {
        let s: f64 = (0..m).map(|i| z.get(i, j)).sum();
        worst = worst.max(libm::fabs(s - 1.0));
    }
    Some(worst)
}

/// Writes `z` as a convex combination of multipermutation matrices.
///
/// Terms are peeled off greedily: each step picks a multipermutation matrix
/// inside the support of the residual that maximizes its smallest entry
/// (bottleneck b-matching), and subtracts that entry. The resulting list is
/// then thinned to at most `(m-1)(n-1)+1` terms by Caratheodory reduction.
pub fn decompose(z: &RelaxedMatrix, r: &MultiplicityVector) -> Result<Vec<(f64, MultipermutationMatrix)>> {
    match hull_violation(z, r) {
        None => {
            return Err(Error::DimensionMismatch {
                expected: r.m() * r.n(),
                got: z.data.len(),
            })
        }
        Some(v) if v > HULL_TOL => {
            return Err(Error::NotInHull(format!("constraint violation {v:e}")));
        }
        _ => {}
    }
    let (m, n) = (r.m(), r.n());
    let mut res: Vec<f64> = z.data.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
    let mut terms: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut levels: Vec<f64> = Vec::with_capacity(m * n);
    loop {
        levels.clear();
        levels.extend(res.iter().copied().filter(|&v| v > 0.0));
        if levels.is_empty() {
            break;
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        // Largest threshold whose support still admits a matching.
        if bmatching(&res, r, levels[0]).is_none() {
            break;
        }
        let (mut lo, mut hi) = (0usize, levels.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if bmatching(&res, r, levels[mid]).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rows = bmatching(&res, r, levels[lo]).expect("feasible at this level");
        let alpha = (0..n).map(|j| res[rows[j] * n + j]).fold(f64::INFINITY, f64::min);
        for j in 0..n {
            let e = &mut res[rows[j] * n + j];
            *e = if *e <= alpha { 0.0 } else { *e - alpha };
        }
        terms.push((alpha, rows));
    }
    let limit = (m - 1) * (n - 1) + 1;
    if terms.len() > limit {
        caratheodory(&mut terms, m, n, limit);
    }
    Ok(terms
        .into_iter()
        .map(|(w, rows)| {
            let mut data = vec![0u8; m * n];
            for (j, &i) in rows.iter().enumerate() {
                data[i * n + j] = 1;
            }
            (
                w,
                MultipermutationMatrix::new(r.clone(), data).expect("b-matching has valid sums"),
            )
        })
        .collect())
}

/// One row per column with row `i` used `r_i` times, using only entries
/// `>= tau`. Returns the 0-based row of every column.
fn bmatching(res: &[f64], r: &MultiplicityVector, tau: f64) -> Option<Vec<usize>> {
    let (m, n) = (r.m(), r.n());
    let mut col_row = vec![usize::MAX; n];
    let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut seen = vec![false; m];
    for j in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        if !augment(j, res, r, tau, &mut col_row, &mut row_cols, &mut seen) {
            return None;
        }
    }
    Some(col_row)
}

fn augment(
    j: usize,
    res: &[f64],
    r: &MultiplicityVector,
    tau: f64,
    col_row: &mut [usize],
    row_cols: &mut [Vec<usize>],
    seen: &mut [bool],
) -> bool {
    let n = col_row.len();
    for i in 0..row_cols.len() {
        if seen[i] || res[i * n + j] < tau {
            continue;
        }
        seen[i] = true;
        if row_cols[i].len() < r.counts()[i] {
            row_cols[i].push(j);
            col_row[j] = i;
            return true;
        }
        for k in 0..row_cols[i].len() {
            let other = row_cols[i][k];
            if augment(other, res, r, tau, col_row, row_cols, seen) {
                row_cols[i][k] = j;
                col_row[j] = i;
                return true;
            }
        }
    }
    false
}

/// Removes terms until at most `limit` remain, keeping the weighted sum.
fn caratheodory(terms: &mut Vec<(f64, Vec<usize>)>, m: usize, n: usize, limit: usize) {
    while terms.len() > limit {
        let k = terms.len();
        // Columns: (vec X_h, 1). Find c != 0 with sum_h c_h (vec X_h, 1) = 0.
        let dim = m * n + 1;
        let mut a = vec![0.0f64; dim * k];
        for (h, (_, rows)) in terms.iter().enumerate() {
            for (j, &i) in rows.iter().enumerate() {
                a[(i * n + j) * k + h] = 1.0;
            }
            a[(dim - 1) * k + h] = 1.0;
        }
        let Some(c) = null_vector(&mut a, dim, k) else { return };
        let mut step = f64::INFINITY;
        let mut arg = 0;
        for h in 0..k {
            if c[h] > 1e-12 {
                let s = terms[h].0 / c[h];
                if s < step {
                    step = s;
                    arg = h;
                }
            }
        }
        for h in 0..k {
            terms[h].0 -= step * c[h];
        }
        terms[arg].0 = 0.0;
        terms.retain(|t| t.0 > 0.0);
    }
}

/// A nonzero solution of `A c = 0` for a `rows x cols` matrix with more
/// columns than its rank, by Gauss-Jordan elimination.
fn null_vector(a: &mut [f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    let mut free = None;
    for col in 0..cols {
        let best = (row..rows).max_by(|&x, &y| libm::fabs(a[x * cols + col]).total_cmp(&libm::fabs(a[y * cols + col])));
        let Some(p) = best.filter(|&p| libm::fabs(a[p * cols + col]) > 1e-9) else {
            free = Some(col);
            break;
        };
        for c in 0..cols {
            a.swap(row * cols + c, p * cols + c);
        }
        let pv = a[row * cols + col];
        for c in 0..cols {
            a[row * cols + c] /= pv;
        }
        for x in 0..rows {
            if x != row {
                let f = a[x * cols + col];
                if f != 0.0 {
                    for c in 0..cols {
                        a[x * cols + c] -= f * a[row * cols + c];
                    }
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    let free = free?;
    let mut c = vec![0.0; cols];
    c[free] = 1.0;
    for &(r, pc) in &pivots {
        c[pc] = -a[r * cols + free];
    }
    Some(c)
}

/// Euclidean projection onto the simplex `S_m` (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    let mut scratch = Vec::new();
    project_simplex_in_place(&mut out, &mut scratch);
    out
}

/// In-place form of [`project_simplex`]; `scratch` is reused between calls.
pub fn project_simplex_in_place(v: &mut [f64], scratch: &mut Vec<f64>) {
    if v.is_empty() {
        return;
    }
    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in scratch.iter().enumerate() {
        cum += u;
        let t = (cum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Options for [`project_capped_sum_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionOptions {
    /// Pivot on the median of the first 50 candidate break points instead
    /// of the exact median.
    pub sample_median: bool,
}

/// Reusable buffers for the capped-sum projection.
#[derive(Debug, Clone, Default)]
pub struct ProjectionScratch {
    undecided: Vec<f64>,
    points: Vec<f64>,
}

/// Euclidean projection onto `L_n^r`.
pub fn project_capped_sum(v: &[f64], r: usize) -> Result<Vec<f64>> {
    project_capped_sum_with(v, r, ProjectionOptions::default())
}

pub fn project_capped_sum_with(v: &[f64], r: usize, opts: ProjectionOptions) -> Result<Vec<f64>> {
    if r == 0 || r > v.len() {
        return Err(Error::OutOfRange(format!("r = {r} must lie in 1..={}", v.len())));
    }
    let mut out = v.to_vec();
    let mut scratch = ProjectionScratch::default();
    project_capped_sum_in_place(&mut out, r as f64, opts, &mut scratch);
    Ok(out)
}

/// Projects `v` in place onto `{sum x = target, 0 <= x <= 1}`.
/// `target` must lie in `[0, v.len()]`.
pub fn project_capped_sum_in_place(v: &mut [f64], target: f64, opts: ProjectionOptions, s: &mut ProjectionScratch) {
    let theta = capped_sum_theta(v, target, opts, s);
    for x in v.iter_mut() {
        *x = (*x - theta).clamp(0.0, 1.0);
    }
}

/// The multiplier `theta` of the capped-sum projection.
///
/// Invariant: `f(lo) >= target >= f(hi)` with `f(theta) = sum clamp(v - theta, 0, 1)`.
/// Coordinates whose state (clipped at 1, zero, or active) is fixed on
/// `[lo, hi]` are folded into running counts; the rest keep at least one
/// break point strictly inside the interval, so each round costs
/// `O(#break points left)`, and pivoting on their median halves them.
/// The inner loops are kept free of data-dependent branches.
fn capped_sum_theta(v: &[f64], target: f64, opts: ProjectionOptions, s: &mut ProjectionScratch) -> f64 {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut clipped = 0.0f64;
    let (mut active_n, mut active_sum) = (0.0f64, 0.0f64);
    let w = &mut s.undecided;
    let points = &mut s.points;
    w.clear();
    w.extend_from_slice(v);
    points.clear();
    points.extend(v.iter().flat_map(|&x| [x, x - 1.0]));
    while !points.is_empty() {
        let pool = if opts.sample_median {
            points.len().min(50)
        } else {
            points.len()
        };
        let (_, &mut pivot, _) = points[..pool].select_nth_unstable_by(pool / 2, f64::total_cmp);
        let mut f = clipped + active_sum - active_n * pivot;
        for &x in w.iter() {
            f += (x - pivot).max(0.0).min(1.0);
        }
        if f == target {
            return pivot;
        }
        if f > target {
            lo = pivot;
        } else {
            hi = pivot;
        }
        // Fold decided coordinates, compact the rest and gather their
        // break points inside (lo, hi) in one pass.
        points.resize(2 * w.len(), 0.0);
        let (mut kept, mut np) = (0, 0);
        for k in 0..w.len() {
            let x = w[k];
            let top = x - 1.0;
            let clip = top >= hi;
            let active = top <= lo && x >= hi;
            let keep = !clip && x > lo && !active;
            clipped += clip as u8 as f64;
            active_n += active as u8 as f64;
            active_sum += x * active as u8 as f64;
            w[kept] = x;
            kept += keep as usize;
            points[np] = x;
            np += (keep && x < hi) as usize;
            points[np] = top;
            np += (keep && top > lo) as usize;
        }
        w.truncate(kept);
        points.truncate(np);
    }
    if active_n > 0.0 {
        ((clipped + active_sum - target) / active_n).clamp(lo, hi)
    } else if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

/// Capped-sum projection by sorting all break points; the `O(n log n)`
/// baseline the median search is measured against.
pub fn project_capped_sum_sorted(v: &[f64], r: usize) -> Result<Vec<f64>> {
    if r == 0 || r > v.len() {
        return Err(Error::OutOfRange(format!("r = {r} must lie in 1..={}", v.len())));
    }
    let ones = vec![1.0; v.len()];
    Ok(project_weighted(v, &ones, r as f64))
}

/// Projection onto `{sum_k w_k x_k = target, 0 <= x <= 1}` for positive
/// weights: `x_k = clamp(v_k - theta w_k, 0, 1)`, with `theta` found among
/// the sorted break points `v_k / w_k` and `(v_k - 1) / w_k`.
pub fn project_weighted(v: &[f64], w: &[f64], target: f64) -> Vec<f64> {
    let f = |theta: f64| -> f64 {
        v.iter()
            .zip(w)
            .map(|(&x, &wk)| wk * (x - theta * wk).clamp(0.0, 1.0))
            .sum()
    };
    let mut points: Vec<f64> = v.iter().zip(w).flat_map(|(&x, &wk)| [x / wk, (x - 1.0) / wk]).collect();
    points.sort_by(f64::total_cmp);
    // f is nonincreasing; find adjacent points with f(p_lo) >= target >= f(p_hi).
    let theta = if f(points[0]) <= target {
        points[0]
    } else if f(points[points.len() - 1]) >= target {
        points[points.len() - 1]
    } else {
        let (mut a, mut b) = (0usize, points.len() - 1);
        while b - a > 1 {
            let mid = (a + b) / 2;
            if f(points[mid]) >= target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let (lo, hi) = (points[a], points[b]);
        // f is affine on [lo, hi].
        let (flo, fhi) = (f(lo), f(hi));
        if flo == fhi {
            lo
        } else {
            lo + (flo - target) / (flo - fhi) * (hi - lo)
        }
    };
    v.iter()
        .zip(w)
        .map(|(&x, &wk)| (x - theta * wk).clamp(0.0, 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::NoiseSource;
    use crate::perm::{to_matrix, Multipermutation};

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// KKT oracle: scan every interval between consecutive break points and
    /// solve the affine equation there.
    fn capped_oracle(v: &[f64], target: f64) -> Vec<f64> {
        let f = |t: f64| v.iter().map(|x| (x - t).clamp(0.0, 1.0)).sum::<f64>();
        let mut pts: Vec<f64> = v.iter().flat_map(|&x| [x, x - 1.0]).collect();
        pts.sort_by(f64::total_cmp);
        let mut theta = None;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (f(a), f(b));
            if fa >= target && target >= fb {
                theta = Some(if fa == fb {
                    a
                } else {
                    a + (fa - target) / (fa - fb) * (b - a)
                });
                break;
            }
        }
        let theta = theta.unwrap_or_else(|| {
            if f(pts[0]) <= target {
                pts[0]
            } else {
                pts[pts.len() - 1]
            }
        });
        let x: Vec<f64> = v.iter().map(|x| (x - theta).clamp(0.0, 1.0)).collect();
        // KKT certificate.
        for (xi, vi) in x.iter().zip(v) {
            let g = vi - xi - theta;
            if *xi > 1e-12 && *xi < 1.0 - 1e-12 {
                assert!(g.abs() < 1e-9);
            } else if *xi <= 1e-12 {
                assert!(g <= 1e-9);
            } else {
                assert!(g >= -1e-9);
            }
        }
        x
    }

    /// Simplex oracle: active set search on the support size.
    fn simplex_oracle(v: &[f64]) -> Vec<f64> {
        let m = v.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 1u32..(1 << m) {
            let k = mask.count_ones() as f64;
            let s: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).sum();
            let theta = (s - 1.0) / k;
            let x: Vec<f64> = (0..m)
                .map(|i| if mask >> i & 1 == 1 { v[i] - theta } else { 0.0 })
                .collect();
            if x.iter().any(|&e| e < -1e-15) {
                continue;
            }
            let d = dist(&x, v);
            if best.as_ref().map_or(true, |b| d < b.0) {
                best = Some((d, x));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn fixed_examples() {
        let p = project_capped_sum(&[2.0, 2.0, -1.0], 2).unwrap();
        assert!(max_err(&p, &[1.0, 1.0, 0.0]) < 1e-9);
        assert!(max_err(&project_simplex(&[0.3, 0.3, 0.4]), &[0.3, 0.3, 0.4]) < 1e-15);
        assert_eq!(project_simplex(&[2.0, 0.0, 0.0]), [1.0, 0.0, 0.0]);
        let inside = [0.25, 0.75, 0.5, 0.5];
        assert!(max_err(&project_capped_sum(&inside, 2).unwrap(), &inside) < 1e-12);
        assert!(project_capped_sum(&inside, 0).is_err());
        assert!(project_capped_sum(&inside, 5).is_err());
        let full = project_capped_sum(&[3.0, -2.0, 0.1], 3).unwrap();
        assert_eq!(full, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn simplex_matches_oracle() {
        let mut src = NoiseSource::new(21);
        for _ in 0..2000 {
            let m = 1 + src.below(7) as usize;
            let v: Vec<f64> = (0..m).map(|_| 2.0 * src.gaussian()).collect();
            assert!(max_err(&project_simplex(&v), &simplex_oracle(&v)) < 1e-9);
        }
    }

    #[test]
    fn capped_sum_matches_oracle() {
        let mut src = NoiseSource::new(22);
        for trial in 0..3000 {
            let n = 1 + src.below(30) as usize;
            let r = 1 + src.below(n as u64) as usize;
            let v: Vec<f64> = if trial % 3 == 0 {
                // Heavy ties.
                (0..n).map(|_| (src.below(5) as f64) / 2.0 - 0.5).collect()
            } else {
                (0..n).map(|_| 1.5 * src.gaussian() + 0.5).collect()
            };
            let oracle = capped_oracle(&v, r as f64);
            let fast = project_capped_sum(&v, r).unwrap();
            let sampled = project_capped_sum_with(&v, r, ProjectionOptions { sample_median: true }).unwrap();
            let sorted = project_capped_sum_sorted(&v, r).unwrap();
            assert!(max_err(&fast, &oracle) < 1e-9, "{v:?} r={r}");
            assert!(max_err(&sampled, &oracle) < 1e-9);
            assert!(max_err(&sorted, &oracle) < 1e-9);
            assert!((fast.iter().sum::<f64>() - r as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn capped_sum_properties() {
        let mut src = NoiseSource::new(23);
        for _ in 0..500 {
            let n = 2 + src.below(40) as usize;
            let r = 1 + src.below(n as u64 - 1) as usize;
            let u: Vec<f64> = (0..n).map(|_| src.gaussian()).collect();
            let v: Vec<f64> = (0..n).map(|_| src.gaussian()).collect();
            let pu = project_capped_sum(&u, r).unwrap();
            let pv = project_capped_sum(&v, r).unwrap();
            assert!(max_err(&project_capped_sum(&pu, r).unwrap(), &pu) < 1e-12);
            assert!(dist(&pu, &pv) <= dist(&u, &v) + 1e-12);
            let comp: Vec<f64> = v.iter().map(|x| 1.0 - x).collect();
            let pc = project_capped_sum(&comp, n - r).unwrap();
            let back: Vec<f64> = pv.iter().map(|x| 1.0 - x).collect();
            assert!(max_err(&pc, &back) < 1e-9);
        }
    }

    #[test]
    fn weighted_projection_kkt() {
        let mut src = NoiseSource::new(24);
        for _ in 0..1000 {
            let n = 1 + src.below(8) as usize;
            let w: Vec<f64> = (0..n).map(|_| 1.0 + src.below(3) as f64).collect();
            let total: f64 = w.iter().sum();
            let target = src.uniform() * total;
            let v: Vec<f64> = (0..n).map(|_| src.gaussian()).collect();
            let x = project_weighted(&v, &w, target);
            let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert!((s - target).abs() < 1e-9);
            // Free coordinates share one multiplier (v - x) / w.
            let mut theta = None::<f64>;
            for k in 0..n {
                if x[k] > 1e-9 && x[k] < 1.0 - 1e-9 {
                    let t = (v[k] - x[k]) / w[k];
                    if let Some(t0) = theta {
                        assert!((t - t0).abs() < 1e-9);
                    }
                    theta = Some(t);
                }
            }
        }
    }

    fn random_hull_point(src: &mut NoiseSource, r: &MultiplicityVector, k: usize) -> RelaxedMatrix {
        let mut w: Vec<f64> = (0..k).map(|_| src.uniform() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let mut z = RelaxedMatrix::zeros(r.m(), r.n());
        for wk in w {
            let mut sym = Multipermutation::sorted(r).into_symbols();
            src.shuffle(&mut sym);
            for (j, &s) in sym.iter().enumerate() {
                let v = z.get(s - 1, j);
                z.set(s - 1, j, v + wk);
            }
        }
        z
    }

    #[test]
    fn hull_membership() {
        let r = MultiplicityVector::new(vec![2, 1, 3]).unwrap();
        let x = to_matrix(&Multipermutation::sorted(&r));
        assert!(in_hull(&RelaxedMatrix::from(&x), &r, HULL_TOL));
        let n = r.n() as f64;
        let data = (0..3).flat_map(|i| vec![r.counts()[i] as f64 / n; 6]).collect();
        assert!(in_hull(&RelaxedMatrix::new(3, 6, data).unwrap(), &r, HULL_TOL));
        let mut src = NoiseSource::new(25);
        for _ in 0..50 {
            assert!(in_hull(&random_hull_point(&mut src, &r, 5), &r, 1e-12));
        }
        let mut bad = RelaxedMatrix::from(&x);
        bad.set(0, 0, 0.5);
        assert!(!in_hull(&bad, &r, HULL_TOL));
        assert!(matches!(decompose(&bad, &r), Err(Error::NotInHull(_))));
    }

    fn check_decomposition(z: &RelaxedMatrix, r: &MultiplicityVector) -> usize {
        let terms = decompose(z, r).unwrap();
        let (m, n) = (r.m(), r.n());
        let mut sum = RelaxedMatrix::zeros(m, n);
        let mut wsum = 0.0;
        for (w, x) in &terms {
            assert!(*w > 0.0);
            wsum += w;
            for i in 0..m {
                for j in 0..n {
                    let v = sum.get(i, j);
                    sum.set(i, j, v + w * x.get(i, j) as f64);
                }
            }
        }
        assert!((wsum - 1.0).abs() <= 1e-12, "weights sum {wsum}");
        assert!(max_err(sum.as_slice(), z.as_slice()) <= 1e-9);
        assert!(terms.len() <= n * n - 2 * n + 2);
        terms.len()
    }

    #[test]
    fn decomposition_reconstructs() {
        let mut src = NoiseSource::new(26);
        for r in [vec![2, 2, 2], vec![1, 2, 1], vec![1, 1, 1, 1, 1], vec![3, 1]] {
            let r = MultiplicityVector::new(r).unwrap();
            for k in [1, 2, 5, 20] {
                for _ in 0..25 {
                    check_decomposition(&random_hull_point(&mut src, &r, k), &r);
                }
            }
        }
    }

    #[test]
    fn decomposition_small_cases() {
        let r = MultiplicityVector::new(vec![2, 2, 2]).unwrap();
        let x = to_matrix(&Multipermutation::new(vec![3, 3, 2, 1, 1, 2], r.clone()).unwrap());
        let terms = decompose(&RelaxedMatrix::from(&x), &r).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, 1.0);
        assert_eq!(terms[0].1, x);
        let r11 = MultiplicityVector::new(vec![1, 1]).unwrap();
        let uniform = RelaxedMatrix::new(2, 2, vec![0.5; 4]).unwrap();
        let terms = decompose(&uniform, &r11).unwrap();
        assert_eq!(terms.len(), 2);
        for (w, _) in &terms {
            assert!((w - 0.5).abs() < 1e-15);
        }
        assert_ne!(terms[0].1, terms[1].1);
    }

    #[test]
    fn caratheodory_bound_for_permutations() {
        // Many permutation matrices mixed together must be thinned to n^2 - 2n + 2.
        let mut src = NoiseSource::new(27);
        let r = MultiplicityVector::new(vec![1; 4]).unwrap();
        for _ in 0..20 {
            let z = random_hull_point(&mut src, &r, 24);
            assert!(check_decomposition(&z, &r) <= 10);
        }
    }
}
