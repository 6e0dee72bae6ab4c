//! ADMM for the LP relaxation `min gamma^T x` over the code polytope.
//!
//! Every edge of the factor graph carries a replica `z_e` of its variable
//! and a multiplier `lambda_e`. One iteration is
//!
//! - `x_v = (sum_e (z_e - lambda_e / mu) - gamma_v / mu) / deg(v)`
//! - per check, `z <- projection of (x + lambda / mu)` onto the check's set
//!   (simplex for unit-weight columns, `L^r` for unit-weight rows, the
//!   weighted capped-sum set otherwise)
//! - `lambda_e += mu (x_v - z_e)`
//!
//! and the solver stops once the primal residual `||x - z||` and the dual
//! residual `mu ||z - z_prev||` are both at most `eps * sqrt(#edges)`.

use alloc::vec;
use alloc::vec::Vec;

use super::graph::{CheckKind, FactorGraph};
use super::{round_matrix, DecodeResult, DecodeStatus, INTEGRALITY_TOL};
use crate::channels::LlrMatrix;
use crate::polytope::{
    project_capped_sum_in_place, project_simplex_in_place, project_weighted, ProjectionOptions, ProjectionScratch,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmOptions {
    pub mu: f64,
    pub max_iter: usize,
    pub eps: f64,
    pub integrality_tol: f64,
    pub projection: ProjectionOptions,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            mu: 5.5,
            max_iter: 200,
            eps: 1e-5,
            integrality_tol: INTEGRALITY_TOL,
            projection: ProjectionOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
enum Projector {
    Simplex,
    Capped,
    Weighted(Vec<f64>),
}

/// Stepwise ADMM state for one decoding problem.
#[derive(Debug, Clone)]
pub struct AdmmSolver<'g> {
    graph: &'g FactorGraph,
    gamma: Vec<f64>,
    opts: AdmmOptions,
    projectors: Vec<Projector>,
    x: Vec<f64>,
    z: Vec<f64>,
    z_prev: Vec<f64>,
    lambda: Vec<f64>,
    iter: usize,
    primal: f64,
    dual: f64,
    buf: Vec<f64>,
    sort_buf: Vec<f64>,
    scratch: ProjectionScratch,
}

impl<'g> AdmmSolver<'g> {
    pub fn new(graph: &'g FactorGraph, gamma: &LlrMatrix, opts: AdmmOptions) -> Self {
        let projectors: Vec<Projector> = graph
            .checks()
            .iter()
            .map(|c| {
                let edges = &graph.edges()[c.edges.clone()];
                if edges.iter().all(|e| e.weight == 1) {
                    match c.kind {
                        CheckKind::Col(_) => Projector::Simplex,
                        CheckKind::Row(_) => Projector::Capped,
                    }
                } else {
                    Projector::Weighted(edges.iter().map(|e| e.weight as f64).collect())
                }
            })
            .collect();
        let mut z = vec![0.0; graph.edges().len()];
        for (c, p) in graph.checks().iter().zip(&projectors) {
            let total: f64 = match p {
                Projector::Weighted(w) => w.iter().sum(),
                _ => c.edges.len() as f64,
            };
            let start = if total > 0.0 { c.target / total } else { 0.0 };
            z[c.edges.clone()].iter_mut().for_each(|v| *v = start);
        }
        Self {
            graph,
            gamma: graph.variable_costs(gamma),
            opts,
            projectors,
            x: vec![0.0; graph.num_vars()],
            z_prev: z.clone(),
            lambda: vec![0.0; z.len()],
            z,
            iter: 0,
            primal: f64::INFINITY,
            dual: f64::INFINITY,
            buf: Vec::new(),
            sort_buf: Vec::new(),
            scratch: ProjectionScratch::default(),
        }
    }

    /// One x / z / lambda round.
    pub fn step(&mut self) {
        let mu = self.opts.mu;
        let edges = self.graph.edges();
        for v in 0..self.x.len() {
            let inc = self.graph.var_edges(v);
            let s: f64 = inc.iter().map(|&e| self.z[e] - self.lambda[e] / mu).sum();
            self.x[v] = (s - self.gamma[v] / mu) / inc.len() as f64;
        }
        core::mem::swap(&mut self.z, &mut self.z_prev);
        for (c, proj) in self.graph.checks().iter().zip(&self.projectors) {
            let range = c.edges.clone();
            self.buf.clear();
            self.buf
                .extend(range.clone().map(|e| self.x[edges[e].var] + self.lambda[e] / mu));
            match proj {
                Projector::Simplex => project_simplex_in_place(&mut self.buf, &mut self.sort_buf),
                Projector::Capped => {
                    project_capped_sum_in_place(&mut self.buf, c.target, self.opts.projection, &mut self.scratch)
                }
                Projector::Weighted(w) => {
                    let out = project_weighted(&self.buf, w, c.target);
                    self.buf.copy_from_slice(&out);
                }
            }
            self.z[range].copy_from_slice(&self.buf);
        }
        let (mut primal, mut dual) = (0.0, 0.0);
        for (e, edge) in edges.iter().enumerate() {
            let r = self.x[edge.var] - self.z[e];
            self.lambda[e] += mu * r;
            primal += r * r;
            let d = self.z[e] - self.z_prev[e];
            dual += d * d;
        }
        self.primal = libm::sqrt(primal);
        self.dual = mu * libm::sqrt(dual);
        self.iter += 1;
    }

    pub fn converged(&self) -> bool {
        let tol = self.opts.eps * libm::sqrt(self.z.len() as f64);
        self.primal <= tol && self.dual <= tol
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }

    pub fn residuals(&self) -> (f64, f64) {
        (self.primal, self.dual)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Replicas of check `k`, in edge order.
    pub fn replicas(&self, k: usize) -> &[f64] {
        &self.z[self.graph.checks()[k].edges.clone()]
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.lambda
    }

    /// `gamma^T x` at the current iterate.
    pub fn objective(&self) -> f64 {
        self.gamma.iter().zip(&self.x).map(|(g, x)| g * x).sum()
    }

    /// Every variable is within `tol` of 0 or 1 and the rounded variables
    /// satisfy every check exactly.
    fn integral(&self, tol: f64) -> bool {
        if self.x.iter().any(|&v| libm::fabs(v).min(libm::fabs(1.0 - v)) > tol) {
            return false;
        }
        let edges = self.graph.edges();
        self.graph.checks().iter().all(|c| {
            let s: usize = edges[c.edges.clone()]
                .iter()
                .filter(|e| self.x[e.var] > 0.5)
                .map(|e| e.weight)
                .sum();
            s as f64 == c.target
        })
    }

    pub fn run(&mut self) -> DecodeStatus {
        while self.iter < self.opts.max_iter {
            self.step();
            if self.converged() {
                return DecodeStatus::Converged;
            }
        }
        DecodeStatus::MaxIter
    }

    pub fn result(&self, status: DecodeStatus) -> DecodeResult {
        let matrix = self.graph.expand(&self.x);
        let rounded = round_matrix(&matrix);
        DecodeResult {
            integral: status == DecodeStatus::Converged && self.integral(self.opts.integrality_tol),
            matrix,
            rounded,
            iterations: self.iter,
            objective: self.objective(),
            status,
        }
    }
}

/// LP decoding by ADMM.
pub fn admm_decode(gamma: &LlrMatrix, graph: &FactorGraph, opts: &AdmmOptions) -> DecodeResult {
    if !graph.infeasible_checks().is_empty() {
        return DecodeResult::infeasible(graph.rows(), graph.cols());
    }
    let mut solver = AdmmSolver::new(graph, gamma, *opts);
    let status = solver.run();
    solver.result(status)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{llr, transmit, ChannelOutput, ChannelSpec, NoiseSource};
    use crate::codes::{encode_st, enumerate_codebook, st_constraints, ConstraintSet, Entry, StCodeParams};
    use crate::decoders::exhaustive_ml;
    use crate::perm::{InitialVector, Multipermutation, MultiplicityVector};
    use crate::polytope::in_hull;
    use num_bigint::BigUint;

    fn st236() -> (StCodeParams, ConstraintSet, FactorGraph) {
        let p = StCodeParams::new(2, 3, 6).unwrap();
        let c = st_constraints(&p);
        let g = FactorGraph::build(&c);
        (p, c, g)
    }

    #[test]
    fn noise_free_converges_to_codeword() {
        let (p, c, g) = st236();
        let t = InitialVector::natural(6);
        let x = encode_st(&BigUint::from(137u32), &p).unwrap();
        let ch = ChannelSpec::awgn(0.3).unwrap();
        let gamma = llr(&ChannelOutput::Real(x.values(&t)), &t, &ch).unwrap();
        let out = admm_decode(&gamma, &g, &AdmmOptions::default());
        assert_eq!(out.status, DecodeStatus::Converged);
        assert!(out.integral);
        assert_eq!(out.rounded, x.symbols());
        assert_eq!(out.codeword(&c).unwrap(), x);
        assert!(in_hull(&out.matrix, c.multiplicity(), 1e-4));
    }

    #[test]
    fn x_update_is_stationary_point() {
        // After an x-update, dL/dx_v = gamma_v + sum_e (lambda_e + mu (x_v - z_e)) = 0.
        let (p, _, g) = st236();
        let t = InitialVector::natural(6);
        let ch = ChannelSpec::awgn(0.6).unwrap();
        let mut src = NoiseSource::new(1);
        let x = encode_st(&BigUint::from(5u32), &p).unwrap();
        let gamma = llr(&transmit(&x, &t, &ch, &mut src), &t, &ch).unwrap();
        let mut s = AdmmSolver::new(&g, &gamma, AdmmOptions::default());
        let costs = g.variable_costs(&gamma);
        for _ in 0..5 {
            let z_before: Vec<f64> = s.z.clone();
            let lam_before: Vec<f64> = s.lambda.clone();
            s.step();
            for v in 0..g.num_vars() {
                let grad: f64 = costs[v]
                    + g.var_edges(v)
                        .iter()
                        .map(|&e| lam_before[e] + s.opts.mu * (s.x[v] - z_before[e]))
                        .sum::<f64>();
                assert!(grad.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn replicas_feasible_after_every_iteration() {
        let (p, _, g) = st236();
        let t = InitialVector::natural(6);
        let ch = ChannelSpec::awgn_snr_db(4.0).unwrap();
        let mut src = NoiseSource::new(2);
        for trial in 0..20u32 {
            let x = encode_st(&BigUint::from(trial * 7), &p).unwrap();
            let gamma = llr(&transmit(&x, &t, &ch, &mut src), &t, &ch).unwrap();
            let mut s = AdmmSolver::new(&g, &gamma, AdmmOptions::default());
            for _ in 0..50 {
                s.step();
                for (k, c) in g.checks().iter().enumerate() {
                    let z = s.replicas(k);
                    let w: Vec<f64> = g.edges()[c.edges.clone()].iter().map(|e| e.weight as f64).collect();
                    let sum: f64 = z.iter().zip(&w).map(|(a, b)| a * b).sum();
                    assert!((sum - c.target).abs() < 1e-9);
                    assert!(z.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v)));
                }
            }
        }
    }

    #[test]
    fn integral_outputs_match_ml() {
        let (p, c, g) = st236();
        let book = enumerate_codebook(&c, 1000).unwrap();
        let t = InitialVector::natural(6);
        let ch = ChannelSpec::awgn_snr_db(6.0).unwrap();
        let mut integral = 0;
        for trial in 0..300u64 {
            let mut src = NoiseSource::stream(99, 0, trial);
            let x = encode_st(&BigUint::from(trial % 216), &p).unwrap();
            let gamma = llr(&transmit(&x, &t, &ch, &mut src), &t, &ch).unwrap();
            let out = admm_decode(&gamma, &g, &AdmmOptions::default());
            if out.integral {
                integral += 1;
                assert_eq!(out.rounded, exhaustive_ml(&gamma, &book).unwrap().symbols());
            }
        }
        assert!(integral > 200);
    }

    #[test]
    fn weighted_checks_decode() {
        // (1,1) = (1,2): symbol 1 occupies both of the first two positions or neither.
        let r = MultiplicityVector::new(vec![2, 2]).unwrap();
        let c = ConstraintSet::new(r.clone(), [], [(Entry::new(0, 0), Entry::new(0, 1))]).unwrap();
        let g = FactorGraph::build(&c);
        let t = InitialVector::natural(2);
        let ch = ChannelSpec::awgn(0.4).unwrap();
        for word in [[1, 1, 2, 2], [2, 2, 1, 1]] {
            let x = Multipermutation::new(word.to_vec(), r.clone()).unwrap();
            let gamma = llr(&ChannelOutput::Real(x.values(&t)), &t, &ch).unwrap();
            let out = admm_decode(
                &gamma,
                &g,
                &AdmmOptions {
                    max_iter: 1000,
                    ..Default::default()
                },
            );
            assert_eq!(out.rounded, word);
            assert!(out.integral);
        }
    }

    #[test]
    fn infeasible_graph_reported() {
        let r = MultiplicityVector::new(vec![1, 1]).unwrap();
        let c = ConstraintSet::new(r, [Entry::new(0, 0), Entry::new(1, 0)], []).unwrap();
        let g = FactorGraph::build(&c);
        let gamma = LlrMatrix::new(2, 2, vec![0.0; 4]).unwrap();
        let out = admm_decode(&gamma, &g, &AdmmOptions::default());
        assert_eq!(out.status, DecodeStatus::Infeasible);
        assert!(!out.integral);
    }
}
