//! Factor graph of a constrained code: one variable per surviving class of
//! matrix entries, one check per row (target `r_i`) and per column (target 1).

use alloc::vec;
use alloc::vec::Vec;

use crate::channels::LlrMatrix;
use crate::codes::{ConstraintSet, Entry};
use crate::polytope::RelaxedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Row `i` (0-based): `sum_j X_ij = r_i`.
    Row(usize),
    /// Column `j` (0-based): `sum_i X_ij = 1`.
    Col(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub kind: CheckKind,
    pub target: f64,
    /// Indices into [`FactorGraph::edges`]; edges of one check are contiguous.
    pub edges: core::ops::Range<usize>,
}

/// A (check, variable) incidence. `weight` counts how many entries of the
/// variable's class lie in the check's row or column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub check: usize,
    pub var: usize,
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    m: usize,
    n: usize,
    classes: Vec<Vec<Entry>>,
    entry_var: Vec<Option<usize>>,
    checks: Vec<Check>,
    edges: Vec<Edge>,
    var_edges: Vec<Vec<usize>>,
}

impl FactorGraph {
    /// Deletes fixed-at-zero entries and merges fixed-at-equality chains.
    ///
    /// Equality pairs are closed transitively; a class that contains a
    /// fixed-at-zero entry is zero as a whole and is deleted.
    pub fn build(c: &ConstraintSet) -> Self {
        let mult = c.multiplicity();
        let (m, n) = (mult.m(), mult.n());
        let mut parent: Vec<usize> = (0..m * n).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for (a, b) in c.equalities() {
            let ra = find(&mut parent, a.row * n + a.col);
            let rb = find(&mut parent, b.row * n + b.col);
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut zero_root = vec![false; m * n];
        for e in c.zeros() {
            let root = find(&mut parent, e.row * n + e.col);
            zero_root[root] = true;
        }
        let mut root_var = vec![usize::MAX; m * n];
        let mut classes: Vec<Vec<Entry>> = Vec::new();
        let mut entry_var = vec![None; m * n];
        for k in 0..m * n {
            let root = find(&mut parent, k);
            if zero_root[root] {
                continue;
            }
            if root_var[root] == usize::MAX {
                root_var[root] = classes.len();
                classes.push(Vec::new());
            }
            let v = root_var[root];
            classes[v].push(Entry::new(k / n, k % n));
            entry_var[k] = Some(v);
        }
        let mut checks = Vec::with_capacity(m + n);
        let mut edges = Vec::new();
        let mut add_check = |kind: CheckKind, target: f64, cells: &mut dyn Iterator<Item = usize>| {
            let start = edges.len();
            let mut local: Vec<(usize, usize)> = Vec::new();
            for k in cells {
                if let Some(v) = entry_var[k] {
                    match local.iter_mut().find(|(var, _)| *var == v) {
                        Some(slot) => slot.1 += 1,
                        None => local.push((v, 1)),
                    }
                }
            }
            let check = checks.len();
            edges.extend(local.into_iter().map(|(var, weight)| Edge { check, var, weight }));
            checks.push(Check {
                kind,
                target,
                edges: start..edges.len(),
            });
        };
        for i in 0..m {
            add_check(CheckKind::Row(i), mult.counts()[i] as f64, &mut (i * n..(i + 1) * n));
        }
        for j in 0..n {
            add_check(CheckKind::Col(j), 1.0, &mut (0..m).map(|i| i * n + j));
        }
        let mut var_edges = vec![Vec::new(); classes.len()];
        for (e, edge) in edges.iter().enumerate() {
            var_edges[edge.var].push(e);
        }
        Self {
            m,
            n,
            classes,
            entry_var,
            checks,
            edges,
            var_edges,
        }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        self.classes.len()
    }

    /// Entries represented by variable `v`.
    pub fn class(&self, v: usize) -> &[Entry] {
        &self.classes[v]
    }

    /// Variable of a matrix entry, `None` for deleted entries.
    pub fn var_of(&self, e: Entry) -> Option<usize> {
        self.entry_var[e.row * self.n + e.col]
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges incident to variable `v`.
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    /// Checks that cannot be satisfied by any point of `[0, 1]^vars`.
    pub fn infeasible_checks(&self) -> Vec<usize> {
        self.checks
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                let total: usize = self.edges[c.edges.clone()].iter().map(|e| e.weight).sum();
                c.target > total as f64
            })
            .map(|(k, _)| k)
            .collect()
    }

    /// Per-variable cost: the sum of `Gamma` over the variable's class.
    pub fn variable_costs(&self, gamma: &LlrMatrix) -> Vec<f64> {
        self.classes
            .iter()
            .map(|cls| cls.iter().map(|e| gamma.get(e.row, e.col)).sum())
            .collect()
    }

    /// The `m x n` matrix whose surviving entries copy their variable.
    pub fn expand(&self, x: &[f64]) -> RelaxedMatrix {
        let mut z = RelaxedMatrix::zeros(self.m, self.n);
        for (v, cls) in self.classes.iter().enumerate() {
            for e in cls {
                z.set(e.row, e.col, x[v]);
            }
        }
        z
    }
}

pub fn build_graph(c: &ConstraintSet) -> FactorGraph {
    FactorGraph::build(c)
}
