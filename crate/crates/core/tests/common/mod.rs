//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver; only graph construction and accessors are used.

#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slp::{EmpiricalGraph, SamplingSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-major `|E| x N` incidence matrix with weights folded in.
pub fn dense_incidence(g: &EmpiricalGraph) -> Vec<Vec<f64>> {
    g.edges()
        .iter()
        .map(|e| {
            let mut row = vec![0.0; g.num_nodes()];
            row[e.head] = e.weight;
            row[e.tail] = -e.weight;
            row
        })
        .collect()
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matvec_t(a: &[Vec<f64>], y: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, yi) in a.iter().zip(y) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * yi;
        }
    }
    out
}

pub fn dense_solve(a: Vec<Vec<f64>>, b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let x = m
        .lu()
        .solve(&DVector::from_vec(b))
        .expect("nonsingular system");
    x.iter().copied().collect()
}

/// Minimizer of the weighted sum of squared differences with labels fixed,
/// via a dense solve of the Laplacian restricted to unlabeled nodes.
pub fn harmonic_oracle(g: &EmpiricalGraph, s: &SamplingSet) -> Vec<f64> {
    let n = g.num_nodes();
    let free: Vec<usize> = (0..n).filter(|&i| !s.contains(i)).collect();
    let pos = |i: usize| free.iter().position(|&f| f == i);
    let m = free.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for e in g.edges() {
        for (u, v) in [(e.head, e.tail), (e.tail, e.head)] {
            if let Some(pu) = pos(u) {
                a[pu][pu] += e.weight;
                match pos(v) {
                    Some(pv) => a[pu][pv] -= e.weight,
                    None => b[pu] += e.weight * s.label(v).unwrap(),
                }
            }
        }
    }
    let sol = if m == 0 { vec![] } else { dense_solve(a, b) };
    (0..n)
        .map(|i| s.label(i).unwrap_or_else(|| sol[pos(i).unwrap()]))
        .collect()
}

pub fn tv_dense(g: &EmpiricalGraph, x: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|e| e.weight * (x[e.head] - x[e.tail]).abs())
        .sum()
}

/// Primal linear program: minimize `sum_e w_e t_e` subject to
/// `-t_e <= x_h - x_t <= t_e` and the labels. Returns `(optimum, x)`.
pub fn lp_primal(g: &EmpiricalGraph, s: &SamplingSet) -> (f64, Vec<f64>) {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let x: Vec<_> = (0..g.num_nodes())
        .map(|i| match s.label(i) {
            Some(v) => p.add_var(0.0, (v, v)),
            None => p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)),
        })
        .collect();
    for e in g.edges() {
        let t = p.add_var(e.weight, (0.0, f64::INFINITY));
        p.add_constraint(
            [(t, 1.0), (x[e.head], -1.0), (x[e.tail], 1.0)],
            ComparisonOp::Ge,
            0.0,
        );
        p.add_constraint(
            [(t, 1.0), (x[e.head], 1.0), (x[e.tail], -1.0)],
            ComparisonOp::Ge,
            0.0,
        );
    }
    let sol = p.solve().expect("primal LP is feasible and bounded");
    let xs = x.iter().map(|v| *sol.var_value(*v)).collect();
    (sol.objective(), xs)
}

/// Dual linear program: maximize `sum_{i in M} (D^T y)_i label_i` over
/// `|y| <= 1` with `(D^T y)_i = 0` off the labels. Returns `(optimum, y)`.
pub fn lp_dual(g: &EmpiricalGraph, s: &SamplingSet) -> (f64, Vec<f64>) {
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let mut obj = vec![0.0; g.num_edges()];
    for (k, e) in g.edges().iter().enumerate() {
        obj[k] = e.weight * (s.label(e.head).unwrap_or(0.0) - s.label(e.tail).unwrap_or(0.0));
    }
    let y: Vec<_> = obj.iter().map(|&c| p.add_var(c, (-1.0, 1.0))).collect();
    for i in (0..g.num_nodes()).filter(|&i| !s.contains(i)) {
        let mut terms = Vec::new();
        for (k, e) in g.edges().iter().enumerate() {
            if e.head == i {
                terms.push((y[k], e.weight));
            } else if e.tail == i {
                terms.push((y[k], -e.weight));
            }
        }
        p.add_constraint(terms.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let sol = p.solve().expect("dual LP is feasible and bounded");
    (
        sol.objective(),
        y.iter().map(|v| *sol.var_value(*v)).collect(),
    )
}

/// Exhaustive search over signals whose unlabeled values are drawn from the
/// label values. Some minimizer always has this form, by the coarea formula.
pub fn level_set_optimum(g: &EmpiricalGraph, s: &SamplingSet) -> f64 {
    let mut values: Vec<f64> = s.iter().map(|(_, v)| v).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let free: Vec<usize> = (0..g.num_nodes()).filter(|&i| !s.contains(i)).collect();
    let mut x: Vec<f64> = (0..g.num_nodes())
        .map(|i| s.label(i).unwrap_or(0.0))
        .collect();
    let total = values.len().pow(free.len() as u32);
    let mut best = f64::INFINITY;
    for mut code in 0..total {
        for &i in &free {
            x[i] = values[code % values.len()];
            code /= values.len();
        }
        best = best.min(tv_dense(g, &x));
    }
    best
}

/// Decaying-weight chain `W_{i,i+1} = 1/(i+1)` with the end labels, built
/// without the bench module.
pub fn decaying_chain(n: usize) -> (EmpiricalGraph, SamplingSet) {
    let edges: Vec<_> = (0..n - 1)
        .map(|i| (i, i + 1, 1.0 / (i + 1) as f64))
        .collect();
    (
        EmpiricalGraph::build(&edges).unwrap(),
        SamplingSet::new([(0, 1.0), (n - 1, 0.0)]).unwrap(),
    )
}

/// `||Gamma^1/2 D^T Lambda^1/2||_2` from a dense Gram matrix, with
/// `gamma_i = 1/(2 d_i)` and `lambda_e = 1/(2 w_e)` computed here.
pub fn dense_kappa(g: &EmpiricalGraph) -> f64 {
    let n = g.num_nodes();
    let mut deg = vec![0.0; n];
    for e in g.edges() {
        deg[e.head] += e.weight;
        deg[e.tail] += e.weight;
    }
    let mut b = DMatrix::zeros(n, g.num_edges());
    for (k, e) in g.edges().iter().enumerate() {
        let l = (0.5 / e.weight).sqrt();
        b[(e.head, k)] = (0.5 / deg[e.head]).sqrt() * e.weight * l;
        b[(e.tail, k)] = -(0.5 / deg[e.tail]).sqrt() * e.weight * l;
    }
    b.singular_values().max()
}
