//! Quadratic label propagation baseline: minimize `sum W_ij (x_i - x_j)^2`
//! subject to the labels, i.e. harmonic interpolation, solved by Jacobi
//! averaging over neighbours.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlpError};
use crate::graph::{EmpiricalGraph, NodeSignal};
use crate::solver::SamplingSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpConfig {
    pub max_iters: usize,
    /// Stop once an update moves no entry by more than this.
    pub tol: f64,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            max_iters: 1_000_000,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub signal: NodeSignal,
    pub iterations: usize,
    /// False when `max_iters` ran out first; `signal` is then the last iterate.
    pub converged: bool,
}

impl LpOutcome {
    pub fn into_result(self) -> Result<NodeSignal> {
        if self.converged {
            Ok(self.signal)
        } else {
            Err(SlpError::InvalidConfig(format!(
                "label propagation did not converge in {} iterations",
                self.iterations
            )))
        }
    }
}

pub fn lp_solve(g: &EmpiricalGraph, s: &SamplingSet, cfg: &LpConfig) -> Result<LpOutcome> {
    s.check_against(g)?;
    if cfg.max_iters < 1 || cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(SlpError::InvalidConfig(
            "label propagation needs max_iters >= 1 and tol > 0".into(),
        ));
    }
    let n = g.num_nodes();
    let labels = s.dense(n);
    // Starting inside the label range keeps every iterate inside it.
    let mid = 0.5 * (s.min_label() + s.max_label());
    let mut x: Vec<f64> = labels.iter().map(|l| l.unwrap_or(mid)).collect();
    let mut next = x.clone();

    for it in 1..=cfg.max_iters {
        let mut moved = 0.0_f64;
        for i in 0..n {
            if labels[i].is_some() {
                continue;
            }
            let mut acc = 0.0;
            for &e in g.head_incidences(i).iter().chain(g.tail_incidences(i)) {
                let edge = g.edge(e);
                let j = if edge.head == i { edge.tail } else { edge.head };
                acc += edge.weight * x[j];
            }
            next[i] = acc / g.degrees()[i];
            moved = moved.max((next[i] - x[i]).abs());
        }
        std::mem::swap(&mut x, &mut next);
        if moved <= cfg.tol {
            return Ok(LpOutcome {
                signal: NodeSignal::new(x)?,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(LpOutcome {
        signal: NodeSignal::new(x)?,
        iterations: cfg.max_iters,
        converged: false,
    })
}

/// Errors of one estimate against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub sup_error: f64,
    pub mse: f64,
    pub tv: f64,
}

impl ErrorStats {
    pub fn of(g: &EmpiricalGraph, estimate: &NodeSignal, truth: &NodeSignal) -> Result<Self> {
        g.check_nodes(estimate.len())?;
        g.check_nodes(truth.len())?;
        let n = truth.len() as f64;
        Ok(Self {
            sup_error: estimate.max_abs_diff(truth),
            mse: estimate
                .iter()
                .zip(truth.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / n,
            tv: g.tv_of(estimate.as_slice()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub slp: ErrorStats,
    pub lp: ErrorStats,
}

/// Error and TV of the sparse and quadratic estimates against `truth`.
pub fn compare(
    g: &EmpiricalGraph,
    s: &SamplingSet,
    slp_result: &NodeSignal,
    lp_result: &NodeSignal,
    truth: &NodeSignal,
) -> Result<Comparison> {
    s.check_against(g)?;
    Ok(Comparison {
        slp: ErrorStats::of(g, slp_result, truth)?,
        lp: ErrorStats::of(g, lp_result, truth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_chain(n: usize) -> EmpiricalGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        EmpiricalGraph::build(&edges).unwrap()
    }

    #[test]
    fn fully_labeled_returns_labels() {
        let g = unit_chain(3);
        let s = SamplingSet::new([(0, 1.0), (1, 5.0), (2, -2.0)]).unwrap();
        let out = lp_solve(&g, &s, &LpConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.signal.as_slice(), &[1.0, 5.0, -2.0]);
    }

    #[test]
    fn midpoint_of_three_node_chain() {
        let g = unit_chain(3);
        let s = SamplingSet::new([(0, 1.0), (2, 0.0)]).unwrap();
        let out = lp_solve(&g, &s, &LpConfig::default()).unwrap();
        assert_eq!(out.signal[1], 0.5);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let g = unit_chain(30);
        let s = SamplingSet::new([(0, 1.0), (29, 0.0)]).unwrap();
        let out = lp_solve(
            &g,
            &s,
            &LpConfig {
                max_iters: 5,
                tol: 1e-12,
            },
        )
        .unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
        assert!(out.into_result().is_err());
    }

    #[test]
    fn constant_truth_with_one_label_is_exact_for_both() {
        let g = unit_chain(5);
        let s = SamplingSet::new([(2, 3.0)]).unwrap();
        let lp = lp_solve(&g, &s, &LpConfig::default()).unwrap().signal;
        let truth = NodeSignal::new(vec![3.0; 5]).unwrap();
        // Started at the constant, the primal-dual iteration never moves.
        let cfg = crate::solver::SolverConfig {
            init: Some((truth.clone(), crate::graph::EdgeSignal::zeros(4))),
            ..crate::solver::SolverConfig::with_iters(50)
        };
        let slp = crate::solver::solve(&g, &s, &cfg).unwrap().average;
        let cmp = compare(&g, &s, &slp, &lp, &truth).unwrap();
        assert!(cmp.lp.sup_error <= 1e-10);
        assert_eq!(cmp.slp.sup_error, 0.0);
        assert_eq!(cmp.slp.mse, 0.0);
        assert!(cmp.lp.tv <= 1e-10);
        assert_eq!(cmp.slp.tv, 0.0);
    }
}
