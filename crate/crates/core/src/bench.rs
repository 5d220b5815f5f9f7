//! The decaying-weight chain used to probe the iteration complexity.
//!
//! Nodes `0..N` form a path whose edge `{i, i+1}` has weight `1/(i+1)`, so
//! the edges get cheaper towards the far end. The first node is labeled 1 and
//! the last node 0; the minimizer equals 1 everywhere except the last node and
//! has total variation `1/(N-1)`. Starting from zero, after `K` iterations the
//! running average is still zero beyond hop `K`, which forces its total
//! variation to be at least `1/K`.

use serde::{Deserialize, Serialize};

use crate::certificates::ergodic_bound;
use crate::error::{Result, SlpError};
use crate::graph::{EdgeSignal, EmpiricalGraph, NodeSignal};
use crate::solver::{SamplingSet, SlpRunner};

/// Slack on the lower-bound comparison.
pub const LOWER_BOUND_TOL: f64 = 1e-12;
/// Slack on the upper-bound comparison.
pub const UPPER_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpec {
    n: usize,
}

impl ChainSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(SlpError::InvalidConfig(format!(
                "chain needs at least 3 nodes, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Total variation of the minimizer.
    pub fn optimal_tv(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }
}

/// Graph, labels and ground truth for one chain.
#[derive(Debug, Clone)]
pub struct ChainInstance {
    pub graph: EmpiricalGraph,
    pub samples: SamplingSet,
    pub truth: NodeSignal,
}

pub fn make_chain(spec: ChainSpec) -> ChainInstance {
    let n = spec.n;
    let edges: Vec<_> = (0..n - 1)
        .map(|i| (i, i + 1, 1.0 / (i + 1) as f64))
        .collect();
    let mut truth = vec![1.0; n];
    truth[n - 1] = 0.0;
    ChainInstance {
        graph: EmpiricalGraph::build(&edges).expect("chain is a valid graph"),
        samples: SamplingSet::new([(0, 1.0), (n - 1, 0.0)]).expect("two labels"),
        truth: NodeSignal::new(truth).expect("finite truth"),
    }
}

/// 1-2-5 spaced iteration counts between 10 and `N/2`.
pub fn default_grid(n: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut decade = 1;
    'outer: loop {
        for m in [1, 2, 5] {
            let k = m * decade;
            if k > n / 2 {
                break 'outer;
            }
            if k >= 10 {
                grid.push(k);
            }
        }
        decade *= 10;
    }
    if grid.is_empty() {
        grid.push((n / 2).max(1));
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub k: usize,
    /// `TV(avg_K) - 1/(N-1)`.
    pub suboptimality: f64,
    /// `1/K - 1/N`.
    pub lower: f64,
    /// Ergodic bound evaluated at the true minimizer.
    pub upper: f64,
    /// Nodes beyond hop `K` from the first node with a nonzero average.
    pub locality_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log s(K)` against `log K`.
    pub slope: f64,
    pub lower_violations: usize,
    pub bound_violations: usize,
    pub locality_violations: usize,
}

impl RateReport {
    pub fn ks(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.k).collect()
    }

    pub fn violations(&self) -> usize {
        self.lower_violations + self.bound_violations + self.locality_violations
    }

    /// Fails on the first row that breaks a bound.
    pub fn check(&self) -> Result<()> {
        for r in &self.rows {
            if r.suboptimality < r.lower - LOWER_BOUND_TOL {
                return Err(SlpError::BoundViolation {
                    k: r.k,
                    message: format!(
                        "sub-optimality {:.17e} below lower bound {:.17e}",
                        r.suboptimality, r.lower
                    ),
                });
            }
            if r.suboptimality > r.upper + UPPER_BOUND_TOL {
                return Err(SlpError::BoundViolation {
                    k: r.k,
                    message: format!(
                        "sub-optimality {:.17e} above upper bound {:.17e}",
                        r.suboptimality, r.upper
                    ),
                });
            }
            if r.locality_violations > 0 {
                return Err(SlpError::BoundViolation {
                    k: r.k,
                    message: format!("{} nodes beyond hop K are nonzero", r.locality_violations),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Whitespace-aligned table of `K, s(K), lower, upper`.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>8}  {:>24}  {:>24}  {:>24}\n",
            "K", "s(K)", "lower", "upper"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>8}  {:>24.16e}  {:>24.16e}  {:>24.16e}\n",
                r.k, r.suboptimality, r.lower, r.upper
            ));
        }
        out.push_str(&format!("slope {:.16e}\n", self.slope));
        out
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Runs the chain from zero for each `K` in `grid` and compares the
/// sub-optimality of the running average with both bounds.
///
/// A single run to `max(grid)` is used: the iteration is deterministic, so the
/// state after `K` steps is the same as that of a separate `K`-step run.
pub fn run_rate_experiment(spec: ChainSpec, grid: &[usize]) -> Result<RateReport> {
    let n = spec.n;
    if grid.is_empty() {
        return Err(SlpError::InvalidConfig("empty iteration grid".into()));
    }
    if let Some(&k) = grid.iter().find(|&&k| k < 1 || k >= n) {
        return Err(SlpError::InvalidConfig(format!(
            "grid value {k} outside 1 <= K < N = {n}"
        )));
    }
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();

    let chain = make_chain(spec);
    let g = &chain.graph;
    let mut runner = SlpRunner::new(g, &chain.samples)?;
    let x0 = NodeSignal::zeros(n);
    let y0 = EdgeSignal::zeros(g.num_edges());
    let opt = spec.optimal_tv();

    let mut rows = Vec::with_capacity(grid.len());
    for &k in &grid {
        runner.run(k - runner.state().k)?;
        let avg = &runner.state().x_avg;
        let suboptimality = g.tv_norm(avg)? - opt;
        let upper = ergodic_bound(g, runner.preconditioners(), &x0, &y0, &chain.truth, avg, k);
        let locality_violations = (k + 1..n - 1).filter(|&i| avg[i] != 0.0).count();
        rows.push(RateRow {
            k,
            suboptimality,
            lower: 1.0 / k as f64 - 1.0 / n as f64,
            upper,
            locality_violations,
        });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.suboptimality > 0.0)
        .map(|r| ((r.k as f64).ln(), r.suboptimality.ln()))
        .unzip();
    let slope = if xs.len() >= 2 {
        fit_slope(&xs, &ys)
    } else {
        f64::NAN
    };

    Ok(RateReport {
        n,
        lower_violations: rows
            .iter()
            .filter(|r| r.suboptimality < r.lower - LOWER_BOUND_TOL)
            .count(),
        bound_violations: rows
            .iter()
            .filter(|r| r.suboptimality > r.upper + UPPER_BOUND_TOL)
            .count(),
        locality_violations: rows.iter().map(|r| r.locality_violations).sum(),
        rows,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_chains() {
        let c = make_chain(ChainSpec::new(4).unwrap());
        let w: Vec<_> = c.graph.edges().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(c.truth.as_slice(), &[1.0, 1.0, 1.0, 0.0]);
        assert!((c.graph.tv_norm(&c.truth).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(c.samples.is_satisfied_by(&c.truth));

        let c = make_chain(ChainSpec::new(3).unwrap());
        assert!((c.graph.tv_norm(&c.truth).unwrap() - 0.5).abs() < 1e-15);
        assert!(ChainSpec::new(2).is_err());
    }

    #[test]
    fn default_grid_is_capped_at_half() {
        assert_eq!(default_grid(1000), vec![10, 20, 50, 100, 200, 500]);
        assert_eq!(default_grid(100), vec![10, 20, 50]);
        assert_eq!(default_grid(6), vec![3]);
    }

    #[test]
    fn grid_outside_regime_is_rejected() {
        let spec = ChainSpec::new(10).unwrap();
        assert!(run_rate_experiment(spec, &[10]).is_err());
        assert!(run_rate_experiment(spec, &[0]).is_err());
        assert!(run_rate_experiment(spec, &[]).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [3.0f64, 1.5, 0.75, 0.375].iter().map(|y| y.ln()).collect();
        assert!((fit_slope(&xs, &ys) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_renders() {
        let r = run_rate_experiment(ChainSpec::new(50).unwrap(), &[5, 10, 20]).unwrap();
        assert_eq!(r.ks(), vec![5, 10, 20]);
        assert_eq!(r.to_table().lines().count(), 5);
        let back: RateReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
