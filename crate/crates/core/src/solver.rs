//! Centralized sparse label propagation.
//!
//! Minimizes the total variation of a node signal subject to agreeing with
//! the observed labels, using preconditioned primal-dual iterations:
//!
//! ```text
//! x      = 2 x_k - x_{k-1}
//! y_k+1  = clip(y_k + Lambda D x)           clip(v) = v / max(1, |v|)
//! x_k+1  = project(x_k - Gamma D^T y_k+1)   labels re-imposed on sampled nodes
//! avg_k  = (1 - 1/k) avg_k-1 + (1/k) x_k
//! ```
//!
//! with `gamma_i = 1 / (2 d_i)` and `lambda_e = 1 / (2 W_e)`. The running
//! average is the reported estimate; its sub-optimality decays as `O(1/K)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certificates;
use crate::error::{Result, SlpError};
use crate::graph::{EdgeSignal, EmpiricalGraph, NodeSignal};

/// Labeled nodes and their observed values.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSet {
    entries: BTreeMap<usize, f64>,
}

impl SamplingSet {
    pub fn new<I: IntoIterator<Item = (usize, f64)>>(entries: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (node, value) in entries {
            if !value.is_finite() {
                return Err(SlpError::NonFiniteValue { index: node });
            }
            if map.insert(node, value).is_some() {
                return Err(SlpError::DuplicateLabel { node });
            }
        }
        if map.is_empty() {
            return Err(SlpError::EmptySamplingSet);
        }
        Ok(Self { entries: map })
    }

    /// Checks that every labeled node exists in `g`.
    pub fn check_against(&self, g: &EmpiricalGraph) -> Result<()> {
        match self.entries.keys().find(|&&i| i >= g.num_nodes()) {
            Some(&node) => Err(SlpError::NodeOutOfRange {
                node,
                num_nodes: g.num_nodes(),
            }),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.entries.contains_key(&node)
    }

    pub fn label(&self, node: usize) -> Option<f64> {
        self.entries.get(&node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    /// `(node, value)` pairs in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    /// Dense per-node view: `Some(label)` on sampled nodes.
    pub fn dense(&self, num_nodes: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; num_nodes];
        for (i, v) in self.iter() {
            if i < num_nodes {
                out[i] = Some(v);
            }
        }
        out
    }

    /// Whether `x` matches every label exactly.
    pub fn is_satisfied_by(&self, x: &NodeSignal) -> bool {
        self.iter().all(|(i, v)| i < x.len() && x[i] == v)
    }

    pub fn min_label(&self) -> f64 {
        self.entries.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_label(&self) -> f64 {
        self.entries
            .values()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Diagonal step sizes: `gamma` per node, `lambda` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioners {
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// `gamma_i = 1 / (2 d_i)` and `lambda_e = 1 / (2 W_e)`.
pub fn make_preconditioners(g: &EmpiricalGraph) -> Preconditioners {
    Preconditioners {
        gamma: g.degrees().iter().map(|d| 1.0 / (2.0 * d)).collect(),
        lambda: g.edges().iter().map(|e| 1.0 / (2.0 * e.weight)).collect(),
    }
}

/// Resolvent of the dual term: each entry scaled back into `[-1, 1]`.
#[inline]
pub fn clip_unit(v: f64) -> f64 {
    v / f64::max(1.0, v.abs())
}

pub fn prox_dual(y: &EdgeSignal) -> EdgeSignal {
    EdgeSignal::new(y.iter().map(|&v| clip_unit(v)).collect())
        .expect("clipping preserves finiteness")
}

/// Overwrites sampled entries of `x` with their labels.
pub fn project_samples(x: &NodeSignal, s: &SamplingSet) -> NodeSignal {
    let mut out = x.clone();
    let slice = out.as_mut_slice();
    for (i, v) in s.iter() {
        if i < slice.len() {
            slice[i] = v;
        }
    }
    out
}

/// Iterates and running average after `k` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x_prev: NodeSignal,
    pub x_curr: NodeSignal,
    pub y_curr: EdgeSignal,
    pub x_avg: NodeSignal,
    pub k: usize,
}

impl SolverState {
    /// All-zero start.
    pub fn zeros(g: &EmpiricalGraph) -> Self {
        Self::from_init(
            NodeSignal::zeros(g.num_nodes()),
            EdgeSignal::zeros(g.num_edges()),
        )
    }

    /// Start from `(x0, y0)` with `x_{-1} = x_0`.
    pub fn from_init(x0: NodeSignal, y0: EdgeSignal) -> Self {
        let n = x0.len();
        Self {
            x_prev: x0.clone(),
            x_curr: x0,
            y_curr: y0,
            x_avg: NodeSignal::zeros(n),
            k: 0,
        }
    }

    fn check(&self, g: &EmpiricalGraph) -> Result<()> {
        g.check_nodes(self.x_prev.len())?;
        g.check_nodes(self.x_curr.len())?;
        g.check_nodes(self.x_avg.len())?;
        g.check_edges(self.y_curr.len())
    }
}

/// One full primal-dual update on raw buffers.
///
/// `scratch` holds the extrapolated primal point and must have one slot per
/// node. Every solver path in the crate funnels through this kernel or
/// reproduces its arithmetic exactly.
#[allow(clippy::too_many_arguments)]
pub(crate) fn iterate_raw(
    g: &EmpiricalGraph,
    p: &Preconditioners,
    labels: &[Option<f64>],
    state: &mut SolverState,
    scratch: &mut [f64],
    parallel: bool,
) -> Result<()> {
    use rayon::prelude::*;

    let x_prev = state.x_prev.as_mut_slice();
    let x_curr = state.x_curr.as_slice();
    let extrapolate = |(xe, (c, p)): (&mut f64, (&f64, &f64))| *xe = 2.0 * c - p;
    if parallel {
        scratch
            .par_iter_mut()
            .zip(x_curr.par_iter().zip(x_prev.par_iter()))
            .for_each(extrapolate);
    } else {
        scratch
            .iter_mut()
            .zip(x_curr.iter().zip(x_prev.iter()))
            .for_each(extrapolate);
    }

    let edges = g.edges();
    let xe: &[f64] = scratch;
    let dual = |((y, e), lam): ((&mut f64, &crate::graph::OrientedEdge), &f64)| {
        *y = clip_unit(*y + lam * (e.weight * (xe[e.head] - xe[e.tail])));
    };
    let y = state.y_curr.as_mut_slice();
    if parallel {
        y.par_iter_mut()
            .zip(edges.par_iter())
            .zip(p.lambda.par_iter())
            .for_each(dual);
    } else {
        y.iter_mut()
            .zip(edges.iter())
            .zip(p.lambda.iter())
            .for_each(dual);
    }

    // x_prev receives the new iterate, then the two buffers swap roles.
    let y: &[f64] = state.y_curr.as_slice();
    let primal = |(i, out): (usize, &mut f64)| {
        *out = match labels[i] {
            Some(v) => v,
            None => x_curr[i] - p.gamma[i] * g.adjoint_at(i, y),
        };
    };
    if parallel {
        x_prev.par_iter_mut().enumerate().for_each(primal);
    } else {
        x_prev.iter_mut().enumerate().for_each(primal);
    }
    std::mem::swap(&mut state.x_prev, &mut state.x_curr);

    state.k += 1;
    let k = state.k as f64;
    let keep = 1.0 - 1.0 / k;
    let take = 1.0 / k;
    // Labeled entries are pinned: the blend can be off by an ulp.
    for ((a, &x), l) in state
        .x_avg
        .as_mut_slice()
        .iter_mut()
        .zip(state.x_curr.iter())
        .zip(labels)
    {
        *a = l.unwrap_or(keep * *a + take * x);
    }

    if !(state.x_curr.is_finite() && state.y_curr.is_finite() && state.x_avg.is_finite()) {
        return Err(SlpError::NonFiniteIterate { iteration: state.k });
    }
    Ok(())
}

/// Applies one iteration to `state` and returns the successor state.
pub fn slp_iterate(
    state: &SolverState,
    g: &EmpiricalGraph,
    p: &Preconditioners,
    s: &SamplingSet,
) -> Result<SolverState> {
    state.check(g)?;
    s.check_against(g)?;
    let labels = s.dense(g.num_nodes());
    let mut next = state.clone();
    let mut scratch = vec![0.0; g.num_nodes()];
    iterate_raw(g, p, &labels, &mut next, &mut scratch, false)?;
    Ok(next)
}

/// Solver options.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Early stop when the running average moves by at most `tol` (sup norm)
    /// over `trace_stride` iterations. Zero disables early stopping.
    pub tol: f64,
    /// Optional `(x0, y0)` start; zeros otherwise.
    pub init: Option<(NodeSignal, EdgeSignal)>,
    pub record_trace: bool,
    pub trace_stride: usize,
    /// Minimizer used to evaluate the convergence bound in trace records.
    pub reference: Option<NodeSignal>,
    /// Worker threads; 1 runs fully sequentially.
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            tol: 0.0,
            init: None,
            record_trace: false,
            trace_stride: 1,
            reference: None,
            threads: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_iters(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::default()
        }
    }

    fn validate(&self, g: &EmpiricalGraph) -> Result<()> {
        if self.max_iters < 1 {
            return Err(SlpError::InvalidConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(SlpError::InvalidConfig("tol must be non-negative".into()));
        }
        if self.trace_stride < 1 {
            return Err(SlpError::InvalidConfig(
                "trace_stride must be at least 1".into(),
            ));
        }
        if self.threads < 1 {
            return Err(SlpError::InvalidConfig("threads must be at least 1".into()));
        }
        if let Some((x0, y0)) = &self.init {
            g.check_nodes(x0.len())?;
            g.check_edges(y0.len())?;
        }
        if let Some(r) = &self.reference {
            g.check_nodes(r.len())?;
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
///
/// `gap` and `residual` refer to the current iterate pair `(x_k, y_k)`;
/// `bound` is only present when a reference minimizer was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub tv_iterate: f64,
    pub tv_average: f64,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone)]
pub struct Solution {
    /// Running average after the last iteration; the reported estimate.
    pub average: NodeSignal,
    /// Final iterates, including the last primal iterate and dual variable.
    pub state: SolverState,
    pub trace: SolverTrace,
    pub stopped_early: bool,
}

/// Stateful driver holding preconditioners, labels and scratch space.
pub struct SlpRunner<'a> {
    graph: &'a EmpiricalGraph,
    samples: &'a SamplingSet,
    precond: Preconditioners,
    labels: Vec<Option<f64>>,
    state: SolverState,
    x0: NodeSignal,
    y0: EdgeSignal,
    scratch: Vec<f64>,
    parallel: bool,
}

impl<'a> SlpRunner<'a> {
    pub fn new(graph: &'a EmpiricalGraph, samples: &'a SamplingSet) -> Result<Self> {
        Self::with_init(
            graph,
            samples,
            NodeSignal::zeros(graph.num_nodes()),
            EdgeSignal::zeros(graph.num_edges()),
        )
    }

    pub fn with_init(
        graph: &'a EmpiricalGraph,
        samples: &'a SamplingSet,
        x0: NodeSignal,
        y0: EdgeSignal,
    ) -> Result<Self> {
        samples.check_against(graph)?;
        graph.check_nodes(x0.len())?;
        graph.check_edges(y0.len())?;
        Ok(Self {
            graph,
            samples,
            precond: make_preconditioners(graph),
            labels: samples.dense(graph.num_nodes()),
            state: SolverState::from_init(x0.clone(), y0.clone()),
            x0,
            y0,
            scratch: vec![0.0; graph.num_nodes()],
            parallel: false,
        })
    }

    /// Enables data-parallel half-steps. Results are bit-identical to the
    /// sequential path since each output slot has a single writer.
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn step(&mut self) -> Result<()> {
        iterate_raw(
            self.graph,
            &self.precond,
            &self.labels,
            &mut self.state,
            &mut self.scratch,
            self.parallel,
        )
    }

    pub fn run(&mut self, iters: usize) -> Result<()> {
        for _ in 0..iters {
            self.step()?;
        }
        Ok(())
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn into_state(self) -> SolverState {
        self.state
    }

    pub fn preconditioners(&self) -> &Preconditioners {
        &self.precond
    }

    pub fn initial(&self) -> (&NodeSignal, &EdgeSignal) {
        (&self.x0, &self.y0)
    }

    /// Trace record for the current state.
    pub fn record(&self, reference: Option<&NodeSignal>) -> TraceRecord {
        trace_record(
            self.graph,
            self.samples,
            &self.precond,
            (&self.x0, &self.y0),
            &self.state,
            reference,
        )
    }
}

/// Diagnostics for `state`; shared by the centralized and message-passing
/// drivers.
pub fn trace_record(
    g: &EmpiricalGraph,
    s: &SamplingSet,
    p: &Preconditioners,
    init: (&NodeSignal, &EdgeSignal),
    state: &SolverState,
    reference: Option<&NodeSignal>,
) -> TraceRecord {
    let bound = reference
        .filter(|_| state.k >= 1)
        .map(|r| certificates::ergodic_bound(g, p, init.0, init.1, r, &state.x_avg, state.k));
    TraceRecord {
        k: state.k,
        tv_iterate: g.tv_of(state.x_curr.as_slice()),
        tv_average: g.tv_of(state.x_avg.as_slice()),
        bound,
        gap: certificates::duality_gap(g, s, &state.x_curr, &state.y_curr).ok(),
        residual: certificates::fixed_point_residual(g, p, s, &state.x_curr, &state.y_curr),
    }
}

/// Runs the iteration until `max_iters` or the early-stopping test fires.
pub fn solve(g: &EmpiricalGraph, s: &SamplingSet, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate(g)?;
    if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| SlpError::InvalidConfig(e.to_string()))?;
        pool.install(|| solve_inner(g, s, cfg, true))
    } else {
        solve_inner(g, s, cfg, false)
    }
}

fn solve_inner(
    g: &EmpiricalGraph,
    s: &SamplingSet,
    cfg: &SolverConfig,
    parallel: bool,
) -> Result<Solution> {
    let mut runner = match &cfg.init {
        Some((x0, y0)) => SlpRunner::with_init(g, s, x0.clone(), y0.clone())?,
        None => SlpRunner::new(g, s)?,
    }
    .parallel(parallel);

    let mut trace = SolverTrace::default();
    let mut snapshot = runner.state.x_avg.clone();
    let mut stopped_early = false;
    for _ in 0..cfg.max_iters {
        runner.step()?;
        let k = runner.state.k;
        if k % cfg.trace_stride == 0 {
            if cfg.record_trace {
                trace.records.push(runner.record(cfg.reference.as_ref()));
            }
            if cfg.tol > 0.0 {
                let moved = runner.state.x_avg.max_abs_diff(&snapshot);
                if k > cfg.trace_stride && moved <= cfg.tol {
                    stopped_early = true;
                    break;
                }
                snapshot.clone_from(&runner.state.x_avg);
            }
        }
    }
    if cfg.record_trace && trace.records.last().map(|r| r.k) != Some(runner.state.k) {
        trace.records.push(runner.record(cfg.reference.as_ref()));
    }

    let state = runner.into_state();
    Ok(Solution {
        average: state.x_avg.clone(),
        state,
        trace,
        stopped_early,
    })
}
