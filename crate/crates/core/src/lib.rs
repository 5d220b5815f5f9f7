//! Sparse label propagation.
//!
//! Recovers a clustered graph signal from a few labeled nodes by minimizing
//! its total variation subject to the labels. The solver is a preconditioned
//! primal-dual method whose step sizes come from node degrees and edge
//! weights alone, so it needs no tuning and runs equally well as a
//! centralized loop ([`solver`]) or as synchronous message passing between
//! nodes ([`mp`]). Runs can be checked at runtime against an `O(1/K)` bound
//! on the sub-optimality of the running average, a duality gap and a
//! fixed-point residual ([`certificates`]).
//!
//! ```
//! use slp::{EmpiricalGraph, SamplingSet, SolverConfig};
//!
//! let g = EmpiricalGraph::build(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 0.1)])?;
//! let labels = SamplingSet::new([(0, 1.0), (3, 0.0)])?;
//! let sol = slp::solve(&g, &labels, &SolverConfig::with_iters(20_000))?;
//! assert!((sol.average[2] - 1.0).abs() < 1e-2);
//! # Ok::<(), slp::SlpError>(())
//! ```

pub mod baselines;
pub mod bench;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod mp;
pub mod solver;

pub use error::{Result, SlpError};
pub use graph::{EdgeSignal, EmpiricalGraph, NodeSignal, OrientedEdge};
pub use solver::{
    make_preconditioners, solve, Preconditioners, SamplingSet, Solution, SolverConfig, SolverState,
    SolverTrace, TraceRecord,
};
