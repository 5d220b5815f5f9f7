// Check a run against the ergodic bound, a duality gap and a fixed-point
// residual.

use slp::bench::{make_chain, ChainSpec};
use slp::certificates::{Certificate, ReferenceKind};
use slp::{solve, EdgeSignal, NodeSignal, SolverConfig};

fn main() -> slp::Result<()> {
    let chain = make_chain(ChainSpec::new(12)?);
    let (g, s) = (&chain.graph, &chain.samples);
    let optimum = 1.0 / 11.0;

    let cfg = SolverConfig {
        record_trace: true,
        trace_stride: 5000,
        reference: Some(chain.truth.clone()),
        ..SolverConfig::with_iters(50_000)
    };
    let sol = solve(g, s, &cfg)?;
    println!(
        "{:>6}  {:>12}  {:>12}  {:>12}  {:>12}",
        "K", "TV(avg)-opt", "bound", "gap", "residual"
    );
    for r in &sol.trace.records {
        println!(
            "{:>6}  {:>12.4e}  {:>12.4e}  {:>12}  {:>12.4e}",
            r.k,
            r.tv_average - optimum,
            r.bound.unwrap_or(f64::NAN),
            r.gap
                .map_or("infeasible".to_string(), |g| format!("{g:.4e}")),
            r.residual
        );
    }

    let init = (
        &NodeSignal::zeros(g.num_nodes()),
        &EdgeSignal::zeros(g.num_edges()),
    );
    let cert = Certificate::evaluate(
        g,
        s,
        init,
        &sol.state,
        &chain.truth,
        ReferenceKind::Analytic,
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&cert).expect("certificate serializes")
    );
    Ok(())
}
