// Run the solver as synchronous message passing and watch information
// spread one hop per round.

use slp::bench::{make_chain, ChainSpec};
use slp::mp::{locality_radius, MpNetwork};
use slp::solver::SlpRunner;

fn main() -> slp::Result<()> {
    let chain = make_chain(ChainSpec::new(30)?);
    let (g, s) = (&chain.graph, &chain.samples);
    let mut net = MpNetwork::new(g, s)?;
    let mut central = SlpRunner::new(g, s)?;

    for _ in 0..12 {
        let stats = net.round()?;
        central.step()?;
        let reached = net.iterate().iter().filter(|v| **v != 0.0).count();
        let busiest = stats.ops_per_node.iter().max().copied().unwrap_or(0);
        println!(
            "round {:>2}: {} messages, {reached:>2} nonzero nodes, max ops per node {busiest}",
            stats.round, stats.messages
        );
        assert!(locality_radius(&net, g, s).is_empty());
    }
    assert_eq!(net.to_state(), *central.state());
    println!("network state equals the centralized state bit for bit");

    let unit = &net.units()[15];
    println!(
        "node {} keeps {} values for {} links",
        unit.id,
        unit.storage(),
        unit.links.len()
    );
    Ok(())
}
