// Quadratic label propagation smooths across a weak bridge; the
// total-variation solution keeps the jump.

use slp::baselines::{compare, lp_solve, LpConfig};
use slp::generators::two_cluster_bridge;
use slp::{solve, SolverConfig};

fn main() -> slp::Result<()> {
    for (k, bridge) in [(4, 0.01), (4, 0.5), (8, 0.01)] {
        let (g, s, truth) = two_cluster_bridge(k, bridge);
        let sparse = solve(&g, &s, &SolverConfig::with_iters(20_000))?;
        let smooth = lp_solve(&g, &s, &LpConfig::default())?.into_result()?;
        let c = compare(&g, &s, &sparse.average, &smooth, &truth)?;
        println!("cliques of {k}, bridge {bridge}");
        println!(
            "  slp: sup {:.3e}  mse {:.3e}  tv {:.6}",
            c.slp.sup_error, c.slp.mse, c.slp.tv
        );
        println!(
            "  lp:  sup {:.3e}  mse {:.3e}  tv {:.6}",
            c.lp.sup_error, c.lp.mse, c.lp.tv
        );
        println!(
            "  lp values at the bridge: {:.6} | {:.6}",
            smooth[k - 1],
            smooth[k]
        );
    }
    Ok(())
}
