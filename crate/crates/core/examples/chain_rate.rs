// Sub-optimality of the running average on the decaying-weight chain,
// against the upper and lower bounds.

use slp::bench::{default_grid, run_rate_experiment, ChainSpec};

fn main() -> slp::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1000);
    let report = run_rate_experiment(ChainSpec::new(n)?, &default_grid(n))?;
    print!("{}", report.to_table());
    println!(
        "lower-bound violations {}, upper-bound violations {}, locality violations {}",
        report.lower_violations, report.bound_violations, report.locality_violations
    );
    Ok(())
}
