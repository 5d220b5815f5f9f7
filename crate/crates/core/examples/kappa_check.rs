// Estimate the norm of the preconditioned incidence operator on random
// graphs. It must stay below one for the iteration to converge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp::certificates::{kappa_estimate, KAPPA_GUARANTEED};
use slp::generators::{random_connected, star, unit_chain};
use slp::make_preconditioners;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut named = vec![
        ("single edge".to_string(), unit_chain(2)),
        ("unit chain 100".to_string(), unit_chain(100)),
        ("star 20".to_string(), star(20)),
    ];
    for t in 0..5 {
        let n = rng.gen_range(5..50);
        named.push((
            format!("random #{t} (n={n})"),
            random_connected(&mut rng, n, 0.2, (0.01, 10.0)),
        ));
    }
    for (name, g) in &named {
        let k = kappa_estimate(g, &make_preconditioners(g));
        println!(
            "{name:<22} kappa {k:.10}  (<= 1/sqrt(2): {})",
            k <= KAPPA_GUARANTEED + 1e-6
        );
    }
}
