// Recover a piecewise-constant signal on three weakly linked communities
// from one label per community.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp::{solve, EmpiricalGraph, SamplingSet, SolverConfig};

fn main() -> slp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sizes = [12usize, 8, 10];
    let values = [2.0, -1.0, 0.5];

    let mut edges = Vec::new();
    let mut offset = 0;
    let mut starts = Vec::new();
    for &size in &sizes {
        starts.push(offset);
        for i in 0..size {
            for j in i + 1..size {
                if j == i + 1 || rng.gen_bool(0.4) {
                    edges.push((offset + i, offset + j, rng.gen_range(0.5..1.5)));
                }
            }
        }
        offset += size;
    }
    // Sparse, light links between communities.
    edges.push((starts[0] + 3, starts[1] + 2, 0.02));
    edges.push((starts[1] + 5, starts[2], 0.02));
    edges.push((starts[0], starts[2] + 7, 0.01));

    let g = EmpiricalGraph::build(&edges)?;
    let labels = SamplingSet::new(starts.iter().zip(values).map(|(&s, v)| (s + 1, v)))?;
    let sol = solve(&g, &labels, &SolverConfig::with_iters(20_000))?;

    println!(
        "{} nodes, {} edges, {} labels",
        g.num_nodes(),
        g.num_edges(),
        labels.len()
    );
    let mut worst = 0.0_f64;
    for (c, (&start, &size)) in starts.iter().zip(&sizes).enumerate() {
        let block = &sol.state.x_curr.as_slice()[start..start + size];
        let mean = block.iter().sum::<f64>() / size as f64;
        worst = block
            .iter()
            .fold(worst, |w, v| w.max((v - values[c]).abs()));
        println!(
            "community {c}: label {:>5}  mean estimate {mean:.6}",
            values[c]
        );
    }
    println!("max error of the last iterate {worst:.3e}");
    println!("TV of the average {:.6}", g.tv_norm(&sol.average)?);
    Ok(())
}
