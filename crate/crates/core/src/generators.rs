//! Graph families used by the examples, tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{EmpiricalGraph, NodeSignal};
use crate::solver::SamplingSet;

/// Path `0 - 1 - ... - n-1` with unit weights.
pub fn unit_chain(n: usize) -> EmpiricalGraph {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    EmpiricalGraph::build(&edges).expect("chain with n >= 2 is valid")
}

/// Star with centre 0 and `spokes` unit-weight leaves.
pub fn star(spokes: usize) -> EmpiricalGraph {
    let edges: Vec<_> = (1..=spokes).map(|j| (0, j, 1.0)).collect();
    EmpiricalGraph::build(&edges).expect("star with at least one spoke is valid")
}

fn random_weight<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Uniformly shuffled random recursive tree: each node attaches to a random
/// earlier node in a random order.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, weights: (f64, f64)) -> EmpiricalGraph {
    EmpiricalGraph::build(&tree_edges(rng, n, weights)).expect("trees are connected")
}

fn tree_edges<R: Rng>(rng: &mut R, n: usize, weights: (f64, f64)) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    (1..n)
        .map(|k| {
            let parent = order[rng.gen_range(0..k)];
            (parent, order[k], random_weight(rng, weights))
        })
        .collect()
}

/// Random spanning tree plus each remaining pair with probability `p`.
pub fn random_connected<R: Rng>(
    rng: &mut R,
    n: usize,
    p: f64,
    weights: (f64, f64),
) -> EmpiricalGraph {
    let mut edges = tree_edges(rng, n, weights);
    let mut present: std::collections::HashSet<(usize, usize)> = edges
        .iter()
        .map(|&(i, j, _)| (i.min(j), i.max(j)))
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if !present.contains(&(i, j)) && rng.gen_bool(p) {
                present.insert((i, j));
                edges.push((i, j, random_weight(rng, weights)));
            }
        }
    }
    EmpiricalGraph::build(&edges).expect("spanning tree keeps the graph connected")
}

/// `count` distinct random nodes with labels drawn from `values`.
pub fn random_labels<R: Rng>(
    rng: &mut R,
    n: usize,
    count: usize,
    values: (f64, f64),
) -> SamplingSet {
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    SamplingSet::new(
        nodes
            .into_iter()
            .take(count.max(1))
            .map(|i| (i, random_weight(rng, values))),
    )
    .expect("distinct nodes")
}

/// Two complete graphs on `k` nodes each (unit weights) joined by one edge
/// of weight `bridge` between node `k-1` and node `k`. Node 0 is labeled 1
/// and node `2k-1` is labeled 0; the truth is 1 on the first clique and 0 on
/// the second.
pub fn two_cluster_bridge(k: usize, bridge: f64) -> (EmpiricalGraph, SamplingSet, NodeSignal) {
    let mut edges = Vec::new();
    for offset in [0, k] {
        for i in 0..k {
            for j in i + 1..k {
                edges.push((offset + i, offset + j, 1.0));
            }
        }
    }
    edges.push((k - 1, k, bridge));
    let graph = EmpiricalGraph::build(&edges).expect("bridged cliques are connected");
    let samples = SamplingSet::new([(0, 1.0), (2 * k - 1, 0.0)]).expect("two labels");
    let truth = NodeSignal::new((0..2 * k).map(|i| if i < k { 1.0 } else { 0.0 }).collect())
        .expect("finite truth");
    (graph, samples, truth)
}
