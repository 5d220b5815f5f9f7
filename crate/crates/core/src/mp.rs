//! Sparse label propagation as synchronous message passing.
//!
//! Each node is a [`NodeUnit`] holding only its own iterates, its step size
//! and one [`Link`] per incident edge. A round has two message exchanges
//! separated by a barrier:
//!
//! 1. every tail sends its extrapolated value to the head of each edge;
//! 2. the head, which owns the edge's dual variable, updates and clips it and
//!    sends the clipped value back to the tail.
//!
//! Each node then updates its primal value from the duals on its links,
//! re-imposes its label if it has one, and updates its running average. The
//! arithmetic mirrors the centralized solver operation for operation, so the
//! two produce bit-identical iterates.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::error::{Result, SlpError};
use crate::graph::{EdgeSignal, EmpiricalGraph, NodeSignal};
use crate::solver::{clip_unit, SamplingSet, SolverState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// The unit is `e+` and owns the dual value.
    Head,
    /// The unit is `e-` and keeps the last value received from the head.
    Tail,
}

/// Per-edge storage at one endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub edge: usize,
    pub neighbor: usize,
    pub weight: f64,
    pub lambda: f64,
    pub role: Role,
    pub dual: f64,
}

/// Local state of one computational unit.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeUnit {
    pub id: usize,
    pub x_curr: f64,
    pub x_prev: f64,
    pub x_avg: f64,
    pub gamma: f64,
    pub label: Option<f64>,
    /// Incident edges in ascending edge order.
    pub links: Vec<Link>,
    extrapolated: f64,
    rounds: usize,
}

impl NodeUnit {
    /// Whether every link refers to an edge that actually touches this node.
    pub fn references_only_incident(&self, g: &EmpiricalGraph) -> bool {
        self.links.iter().all(|l| {
            l.edge < g.num_edges() && {
                let e = g.edge(l.edge);
                match l.role {
                    Role::Head => e.head == self.id && e.tail == l.neighbor,
                    Role::Tail => e.tail == self.id && e.head == l.neighbor,
                }
            }
        })
    }

    /// Number of scalar values the unit stores.
    pub fn storage(&self) -> usize {
        6 + 4 * self.links.len()
    }
}

/// A value sent along one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
    pub value: f64,
}

/// Per-recipient inboxes for one exchange.
#[derive(Debug, Default)]
struct Mailbox {
    inboxes: Vec<Vec<Message>>,
    delivered: usize,
}

impl Mailbox {
    fn new(num_nodes: usize) -> Self {
        Self {
            inboxes: vec![Vec::new(); num_nodes],
            delivered: 0,
        }
    }

    fn deliver(&mut self, outgoing: Vec<Vec<Message>>) {
        for inbox in &mut self.inboxes {
            inbox.clear();
        }
        for msg in outgoing.into_iter().flatten() {
            self.inboxes[msg.to].push(msg);
            self.delivered += 1;
        }
        for inbox in &mut self.inboxes {
            inbox.sort_by_key(|m| m.edge);
        }
    }

    fn received(&self, node: usize, edge: usize) -> Option<f64> {
        let inbox = &self.inboxes[node];
        inbox
            .binary_search_by_key(&edge, |m| m.edge)
            .ok()
            .map(|i| inbox[i].value)
    }
}

/// Accounting for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub messages: usize,
    pub ops_per_node: Vec<usize>,
}

/// All units of a graph plus the round counter.
#[derive(Debug, Clone)]
pub struct MpNetwork {
    units: Vec<NodeUnit>,
    num_edges: usize,
    round: usize,
    parallel: bool,
}

impl MpNetwork {
    /// Zero-initialized network.
    pub fn new(g: &EmpiricalGraph, s: &SamplingSet) -> Result<Self> {
        Self::with_init(
            g,
            s,
            &NodeSignal::zeros(g.num_nodes()),
            &EdgeSignal::zeros(g.num_edges()),
        )
    }

    /// Network started from `(x0, y0)`; each head receives its edge's `y0`.
    pub fn with_init(
        g: &EmpiricalGraph,
        s: &SamplingSet,
        x0: &NodeSignal,
        y0: &EdgeSignal,
    ) -> Result<Self> {
        s.check_against(g)?;
        if x0.len() != g.num_nodes() {
            return Err(SlpError::LengthMismatch {
                expected: g.num_nodes(),
                found: x0.len(),
            });
        }
        if y0.len() != g.num_edges() {
            return Err(SlpError::LengthMismatch {
                expected: g.num_edges(),
                found: y0.len(),
            });
        }
        let mut units: Vec<NodeUnit> = (0..g.num_nodes())
            .map(|id| NodeUnit {
                id,
                x_curr: x0[id],
                x_prev: x0[id],
                x_avg: 0.0,
                gamma: 0.0,
                label: s.label(id),
                links: Vec::new(),
                extrapolated: 0.0,
                rounds: 0,
            })
            .collect();
        for (idx, e) in g.edges().iter().enumerate() {
            let lambda = 1.0 / (2.0 * e.weight);
            units[e.head].links.push(Link {
                edge: idx,
                neighbor: e.tail,
                weight: e.weight,
                lambda,
                role: Role::Head,
                dual: y0[idx],
            });
            units[e.tail].links.push(Link {
                edge: idx,
                neighbor: e.head,
                weight: e.weight,
                lambda,
                role: Role::Tail,
                dual: y0[idx],
            });
        }
        for u in &mut units {
            // Local degree, accumulated in edge order.
            let mut degree = 0.0;
            for l in &u.links {
                degree += l.weight;
            }
            u.gamma = 1.0 / (2.0 * degree);
        }
        Ok(Self {
            units,
            num_edges: g.num_edges(),
            round: 0,
            parallel: false,
        })
    }

    /// Runs the per-node phases on the rayon pool.
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn units(&self) -> &[NodeUnit] {
        &self.units
    }

    pub fn rounds(&self) -> usize {
        self.round
    }

    fn for_each_unit<T, F>(&mut self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut NodeUnit) -> T + Sync + Send,
    {
        if self.parallel {
            self.units.par_iter_mut().map(f).collect()
        } else {
            self.units.iter_mut().map(f).collect()
        }
    }

    /// One synchronous round.
    pub fn round(&mut self) -> Result<RoundStats> {
        let n = self.units.len();
        let mut ops = vec![0usize; n];
        let mut mailbox = Mailbox::new(n);

        // Extrapolate and send x to the head of every edge this unit tails.
        let outgoing: Vec<Vec<Message>> = self.for_each_unit(|u| {
            u.extrapolated = 2.0 * u.x_curr - u.x_prev;
            u.links
                .iter()
                .filter(|l| l.role == Role::Tail)
                .map(|l| Message {
                    from: u.id,
                    to: l.neighbor,
                    edge: l.edge,
                    value: u.extrapolated,
                })
                .collect()
        });
        mailbox.deliver(outgoing);

        // Heads update and clip their duals, then send them to the tails.
        let inbox = &mailbox;
        let outgoing: Vec<Vec<Message>> = self.for_each_unit(|u| {
            let x_head = u.extrapolated;
            let id = u.id;
            let mut out = Vec::new();
            for l in u.links.iter_mut().filter(|l| l.role == Role::Head) {
                let x_tail = inbox
                    .received(id, l.edge)
                    .expect("tail message delivered every round");
                l.dual = clip_unit(l.dual + l.lambda * (l.weight * (x_head - x_tail)));
                out.push(Message {
                    from: id,
                    to: l.neighbor,
                    edge: l.edge,
                    value: l.dual,
                });
            }
            out
        });
        mailbox.deliver(outgoing);

        // Tails store the received duals; everyone updates its primal value.
        let inbox = &mailbox;
        let finite = self.for_each_unit(|u| {
            let id = u.id;
            for l in u.links.iter_mut().filter(|l| l.role == Role::Tail) {
                l.dual = inbox
                    .received(id, l.edge)
                    .expect("head message delivered every round");
            }
            let plus: f64 = u
                .links
                .iter()
                .filter(|l| l.role == Role::Head)
                .map(|l| l.weight * l.dual)
                .sum();
            let minus: f64 = u
                .links
                .iter()
                .filter(|l| l.role == Role::Tail)
                .map(|l| l.weight * l.dual)
                .sum();
            let next = match u.label {
                Some(v) => v,
                None => u.x_curr - u.gamma * (plus - minus),
            };
            u.x_prev = u.x_curr;
            u.x_curr = next;
            u.rounds += 1;
            let k = u.rounds as f64;
            u.x_avg = u
                .label
                .unwrap_or((1.0 - 1.0 / k) * u.x_avg + (1.0 / k) * u.x_curr);
            u.x_curr.is_finite()
                && u.x_avg.is_finite()
                && u.links.iter().all(|l| l.dual.is_finite())
        });
        self.round += 1;
        if !finite.iter().all(|&ok| ok) {
            return Err(SlpError::NonFiniteIterate {
                iteration: self.round,
            });
        }

        for (u, o) in self.units.iter().zip(ops.iter_mut()) {
            let heads = u.links.iter().filter(|l| l.role == Role::Head).count();
            let deg = u.links.len();
            // extrapolation 2, dual update and clip 6 per owned edge,
            // signed sum 2 per link, primal update 3, average 5.
            *o = 2 + 6 * heads + 2 * deg + 3 + 5;
        }
        Ok(RoundStats {
            round: self.round,
            messages: mailbox.delivered,
            ops_per_node: ops,
        })
    }

    pub fn run(&mut self, rounds: usize) -> Result<Vec<RoundStats>> {
        (0..rounds).map(|_| self.round()).collect()
    }

    pub fn iterate(&self) -> NodeSignal {
        NodeSignal::new(self.units.iter().map(|u| u.x_curr).collect())
            .expect("units hold finite values")
    }

    pub fn previous(&self) -> NodeSignal {
        NodeSignal::new(self.units.iter().map(|u| u.x_prev).collect())
            .expect("units hold finite values")
    }

    pub fn average(&self) -> NodeSignal {
        NodeSignal::new(self.units.iter().map(|u| u.x_avg).collect())
            .expect("units hold finite values")
    }

    /// The network's iterates in the centralized solver's layout.
    pub fn to_state(&self) -> SolverState {
        SolverState {
            x_prev: self.previous(),
            x_curr: self.iterate(),
            y_curr: self.duals(),
            x_avg: self.average(),
            k: self.round,
        }
    }

    /// Dual variables as held by their owning heads.
    pub fn duals(&self) -> EdgeSignal {
        let mut y = vec![0.0; self.num_edges];
        for u in &self.units {
            for l in u.links.iter().filter(|l| l.role == Role::Head) {
                y[l.edge] = l.dual;
            }
        }
        EdgeSignal::new(y).expect("units hold finite values")
    }
}

impl RoundStats {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("round stats serialize")
    }
}

/// Nodes farther than `k` hops from every labeled node whose value in `x`
/// is not exactly zero. Empty for zero-initialized runs after `k` rounds.
pub fn locality_violations(
    g: &EmpiricalGraph,
    s: &SamplingSet,
    x: &NodeSignal,
    k: usize,
) -> Vec<usize> {
    let sources: Vec<usize> = s.nodes().collect();
    g.hop_distances(&sources)
        .into_iter()
        .enumerate()
        .filter(|&(i, d)| d.is_some_and(|d| d > k) && x[i] != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// [`locality_violations`] for the current iterate of a network.
pub fn locality_radius(net: &MpNetwork, g: &EmpiricalGraph, s: &SamplingSet) -> Vec<usize> {
    locality_violations(g, s, &net.iterate(), net.rounds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{make_preconditioners, slp_iterate};

    #[test]
    fn two_node_round_matches_centralized() {
        let g = EmpiricalGraph::build(&[(0, 1, 1.0)]).unwrap();
        let s = SamplingSet::new([(0, 1.0)]).unwrap();
        let p = make_preconditioners(&g);
        let mut net = MpNetwork::new(&g, &s).unwrap();
        let mut st = SolverState::zeros(&g);
        for _ in 0..3 {
            net.round().unwrap();
            st = slp_iterate(&st, &g, &p, &s).unwrap();
            assert_eq!(net.iterate(), st.x_curr);
            assert_eq!(net.previous(), st.x_prev);
            assert_eq!(net.average(), st.x_avg);
            assert_eq!(net.duals(), st.y_curr);
        }
    }

    #[test]
    fn messages_per_round_is_twice_edge_count() {
        let g =
            EmpiricalGraph::build(&[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 1.0), (2, 3, 0.5)]).unwrap();
        let s = SamplingSet::new([(3, 1.0)]).unwrap();
        let mut net = MpNetwork::new(&g, &s).unwrap();
        for stats in net.run(5).unwrap() {
            assert_eq!(stats.messages, 2 * g.num_edges());
        }
    }

    #[test]
    fn units_only_reference_incident_edges() {
        let g =
            EmpiricalGraph::build(&[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 1.0), (2, 3, 0.5)]).unwrap();
        let s = SamplingSet::new([(3, 1.0)]).unwrap();
        let net = MpNetwork::new(&g, &s).unwrap();
        for u in net.units() {
            assert!(u.references_only_incident(&g));
            let deg = g.head_incidences(u.id).len() + g.tail_incidences(u.id).len();
            assert_eq!(u.links.len(), deg);
            assert_eq!(u.storage(), 6 + 4 * deg);
        }
    }

    #[test]
    fn ops_scale_with_degree() {
        let star: Vec<_> = (1..=6).map(|j| (0, j, 1.0)).collect();
        let g = EmpiricalGraph::build(&star).unwrap();
        let s = SamplingSet::new([(0, 1.0)]).unwrap();
        let mut net = MpNetwork::new(&g, &s).unwrap();
        let stats = net.round().unwrap();
        assert!(stats.ops_per_node[0] > stats.ops_per_node[1]);
        let line = stats.to_json_line();
        let back: RoundStats = serde_json::from_str(&line).unwrap();
        assert_eq!(back, stats);
    }

    #[test]
    fn zero_rounds_leave_unlabeled_nodes_at_zero() {
        let g = EmpiricalGraph::build(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = SamplingSet::new([(0, 1.0)]).unwrap();
        let net = MpNetwork::new(&g, &s).unwrap();
        assert!(locality_radius(&net, &g, &s).is_empty());
        assert_eq!(net.iterate().as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn star_with_labeled_center_reaches_leaves_in_one_round() {
        let star: Vec<_> = (1..=5).map(|j| (0, j, 1.0)).collect();
        let g = EmpiricalGraph::build(&star).unwrap();
        let s = SamplingSet::new([(0, 1.0)]).unwrap();
        let mut net = MpNetwork::new(&g, &s).unwrap();
        net.run(1).unwrap();
        // Every leaf is one hop from the label, so nothing can violate.
        assert!(locality_radius(&net, &g, &s).is_empty());
        assert_eq!(
            locality_violations(&g, &s, &NodeSignal::new(vec![1.0; 6]).unwrap(), 0),
            vec![1, 2, 3, 4, 5]
        );
    }
}
