//! Weighted empirical graphs with a fixed edge orientation, node and edge
//! signals, and the matrix-free weighted incidence operator.
//!
//! Every undirected edge `{i, j}` is stored once as an [`OrientedEdge`] with a
//! head and a tail. The incidence operator maps a node signal `x` to the edge
//! signal `(Dx)[e] = W_e (x[head] - x[tail])`; its adjoint sums the weighted
//! edge values entering each node with a `+` sign at heads and a `-` sign at
//! tails. Neither operator materializes a matrix.

use std::collections::{HashSet, VecDeque};
use std::ops::Index;

use rayon::prelude::*;

use crate::error::{Result, SlpError};

/// One edge with an orientation: `head` is `e+`, `tail` is `e-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedEdge {
    pub head: usize,
    pub tail: usize,
    pub weight: f64,
}

/// A real value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSignal(Vec<f64>);

/// A real value per oriented edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSignal(Vec<f64>);

macro_rules! signal_impl {
    ($name:ident) => {
        impl $name {
            /// Wraps `values`, rejecting NaN and infinities.
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                    return Err(SlpError::NonFiniteValue { index });
                }
                Ok(Self(values))
            }

            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }

            pub fn iter(&self) -> std::slice::Iter<'_, f64> {
                self.0.iter()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }

            /// Sup-norm distance to `other`.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            }

            pub fn dot(&self, other: &Self) -> f64 {
                self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
            }

            pub fn norm2(&self) -> f64 {
                self.dot(self).sqrt()
            }
        }

        impl Index<usize> for $name {
            type Output = f64;

            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }
    };
}

signal_impl!(NodeSignal);
signal_impl!(EdgeSignal);

/// A connected, weighted, undirected graph with one orientation per edge.
///
/// Edges are kept sorted by their unordered node pair `(min, max)`, so edge
/// indices do not change when orientations are flipped.
#[derive(Debug, Clone)]
pub struct EmpiricalGraph {
    num_nodes: usize,
    edges: Vec<OrientedEdge>,
    // Edge indices where the node is the head, in ascending edge order.
    head_of: Vec<Vec<usize>>,
    // Edge indices where the node is the tail, in ascending edge order.
    tail_of: Vec<Vec<usize>>,
    degrees: Vec<f64>,
}

impl EmpiricalGraph {
    /// Builds a graph from undirected `(i, j, weight)` triples, inferring the
    /// node count as one more than the largest index.
    ///
    /// Orientation is canonical: `head = min(i, j)`, `tail = max(i, j)`.
    pub fn build(edge_list: &[(usize, usize, f64)]) -> Result<Self> {
        let num_nodes = edge_list
            .iter()
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .unwrap_or(0);
        Self::with_num_nodes(num_nodes, edge_list)
    }

    /// Like [`EmpiricalGraph::build`] with an explicit node count.
    pub fn with_num_nodes(num_nodes: usize, edge_list: &[(usize, usize, f64)]) -> Result<Self> {
        let oriented = edge_list
            .iter()
            .map(|&(i, j, weight)| OrientedEdge {
                head: i.min(j),
                tail: i.max(j),
                weight,
            })
            .collect::<Vec<_>>();
        // Validate against the caller's indices before canonicalizing.
        for (index, &(i, j, _)) in edge_list.iter().enumerate() {
            if i == j {
                return Err(SlpError::SelfLoop { index, node: i });
            }
        }
        Self::from_oriented(num_nodes, oriented)
    }

    /// Builds a graph that keeps the given orientation of every edge.
    pub fn from_oriented(num_nodes: usize, edges: Vec<OrientedEdge>) -> Result<Self> {
        if num_nodes < 2 {
            return Err(SlpError::TooFewNodes(num_nodes));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (index, e) in edges.iter().enumerate() {
            for node in [e.head, e.tail] {
                if node >= num_nodes {
                    return Err(SlpError::NodeOutOfRange { node, num_nodes });
                }
            }
            if e.head == e.tail {
                return Err(SlpError::SelfLoop {
                    index,
                    node: e.head,
                });
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(SlpError::NonPositiveWeight {
                    index,
                    i: e.head,
                    j: e.tail,
                    weight: e.weight,
                });
            }
            let pair = (e.head.min(e.tail), e.head.max(e.tail));
            if !seen.insert(pair) {
                return Err(SlpError::DuplicateEdge {
                    index,
                    i: pair.0,
                    j: pair.1,
                });
            }
        }

        let mut edges = edges;
        edges.sort_by_key(|e| (e.head.min(e.tail), e.head.max(e.tail)));

        let mut head_of = vec![Vec::new(); num_nodes];
        let mut tail_of = vec![Vec::new(); num_nodes];
        let mut degrees = vec![0.0; num_nodes];
        for (idx, e) in edges.iter().enumerate() {
            head_of[e.head].push(idx);
            tail_of[e.tail].push(idx);
            degrees[e.head] += e.weight;
            degrees[e.tail] += e.weight;
        }

        let graph = Self {
            num_nodes,
            edges,
            head_of,
            tail_of,
            degrees,
        };
        let dist = graph.hop_distances(&[0]);
        if let Some(unreachable) = dist.iter().position(|d| d.is_none()) {
            return Err(SlpError::DisconnectedGraph { unreachable });
        }
        Ok(graph)
    }

    /// Returns a copy with the orientation of every edge `e` with
    /// `flip[e] == true` reversed. Edge indices are preserved.
    pub fn reoriented(&self, flip: &[bool]) -> Result<Self> {
        if flip.len() != self.edges.len() {
            return Err(SlpError::LengthMismatch {
                expected: self.edges.len(),
                found: flip.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .zip(flip)
            .map(|(e, &f)| {
                if f {
                    OrientedEdge {
                        head: e.tail,
                        tail: e.head,
                        weight: e.weight,
                    }
                } else {
                    *e
                }
            })
            .collect();
        Self::from_oriented(self.num_nodes, edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &OrientedEdge {
        &self.edges[e]
    }

    /// Edges for which `node` is the head (`N+(i)`), ascending.
    pub fn head_incidences(&self, node: usize) -> &[usize] {
        &self.head_of[node]
    }

    /// Edges for which `node` is the tail (`N-(i)`), ascending.
    pub fn tail_incidences(&self, node: usize) -> &[usize] {
        &self.tail_of[node]
    }

    /// Neighbours of `node` in ascending edge order.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let mut incident: Vec<usize> = self.head_of[node]
            .iter()
            .chain(&self.tail_of[node])
            .copied()
            .collect();
        incident.sort_unstable();
        incident.into_iter().map(move |e| {
            let edge = &self.edges[e];
            if edge.head == node {
                edge.tail
            } else {
                edge.head
            }
        })
    }

    /// Weighted degree `d_i`: the sum of weights of edges touching `node`.
    pub fn weighted_degree(&self, node: usize) -> Result<f64> {
        self.degrees
            .get(node)
            .copied()
            .ok_or(SlpError::NodeOutOfRange {
                node,
                num_nodes: self.num_nodes,
            })
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Largest weighted degree over all nodes.
    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }

    /// `Dx`: per edge, `W_e (x[head] - x[tail])`.
    pub fn apply_incidence(&self, x: &NodeSignal) -> Result<EdgeSignal> {
        self.check_nodes(x.len())?;
        let mut out = vec![0.0; self.num_edges()];
        self.incidence_into(x.as_slice(), &mut out, false);
        Ok(EdgeSignal(out))
    }

    /// `D^T y`: per node, the weighted sum over head incidences minus the
    /// weighted sum over tail incidences.
    pub fn apply_incidence_adjoint(&self, y: &EdgeSignal) -> Result<NodeSignal> {
        self.check_edges(y.len())?;
        let mut out = vec![0.0; self.num_nodes];
        self.adjoint_into(y.as_slice(), &mut out, false);
        Ok(NodeSignal(out))
    }

    pub(crate) fn incidence_into(&self, x: &[f64], out: &mut [f64], parallel: bool) {
        let f = |(o, e): (&mut f64, &OrientedEdge)| *o = e.weight * (x[e.head] - x[e.tail]);
        if parallel {
            out.par_iter_mut().zip(self.edges.par_iter()).for_each(f);
        } else {
            out.iter_mut().zip(self.edges.iter()).for_each(f);
        }
    }

    pub(crate) fn adjoint_into(&self, y: &[f64], out: &mut [f64], parallel: bool) {
        let f = |(i, o): (usize, &mut f64)| *o = self.adjoint_at(i, y);
        if parallel {
            out.par_iter_mut().enumerate().for_each(f);
        } else {
            out.iter_mut().enumerate().for_each(f);
        }
    }

    /// `(D^T y)[i]` with the reduction order shared by every solver path.
    #[inline]
    pub(crate) fn adjoint_at(&self, i: usize, y: &[f64]) -> f64 {
        let plus: f64 = self.head_of[i]
            .iter()
            .map(|&e| self.edges[e].weight * y[e])
            .sum();
        let minus: f64 = self.tail_of[i]
            .iter()
            .map(|&e| self.edges[e].weight * y[e])
            .sum();
        plus - minus
    }

    /// Total variation `sum_e W_e |x[head] - x[tail]|`, summed in edge order.
    ///
    /// Equal bit-for-bit to the l1 norm of [`EmpiricalGraph::apply_incidence`]
    /// summed in edge order.
    pub fn tv_norm(&self, x: &NodeSignal) -> Result<f64> {
        self.check_nodes(x.len())?;
        Ok(self.tv_of(x.as_slice()))
    }

    pub(crate) fn tv_of(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| (e.weight * (x[e.head] - x[e.tail])).abs())
            .sum()
    }

    /// Hop distance from the nearest source node; `None` if unreachable.
    pub fn hop_distances(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes];
        let mut queue = VecDeque::new();
        for &s in sources {
            if s < self.num_nodes && dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub(crate) fn check_nodes(&self, len: usize) -> Result<()> {
        if len != self.num_nodes {
            return Err(SlpError::LengthMismatch {
                expected: self.num_nodes,
                found: len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_edges(&self, len: usize) -> Result<()> {
        if len != self.edges.len() {
            return Err(SlpError::LengthMismatch {
                expected: self.edges.len(),
                found: len,
            });
        }
        Ok(())
    }
}
