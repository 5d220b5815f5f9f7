//! Text formats.
//!
//! * Edge list: `i<TAB>j<TAB>w` per line, 0-based node ids. Lines starting
//!   with `#` are comments, except `#nodes N` which fixes the node count
//!   (otherwise one more than the largest id).
//! * Labels and signals: `i<TAB>value` per line.
//!
//! Values are written with 17 significant digits, which round-trips `f64`.

use std::fs;
use std::path::Path;

use crate::error::{Result, SlpError};
use crate::graph::{EmpiricalGraph, NodeSignal};
use crate::solver::SamplingSet;

fn parse_err(line: usize, message: impl Into<String>) -> SlpError {
    SlpError::Parse {
        line,
        message: message.into(),
    }
}

fn fields(line: &str) -> Vec<&str> {
    line.split(['\t', ' ']).filter(|f| !f.is_empty()).collect()
}

fn parse_index(field: &str, line: usize) -> Result<usize> {
    field
        .parse()
        .map_err(|_| parse_err(line, format!("invalid node index `{field}`")))
}

fn parse_value(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number `{field}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite number `{field}`")));
    }
    Ok(v)
}

/// Parsed edge list before graph validation.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub num_nodes: Option<usize>,
    pub edges: Vec<(usize, usize, f64)>,
    /// 1-based source line of each edge.
    pub lines: Vec<usize>,
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut out = EdgeList {
        num_nodes: None,
        edges: Vec::new(),
        lines: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let f = fields(comment);
            if f.first() == Some(&"nodes") {
                let n = f
                    .get(1)
                    .ok_or_else(|| parse_err(line, "`#nodes` needs a count"))?;
                out.num_nodes = Some(parse_index(n, line)?);
            }
            continue;
        }
        let f = fields(trimmed);
        if f.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 3 fields, found {}", f.len()),
            ));
        }
        out.edges.push((
            parse_index(f[0], line)?,
            parse_index(f[1], line)?,
            parse_value(f[2], line)?,
        ));
        out.lines.push(line);
    }
    Ok(out)
}

impl EdgeList {
    /// Validates into a graph. Errors keep the edge's position in the list;
    /// [`EdgeList::line_of`] maps it back to the source line.
    pub fn into_graph(&self) -> Result<EmpiricalGraph> {
        match self.num_nodes {
            Some(n) => EmpiricalGraph::with_num_nodes(n, &self.edges),
            None => EmpiricalGraph::build(&self.edges),
        }
    }

    pub fn line_of(&self, edge_index: usize) -> Option<usize> {
        self.lines.get(edge_index).copied()
    }
}

pub fn parse_labels(text: &str) -> Result<SamplingSet> {
    let pairs = parse_pairs(text)?;
    let mut seen = std::collections::HashSet::new();
    for &(line, node, _) in &pairs {
        if !seen.insert(node) {
            return Err(parse_err(line, format!("node {node} labeled twice")));
        }
    }
    if pairs.is_empty() {
        return Err(parse_err(0, "no labels"));
    }
    SamplingSet::new(pairs.into_iter().map(|(_, i, v)| (i, v)))
}

/// Reads a signal written by [`format_signal`]. Every node in `0..n` must
/// appear exactly once.
pub fn parse_signal(text: &str) -> Result<NodeSignal> {
    let pairs = parse_pairs(text)?;
    let n = pairs.len();
    let mut values = vec![None; n];
    for (line, i, v) in pairs {
        if i >= n {
            return Err(parse_err(line, format!("node {i} out of range 0..{n}")));
        }
        if values[i].replace(v).is_some() {
            return Err(parse_err(line, format!("node {i} appears twice")));
        }
    }
    NodeSignal::new(values.into_iter().map(|v| v.unwrap_or(0.0)).collect())
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let f = fields(trimmed);
        if f.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, found {}", f.len()),
            ));
        }
        out.push((line, parse_index(f[0], line)?, parse_value(f[1], line)?));
    }
    Ok(out)
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_signal(x: &NodeSignal) -> String {
    let mut out = String::with_capacity(x.len() * 28);
    for (i, v) in x.iter().enumerate() {
        out.push_str(&format!("{i}\t{}\n", fmt_f64(*v)));
    }
    out
}

pub fn format_edge_list(g: &EmpiricalGraph) -> String {
    let mut out = format!("#nodes {}\n", g.num_nodes());
    for e in g.edges() {
        out.push_str(&format!("{}\t{}\t{}\n", e.head, e.tail, fmt_f64(e.weight)));
    }
    out
}

pub fn format_labels(s: &SamplingSet) -> String {
    s.iter()
        .map(|(i, v)| format!("{i}\t{}\n", fmt_f64(v)))
        .collect()
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SlpError::Io(format!("{}: {e}", path.display())))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| SlpError::Io(format!("{}: {e}", path.display())))
}
