//! Weighted directed graphs with stable string labels over dense indices.

mod edgelist;

use std::collections::HashMap;

use crate::error::{Error, ParseError, ParseErrorKind, Result};

pub use edgelist::{parse_edge_list, write_edge_list, Delimiter, IngestOptions};

/// Sorted, duplicate-free list of dense node indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(mut nodes: Vec<usize>) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        NodeSet(nodes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.binary_search(&node).is_ok()
    }

    /// Smallest contained index; sets are ordered by it throughout the crate.
    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Membership bitmask over `node_count` nodes.
    pub fn mask(&self, node_count: usize) -> Vec<bool> {
        let mut mask = vec![false; node_count];
        for &v in &self.0 {
            mask[v] = true;
        }
        mask
    }

    pub(crate) fn check_bounds(&self, node_count: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= node_count => Err(Error::NodeOutOfRange {
                index: last,
                node_count,
            }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSet::new(iter.into_iter().collect())
    }
}

/// Immutable weighted digraph. Adjacency lists are sorted by neighbour index
/// and carry strictly positive, finite weights; parallel edges never exist.
#[derive(Debug, Clone, PartialEq)]
pub struct DiGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl DiGraph {
    /// Builds a graph from labelled edges; nodes are numbered by first appearance.
    pub fn from_labeled_edges<S: AsRef<str>>(edges: &[(S, S, f64)]) -> Result<Self> {
        let mut b = GraphBuilder::new();
        for (u, v, w) in edges {
            b.add_edge(u.as_ref(), v.as_ref(), *w)?;
        }
        Ok(b.build())
    }

    /// Builds a graph on nodes `0..node_count`, labelled by their decimal index.
    pub fn from_indexed_edges(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut b = GraphBuilder::with_indexed_nodes(node_count);
        for &(u, v, w) in edges {
            b.add_edge_by_index(u, v, w)?;
        }
        Ok(b.build())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn out_edges(&self, node: usize) -> &[(usize, f64)] {
        &self.out_adj[node]
    }

    pub fn in_edges(&self, node: usize) -> &[(usize, f64)] {
        &self.in_adj[node]
    }

    /// Number of distinct out-neighbours (a self-loop counts once).
    pub fn out_degree(&self, node: usize) -> usize {
        self.out_adj[node].len()
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.in_adj[node].len()
    }

    pub fn weighted_out(&self, node: usize) -> f64 {
        self.out_adj[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn weighted_in(&self, node: usize) -> f64 {
        self.in_adj[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn weight(&self, source: usize, target: usize) -> Option<f64> {
        let row = &self.out_adj[source];
        row.binary_search_by_key(&target, |&(v, _)| v)
            .ok()
            .map(|i| row[i].1)
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.weight(source, target).is_some()
    }

    /// All edges ordered by (source index, target index).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(v, w)| (u, v, w)))
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.node_count()
    }
}

/// Incremental constructor; merges parallel edges by summing their weights.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: HashMap<(usize, usize), f64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_indexed_nodes(node_count: usize) -> Self {
        let mut b = Self::new();
        for i in 0..node_count {
            b.add_node(&i.to_string());
        }
        b
    }

    /// Returns the index for `label`, creating the node if needed.
    pub fn add_node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_edge(&mut self, source: &str, target: &str, weight: f64) -> Result<()> {
        check_weight(weight)?;
        let u = self.add_node(source);
        let v = self.add_node(target);
        *self.edges.entry((u, v)).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn add_edge_by_index(&mut self, source: usize, target: usize, weight: f64) -> Result<()> {
        check_weight(weight)?;
        let n = self.labels.len();
        for idx in [source, target] {
            if idx >= n {
                return Err(Error::NodeOutOfRange {
                    index: idx,
                    node_count: n,
                });
            }
        }
        *self.edges.entry((source, target)).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn build(self) -> DiGraph {
        let n = self.labels.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let edge_count = self.edges.len();
        for ((u, v), w) in self.edges {
            out_adj[u].push((v, w));
            in_adj[v].push((u, w));
        }
        for row in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            row.sort_unstable_by_key(|&(v, _)| v);
        }
        DiGraph {
            labels: self.labels,
            index: self.index,
            out_adj,
            in_adj,
            edge_count,
        }
    }
}

fn check_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(ParseError {
            line: 0,
            kind: ParseErrorKind::NonPositiveWeight(weight),
        }
        .into())
    }
}

/// Same nodes, every edge `(u, v, w)` turned into `(v, u, w)`.
pub fn reverse(g: &DiGraph) -> DiGraph {
    DiGraph {
        labels: g.labels.clone(),
        index: g.index.clone(),
        out_adj: g.in_adj.clone(),
        in_adj: g.out_adj.clone(),
        edge_count: g.edge_count,
    }
}

/// Subgraph on the nodes of `s` (renumbered in ascending original order)
/// holding every edge of `g` with both endpoints in `s`.
pub fn induced_subgraph(g: &DiGraph, s: &NodeSet) -> Result<DiGraph> {
    s.check_bounds(g.node_count())?;
    let mut local = vec![usize::MAX; g.node_count()];
    let mut b = GraphBuilder::new();
    for v in s.iter() {
        local[v] = b.add_node(g.label(v));
    }
    for u in s.iter() {
        for &(v, w) in g.out_edges(u) {
            if local[v] != usize::MAX {
                b.add_edge_by_index(local[u], local[v], w)?;
            }
        }
    }
    Ok(b.build())
}

/// Components of the underlying undirected graph, ordered by smallest member.
pub fn weakly_connected_components(g: &DiGraph) -> Vec<NodeSet> {
    let n = g.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![root];
        comp[root] = id;
        stack.push(root);
        while let Some(u) = stack.pop() {
            for &(v, _) in g.out_edges(u).iter().chain(g.in_edges(u)) {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        out.push(NodeSet::new(members));
    }
    out
}
