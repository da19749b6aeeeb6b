//! First compression step: every forward and backward ergodic set becomes a
//! single meta-node whose edge weights carry the same one-step flow as the
//! nodes it replaces.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{entry_count, exit_count, is_backward_ergodic_set, is_forward_ergodic_set, ErgodicPartition};
use crate::error::{Error, Result};
use crate::graph::{DiGraph, GraphBuilder, NodeSet};

/// Time-independent occupation model for nodes of a backward set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteModel {
    /// Proportional to in-degree.
    #[default]
    InDegree,
    Uniform,
    /// Stationary distribution of the walk restricted to the set.
    Stationary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SiteProbability {
    pub model: SiteModel,
    /// Use edge weights (strengths and weight-proportional transitions)
    /// instead of edge counts.
    pub weighted: bool,
}

/// Weight of every edge `w -> v_X` that replaces the edges from `w` into the
/// forward set `x`, keyed by `w`.
pub fn collapse_forward(g: &DiGraph, x: &NodeSet) -> Result<BTreeMap<usize, f64>> {
    if !is_forward_ergodic_set(g, x)? {
        return Err(Error::Contract(format!(
            "set {:?} has {} exiting edge(s); not a forward ergodic set",
            labels(g, x),
            exit_count(g, x)?
        )));
    }
    if entry_count(g, x)? == 0 {
        return Err(Error::Contract(format!(
            "set {:?} is both forward and backward; it is not collapsed",
            labels(g, x)
        )));
    }
    let mut weights = BTreeMap::new();
    for v in x.iter() {
        for &(w, weight) in g.in_edges(v) {
            if !x.contains(w) {
                *weights.entry(w).or_insert(0.0) += weight;
            }
        }
    }
    Ok(weights)
}

/// Occupation probability of each member of `y`, aligned with `y.iter()`.
pub fn site_probabilities(g: &DiGraph, y: &NodeSet, site: SiteProbability) -> Result<Vec<f64>> {
    let n = y.len();
    let normalise = |raw: Vec<f64>| {
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.into_iter().map(|p| p / total).collect()
        } else {
            vec![1.0 / n as f64; n]
        }
    };
    match site.model {
        SiteModel::Uniform => Ok(vec![1.0 / n as f64; n]),
        SiteModel::InDegree => Ok(normalise(
            y.iter()
                .map(|u| {
                    if site.weighted {
                        g.weighted_in(u)
                    } else {
                        g.in_degree(u) as f64
                    }
                })
                .collect(),
        )),
        SiteModel::Stationary => stationary_on_set(g, y, site.weighted).map(normalise),
    }
}

/// Stationary distribution of the walk on the induced subgraph of a strongly
/// connected set, from `pi (I - T) = 0` with one equation replaced by
/// `sum(pi) = 1`.
fn stationary_on_set(g: &DiGraph, y: &NodeSet, weighted: bool) -> Result<Vec<f64>> {
    let n = y.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let local = |v: usize| y.as_slice().binary_search(&v).ok();
    // a[(j, i)] = (I - T)^T, so that a * pi = 0
    let mut a = DMatrix::<f64>::identity(n, n);
    for (i, u) in y.iter().enumerate() {
        let inside: Vec<(usize, f64)> = g
            .out_edges(u)
            .iter()
            .filter_map(|&(v, w)| local(v).map(|j| (j, if weighted { w } else { 1.0 })))
            .collect();
        let total: f64 = inside.iter().map(|&(_, w)| w).sum();
        for (j, w) in inside {
            a[(j, i)] -= w / total;
        }
    }
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 0..n {
        a[(n - 1, i)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    a.lu()
        .solve(&rhs)
        .map(|pi| pi.iter().map(|&p| p.max(0.0)).collect())
        .ok_or_else(|| Error::Numerical("singular stationary system on backward set".into()))
}

/// Weight of every edge `n_Y -> v` leaving the collapsed backward set `y`,
/// keyed by `v`: the site probability of each member times its transition
/// probability to `v`.
pub fn collapse_backward(
    g: &DiGraph,
    y: &NodeSet,
    site: SiteProbability,
) -> Result<BTreeMap<usize, f64>> {
    if !is_backward_ergodic_set(g, y)? {
        return Err(Error::Contract(format!(
            "set {:?} has {} entering edge(s); not a backward ergodic set",
            labels(g, y),
            entry_count(g, y)?
        )));
    }
    if exit_count(g, y)? == 0 {
        return Err(Error::Contract(format!(
            "set {:?} is both forward and backward; it is not collapsed",
            labels(g, y)
        )));
    }
    let probs = site_probabilities(g, y, site)?;
    let mut weights = BTreeMap::new();
    for (u, p) in y.iter().zip(probs) {
        let out = g.out_edges(u);
        let strength = g.weighted_out(u);
        for &(v, w) in out {
            if y.contains(v) {
                continue;
            }
            let step = if site.weighted {
                w / strength
            } else {
                1.0 / out.len() as f64
            };
            *weights.entry(v).or_insert(0.0) += p * step;
        }
    }
    Ok(weights)
}

fn labels(g: &DiGraph, s: &NodeSet) -> Vec<String> {
    s.iter().take(8).map(|v| g.label(v).to_owned()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    CollapsedForward,
    CollapsedBackward,
    /// Transient-core node, copied as-is.
    Core,
    /// Member of a strongly connected weakly connected component, left as-is.
    Closed,
}

/// Graph after the first step, with the meta-node to original-node map.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedGraph {
    pub graph: DiGraph,
    /// Original nodes behind each compressed node.
    pub members: Vec<NodeSet>,
    pub kinds: Vec<NodeKind>,
    /// Collapsed backward meta-nodes, in backward-set order.
    pub sources: Vec<usize>,
    /// Collapsed forward meta-nodes, in forward-set order.
    pub sinks: Vec<usize>,
    /// Compressed index of every original node.
    pub original_to_compressed: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
}

impl CompressionReport {
    pub fn new(n: usize, n1: usize) -> Self {
        CompressionReport {
            n,
            n1,
            c1: 1.0 - n1 as f64 / n as f64,
        }
    }
}

/// Entry of the `meta_map.json` sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaEntry {
    pub node: String,
    pub kind: NodeKind,
    pub members: Vec<String>,
}

fn meta_label(g: &DiGraph, prefix: &str, set: &NodeSet) -> String {
    let smallest = set
        .iter()
        .map(|v| g.label(v))
        .min()
        .expect("ergodic sets are non-empty");
    format!("{prefix}:{smallest}")
}

pub fn compress_step1(
    g: &DiGraph,
    p: &ErgodicPartition,
    site: SiteProbability,
) -> Result<(CompressedGraph, CompressionReport)> {
    let n = g.node_count();
    let forward: Vec<&NodeSet> = p.compressible_forward().map(|(_, s)| s).collect();
    let backward: Vec<&NodeSet> = p.compressible_backward().map(|(_, s)| s).collect();

    let fw_weights: Vec<BTreeMap<usize, f64>> = forward
        .par_iter()
        .map(|x| collapse_forward(g, x))
        .collect::<Result<_>>()?;
    let bw_weights: Vec<BTreeMap<usize, f64>> = backward
        .par_iter()
        .map(|y| collapse_backward(g, y, site))
        .collect::<Result<_>>()?;

    // Which collapsed set (if any) owns each original node.
    #[derive(Clone, Copy)]
    enum Owner {
        None,
        Forward(usize),
        Backward(usize),
    }
    let mut owner = vec![Owner::None; n];
    for (i, x) in forward.iter().enumerate() {
        x.iter().for_each(|v| owner[v] = Owner::Forward(i));
    }
    for (i, y) in backward.iter().enumerate() {
        y.iter().for_each(|v| owner[v] = Owner::Backward(i));
    }
    let core_mask = p.transient_core.mask(n);

    let mut b = GraphBuilder::new();
    let mut taken: std::collections::HashSet<String> = g.labels().iter().cloned().collect();
    let mut unique = |label: String| {
        let mut label = label;
        while !taken.insert(label.clone()) {
            label.push('\'');
        }
        label
    };
    let mut members = Vec::new();
    let mut kinds = Vec::new();
    let mut sinks = vec![usize::MAX; forward.len()];
    let mut sources = vec![usize::MAX; backward.len()];
    let mut map = vec![usize::MAX; n];
    for v in 0..n {
        match owner[v] {
            Owner::Forward(i) if forward[i].first() == Some(v) => {
                let idx = b.add_node(&unique(meta_label(g, "FW", forward[i])));
                sinks[i] = idx;
                members.push(forward[i].clone());
                kinds.push(NodeKind::CollapsedForward);
            }
            Owner::Backward(i) if backward[i].first() == Some(v) => {
                let idx = b.add_node(&unique(meta_label(g, "BW", backward[i])));
                sources[i] = idx;
                members.push(backward[i].clone());
                kinds.push(NodeKind::CollapsedBackward);
            }
            Owner::Forward(_) | Owner::Backward(_) => {}
            Owner::None => {
                map[v] = b.add_node(g.label(v));
                members.push(NodeSet::new(vec![v]));
                kinds.push(if core_mask[v] {
                    NodeKind::Core
                } else {
                    NodeKind::Closed
                });
            }
        }
    }
    for v in 0..n {
        match owner[v] {
            Owner::Forward(i) => map[v] = sinks[i],
            Owner::Backward(i) => map[v] = sources[i],
            Owner::None => {}
        }
    }

    for u in 0..n {
        if !matches!(owner[u], Owner::None) {
            continue;
        }
        for &(v, w) in g.out_edges(u) {
            if matches!(owner[v], Owner::None) {
                b.add_edge_by_index(map[u], map[v], w)?;
            }
        }
    }
    for (i, weights) in fw_weights.iter().enumerate() {
        for (&w, &weight) in weights {
            if matches!(owner[w], Owner::None) {
                b.add_edge_by_index(map[w], sinks[i], weight)?;
            }
        }
    }
    for (i, weights) in bw_weights.iter().enumerate() {
        for (&v, &weight) in weights {
            b.add_edge_by_index(sources[i], map[v], weight)?;
        }
    }

    let graph = b.build();
    let report = CompressionReport::new(n, graph.node_count());
    Ok((
        CompressedGraph {
            graph,
            members,
            kinds,
            sources,
            sinks,
            original_to_compressed: map,
        },
        report,
    ))
}

impl CompressedGraph {
    pub fn meta_map(&self, original: &DiGraph) -> Vec<MetaEntry> {
        (0..self.graph.node_count())
            .map(|i| MetaEntry {
                node: self.graph.label(i).to_owned(),
                kind: self.kinds[i],
                members: self.members[i]
                    .iter()
                    .map(|v| original.label(v).to_owned())
                    .collect(),
            })
            .collect()
    }

    /// Reassembles a compressed graph read back from disk against the
    /// original graph it was built from.
    pub fn from_meta_map(graph: DiGraph, original: &DiGraph, entries: &[MetaEntry]) -> Result<Self> {
        let n = graph.node_count();
        if entries.len() != n {
            return Err(Error::Contract(format!(
                "meta map has {} entries for a graph of {} nodes",
                entries.len(),
                n
            )));
        }
        let mut members = vec![NodeSet::default(); n];
        let mut kinds = vec![NodeKind::Core; n];
        let mut original_to_compressed = vec![usize::MAX; original.node_count()];
        for e in entries {
            let idx = graph
                .index_of(&e.node)
                .ok_or_else(|| Error::Contract(format!("meta map node `{}` not in graph", e.node)))?;
            let mut set = Vec::with_capacity(e.members.len());
            for m in &e.members {
                let v = original.index_of(m).ok_or_else(|| {
                    Error::Contract(format!("meta map member `{m}` not in original graph"))
                })?;
                if original_to_compressed[v] != usize::MAX {
                    return Err(Error::Contract(format!("original node `{m}` mapped twice")));
                }
                original_to_compressed[v] = idx;
                set.push(v);
            }
            members[idx] = NodeSet::new(set);
            kinds[idx] = e.kind;
        }
        if let Some(v) = original_to_compressed.iter().position(|&c| c == usize::MAX) {
            return Err(Error::Contract(format!(
                "original node `{}` missing from meta map",
                original.label(v)
            )));
        }
        let by_first = |kind: NodeKind| {
            let mut nodes: Vec<usize> = (0..n).filter(|&i| kinds[i] == kind).collect();
            nodes.sort_by_key(|&i| members[i].first());
            nodes
        };
        let sources = by_first(NodeKind::CollapsedBackward);
        let sinks = by_first(NodeKind::CollapsedForward);
        Ok(CompressedGraph {
            graph,
            members,
            kinds,
            sources,
            sinks,
            original_to_compressed,
        })
    }
}
