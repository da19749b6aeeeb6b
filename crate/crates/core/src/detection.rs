//! Strongly connected components and their classification into forward
//! ergodic sets (no exiting edges), backward ergodic sets (no entering
//! edges) and the transient core.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DiGraph, NodeSet};

#[derive(Debug, Clone, PartialEq)]
pub struct SccDecomposition {
    /// Maximal strongly connected components ordered by smallest member.
    pub components: Vec<NodeSet>,
    /// Position in `components` of every node.
    pub component_of: Vec<usize>,
}

/// Iterative Tarjan over nodes `0..n`. Components come out in reverse
/// topological order of the condensation: a component is emitted only after
/// every component reachable from it.
pub(crate) fn tarjan<F, I>(n: usize, successors: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next = 0usize;
    let mut call: Vec<(usize, I)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, successors(root)));

        while let Some((v, iter)) = call.last_mut() {
            let v = *v;
            if let Some(w) = iter.next() {
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, successors(w)));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                components.push(comp);
            }
        }
    }
    components
}

pub fn scc(g: &DiGraph) -> SccDecomposition {
    let raw = tarjan(g.node_count(), |u| g.out_edges(u).iter().map(|&(v, _)| v));
    let mut components: Vec<NodeSet> = raw.into_iter().map(NodeSet::new).collect();
    components.sort_unstable_by_key(|c| c.first());
    let mut component_of = vec![0; g.node_count()];
    for (i, c) in components.iter().enumerate() {
        for v in c.iter() {
            component_of[v] = i;
        }
    }
    SccDecomposition {
        components,
        component_of,
    }
}

/// Edges from `x` to the rest of the graph, counted as the out-degree sum
/// over `x` minus the out-degree sum inside the induced subgraph on `x`.
pub fn exit_count(g: &DiGraph, x: &NodeSet) -> Result<usize> {
    x.check_bounds(g.node_count())?;
    Ok(boundary_count(g, x, Direction::Out))
}

/// Edges from the rest of the graph into `x`.
pub fn entry_count(g: &DiGraph, x: &NodeSet) -> Result<usize> {
    x.check_bounds(g.node_count())?;
    Ok(boundary_count(g, x, Direction::In))
}

#[derive(Clone, Copy)]
enum Direction {
    Out,
    In,
}

fn boundary_count(g: &DiGraph, x: &NodeSet, dir: Direction) -> usize {
    let adj = |v| match dir {
        Direction::Out => g.out_edges(v),
        Direction::In => g.in_edges(v),
    };
    let total: usize = x.iter().map(|v| adj(v).len()).sum();
    let internal: usize = x
        .iter()
        .map(|v| adj(v).iter().filter(|&&(w, _)| x.contains(w)).count())
        .sum();
    total - internal
}

fn check_strongly_connected(g: &DiGraph, x: &NodeSet) -> Result<()> {
    x.check_bounds(g.node_count())?;
    let Some(start) = x.first() else {
        return Err(Error::Contract("empty node set is not strongly connected".into()));
    };
    let mask = x.mask(g.node_count());
    for dir in [Direction::Out, Direction::In] {
        let mut seen = vec![false; g.node_count()];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            let adj = match dir {
                Direction::Out => g.out_edges(u),
                Direction::In => g.in_edges(u),
            };
            for &(v, _) in adj {
                if mask[v] && !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        if reached != x.len() {
            return Err(Error::Contract(format!(
                "node set of size {} is not strongly connected",
                x.len()
            )));
        }
    }
    Ok(())
}

/// True iff `x` is strongly connected and no edge leaves it.
///
/// Fails when `x` is not strongly connected. A strongly connected set that
/// sits strictly inside a larger component always has an exiting edge, so
/// the answer is still correct for it.
pub fn is_forward_ergodic_set(g: &DiGraph, x: &NodeSet) -> Result<bool> {
    check_strongly_connected(g, x)?;
    Ok(boundary_count(g, x, Direction::Out) == 0)
}

/// True iff `x` is strongly connected and no edge enters it.
pub fn is_backward_ergodic_set(g: &DiGraph, x: &NodeSet) -> Result<bool> {
    check_strongly_connected(g, x)?;
    Ok(boundary_count(g, x, Direction::In) == 0)
}

/// Forward sets, backward sets and transient core of a graph.
///
/// A set that is both forward and backward (its weakly connected component
/// is strongly connected) is listed in both `forward_sets` and
/// `backward_sets`, with the matching `*_both` flag raised.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicPartition {
    pub forward_sets: Vec<NodeSet>,
    pub backward_sets: Vec<NodeSet>,
    pub transient_core: NodeSet,
    pub forward_both: Vec<bool>,
    pub backward_both: Vec<bool>,
    /// Strongly connected components whose nodes form the transient core.
    pub core_components: usize,
}

pub fn partition(g: &DiGraph) -> ErgodicPartition {
    let dec = scc(g);
    let mut p = ErgodicPartition {
        forward_sets: Vec::new(),
        backward_sets: Vec::new(),
        transient_core: NodeSet::default(),
        forward_both: Vec::new(),
        backward_both: Vec::new(),
        core_components: 0,
    };
    let mut core = Vec::new();
    for (c, members) in dec.components.iter().enumerate() {
        let mut exits = false;
        let mut enters = false;
        for v in members.iter() {
            exits |= g.out_edges(v).iter().any(|&(w, _)| dec.component_of[w] != c);
            enters |= g.in_edges(v).iter().any(|&(w, _)| dec.component_of[w] != c);
        }
        let both = !exits && !enters;
        if !exits {
            p.forward_sets.push(members.clone());
            p.forward_both.push(both);
        }
        if !enters {
            p.backward_sets.push(members.clone());
            p.backward_both.push(both);
        }
        if exits && enters {
            core.extend(members.iter());
            p.core_components += 1;
        }
    }
    p.transient_core = NodeSet::new(core);
    p
}

impl ErgodicPartition {
    /// Forward sets that get collapsed by compression, with their positions.
    pub fn compressible_forward(&self) -> impl Iterator<Item = (usize, &NodeSet)> {
        self.forward_sets
            .iter()
            .enumerate()
            .filter(|&(i, _)| !self.forward_both[i])
    }

    pub fn compressible_backward(&self) -> impl Iterator<Item = (usize, &NodeSet)> {
        self.backward_sets
            .iter()
            .enumerate()
            .filter(|&(i, _)| !self.backward_both[i])
    }

    /// Positions in `forward_sets` of sets that are also backward.
    pub fn both_indices(&self) -> Vec<usize> {
        (0..self.forward_sets.len())
            .filter(|&i| self.forward_both[i])
            .collect()
    }

    /// Nodes in any generalised ergodic set, each counted once.
    pub fn ergodic_node_count(&self) -> usize {
        let fw: usize = self.forward_sets.iter().map(NodeSet::len).sum();
        let bw: usize = self
            .compressible_backward()
            .map(|(_, s)| s.len())
            .sum();
        fw + bw
    }

    pub fn largest_set_size(&self) -> usize {
        self.forward_sets
            .iter()
            .chain(&self.backward_sets)
            .map(NodeSet::len)
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self, g: &DiGraph) -> PartitionJson {
        let names = |s: &NodeSet| s.iter().map(|v| g.label(v).to_owned()).collect::<Vec<_>>();
        PartitionJson {
            forward_sets: self.forward_sets.iter().map(names).collect(),
            backward_sets: self.backward_sets.iter().map(names).collect(),
            transient_core: names(&self.transient_core),
            both: self.both_indices(),
        }
    }
}

/// Label-level view written by `ergoset detect`. `both` holds positions in
/// `forward_sets`; those sets also appear in `backward_sets`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub forward_sets: Vec<Vec<String>>,
    pub backward_sets: Vec<Vec<String>>,
    pub transient_core: Vec<String>,
    pub both: Vec<usize>,
}
