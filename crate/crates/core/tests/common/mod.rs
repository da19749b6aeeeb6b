#![allow(dead_code)]

use std::collections::BTreeSet;

use ergoset::{DiGraph, GraphBuilder};
use rand::Rng;

/// Forward sets, backward sets and core computed from the full reachability
/// relation, with nothing shared with the library's Tarjan pass.
pub struct NaivePartition {
    pub forward: BTreeSet<Vec<usize>>,
    pub backward: BTreeSet<Vec<usize>>,
    pub core: Vec<usize>,
}

pub fn reachability(g: &DiGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for u in 0..n {
        r[u][u] = true;
        for &(v, _) in g.out_edges(u) {
            r[u][v] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

pub fn naive_partition(g: &DiGraph) -> NaivePartition {
    let n = g.node_count();
    let r = reachability(g);
    let mut forward = BTreeSet::new();
    let mut backward = BTreeSet::new();
    for u in 0..n {
        let class: Vec<usize> = (0..n).filter(|&v| r[u][v] && r[v][u]).collect();
        // closed: everything u reaches reaches u back
        if (0..n).all(|v| !r[u][v] || r[v][u]) {
            forward.insert(class.clone());
        }
        if (0..n).all(|v| !r[v][u] || r[u][v]) {
            backward.insert(class);
        }
    }
    let core = (0..n)
        .filter(|v| !forward.iter().chain(backward.iter()).any(|s| s.contains(v)))
        .collect();
    NaivePartition {
        forward,
        backward,
        core,
    }
}

/// Compares the library partition of `g` with the naive one.
pub fn detection_agrees(g: &DiGraph) -> Result<(), String> {
    let lib = ergoset::partition(g);
    let naive = naive_partition(g);
    let fw: BTreeSet<Vec<usize>> = lib.forward_sets.iter().map(|s| s.as_slice().to_vec()).collect();
    let bw: BTreeSet<Vec<usize>> = lib.backward_sets.iter().map(|s| s.as_slice().to_vec()).collect();
    if fw != naive.forward || fw.len() != lib.forward_sets.len() {
        return Err(format!("forward sets {fw:?} vs naive {:?}", naive.forward));
    }
    if bw != naive.backward || bw.len() != lib.backward_sets.len() {
        return Err(format!("backward sets {bw:?} vs naive {:?}", naive.backward));
    }
    if lib.transient_core.as_slice() != naive.core.as_slice() {
        return Err(format!("core {:?} vs naive {:?}", lib.transient_core, naive.core));
    }
    for (i, s) in lib.forward_sets.iter().enumerate() {
        if lib.forward_both[i] != naive.backward.contains(s.as_slice()) {
            return Err(format!("both-flag wrong on forward set {s:?}"));
        }
    }
    for (i, s) in lib.backward_sets.iter().enumerate() {
        if lib.backward_both[i] != naive.forward.contains(s.as_slice()) {
            return Err(format!("both-flag wrong on backward set {s:?}"));
        }
    }
    Ok(())
}

/// Digraph on `n` indexed nodes whose arcs are the set bits of `mask`
/// (bit `u * n + v` is the arc `u -> v`, self-loops included).
pub fn graph_from_mask(n: usize, mask: u64) -> DiGraph {
    let mut b = GraphBuilder::with_indexed_nodes(n);
    for u in 0..n {
        for v in 0..n {
            if mask >> (u * n + v) & 1 == 1 {
                b.add_edge_by_index(u, v, 1.0).unwrap();
            }
        }
    }
    b.build()
}

/// Arbitrary digraph on `n` nodes, density `p`, occasional self-loops.
pub fn random_digraph<R: Rng>(n: usize, p: f64, rng: &mut R) -> DiGraph {
    let mut b = GraphBuilder::with_indexed_nodes(n);
    for u in 0..n {
        for v in 0..n {
            let q = if u == v { p / 4.0 } else { p };
            if rng.gen_bool(q) {
                b.add_edge_by_index(u, v, 1.0).unwrap();
            }
        }
    }
    b.build()
}

/// Weakly connected digraph: a randomly oriented spanning tree plus extra
/// arcs at density `p`. Weights are 1 or uniform in (0.1, 5].
pub fn random_connected<R: Rng>(n: usize, p: f64, weighted: bool, rng: &mut R) -> DiGraph {
    let mut b = GraphBuilder::with_indexed_nodes(n);
    let w = |rng: &mut R| if weighted { rng.gen_range(0.1..=5.0) } else { 1.0 };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let wt = w(rng);
        if rng.gen_bool(0.5) {
            b.add_edge_by_index(u, v, wt).unwrap();
        } else {
            b.add_edge_by_index(v, u, wt).unwrap();
        }
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                let wt = w(rng);
                b.add_edge_by_index(u, v, wt).unwrap();
            }
        }
    }
    b.build()
}
