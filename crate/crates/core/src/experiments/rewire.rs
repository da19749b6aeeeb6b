use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::spectrum::{laplacian_spectrum, SpectralRow};
use super::stats::{compare_statistics, correlate, Comparison};
use super::stream_rng;
use crate::detection::ErgodicPartition;
use crate::error::Result;
use crate::graph::{DiGraph, GraphBuilder};
use crate::pipeline::{run_pipeline, PipelineOptions};

#[derive(Debug, Clone)]
pub struct RewireOutcome {
    pub graph: DiGraph,
    pub core_edges: usize,
    pub attempted: usize,
    pub accepted: usize,
    /// Set when the graph came back unchanged.
    pub notice: Option<String>,
}

/// Degree-preserving shuffle of the edges with both endpoints in the
/// transient core.
///
/// Performs `swaps_per_edge * core_edges` attempts of the double-edge swap
/// `(a->b, c->d) => (a->d, c->b)`, rejecting swaps that would create a
/// self-loop or an edge that already exists. Each weight stays with its
/// source endpoint. Every other edge is copied unchanged.
pub fn rewire_core<R: Rng + ?Sized>(
    g: &DiGraph,
    partition: &ErgodicPartition,
    swaps_per_edge: usize,
    rng: &mut R,
) -> RewireOutcome {
    let core = partition.transient_core.mask(g.node_count());
    let (mut core_edges, other): (Vec<_>, Vec<_>) =
        g.edges().partition(|&(u, v, _)| core[u] && core[v]);
    let m = core_edges.len();
    let unchanged = |notice: String, attempted| RewireOutcome {
        graph: g.clone(),
        core_edges: m,
        attempted,
        accepted: 0,
        notice: Some(notice),
    };
    if m < 2 {
        return unchanged(format!("core has {m} internal edge(s); unchanged"), 0);
    }

    let mut present: HashSet<(usize, usize)> = g.edges().map(|(u, v, _)| (u, v)).collect();
    let attempts = swaps_per_edge * m;
    let mut accepted = 0;
    for _ in 0..attempts {
        let pick = sample(rng, m, 2);
        let (i, j) = (pick.index(0), pick.index(1));
        let (a, b, wi) = core_edges[i];
        let (c, d, wj) = core_edges[j];
        if a == d || c == b || present.contains(&(a, d)) || present.contains(&(c, b)) {
            continue;
        }
        present.remove(&(a, b));
        present.remove(&(c, d));
        present.insert((a, d));
        present.insert((c, b));
        core_edges[i] = (a, d, wi);
        core_edges[j] = (c, b, wj);
        accepted += 1;
    }
    if accepted == 0 {
        return unchanged(format!("no valid swap among {m} core edges; unchanged"), attempts);
    }

    let mut builder = GraphBuilder::new();
    for label in g.labels() {
        builder.add_node(label);
    }
    for (u, v, w) in other.into_iter().chain(core_edges) {
        builder
            .add_edge_by_index(u, v, w)
            .expect("edges come from a valid graph");
    }
    RewireOutcome {
        graph: builder.build(),
        core_edges: m,
        attempted: attempts,
        accepted,
        notice: None,
    }
}

/// Random bow-tie: `sources` feed an Erdős–Rényi core, which drains into
/// `sinks`. Each source has 1–3 edges into the core and each sink 1–3 edges
/// from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowTieConfig {
    pub sources: usize,
    pub core: usize,
    pub sinks: usize,
    pub core_p: f64,
}

pub fn bowtie_digraph<R: Rng + ?Sized>(cfg: &BowTieConfig, rng: &mut R) -> DiGraph {
    let mut b = GraphBuilder::new();
    let src: Vec<usize> = (0..cfg.sources).map(|i| b.add_node(&format!("in{i}"))).collect();
    let core: Vec<usize> = (0..cfg.core).map(|i| b.add_node(&format!("c{i}"))).collect();
    let dst: Vec<usize> = (0..cfg.sinks).map(|i| b.add_node(&format!("out{i}"))).collect();
    for &u in &core {
        for &v in &core {
            if u != v && rng.gen_bool(cfg.core_p) {
                b.add_edge_by_index(u, v, 1.0).expect("valid edge");
            }
        }
    }
    if core.is_empty() {
        return b.build();
    }
    for &s in &src {
        for _ in 0..rng.gen_range(1..=3) {
            let c = core[rng.gen_range(0..core.len())];
            b.add_edge_by_index(s, c, 1.0).expect("valid edge");
        }
    }
    for &t in &dst {
        for _ in 0..rng.gen_range(1..=3) {
            let c = core[rng.gen_range(0..core.len())];
            b.add_edge_by_index(c, t, 1.0).expect("valid edge");
        }
    }
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewireConfig {
    pub swaps_per_edge: usize,
    pub seed: u64,
    pub zero_tol: Option<f64>,
    pub pipeline: PipelineOptions,
}

impl Default for RewireConfig {
    fn default() -> Self {
        RewireConfig {
            swaps_per_edge: 10,
            seed: 0,
            zero_tol: None,
            pipeline: PipelineOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewireStats {
    /// Zero-eigenvalue counts before against after rewiring.
    pub zero_counts: Comparison,
    /// Correlation between the drop in zero count and C2, when defined.
    pub correlation_decrease_vs_c2: Option<f64>,
    pub decrease: Vec<f64>,
    pub c2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewireReport {
    pub rows: Vec<SpectralRow>,
    pub notices: Vec<String>,
    pub stats: Option<RewireStats>,
}

/// For every graph: spectrum of the Laplacian of `B^T B` before and after
/// rewiring its core (ChaCha stream = graph position), then the before/after
/// statistics across graphs.
pub fn rewire_experiment(graphs: &[(String, DiGraph)], cfg: &RewireConfig) -> Result<RewireReport> {
    let mut rows = Vec::new();
    let mut notices = Vec::new();
    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut c2 = Vec::new();
    for (i, (id, g)) in graphs.iter().enumerate() {
        let original = run_pipeline(g, &cfg.pipeline)?;
        let spec_before = laplacian_spectrum(&original.mixing, cfg.zero_tol);
        let outcome = rewire_core(g, &original.partition, cfg.swaps_per_edge, &mut stream_rng(cfg.seed, i as u64));
        if let Some(n) = &outcome.notice {
            notices.push(format!("{id}: {n}"));
        }
        let rewired = run_pipeline(&outcome.graph, &cfg.pipeline)?;
        let spec_after = laplacian_spectrum(&rewired.mixing, cfg.zero_tol);
        rows.push(SpectralRow::new(id, false, &spec_before));
        rows.push(SpectralRow::new(id, true, &spec_after));
        before.push(spec_before.zero_count as f64);
        after.push(spec_after.zero_count as f64);
        c2.push(original.report.c2);
    }
    let stats = if graphs.len() >= 2 {
        let zero_counts = compare_statistics(&before, &after)?;
        let decrease: Vec<f64> = before.iter().zip(&after).map(|(b, a)| b - a).collect();
        let correlation_decrease_vs_c2 = match correlate(&decrease, &c2) {
            Ok(r) => Some(r),
            Err(e) => {
                notices.push(format!("correlation not reported: {e}"));
                None
            }
        };
        Some(RewireStats {
            zero_counts,
            correlation_decrease_vs_c2,
            decrease,
            c2,
        })
    } else {
        notices.push("statistics need at least 2 graphs; not reported".into());
        None
    };
    Ok(RewireReport {
        rows,
        notices,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::partition;
    use crate::graph::NodeSet;

    fn core_degrees(g: &DiGraph, core: &NodeSet) -> Vec<(usize, usize)> {
        let mask = core.mask(g.node_count());
        core.iter()
            .map(|v| {
                let out = g.out_edges(v).iter().filter(|&&(w, _)| mask[w]).count();
                let inn = g.in_edges(v).iter().filter(|&&(w, _)| mask[w]).count();
                (out, inn)
            })
            .collect()
    }

    #[test]
    fn single_core_edge_is_left_alone() {
        // s -> a -> b -> t: core {a, b} with one internal edge
        let g = DiGraph::from_labeled_edges(&[("s", "a", 1.0), ("a", "b", 1.0), ("b", "t", 1.0)]).unwrap();
        let p = partition(&g);
        let out = rewire_core(&g, &p, 10, &mut stream_rng(0, 0));
        assert_eq!(out.graph, g);
        assert!(out.notice.unwrap().contains("unchanged"));
    }

    #[test]
    fn four_cycle_swaps() {
        // Core cycle a->b->c->d->a fed by s and drained into t. Only the two
        // opposite pairs (a->b, c->d) and (b->c, d->a) admit a swap.
        let g = DiGraph::from_labeled_edges(&[
            ("s", "a", 1.0),
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "d", 1.0),
            ("d", "a", 1.0),
            ("c", "t", 1.0),
        ])
        .unwrap();
        let p = partition(&g);
        assert_eq!(p.transient_core.len(), 4);
        let id = |l| g.index_of(l).unwrap();
        let expected_after_first = [
            [(id("a"), id("d")), (id("c"), id("b"))],
            [(id("b"), id("a")), (id("d"), id("c"))],
        ];
        let out = rewire_core(&g, &p, 1, &mut stream_rng(5, 0));
        assert!(out.accepted >= 1);
        assert_ne!(out.graph, g);
        assert_eq!(core_degrees(&out.graph, &p.transient_core), core_degrees(&g, &p.transient_core));
        let has = |(u, v)| out.graph.has_edge(u, v);
        if out.accepted == 1 {
            assert!(expected_after_first.iter().any(|pair| pair.iter().all(|&e| has(e))));
        }
        assert!(out.graph.has_edge(id("s"), id("a")) && out.graph.has_edge(id("c"), id("t")));
    }

    #[test]
    fn triangle_core_has_no_valid_swap() {
        let g = DiGraph::from_labeled_edges(&[
            ("s", "a", 1.0),
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
            ("c", "t", 1.0),
        ])
        .unwrap();
        let p = partition(&g);
        let out = rewire_core(&g, &p, 10, &mut stream_rng(1, 0));
        assert_eq!(out.accepted, 0);
        assert_eq!(out.graph, g);
        assert!(out.notice.is_some());
    }

    #[test]
    fn bowtie_rewiring_preserves_degrees_and_periphery() {
        for seed in 0..10 {
            let mut rng = stream_rng(seed, 99);
            let cfg = BowTieConfig { sources: 5, core: 25, sinks: 6, core_p: 0.12 };
            let g = bowtie_digraph(&cfg, &mut rng);
            let p = partition(&g);
            let out = rewire_core(&g, &p, 10, &mut rng);
            let mask = p.transient_core.mask(g.node_count());
            assert_eq!(out.graph.edge_count(), g.edge_count());
            assert_eq!(core_degrees(&out.graph, &p.transient_core), core_degrees(&g, &p.transient_core));
            for (u, v, w) in g.edges().filter(|&(u, v, _)| !(mask[u] && mask[v])) {
                assert_eq!(out.graph.weight(u, v).map(f64::to_bits), Some(w.to_bits()));
            }
            assert!(out.graph.nodes().all(|v| out.graph.has_edge(v, v) == g.has_edge(v, v)));
        }
    }

    #[test]
    fn experiment_reports_rows_and_stats() {
        let graphs: Vec<(String, DiGraph)> = (0..4)
            .map(|i| {
                let cfg = BowTieConfig { sources: 4, core: 20, sinks: 5, core_p: 0.1 };
                (format!("g{i}"), bowtie_digraph(&cfg, &mut stream_rng(i, 1)))
            })
            .collect();
        let rep = rewire_experiment(&graphs, &RewireConfig::default()).unwrap();
        assert_eq!(rep.rows.len(), 8);
        assert!(rep.stats.is_some());
        let single = rewire_experiment(&graphs[..1], &RewireConfig::default()).unwrap();
        assert!(single.stats.is_none());
    }
}
