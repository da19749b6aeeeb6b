//! Cross-checks of a compression run against brute-force walk evolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::partition;
use crate::error::Result;
use crate::graph::DiGraph;
use crate::mixing::{absorption_rows, mixing_matrix, TransitionMatrix};
use crate::oracle::{absorb, absorb_row, InitialDistribution, DEFAULT_EPS, DEFAULT_MAX_STEPS};
use crate::step1::{compress_step1, CompressedGraph, NodeKind, SiteProbability};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub eps: f64,
    pub max_steps: usize,
    pub tolerance: f64,
    pub site: SiteProbability,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            eps: DEFAULT_EPS,
            max_steps: DEFAULT_MAX_STEPS,
            tolerance: 1e-10,
            site: SiteProbability::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub check: String,
    pub location: String,
    pub expected: f64,
    pub found: f64,
}

impl Discrepancy {
    pub fn deviation(&self) -> f64 {
        (self.expected - self.found).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub tolerance: f64,
    /// Solver B against oracle absorption, max entry deviation.
    pub max_b_deviation: f64,
    pub max_row_sum_deviation: f64,
    /// Absorption into each forward set from each core node, original graph
    /// against compressed graph.
    pub max_forward_collapse_deviation: f64,
    /// Compressed edge weights against a fresh first step on the original.
    pub max_edge_weight_deviation: f64,
    /// Deviations above tolerance, largest first (at most 20).
    pub discrepancies: Vec<Discrepancy>,
}

/// Compares `cg` (usually read back from disk) with what the original graph
/// implies. Fails with [`Error::NonConvergence`](crate::Error) when the
/// oracle walk does not settle.
pub fn verify(g: &DiGraph, cg: &CompressedGraph, opts: &VerifyOptions) -> Result<VerificationReport> {
    let tol = opts.tolerance;
    let mut found = Vec::new();

    // 1. first-step edges
    let (fresh, _) = compress_step1(g, &partition(g), opts.site)?;
    let mut max_edge = 0.0f64;
    let edge_name = |c: &CompressedGraph, u: usize, v: usize| {
        format!("{} -> {}", c.graph.label(u), c.graph.label(v))
    };
    for (u, v, w) in fresh.graph.edges() {
        let lu = fresh.graph.label(u);
        let lv = fresh.graph.label(v);
        let got = match (cg.graph.index_of(lu), cg.graph.index_of(lv)) {
            (Some(a), Some(b)) => cg.graph.weight(a, b).unwrap_or(0.0),
            _ => 0.0,
        };
        max_edge = max_edge.max((got - w).abs() / w.max(1.0));
        found.push(Discrepancy {
            check: "edge-weight".into(),
            location: edge_name(&fresh, u, v),
            expected: w,
            found: got,
        });
    }
    for (u, v, w) in cg.graph.edges() {
        let lu = cg.graph.label(u);
        let lv = cg.graph.label(v);
        let known = matches!(
            (fresh.graph.index_of(lu), fresh.graph.index_of(lv)),
            (Some(a), Some(b)) if fresh.graph.has_edge(a, b)
        );
        if !known {
            max_edge = max_edge.max(w / w.max(1.0));
            found.push(Discrepancy {
                check: "edge-weight".into(),
                location: edge_name(cg, u, v),
                expected: 0.0,
                found: w,
            });
        }
    }

    // 2. solver B against the oracle, and its row sums
    let b = mixing_matrix(cg)?;
    let p_cg = TransitionMatrix::from_graph(&cg.graph);
    let oracle_rows: Vec<Vec<f64>> = cg
        .sources
        .par_iter()
        .map(|&s| absorb_row(&p_cg, s, &cg.sinks, opts.eps, opts.max_steps))
        .collect::<Result<_>>()?;
    let mut max_b = 0.0f64;
    for (i, row) in oracle_rows.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let s = b.values[(i, j)];
            max_b = max_b.max((s - o).abs());
            found.push(Discrepancy {
                check: "mixing-matrix".into(),
                location: format!("B[{}, {}]", b.source_labels[i], b.sink_labels[j]),
                expected: o,
                found: s,
            });
        }
    }
    let max_row = b.max_row_sum_deviation();
    for (i, r) in b.values.row_iter().enumerate() {
        found.push(Discrepancy {
            check: "row-sum".into(),
            location: b.source_labels[i].clone(),
            expected: 1.0,
            found: r.sum(),
        });
    }

    // 3. forward-collapse exactness, from every core node
    let mut fw_absorbing = vec![false; g.node_count()];
    for &t in &cg.sinks {
        for v in cg.members[t].iter() {
            fw_absorbing[v] = true;
        }
    }
    let p_orig = TransitionMatrix::with_absorbing(g, &fw_absorbing);
    let transient: Vec<bool> = cg
        .kinds
        .iter()
        .map(|k| matches!(k, NodeKind::Core | NodeKind::CollapsedBackward))
        .collect();
    let solved = absorption_rows(&p_cg, &transient, &cg.sinks)?;
    let core_nodes: Vec<usize> = (0..cg.graph.node_count())
        .filter(|&i| cg.kinds[i] == NodeKind::Core)
        .collect();
    let per_core: Vec<Vec<Discrepancy>> = core_nodes
        .par_iter()
        .map(|&c| {
            let w = cg.members[c].first().expect("core node maps to itself");
            let absorbed = absorb(
                &p_orig,
                &InitialDistribution::point(g.node_count(), w),
                opts.eps,
                opts.max_steps,
            )?;
            Ok(cg
                .sinks
                .iter()
                .enumerate()
                .map(|(j, &t)| Discrepancy {
                    check: "forward-collapse".into(),
                    location: format!("{} -> {}", g.label(w), cg.graph.label(t)),
                    expected: cg.members[t].iter().map(|v| absorbed[v]).sum(),
                    found: solved[c][j],
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut max_fw = 0.0f64;
    for d in per_core.into_iter().flatten() {
        max_fw = max_fw.max(d.deviation());
        found.push(d);
    }

    let mut discrepancies: Vec<Discrepancy> = found
        .into_iter()
        .filter(|d| d.deviation() > tol)
        .collect();
    discrepancies.sort_by(|a, b| b.deviation().total_cmp(&a.deviation()));
    discrepancies.truncate(20);

    let pass = max_b <= tol && max_row <= tol && max_fw <= tol && max_edge <= tol;
    Ok(VerificationReport {
        pass,
        tolerance: tol,
        max_b_deviation: max_b,
        max_row_sum_deviation: max_row,
        max_forward_collapse_deviation: max_fw,
        max_edge_weight_deviation: max_edge,
        discrepancies,
    })
}
