//! Browser bindings for the demo page in `www/`. Every export takes plain
//! values and returns a JSON string; errors come back as JS exceptions
//! carrying the message.

use ergoset::experiments::{er_sweep, laplacian_spectrum, ErSweepConfig};
use ergoset::graph::{parse_edge_list, write_edge_list, Delimiter, IngestOptions};
use ergoset::{run_pipeline, PipelineOptions, RankPolicy};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Matrix {
    rows: Vec<String>,
    cols: Vec<String>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Analysis {
    partition: ergoset::detection::PartitionJson,
    report: ergoset::FullReport,
    mixing: Matrix,
    singular_values: Vec<f64>,
    compressed_edges: String,
}

#[derive(Serialize)]
struct Spectrum {
    eigenvalues: Vec<f64>,
    zero_count: usize,
    sinks: usize,
}

fn parse(text: &str, comma: bool) -> Result<ergoset::DiGraph, String> {
    let opts = IngestOptions {
        delimiter: if comma { Delimiter::Comma } else { Delimiter::Whitespace },
        default_weight: 1.0,
    };
    parse_edge_list(text, &opts).map_err(|e| e.to_string())
}

/// Partition, both compression steps and B for an edge list.
/// `rank_k < 0` keeps the numerical rank.
pub fn analyze_json(text: &str, comma: bool, rank_k: i32) -> Result<String, String> {
    let g = parse(text, comma)?;
    let rank = if rank_k < 0 { RankPolicy::Numerical } else { RankPolicy::Fixed(rank_k as usize) };
    let out = run_pipeline(&g, &PipelineOptions { rank, ..Default::default() }).map_err(|e| e.to_string())?;
    let b = &out.mixing;
    let analysis = Analysis {
        partition: out.partition.to_json(&g),
        report: out.report,
        mixing: Matrix {
            rows: b.source_labels.clone(),
            cols: b.sink_labels.clone(),
            values: b.values.row_iter().map(|r| r.iter().copied().collect()).collect(),
        },
        singular_values: out.factors.spectrum,
        compressed_edges: write_edge_list(&out.compressed.graph, Delimiter::Whitespace),
    };
    serde_json::to_string(&analysis).map_err(|e| e.to_string())
}

/// Fraction of nodes in ergodic sets along a linear p-grid.
pub fn er_curve_json(n: usize, p_max: f64, steps: usize, reps: usize, seed: u64) -> Result<String, String> {
    let cfg = ErSweepConfig {
        sizes: vec![n],
        probabilities: ErSweepConfig::linear_grid(0.0, p_max, steps),
        replicates: reps,
        seed,
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let res = er_sweep(&cfg).map_err(|e| e.to_string())?;
    serde_json::to_string(&res.rows).map_err(|e| e.to_string())
}

/// Laplacian spectrum of the sink-similarity matrix `B^T B`.
pub fn spectrum_json(text: &str, comma: bool) -> Result<String, String> {
    let g = parse(text, comma)?;
    let out = run_pipeline(&g, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    let s = laplacian_spectrum(&out.mixing, None);
    serde_json::to_string(&Spectrum {
        eigenvalues: s.eigenvalues,
        zero_count: s.zero_count,
        sinks: out.mixing.sinks(),
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn analyze(text: &str, comma: bool, rank_k: i32) -> Result<String, JsError> {
    analyze_json(text, comma, rank_k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn er_curve(n: usize, p_max: f64, steps: usize, reps: usize, seed: u32) -> Result<String, JsError> {
    er_curve_json(n, p_max, steps, reps, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectrum(text: &str, comma: bool) -> Result<String, JsError> {
    spectrum_json(text, comma).map_err(|e| JsError::new(&e))
}
