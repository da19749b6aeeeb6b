use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stream_rng;
use crate::detection::partition;
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::graph::{DiGraph, GraphBuilder};

/// Directed G(N, p): every ordered pair `u != v` independently gets a
/// unit-weight edge with probability `p`.
pub fn er_digraph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<DiGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Contract(format!("edge probability {p} outside [0, 1]")));
    }
    let mut b = GraphBuilder::with_indexed_nodes(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                b.add_edge_by_index(u, v, 1.0)?;
            }
        }
    }
    Ok(b.build())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErSweepConfig {
    pub sizes: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

impl ErSweepConfig {
    /// `steps` evenly spaced probabilities from `p_min` to `p_max` inclusive.
    pub fn linear_grid(p_min: f64, p_max: f64, steps: usize) -> Vec<f64> {
        match steps {
            0 => Vec::new(),
            1 => vec![p_min],
            _ => (0..steps)
                .map(|i| p_min + (p_max - p_min) * i as f64 / (steps - 1) as f64)
                .collect(),
        }
    }

    /// `steps` log-spaced probabilities from `p_min > 0` to `p_max`.
    pub fn log_grid(p_min: f64, p_max: f64, steps: usize) -> Vec<f64> {
        let (lo, hi) = (p_min.ln(), p_max.ln());
        Self::linear_grid(lo, hi, steps).into_iter().map(f64::exp).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.probabilities.is_empty() {
            return Err(Error::Contract("sweep needs at least one size and one probability".into()));
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n == 0) {
            return Err(Error::Contract(format!("graph size {n} must be at least 1")));
        }
        if let Some(p) = self.probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Contract(format!("probability {p} outside [0, 1]")));
        }
        if self.replicates == 0 {
            return Err(Error::Contract("replicates must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErSweepRow {
    pub n: usize,
    pub p: f64,
    pub mean_frac_any: f64,
    pub std_frac_any: f64,
    pub mean_frac_largest: f64,
    pub std_frac_largest: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErSweepResult {
    pub rows: Vec<ErSweepRow>,
}

impl ErSweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "N,p,mean_frac_any,std_frac_any,mean_frac_largest,std_frac_largest,replicates\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                g17(r.p),
                g17(r.mean_frac_any),
                g17(r.std_frac_any),
                g17(r.mean_frac_largest),
                g17(r.std_frac_largest),
                r.replicates
            );
        }
        out
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per replicate: fraction of nodes in any generalised ergodic set and in
/// the largest one; aggregated as mean and sample standard deviation.
///
/// Replicate `r` of grid cell `c` draws from ChaCha stream `(c << 32) | r`,
/// so the output does not depend on the thread count.
pub fn er_sweep(cfg: &ErSweepConfig) -> Result<ErSweepResult> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (si, &n) in cfg.sizes.iter().enumerate() {
        for (pi, &p) in cfg.probabilities.iter().enumerate() {
            let cell = (si * cfg.probabilities.len() + pi) as u64;
            let samples: Vec<(f64, f64)> = (0..cfg.replicates)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = stream_rng(cfg.seed, (cell << 32) | rep as u64);
                    let g = er_digraph(n, p, &mut rng)?;
                    let part = partition(&g);
                    Ok((
                        part.ergodic_node_count() as f64 / n as f64,
                        part.largest_set_size() as f64 / n as f64,
                    ))
                })
                .collect::<Result<_>>()?;
            let any: Vec<f64> = samples.iter().map(|s| s.0).collect();
            let largest: Vec<f64> = samples.iter().map(|s| s.1).collect();
            let (mean_frac_any, std_frac_any) = mean_std(&any);
            let (mean_frac_largest, std_frac_largest) = mean_std(&largest);
            rows.push(ErSweepRow {
                n,
                p,
                mean_frac_any,
                std_frac_any,
                mean_frac_largest,
                std_frac_largest,
                replicates: cfg.replicates,
            });
        }
    }
    Ok(ErSweepResult { rows })
}
