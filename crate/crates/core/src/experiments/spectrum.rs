use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::fmt::g17;
use crate::mixing::{csv_field, MixingMatrix};

/// `B^T B`, built from one triangle so it is exactly symmetric.
pub fn similarity_matrix(b: &MixingMatrix) -> DMatrix<f64> {
    let n = b.sinks();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = b.values.column(i).dot(&b.values.column(j));
            s[(i, j)] = x;
            s[(j, i)] = x;
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Eigenvalues of the Laplacian of `B^T B`, ascending.
    pub eigenvalues: Vec<f64>,
    pub zero_count: usize,
    pub zero_tol: f64,
}

impl SpectralSummary {
    /// Second-smallest eigenvalue, if there are at least two.
    pub fn lambda_2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }
}

/// Spectrum of `L = diag(rowsums(S)) - S` with `S = B^T B`. Eigenvalues with
/// magnitude below `zero_tol` (default `1e-10 * max(1, lambda_max)`) count
/// as zero.
pub fn laplacian_spectrum(b: &MixingMatrix, zero_tol: Option<f64>) -> SpectralSummary {
    let s = similarity_matrix(b);
    let n = s.nrows();
    let mut l = -s.clone();
    for i in 0..n {
        l[(i, i)] += s.row(i).sum();
    }
    let mut eigenvalues: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        SymmetricEigen::new(l).eigenvalues.iter().copied().collect()
    };
    eigenvalues.sort_by(f64::total_cmp);
    let lambda_max = eigenvalues.last().copied().unwrap_or(0.0);
    let zero_tol = zero_tol.unwrap_or(1e-10 * lambda_max.max(1.0));
    let zero_count = eigenvalues.iter().filter(|x| x.abs() < zero_tol).count();
    SpectralSummary {
        eigenvalues,
        zero_count,
        zero_tol,
    }
}

/// One line of the spectral CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub graph_id: String,
    pub rewired: bool,
    pub n_eigenvalues: usize,
    pub zero_count: usize,
    pub lambda_2: Option<f64>,
}

impl SpectralRow {
    pub fn new(graph_id: &str, rewired: bool, s: &SpectralSummary) -> Self {
        SpectralRow {
            graph_id: graph_id.to_owned(),
            rewired,
            n_eigenvalues: s.eigenvalues.len(),
            zero_count: s.zero_count,
            lambda_2: s.lambda_2(),
        }
    }

    pub fn csv(rows: &[SpectralRow]) -> String {
        let mut out = String::from("graph_id,rewired,n_eigenvalues,zero_count,lambda_2\n");
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&r.graph_id),
                r.rewired,
                r.n_eigenvalues,
                r.zero_count,
                r.lambda_2.map(g17).unwrap_or_default()
            );
        }
        out
    }
}
