//! Second compression step: the core mixing matrix (absorption probabilities
//! from every collapsed source into every collapsed sink) and its truncated
//! singular value decomposition.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::detection::{tarjan, ErgodicPartition};
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::graph::DiGraph;
use crate::step1::{CompressedGraph, NodeKind};

/// Row-stochastic random-walk transitions. Rows of absorbing nodes are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    absorbing: Vec<bool>,
}

impl TransitionMatrix {
    /// Normalises out-weights; nodes without out-edges are absorbing.
    pub fn from_graph(g: &DiGraph) -> Self {
        Self::with_absorbing(g, &vec![false; g.node_count()])
    }

    /// Like [`from_graph`](Self::from_graph), additionally forcing the
    /// flagged nodes to be absorbing.
    pub fn with_absorbing(g: &DiGraph, absorbing: &[bool]) -> Self {
        let mut rows = Vec::with_capacity(g.node_count());
        let mut flags = Vec::with_capacity(g.node_count());
        for u in g.nodes() {
            let total = g.weighted_out(u);
            if absorbing[u] || g.out_degree(u) == 0 {
                rows.push(Vec::new());
                flags.push(true);
            } else {
                rows.push(g.out_edges(u).iter().map(|&(v, w)| (v, w / total)).collect());
                flags.push(false);
            }
        }
        TransitionMatrix {
            rows,
            absorbing: flags,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, node: usize) -> &[(usize, f64)] {
        &self.rows[node]
    }

    pub fn is_absorbing(&self, node: usize) -> bool {
        self.absorbing[node]
    }

    pub fn absorbing(&self) -> &[bool] {
        &self.absorbing
    }

    /// Replaces one transition probability; used to build negative controls.
    pub fn set(&mut self, from: usize, to: usize, prob: f64) {
        let row = &mut self.rows[from];
        match row.binary_search_by_key(&to, |&(v, _)| v) {
            Ok(i) => row[i].1 = prob,
            Err(i) => row.insert(i, (to, prob)),
        }
    }
}

pub fn transition_matrix(cg: &CompressedGraph) -> TransitionMatrix {
    TransitionMatrix::from_graph(&cg.graph)
}

/// Probability that a walk from each transient node is eventually absorbed
/// at each target, solving `(I - Q) U = R` one strongly connected block of
/// the transient subgraph at a time, downstream blocks first.
///
/// Returns one row (over `targets`) per node; rows of non-transient nodes are
/// empty. Mass reaching a node that is neither transient nor a target is
/// dropped.
pub fn absorption_rows(
    p: &TransitionMatrix,
    transient: &[bool],
    targets: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let n = p.len();
    let k = targets.len();
    let mut target_col = vec![usize::MAX; n];
    for (j, &t) in targets.iter().enumerate() {
        target_col[t] = j;
    }
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n];
    let blocks = tarjan(n, |u| {
        let live = transient[u];
        p.row(u)
            .iter()
            .filter(move |&&(v, _)| live && transient[v])
            .map(|&(v, _)| v)
    });
    let mut local = vec![usize::MAX; n];
    for block in blocks {
        if !transient[block[0]] {
            continue;
        }
        for (i, &u) in block.iter().enumerate() {
            local[u] = i;
        }
        let m = block.len();
        let mut rhs = DMatrix::<f64>::zeros(m, k);
        let mut a = DMatrix::<f64>::identity(m, m);
        let mut leaks = false;
        for (i, &u) in block.iter().enumerate() {
            for &(v, prob) in p.row(u) {
                if transient[v] && local[v] != usize::MAX {
                    a[(i, local[v])] -= prob;
                    continue;
                }
                leaks = true;
                if transient[v] {
                    for (j, x) in rows[v].iter().enumerate() {
                        rhs[(i, j)] += prob * x;
                    }
                } else if target_col[v] != usize::MAX {
                    rhs[(i, target_col[v])] += prob;
                }
            }
        }
        if !leaks {
            let u = block[0];
            return Err(Error::Numerical(format!(
                "transient block of {m} node(s) containing node {u} is closed; (I - Q) is singular"
            )));
        }
        let solution = if m == 1 {
            let pivot = a[(0, 0)];
            rhs / pivot
        } else {
            a.lu().solve(&rhs).ok_or_else(|| {
                Error::Numerical(format!("singular (I - Q) block of size {m}"))
            })?
        };
        for (i, &u) in block.iter().enumerate() {
            rows[u] = solution.row(i).iter().copied().collect();
            local[u] = usize::MAX;
        }
    }
    Ok(rows)
}

/// `B[i][j]`: probability that a walk from source `i` ends in sink `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    pub values: DMatrix<f64>,
    pub source_labels: Vec<String>,
    pub sink_labels: Vec<String>,
}

impl MixingMatrix {
    pub fn new(values: DMatrix<f64>, source_labels: Vec<String>, sink_labels: Vec<String>) -> Self {
        debug_assert_eq!(values.nrows(), source_labels.len());
        debug_assert_eq!(values.ncols(), sink_labels.len());
        MixingMatrix {
            values,
            source_labels,
            sink_labels,
        }
    }

    /// Unlabelled matrix from row-major data; labels are `s0..`, `t0..`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let values = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        MixingMatrix {
            values,
            source_labels: (0..m).map(|i| format!("s{i}")).collect(),
            sink_labels: (0..n).map(|j| format!("t{j}")).collect(),
        }
    }

    pub fn sources(&self) -> usize {
        self.values.nrows()
    }

    pub fn sinks(&self) -> usize {
        self.values.ncols()
    }

    pub fn max_row_sum_deviation(&self) -> f64 {
        self.values
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Header row of sink labels, one row per source.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source");
        for l in &self.sink_labels {
            out.push(',');
            out.push_str(&csv_field(l));
        }
        out.push('\n');
        for (i, l) in self.source_labels.iter().enumerate() {
            out.push_str(&csv_field(l));
            for x in self.values.row(i).iter() {
                let _ = write!(out, ",{}", g17(*x));
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn mixing_matrix(cg: &CompressedGraph) -> Result<MixingMatrix> {
    let p = transition_matrix(cg);
    let transient: Vec<bool> = cg
        .kinds
        .iter()
        .map(|k| matches!(k, NodeKind::Core | NodeKind::CollapsedBackward))
        .collect();
    let rows = absorption_rows(&p, &transient, &cg.sinks)?;
    let values = DMatrix::from_fn(cg.sources.len(), cg.sinks.len(), |i, j| {
        rows[cg.sources[i]][j]
    });
    let label = |&v: &usize| cg.graph.label(v).to_owned();
    Ok(MixingMatrix::new(
        values,
        cg.sources.iter().map(label).collect(),
        cg.sinks.iter().map(label).collect(),
    ))
}

/// How many singular values survive truncation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankPolicy {
    /// `sigma > max(rows, cols) * sigma_max * f64::EPSILON`.
    #[default]
    Numerical,
    /// `sigma > threshold`.
    Absolute(f64),
    /// `sigma > fraction * sigma_max`.
    Relative(f64),
    /// Keep exactly `k` (clamped to the number of singular values).
    Fixed(usize),
}

/// `B ~= m_bw * diag(singular_values) * m_fw`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// `N_bw x k`, orthonormal columns.
    pub m_bw: DMatrix<f64>,
    /// The `k` retained singular values, descending.
    pub singular_values: Vec<f64>,
    /// `k x N_fw`, orthonormal rows.
    pub m_fw: DMatrix<f64>,
    pub rank: usize,
    /// Frobenius norm of the reconstruction residual.
    pub epsilon: f64,
    /// Every singular value, descending, before truncation.
    pub spectrum: Vec<f64>,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular_values));
        &self.m_bw * c * &self.m_fw
    }
}

pub fn svd_compress(b: &MixingMatrix, policy: RankPolicy) -> Result<SvdFactors> {
    let (m, n) = b.values.shape();
    if m == 0 || n == 0 {
        return Ok(SvdFactors {
            m_bw: DMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            m_fw: DMatrix::zeros(0, n),
            rank: 0,
            epsilon: 0.0,
            spectrum: Vec::new(),
        });
    }
    if b.values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("mixing matrix has non-finite entries".into()));
    }
    let svd = SVD::try_new(b.values.clone(), true, true, f64::EPSILON, 1_000_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let spectrum: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let sigma_max = spectrum[0];
    let k = match policy {
        RankPolicy::Numerical => {
            let tau = m.max(n) as f64 * sigma_max * f64::EPSILON;
            spectrum.iter().filter(|&&s| s > tau).count()
        }
        RankPolicy::Absolute(tau) => spectrum.iter().filter(|&&s| s > tau).count(),
        RankPolicy::Relative(r) => spectrum.iter().filter(|&&s| s > r * sigma_max).count(),
        RankPolicy::Fixed(k) => k.min(spectrum.len()),
    };

    let mut m_bw = DMatrix::zeros(m, k);
    let mut m_fw = DMatrix::zeros(k, n);
    for (slot, &i) in order.iter().take(k).enumerate() {
        let col = u.column(i);
        // Largest-magnitude entry (first on ties) of each left vector is positive.
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (r, &x)| if x.abs() > best.1.abs() { (r, x) } else { best });
        let sign = if pivot.1 < 0.0 { -1.0 } else { 1.0 };
        m_bw.set_column(slot, &(col * sign));
        m_fw.set_row(slot, &(v_t.row(i) * sign));
    }
    let mut factors = SvdFactors {
        m_bw,
        singular_values: spectrum[..k].to_vec(),
        m_fw,
        rank: k,
        epsilon: 0.0,
        spectrum,
    };
    factors.epsilon = (&b.values - factors.reconstruct()).norm();
    Ok(factors)
}

fn matrix_csv(m: &DMatrix<f64>, row_labels: &[String], col_labels: &[String], corner: &str) -> String {
    let mut out = String::from(corner);
    for l in col_labels {
        out.push(',');
        out.push_str(&csv_field(l));
    }
    out.push('\n');
    for (i, l) in row_labels.iter().enumerate() {
        out.push_str(&csv_field(l));
        for x in m.row(i).iter() {
            let _ = write!(out, ",{}", g17(*x));
        }
        out.push('\n');
    }
    out
}

impl SvdFactors {
    fn mode_labels(&self) -> Vec<String> {
        (1..=self.rank).map(|i| format!("mode_{i}")).collect()
    }

    pub fn m_bw_csv(&self, b: &MixingMatrix) -> String {
        matrix_csv(&self.m_bw, &b.source_labels, &self.mode_labels(), "source")
    }

    pub fn m_fw_csv(&self, b: &MixingMatrix) -> String {
        matrix_csv(&self.m_fw, &self.mode_labels(), &b.sink_labels, "mode")
    }

    pub fn c_csv(&self) -> String {
        let mut out = String::from("mode,singular_value\n");
        for (label, s) in self.mode_labels().iter().zip(&self.singular_values) {
            let _ = writeln!(out, "{label},{}", g17(*s));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorShapes {
    pub m_bw: [usize; 2],
    pub c: [usize; 2],
    pub m_fw: [usize; 2],
}

/// Node counts and compression factors after both steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    /// Effective rank of B.
    pub r: usize,
    pub shapes: FactorShapes,
    #[serde(rename = "E")]
    pub epsilon: f64,
    #[serde(rename = "N2")]
    pub n2: usize,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FullReport {
    /// `N2 = N_bw + k + N_fw`, `C1 = 1 - N1/N`, `C2 = 1 - N2/N`.
    pub fn from_counts(n: usize, n1: usize, n_bw: usize, k: usize, n_fw: usize, epsilon: f64) -> Self {
        let n2 = n_bw + k + n_fw;
        let c1 = 1.0 - n1 as f64 / n as f64;
        let c2 = 1.0 - n2 as f64 / n as f64;
        let mut warnings = Vec::new();
        if c2 < 0.0 {
            warnings.push(format!(
                "degenerate second step: N2 = {n2} exceeds N = {n}, C2 is negative"
            ));
        }
        FullReport {
            n,
            n1,
            c1,
            r: k,
            shapes: FactorShapes {
                m_bw: [n_bw, k],
                c: [k, k],
                m_fw: [k, n_fw],
            },
            epsilon,
            n2,
            c2,
            warnings,
        }
    }

    pub fn n_bw(&self) -> usize {
        self.shapes.m_bw[0]
    }

    pub fn n_fw(&self) -> usize {
        self.shapes.m_fw[1]
    }
}

pub fn full_report(
    g: &DiGraph,
    partition: &ErgodicPartition,
    cg: &CompressedGraph,
    factors: &SvdFactors,
) -> FullReport {
    let n_bw = partition.compressible_backward().count();
    let n_fw = partition.compressible_forward().count();
    debug_assert_eq!(n_bw, cg.sources.len());
    debug_assert_eq!(n_fw, cg.sinks.len());
    FullReport::from_counts(
        g.node_count(),
        cg.graph.node_count(),
        n_bw,
        factors.rank,
        n_fw,
        factors.epsilon,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::partition;
    use crate::step1::{compress_step1, SiteProbability};

    fn compressed(edges: &[(&str, &str)]) -> (DiGraph, ErgodicPartition, CompressedGraph) {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        let g = DiGraph::from_labeled_edges(&e).unwrap();
        let p = partition(&g);
        let (cg, _) = compress_step1(&g, &p, SiteProbability::default()).unwrap();
        (g, p, cg)
    }

    #[test]
    fn transition_rows() {
        let g = DiGraph::from_labeled_edges(&[("a", "b", 2.0), ("a", "c", 2.0), ("b", "c", 5.0)]).unwrap();
        let p = TransitionMatrix::from_graph(&g);
        assert_eq!(p.row(0), [(1, 0.5), (2, 0.5)]);
        assert_eq!(p.row(1), [(2, 1.0)]);
        assert!(p.is_absorbing(2));
        assert!(p.row(2).is_empty());
        assert!(!p.is_absorbing(0));
    }

    #[test]
    fn single_path() {
        let (_, _, cg) = compressed(&[("a", "b"), ("b", "c")]);
        let b = mixing_matrix(&cg).unwrap();
        assert_eq!(b.values, DMatrix::from_row_slice(1, 1, &[1.0]));
        assert_eq!(b.source_labels, ["BW:a"]);
        assert_eq!(b.sink_labels, ["FW:c"]);
    }

    #[test]
    fn diamond_splits_evenly() {
        let (_, _, cg) = compressed(&[("s", "u"), ("u", "t1"), ("s", "w"), ("w", "t2")]);
        let b = mixing_matrix(&cg).unwrap();
        assert_eq!(b.values, DMatrix::from_row_slice(1, 2, &[0.5, 0.5]));
    }

    #[test]
    fn disjoint_chains_give_identity() {
        let (_, _, cg) = compressed(&[("a", "x"), ("b", "y")]);
        let b = mixing_matrix(&cg).unwrap();
        assert_eq!(b.values, DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn cyclic_core_is_solved_exactly() {
        // s -> c1 <-> c2, c1 -> t1, c2 -> t2. From c1: x1 = 1/2 * 1 + 1/2 * x2
        // (into t1), x2 = 1/2 * x1 -> x1 = 2/3.
        let (_, _, cg) = compressed(&[("s", "c1"), ("c1", "c2"), ("c2", "c1"), ("c1", "t1"), ("c2", "t2")]);
        let b = mixing_matrix(&cg).unwrap();
        assert!((b.values[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((b.values[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_transient_block_is_reported() {
        let g = DiGraph::from_indexed_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        let p = TransitionMatrix::from_graph(&g);
        let err = absorption_rows(&p, &[true, true, true], &[]).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn svd_identity() {
        let b = MixingMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let f = svd_compress(&b, RankPolicy::Numerical).unwrap();
        assert_eq!(f.rank, 2);
        assert_eq!(f.singular_values, vec![1.0, 1.0]);
        assert_eq!(f.epsilon, 0.0);
    }

    #[test]
    fn svd_rank_one() {
        let b = MixingMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let f = svd_compress(&b, RankPolicy::Numerical).unwrap();
        assert_eq!(f.rank, 1);
        assert!((f.singular_values[0] - 1.0).abs() < 1e-15);
        assert!(f.epsilon <= 1e-15);
        assert_eq!(f.m_bw.shape(), (2, 1));
        assert_eq!(f.m_fw.shape(), (1, 2));
        assert!(f.m_bw.iter().all(|&x| x > 0.0), "sign convention");
    }

    #[test]
    fn svd_policies() {
        let b = MixingMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]]);
        let full = svd_compress(&b, RankPolicy::Numerical).unwrap();
        assert_eq!(full.rank, 2);
        let one = svd_compress(&b, RankPolicy::Fixed(1)).unwrap();
        assert_eq!(one.rank, 1);
        assert!((one.epsilon - full.spectrum[1]).abs() < 1e-12);
        assert_eq!(svd_compress(&b, RankPolicy::Fixed(9)).unwrap().rank, 2);
        assert_eq!(svd_compress(&b, RankPolicy::Absolute(full.spectrum[1])).unwrap().rank, 1);
        assert_eq!(svd_compress(&b, RankPolicy::Relative(0.0)).unwrap().rank, 2);
        assert_eq!(svd_compress(&b, RankPolicy::Fixed(0)).unwrap().epsilon, b.values.norm());
    }

    #[test]
    fn svd_empty_matrix() {
        let b = MixingMatrix::new(DMatrix::zeros(0, 3), vec![], vec!["a".into(), "b".into(), "c".into()]);
        let f = svd_compress(&b, RankPolicy::Numerical).unwrap();
        assert_eq!(f.rank, 0);
        assert_eq!(f.m_fw.shape(), (0, 3));
    }

    #[test]
    fn svd_rejects_non_finite() {
        let b = MixingMatrix::from_rows(&[vec![f64::NAN]]);
        assert!(matches!(svd_compress(&b, RankPolicy::Numerical), Err(Error::Numerical(_))));
    }

    #[test]
    fn report_examples() {
        let hawaii = FullReport::from_counts(162, 161, 51, 36, 38, 7.97e-15);
        assert_eq!(hawaii.n2, 125);
        assert!((hawaii.c1 - 0.00617).abs() < 5e-5);
        assert!((hawaii.c2 - 0.228).abs() < 5e-4);
        assert_eq!(hawaii.shapes.m_bw, [51, 36]);
        assert!(hawaii.warnings.is_empty());

        let delaware = FullReport::from_counts(419, 419, 117, 20, 20, 2.08e-14);
        assert_eq!(delaware.c1, 0.0);
        assert_eq!(delaware.n2, 157);
        assert!((delaware.c2 - 0.625).abs() < 5e-4);
    }

    #[test]
    fn trivial_graph_reports_negative_c2() {
        let (g, p, cg) = compressed(&[("a", "b")]);
        let b = mixing_matrix(&cg).unwrap();
        let f = svd_compress(&b, RankPolicy::Numerical).unwrap();
        let r = full_report(&g, &p, &cg, &f);
        assert_eq!((r.n, r.n1, r.r, r.n2), (2, 2, 1, 3));
        assert_eq!(r.c2, 1.0 - 3.0 / 2.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn csv_layout() {
        let (_, _, cg) = compressed(&[("s", "u"), ("u", "t1"), ("s", "w"), ("w", "t2")]);
        let b = mixing_matrix(&cg).unwrap();
        assert_eq!(b.to_csv(), "source,FW:t1,FW:t2\nBW:s,0.5,0.5\n");
        let f = svd_compress(&b, RankPolicy::Numerical).unwrap();
        assert_eq!(f.c_csv().lines().count(), 2);
        assert!(f.m_bw_csv(&b).starts_with("source,mode_1\nBW:s,1\n"));
        assert!(f.m_fw_csv(&b).starts_with("mode,FW:t1,FW:t2\nmode_1,"));
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
