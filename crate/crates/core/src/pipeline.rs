use crate::detection::{partition, ErgodicPartition};
use crate::error::{Error, Result};
use crate::graph::DiGraph;
use crate::mixing::{full_report, mixing_matrix, svd_compress, FullReport, MixingMatrix, RankPolicy, SvdFactors};
use crate::step1::{compress_step1, CompressedGraph, CompressionReport, SiteProbability};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PipelineOptions {
    pub site: SiteProbability,
    pub rank: RankPolicy,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub partition: ErgodicPartition,
    pub compressed: CompressedGraph,
    pub step1: CompressionReport,
    pub mixing: MixingMatrix,
    pub factors: SvdFactors,
    pub report: FullReport,
}

/// Detection, both compression steps and the report, in one call.
pub fn run_pipeline(g: &DiGraph, opts: &PipelineOptions) -> Result<PipelineOutput> {
    let partition = partition(g);
    let (compressed, step1) = compress_step1(g, &partition, opts.site)?;
    let mixing = mixing_matrix(&compressed)?;
    let factors = svd_compress(&mixing, opts.rank)?;
    let report = full_report(g, &partition, &compressed, &factors);
    if report.n2 != report.n_bw() + report.r + report.n_fw() {
        return Err(Error::Contract("N2 != N_bw + r + N_fw".into()));
    }
    Ok(PipelineOutput {
        partition,
        compressed,
        step1,
        mixing,
        factors,
        report,
    })
}
