//! Detection of generalised ergodic sets (sources and sinks) in directed
//! networks, and the two-step compression that keeps random-walk flows
//! between them intact.
//!
//! * [`detection`] splits the nodes into forward ergodic sets, backward
//!   ergodic sets and the transient core.
//! * [`step1`] collapses every such set into a meta-node.
//! * [`mixing`] computes the source-to-sink absorption matrix and its SVD.
//! * [`oracle`] evolves walks step by step as an independent check.
//! * [`experiments`] holds the random-graph and core-rewiring studies.

pub mod detection;
pub mod error;
pub mod experiments;
pub mod fmt;
pub mod graph;
pub mod mixing;
pub mod oracle;
pub mod pipeline;
pub mod step1;
pub mod verify;

pub use detection::{partition, scc, ErgodicPartition, SccDecomposition};
pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use graph::{DiGraph, GraphBuilder, NodeSet};
pub use mixing::{mixing_matrix, svd_compress, FullReport, MixingMatrix, RankPolicy, SvdFactors};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineOutput};
pub use step1::{compress_step1, CompressedGraph, CompressionReport, SiteModel, SiteProbability};
