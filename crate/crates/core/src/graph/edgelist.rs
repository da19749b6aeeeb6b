//! Plain-text edge lists.
//!
//! ```text
//! # comment
//! a b          # weight defaults to 1
//! b c 0.5
//! NODES:       # optional section of bare labels (isolated nodes)
//! d e
//! EDGES:       # switches back to edge lines
//! c a 2
//! ```
//!
//! Parallel lines are merged by summing weights.

use std::fmt::Write as _;

use super::{DiGraph, GraphBuilder};
use crate::error::{ParseError, ParseErrorKind};
use crate::fmt::g17;

const NODES_HEADER: &str = "NODES:";
const EDGES_HEADER: &str = "EDGES:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Whitespace,
    Comma,
}

impl Delimiter {
    fn split(self, line: &str) -> Vec<&str> {
        match self {
            Delimiter::Whitespace => line.split_whitespace().collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
        }
    }

    fn separator(self) -> &'static str {
        match self {
            Delimiter::Whitespace => " ",
            Delimiter::Comma => ",",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    pub delimiter: Delimiter,
    pub default_weight: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: Delimiter::Whitespace,
            default_weight: 1.0,
        }
    }
}

pub fn parse_edge_list(text: &str, options: &IngestOptions) -> Result<DiGraph, ParseError> {
    let mut b = GraphBuilder::new();
    let mut in_nodes = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |kind| ParseError {
            line: line_no,
            kind,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == NODES_HEADER {
            in_nodes = true;
            continue;
        }
        if line == EDGES_HEADER {
            in_nodes = false;
            continue;
        }
        let fields = options.delimiter.split(line);
        if in_nodes {
            for label in fields.into_iter().filter(|f| !f.is_empty()) {
                b.add_node(label);
            }
            continue;
        }
        let weight = match fields.as_slice() {
            [_, _] => options.default_weight,
            [_, _, w] => w
                .parse::<f64>()
                .map_err(|_| err(ParseErrorKind::InvalidWeight((*w).to_owned())))?,
            other => return Err(err(ParseErrorKind::FieldCount(other.len()))),
        };
        if fields[..2].iter().any(|f| f.is_empty()) {
            return Err(err(ParseErrorKind::FieldCount(fields.len())));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(err(ParseErrorKind::NonPositiveWeight(weight)));
        }
        b.add_edge(fields[0], fields[1], weight)
            .expect("weight validated above");
    }
    if b.node_count() == 0 {
        return Err(ParseError {
            line: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    Ok(b.build())
}

/// Deterministic serialization: every label in index order under `NODES:`,
/// then edges sorted by (source index, target index) with `%.17g` weights.
pub fn write_edge_list(g: &DiGraph, delimiter: Delimiter) -> String {
    let sep = delimiter.separator();
    let mut out = String::new();
    out.push_str(NODES_HEADER);
    out.push('\n');
    for label in g.labels() {
        out.push_str(label);
        out.push('\n');
    }
    out.push_str(EDGES_HEADER);
    out.push('\n');
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "{}{sep}{}{sep}{}", g.label(u), g.label(v), g17(w));
    }
    out
}
