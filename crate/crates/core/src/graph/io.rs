//! Graph files and Laplacian CSV output.
//!
//! JSON graphs look like `{"n": 3, "edges": [[0, 1, 2.5], [1, 2, 1.0]]}`. An
//! optional `"oneway_edges"` array marks the document as an explicit
//! symmetrizable + one-way pair: `edges` then describes the symmetrizable part
//! and `oneway_edges` the one-way part. Edge-list CSV files carry a
//! `src,dst,w` header.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{canonical_split, laplacian_of, Edge, LaplacianMatrix, OneWaySplit, WeightedDigraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oneway_edges: Option<Vec<(usize, usize, f64)>>,
}

/// A loaded graph file: either one digraph or an explicit two-part model.
#[derive(Debug, Clone)]
pub enum GraphInput {
    Single(WeightedDigraph),
    Split { sym: WeightedDigraph, oneway: WeightedDigraph },
}

impl GraphInput {
    /// The full Laplacian (`lap0 + lap_oneway` for split inputs).
    pub fn laplacian(&self) -> LaplacianMatrix {
        match self {
            GraphInput::Single(g) => laplacian_of(g),
            GraphInput::Split { sym, oneway } => {
                let m = laplacian_of(sym).into_matrix() + laplacian_of(oneway).into_matrix();
                LaplacianMatrix::from_matrix(m).expect("sum of Laplacians is a Laplacian")
            }
        }
    }

    /// The explicit parts, or the symmetric-min split of a single graph.
    pub fn split(&self) -> OneWaySplit {
        match self {
            GraphInput::Single(g) => canonical_split(&laplacian_of(g)),
            GraphInput::Split { sym, oneway } => {
                OneWaySplit { lap_sym_part: laplacian_of(sym), lap_oneway: laplacian_of(oneway) }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            GraphInput::Single(g) => g.node_count(),
            GraphInput::Split { sym, .. } => sym.node_count(),
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self, GraphInput::Split { .. })
    }
}

impl GraphDocument {
    pub fn into_input(self) -> Result<GraphInput> {
        let sym = WeightedDigraph::from_triples(self.n, &self.edges)?;
        match self.oneway_edges {
            None => Ok(GraphInput::Single(sym)),
            Some(ow) => {
                let oneway = WeightedDigraph::from_triples(self.n, &ow)?;
                for e in oneway.edges() {
                    if oneway.edges().iter().any(|f| f.src == e.dst && f.dst == e.src) {
                        return Err(Error::InvalidGraph(format!(
                            "one-way part links {} and {} in both directions",
                            e.src, e.dst
                        )));
                    }
                }
                Ok(GraphInput::Split { sym, oneway })
            }
        }
    }

    pub fn from_digraph(g: &WeightedDigraph) -> Self {
        Self {
            n: g.node_count(),
            edges: g.edges().iter().map(|e| (e.src, e.dst, e.weight)).collect(),
            oneway_edges: None,
        }
    }
}

pub fn parse_graph_json(text: &str) -> Result<GraphInput> {
    let doc: GraphDocument = serde_json::from_str(text)?;
    doc.into_input()
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    src: usize,
    dst: usize,
    w: f64,
}

/// Reads an edge list with header `src,dst,w`. The node count is one more
/// than the largest index unless `n` is given.
pub fn read_edge_csv<R: Read>(reader: R, n: Option<usize>) -> Result<WeightedDigraph> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut edges = Vec::new();
    for row in rdr.deserialize() {
        let row: EdgeRow = row?;
        edges.push(Edge { src: row.src, dst: row.dst, weight: row.w });
    }
    if edges.is_empty() && n.is_none() {
        return Err(Error::EmptyInput);
    }
    let inferred = edges.iter().map(|e| e.src.max(e.dst) + 1).max().unwrap_or(0);
    WeightedDigraph::new(n.unwrap_or(inferred), edges)
}

/// Loads `.json` graph documents or `.csv` edge lists, by extension.
pub fn load_graph(path: &Path) -> Result<GraphInput> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(GraphInput::Single(read_edge_csv(text.as_bytes(), None)?)),
        _ => parse_graph_json(&text),
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Dense row-major CSV, no header.
pub fn write_laplacian_csv<W: Write>(lap: &LaplacianMatrix, mut out: W) -> Result<()> {
    for row in lap.matrix().row_iter() {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_laplacian_csv<R: Read>(reader: R) -> Result<LaplacianMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse { line, message: e.to_string() }))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    LaplacianMatrix::from_rows(&rows)
}
