//! GraphML and JSON adjacency serialization of tax graphs.
//!
//! Rates are written as exact decimal percent strings. Directed arcs also
//! carry their sanctioned weight (`rate + 0.000001`) and set
//! `sanction_included`; undirected edges carry the bare rate.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{TaxGraph, UndirectedTaxGraph, Weight};
use crate::rate::{IncomeType, Rate};
use crate::registry::JurisdictionRegistry;

pub const ADJACENCY_FORMAT: &str = "conduit-adjacency/1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("registry has {registry} codes but graph has {graph} vertices")]
    SizeMismatch { registry: usize, graph: usize },
    #[error("unsupported adjacency format `{0}`")]
    Format(String),
    #[error("unknown node code `{0}`")]
    UnknownNode(String),
    #[error("edge {source_code}->{target}: weight {weight} is not rate {rate} plus the sanction")]
    InconsistentWeight { source_code: String, target: String, rate: Rate, weight: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyNode {
    pub id: usize,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyEdge {
    pub source: String,
    pub target: String,
    pub rate: Rate,
    pub weight: String,
}

/// On-disk JSON adjacency document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyDoc {
    pub format: String,
    pub directed: bool,
    pub income: IncomeType,
    pub threshold: Option<Rate>,
    pub sanction_included: bool,
    pub nodes: Vec<AdjacencyNode>,
    pub edges: Vec<AdjacencyEdge>,
}

/// A graph read back from a JSON adjacency document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImportedGraph {
    Directed(TaxGraph),
    Undirected(UndirectedTaxGraph),
}

fn check_size(registry: &JurisdictionRegistry, n: usize) -> Result<(), ExportError> {
    if registry.len() == n {
        Ok(())
    } else {
        Err(ExportError::SizeMismatch { registry: registry.len(), graph: n })
    }
}

fn nodes(registry: &JurisdictionRegistry) -> Vec<AdjacencyNode> {
    registry.codes().enumerate().map(|(id, code)| AdjacencyNode { id, code: code.to_string() }).collect()
}

pub fn directed_adjacency(graph: &TaxGraph, registry: &JurisdictionRegistry) -> Result<AdjacencyDoc, ExportError> {
    check_size(registry, graph.n())?;
    Ok(AdjacencyDoc {
        format: ADJACENCY_FORMAT.into(),
        directed: true,
        income: graph.income(),
        threshold: graph.threshold(),
        sanction_included: true,
        nodes: nodes(registry),
        edges: graph
            .arcs()
            .map(|(i, j, w)| AdjacencyEdge {
                source: registry.code(i).into(),
                target: registry.code(j).into(),
                rate: w.arc_rate(),
                weight: w.to_string(),
            })
            .collect(),
    })
}

pub fn undirected_adjacency(
    graph: &UndirectedTaxGraph,
    registry: &JurisdictionRegistry,
) -> Result<AdjacencyDoc, ExportError> {
    check_size(registry, graph.n())?;
    Ok(AdjacencyDoc {
        format: ADJACENCY_FORMAT.into(),
        directed: false,
        income: graph.income(),
        threshold: graph.threshold(),
        sanction_included: false,
        nodes: nodes(registry),
        edges: graph
            .edges()
            .map(|(i, j, r)| AdjacencyEdge {
                source: registry.code(i).into(),
                target: registry.code(j).into(),
                rate: r,
                weight: r.to_string(),
            })
            .collect(),
    })
}

pub fn write_json_adjacency<W: Write>(doc: &AdjacencyDoc, mut writer: W) -> Result<(), ExportError> {
    serde_json::to_writer_pretty(&mut writer, doc)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Parses a JSON adjacency document back into a graph.
pub fn read_json_adjacency<R: Read>(reader: R) -> Result<(ImportedGraph, Vec<String>), ExportError> {
    let doc: AdjacencyDoc = serde_json::from_reader(reader)?;
    if doc.format != ADJACENCY_FORMAT {
        return Err(ExportError::Format(doc.format));
    }
    let codes: Vec<String> = doc.nodes.iter().map(|n| n.code.clone()).collect();
    let id_of = |code: &str| codes.iter().position(|c| c == code).ok_or_else(|| ExportError::UnknownNode(code.into()));
    let mut triples = Vec::with_capacity(doc.edges.len());
    for e in &doc.edges {
        let expected =
            if doc.sanction_included { Weight::for_rate(e.rate).to_string() } else { e.rate.to_string() };
        if expected != e.weight {
            return Err(ExportError::InconsistentWeight {
                source_code: e.source.clone(),
                target: e.target.clone(),
                rate: e.rate,
                weight: e.weight.clone(),
            });
        }
        triples.push((id_of(&e.source)?, id_of(&e.target)?, e.rate));
    }
    let n = codes.len();
    let graph = if doc.directed {
        let g = TaxGraph::from_arcs(n, doc.income, triples).map_err(|e| ExportError::Format(e.to_string()))?;
        ImportedGraph::Directed(g.with_threshold(doc.threshold))
    } else {
        let g = UndirectedTaxGraph::from_edges(n, doc.income, triples).map_err(|e| ExportError::Format(e.to_string()))?;
        ImportedGraph::Undirected(g.with_threshold(doc.threshold))
    };
    Ok((graph, codes))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders an adjacency document as GraphML.
pub fn graphml_string(doc: &AdjacencyDoc, registry: &JurisdictionRegistry) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"code\" for=\"node\" attr.name=\"code\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"rate\" for=\"edge\" attr.name=\"rate\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"string\"/>\n");
    s.push_str(
        "  <key id=\"sanction_included\" for=\"edge\" attr.name=\"sanction_included\" attr.type=\"boolean\"/>\n",
    );
    let threshold = doc.threshold.map_or_else(|| "none".to_string(), |t| t.to_string());
    let _ = writeln!(
        s,
        "  <graph id=\"{}-t{}\" edgedefault=\"{}\">",
        doc.income,
        xml_escape(&threshold),
        if doc.directed { "directed" } else { "undirected" }
    );
    for node in &doc.nodes {
        let _ = writeln!(
            s,
            "    <node id=\"n{}\"><data key=\"code\">{}</data><data key=\"name\">{}</data></node>",
            node.id,
            xml_escape(&node.code),
            xml_escape(registry.name(node.id))
        );
    }
    for (k, e) in doc.edges.iter().enumerate() {
        let src = registry.id(&e.source).expect("edge codes come from the registry");
        let dst = registry.id(&e.target).expect("edge codes come from the registry");
        let _ = writeln!(
            s,
            "    <edge id=\"e{k}\" source=\"n{src}\" target=\"n{dst}\"><data key=\"rate\">{}</data><data key=\"weight\">{}</data><data key=\"sanction_included\">{}</data></edge>",
            e.rate, e.weight, doc.sanction_included
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}
