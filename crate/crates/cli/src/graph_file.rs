//! Provenance graph files.
//!
//! Line format (any extension other than `.json`):
//!
//! ```text
//! # comment
//! node <id> <artifact|agent|process> [label...]
//! edge <relation> <source-id> <target-id>
//! ```
//!
//! Fields are separated by runs of spaces or tabs. The label is the rest of
//! the line with surrounding whitespace removed and defaults to the id.
//!
//! JSON mirror (`.json`):
//!
//! ```json
//! {"format": "pbcap/1", "kind": "provenance-graph",
//!  "nodes": [{"id": "t", "kind": "artifact", "label": "Test"}],
//!  "edges": [{"relation": "RecordedBy", "source": "t", "target": "n"}]}
//! ```

use std::fs;
use std::path::Path;

use pbcap_core::provenance::{NodeKind, ProvenanceEdge, ProvenanceNode};
use pbcap_core::ProvenanceGraph;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::formats::FORMAT_VERSION;

pub const KIND_GRAPH: &str = "provenance-graph";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub format: String,
    pub kind: String,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub relation: String,
    pub source: String,
    pub target: String,
}

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

/// Splits off the first whitespace-delimited field, returning it with its
/// 0-based byte offset in `line`.
fn next_field(line: &str, from: usize) -> Option<(&str, usize, usize)> {
    let rest = &line[from..];
    let start = from + (rest.len() - rest.trim_start().len());
    if start >= line.len() {
        return None;
    }
    let end = line[start..].find(char::is_whitespace).map_or(line.len(), |i| start + i);
    Some((&line[start..end], start, end))
}

pub fn parse_text(path: &Path, text: &str) -> Result<ProvenanceGraph> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end();
        let Some((keyword, kcol, kend)) = next_field(line, 0) else { continue };
        if keyword.starts_with('#') {
            continue;
        }
        match keyword {
            "node" => {
                let (id, _, e1) = next_field(line, kend).ok_or_else(|| parse_err(path, lineno, line.len() + 1, "node: missing id"))?;
                let (kind, kc, e2) =
                    next_field(line, e1).ok_or_else(|| parse_err(path, lineno, line.len() + 1, "node: missing kind"))?;
                let kind: NodeKind = kind.parse().map_err(|e: pbcap_core::Error| parse_err(path, lineno, kc + 1, e.to_string()))?;
                let label = line[e2..].trim();
                let label = if label.is_empty() { id } else { label };
                nodes.push(ProvenanceNode::new(id, kind, label));
            }
            "edge" => {
                let mut fields = Vec::with_capacity(3);
                let mut at = kend;
                for what in ["relation", "source", "target"] {
                    let (f, _, e) = next_field(line, at)
                        .ok_or_else(|| parse_err(path, lineno, line.len() + 1, format!("edge: missing {what}")))?;
                    fields.push(f);
                    at = e;
                }
                if let Some((extra, c, _)) = next_field(line, at) {
                    return Err(parse_err(path, lineno, c + 1, format!("edge: unexpected `{extra}`")));
                }
                edges.push(ProvenanceEdge::new(fields[0], fields[1], fields[2]));
            }
            other => return Err(parse_err(path, lineno, kcol + 1, format!("unknown record `{other}`"))),
        }
    }
    ProvenanceGraph::new(nodes, edges).map_err(|e| parse_err(path, 0, 0, e.to_string()))
}

pub fn parse_json(path: &Path, text: &str) -> Result<ProvenanceGraph> {
    let f: GraphFile = serde_json::from_str(text)
        .map_err(|e| parse_err(path, e.line(), e.column(), e.to_string()))?;
    if f.format != FORMAT_VERSION || f.kind != KIND_GRAPH {
        return Err(parse_err(path, 1, 1, format!("expected format `{FORMAT_VERSION}` and kind `{KIND_GRAPH}`")));
    }
    let nodes = f
        .nodes
        .into_iter()
        .map(|n| {
            let kind: NodeKind = n.kind.parse().map_err(|e: pbcap_core::Error| parse_err(path, 0, 0, e.to_string()))?;
            let label = n.label.unwrap_or_else(|| n.id.clone());
            Ok(ProvenanceNode::new(n.id, kind, label))
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = f.edges.into_iter().map(|e| ProvenanceEdge::new(e.relation, e.source, e.target)).collect();
    ProvenanceGraph::new(nodes, edges).map_err(|e| parse_err(path, 0, 0, e.to_string()))
}

pub fn load_graph(path: &Path) -> Result<ProvenanceGraph> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        parse_json(path, &text)
    } else {
        parse_text(path, &text)
    }
}
