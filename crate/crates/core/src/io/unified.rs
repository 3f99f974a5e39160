//! JSON-lines serialization of [`UnifiedDag`]s.
//!
//! One object per sentence:
//! `{"id", "tokens": [{"text", "punct"}], "nodes": [{"id", "kind", "terminals"?}],
//!   "edges": [{"parent", "child", "categories", "remote"}], "root"}`.
//! `kind` is `"preterminal"` or `"nonterminal"`; pre-terminals list the
//! 1-based indices of the tokens they cover.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CategorySet, Edge, Node, NodeId, NodeKind, Terminal, UnifiedDag, Violation};

#[derive(Debug, Error)]
pub enum UnifiedError {
    #[error("sentence {sentence}: invalid dag: {}", join(.violations))]
    Invalid {
        sentence: String,
        violations: Vec<Violation>,
    },
    #[error("line {line}: malformed JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: pre-terminal {id} has no terminals")]
    MissingTerminals { line: usize, id: String },
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Serialize, Deserialize)]
struct JsonToken {
    text: String,
    punct: bool,
}

#[derive(Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum JsonKind {
    Preterminal,
    Nonterminal,
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: NodeId,
    kind: JsonKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terminals: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    parent: NodeId,
    child: NodeId,
    categories: CategorySet,
    remote: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonDag {
    id: String,
    tokens: Vec<JsonToken>,
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
    root: NodeId,
}

/// Serializes one dag as a single JSON line (without the newline).
pub fn dag_to_json_line(dag: &UnifiedDag) -> Result<String, UnifiedError> {
    let violations = dag.validate();
    if !violations.is_empty() {
        return Err(UnifiedError::Invalid {
            sentence: dag.sentence_id.clone(),
            violations,
        });
    }
    let json = JsonDag {
        id: dag.sentence_id.clone(),
        tokens: dag
            .terminals
            .iter()
            .map(|t| JsonToken {
                text: t.form.clone(),
                punct: t.is_punct,
            })
            .collect(),
        nodes: dag
            .nodes
            .iter()
            .map(|n| match &n.kind {
                NodeKind::PreTerminal(ts) => JsonNode {
                    id: n.id.clone(),
                    kind: JsonKind::Preterminal,
                    terminals: Some(ts.clone()),
                },
                NodeKind::NonTerminal => JsonNode {
                    id: n.id.clone(),
                    kind: JsonKind::Nonterminal,
                    terminals: None,
                },
            })
            .collect(),
        edges: dag
            .edges
            .iter()
            .map(|e| JsonEdge {
                parent: e.parent.clone(),
                child: e.child.clone(),
                categories: e.label.clone(),
                remote: e.remote,
            })
            .collect(),
        root: dag.root.clone(),
    };
    Ok(serde_json::to_string(&json).expect("dag serializes"))
}

/// Serializes a corpus, one line per dag. Refuses any dag that fails
/// validation.
pub fn write_unified(dags: &[UnifiedDag]) -> Result<String, UnifiedError> {
    let mut out = String::new();
    for dag in dags {
        out.push_str(&dag_to_json_line(dag)?);
        out.push('\n');
    }
    Ok(out)
}

/// Reads a corpus written by [`write_unified`], validating each dag.
pub fn parse_unified(text: &str) -> Result<Vec<UnifiedDag>, UnifiedError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let json: JsonDag = serde_json::from_str(line).map_err(|source| UnifiedError::Json {
            line: line_no,
            source,
        })?;
        let mut nodes = Vec::with_capacity(json.nodes.len());
        for n in json.nodes {
            let kind = match n.kind {
                JsonKind::Nonterminal => NodeKind::NonTerminal,
                JsonKind::Preterminal => NodeKind::PreTerminal(n.terminals.ok_or_else(|| {
                    UnifiedError::MissingTerminals {
                        line: line_no,
                        id: n.id.to_string(),
                    }
                })?),
            };
            nodes.push(Node { id: n.id, kind });
        }
        let dag = UnifiedDag {
            sentence_id: json.id,
            terminals: json
                .tokens
                .into_iter()
                .enumerate()
                .map(|(i, t)| Terminal {
                    index: i + 1,
                    form: t.text,
                    is_punct: t.punct,
                })
                .collect(),
            nodes,
            edges: json
                .edges
                .into_iter()
                .map(|e| Edge {
                    parent: e.parent,
                    child: e.child,
                    label: e.categories,
                    remote: e.remote,
                })
                .collect(),
            root: json.root,
        };
        let violations = dag.validate();
        if !violations.is_empty() {
            return Err(UnifiedError::Invalid {
                sentence: dag.sentence_id,
                violations,
            });
        }
        out.push(dag);
    }
    Ok(out)
}
