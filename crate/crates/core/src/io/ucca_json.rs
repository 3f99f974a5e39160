//! JSON-lines reader for semantic DAGs.
//!
//! Each line holds one sentence:
//!
//! ```json
//! {"id": "s1", "tokens": [{"text": "Hi", "punct": false}],
//!  "nodes": [{"id": "root"}],
//!  "edges": [{"parent": "root", "child": "t1", "categories": ["H"], "remote": false}]}
//! ```
//!
//! Terminals are not listed under `nodes`; edges reference them as `t1`,
//! `t2`, ... in token order. The root is the only node without an incoming
//! primary edge.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CategoryError, CategorySet};

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct UccaToken {
    pub text: String,
    #[serde(default)]
    pub punct: bool,
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct UccaEdge {
    pub parent: String,
    pub child: String,
    pub categories: CategorySet,
    pub remote: bool,
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct UccaGraph {
    pub sentence_id: String,
    pub tokens: Vec<UccaToken>,
    /// Non-terminal node ids, in file order.
    pub nodes: Vec<String>,
    pub edges: Vec<UccaEdge>,
    pub root: String,
}

/// Id under which the `index`-th (1-based) token is referenced.
pub fn terminal_id(index: usize) -> String {
    format!("t{index}")
}

impl UccaGraph {
    /// 1-based token index if `id` names a terminal of this graph.
    pub fn terminal_index(&self, id: &str) -> Option<usize> {
        let n: usize = id.strip_prefix('t')?.parse().ok()?;
        (n >= 1 && n <= self.tokens.len() && terminal_id(n) == id).then_some(n)
    }
}

#[derive(Debug, Error)]
pub enum UccaError {
    #[error("line {line}: malformed JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("sentence {sentence}: {message}")]
    Structure { sentence: String, message: String },
}

impl UccaError {
    fn structure(sentence: &str, message: impl Into<String>) -> Self {
        UccaError::Structure {
            sentence: sentence.to_owned(),
            message: message.into(),
        }
    }
}

#[derive(Deserialize)]
struct RawGraph {
    id: String,
    tokens: Vec<UccaToken>,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
struct RawNode {
    id: String,
}

#[derive(Deserialize)]
struct RawEdge {
    parent: String,
    child: String,
    categories: Vec<String>,
    #[serde(default)]
    remote: bool,
}

/// Parses a JSON-lines document, one graph per non-blank line.
pub fn parse_ucca_json(text: &str) -> Result<Vec<UccaGraph>, UccaError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawGraph = serde_json::from_str(line).map_err(|source| UccaError::Json {
            line: i + 1,
            source,
        })?;
        out.push(build(raw)?);
    }
    Ok(out)
}

fn build(raw: RawGraph) -> Result<UccaGraph, UccaError> {
    let sid = raw.id.as_str();
    let n_tokens = raw.tokens.len();
    let terminal_ids: HashSet<String> = (1..=n_tokens).map(terminal_id).collect();

    let mut nodes = Vec::with_capacity(raw.nodes.len());
    let mut seen = HashSet::new();
    for node in raw.nodes {
        // terminals may be listed explicitly; they are implicit anyway
        if terminal_ids.contains(&node.id) {
            continue;
        }
        if !seen.insert(node.id.clone()) {
            return Err(UccaError::structure(
                sid,
                format!("duplicate node id: {}", node.id),
            ));
        }
        nodes.push(node.id);
    }
    if let Some(t) = raw.tokens.iter().position(|t| t.text.is_empty()) {
        return Err(UccaError::structure(
            sid,
            format!("empty token text: t{}", t + 1),
        ));
    }

    let known = |id: &str| seen.contains(id) || terminal_ids.contains(id);
    let mut edges = Vec::with_capacity(raw.edges.len());
    let mut primary_parent: HashMap<String, String> = HashMap::new();
    for e in raw.edges {
        for end in [&e.parent, &e.child] {
            if !known(end) {
                return Err(UccaError::structure(
                    sid,
                    format!("dangling node reference: {end}"),
                ));
            }
        }
        if terminal_ids.contains(&e.parent) {
            return Err(UccaError::structure(
                sid,
                format!("terminal {} cannot have children", e.parent),
            ));
        }
        if e.parent == e.child {
            return Err(UccaError::structure(
                sid,
                format!("self loop: {}", e.parent),
            ));
        }
        let categories = CategorySet::new(e.categories).map_err(|err: CategoryError| {
            UccaError::structure(sid, format!("edge {} -> {}: {err}", e.parent, e.child))
        })?;
        if !e.remote
            && primary_parent
                .insert(e.child.clone(), e.parent.clone())
                .is_some()
        {
            return Err(UccaError::structure(
                sid,
                format!("multiple primary parents: {}", e.child),
            ));
        }
        edges.push(UccaEdge {
            parent: e.parent,
            child: e.child,
            categories,
            remote: e.remote,
        });
    }

    let mut roots: Vec<&String> = nodes
        .iter()
        .filter(|id| !primary_parent.contains_key(*id))
        .collect();
    let orphans: Vec<usize> = (1..=n_tokens)
        .filter(|&k| !primary_parent.contains_key(&terminal_id(k)))
        .collect();
    if !orphans.is_empty() && !(nodes.is_empty() && n_tokens == 1) {
        return Err(UccaError::structure(
            sid,
            format!("terminal t{} has no primary parent", orphans[0]),
        ));
    }
    let root = match roots.len() {
        1 => roots.pop().unwrap().clone(),
        0 if nodes.is_empty() && n_tokens == 1 => terminal_id(1),
        0 => return Err(UccaError::structure(sid, "primary cycle: no root")),
        _ => {
            let names: Vec<&str> = roots.iter().map(|s| s.as_str()).collect();
            return Err(UccaError::structure(
                sid,
                format!("multiple roots: {}", names.join(", ")),
            ));
        }
    };

    // With a unique parent per node, any node that does not reach the root
    // by following parents sits on a primary cycle.
    for start in primary_parent.keys() {
        let mut cur = start.as_str();
        let mut steps = 0;
        while let Some(p) = primary_parent.get(cur) {
            cur = p;
            steps += 1;
            if steps > primary_parent.len() {
                return Err(UccaError::structure(
                    sid,
                    format!("primary cycle through {start}"),
                ));
            }
        }
        if cur != root {
            return Err(UccaError::structure(
                sid,
                format!("primary cycle through {start}"),
            ));
        }
    }

    Ok(UccaGraph {
        sentence_id: raw.id,
        tokens: raw.tokens,
        nodes,
        edges,
        root,
    })
}

#[derive(Serialize)]
struct OutEdge<'a> {
    parent: &'a str,
    child: &'a str,
    categories: &'a CategorySet,
    remote: bool,
}

#[derive(Serialize)]
struct OutNode<'a> {
    id: &'a str,
}

#[derive(Serialize)]
struct OutGraph<'a> {
    id: &'a str,
    tokens: &'a [UccaToken],
    nodes: Vec<OutNode<'a>>,
    edges: Vec<OutEdge<'a>>,
}

/// Serializes graphs back to the JSON-lines format read by
/// [`parse_ucca_json`].
pub fn write_ucca_json(graphs: &[UccaGraph]) -> String {
    let mut out = String::new();
    for g in graphs {
        let line = OutGraph {
            id: &g.sentence_id,
            tokens: &g.tokens,
            nodes: g.nodes.iter().map(|id| OutNode { id }).collect(),
            edges: g
                .edges
                .iter()
                .map(|e| OutEdge {
                    parent: &e.parent,
                    child: &e.child,
                    categories: &e.categories,
                    remote: e.remote,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("graph serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRADUATION: &str = r#"{"id":"fig1","tokens":[{"text":"After","punct":false},{"text":"graduation","punct":false},{"text":",","punct":true},{"text":"John","punct":false},{"text":"moved","punct":false},{"text":"to","punct":false},{"text":"Paris","punct":false}],"nodes":[{"id":"root"},{"id":"s1"},{"id":"s2"},{"id":"pp"}],"edges":[{"parent":"root","child":"t1","categories":["L"],"remote":false},{"parent":"root","child":"s1","categories":["H"],"remote":false},{"parent":"root","child":"t3","categories":["U"],"remote":false},{"parent":"root","child":"s2","categories":["H"],"remote":false},{"parent":"s1","child":"t2","categories":["P"],"remote":false},{"parent":"s2","child":"t4","categories":["A"],"remote":false},{"parent":"s2","child":"t5","categories":["P"],"remote":false},{"parent":"s2","child":"pp","categories":["A"],"remote":false},{"parent":"pp","child":"t6","categories":["R"],"remote":false},{"parent":"pp","child":"t7","categories":["C"],"remote":false},{"parent":"s1","child":"t4","categories":["A"],"remote":true}]}"#;

    #[test]
    fn parses_graph_with_remote_edge() {
        let graphs = parse_ucca_json(GRADUATION).unwrap();
        assert_eq!(graphs.len(), 1);
        let g = &graphs[0];
        assert_eq!(g.root, "root");
        assert_eq!(g.edges.len(), 11);
        let remote: Vec<_> = g.edges.iter().filter(|e| e.remote).collect();
        assert_eq!(remote.len(), 1);
        assert_eq!(
            (remote[0].parent.as_str(), remote[0].child.as_str()),
            ("s1", "t4")
        );
        assert_eq!(remote[0].categories.to_string(), "A");
        assert_eq!(g.terminal_index("t7"), Some(7));
        assert_eq!(g.terminal_index("t8"), None);
        assert_eq!(g.terminal_index("t07"), None);
    }

    #[test]
    fn single_token_graph() {
        let line = r#"{"id":"x","tokens":[{"text":"Hi","punct":false}],"nodes":[{"id":"r"}],"edges":[{"parent":"r","child":"t1","categories":["H"],"remote":false}]}"#;
        let g = &parse_ucca_json(line).unwrap()[0];
        assert_eq!(g.root, "r");
        assert_eq!(g.edges[0].categories.to_string(), "H");
    }

    #[test]
    fn multiple_primary_parents() {
        let line = r#"{"id":"x","tokens":[{"text":"a"}],"nodes":[{"id":"r"},{"id":"7"}],"edges":[{"parent":"r","child":"7","categories":["H"]},{"parent":"r","child":"7","categories":["A"],"remote":false},{"parent":"7","child":"t1","categories":["P"]}]}"#;
        let err = parse_ucca_json(line).unwrap_err();
        assert_eq!(err.to_string(), "sentence x: multiple primary parents: 7");
    }

    #[test]
    fn structural_errors() {
        let dangling = r#"{"id":"d","tokens":[{"text":"a"}],"nodes":[{"id":"r"}],"edges":[{"parent":"r","child":"zz","categories":["H"]}]}"#;
        assert!(parse_ucca_json(dangling)
            .unwrap_err()
            .to_string()
            .contains("dangling node reference: zz"));
        let dup =
            r#"{"id":"d","tokens":[{"text":"a"}],"nodes":[{"id":"r"},{"id":"r"}],"edges":[]}"#;
        assert!(parse_ucca_json(dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate node id: r"));
        let cycle = r#"{"id":"c","tokens":[{"text":"a"}],"nodes":[{"id":"r"},{"id":"x"},{"id":"y"}],"edges":[{"parent":"r","child":"t1","categories":["H"]},{"parent":"x","child":"y","categories":["A"]},{"parent":"y","child":"x","categories":["A"]}]}"#;
        assert!(parse_ucca_json(cycle)
            .unwrap_err()
            .to_string()
            .contains("primary cycle"));
        let empty_cats = r#"{"id":"e","tokens":[{"text":"a"}],"nodes":[{"id":"r"}],"edges":[{"parent":"r","child":"t1","categories":[]}]}"#;
        assert!(parse_ucca_json(empty_cats).is_err());
        assert!(matches!(
            parse_ucca_json("{not json").unwrap_err(),
            UccaError::Json { line: 1, .. }
        ));
    }

    #[test]
    fn write_then_parse() {
        let graphs = parse_ucca_json(GRADUATION).unwrap();
        assert_eq!(parse_ucca_json(&write_ucca_json(&graphs)).unwrap(), graphs);
    }
}
