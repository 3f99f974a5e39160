//! Semantic graphs into the unified format, and top-category selection.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::io::ucca_json::{terminal_id, UccaGraph};
use crate::model::{
    CategorySet, Edge, Node, NodeId, Terminal, UnifiedDag, ViolationKind, Yield, YieldTable,
};

/// Category marking punctuation units.
pub const PUNCT_CATEGORY: &str = "U";

#[derive(Debug, Error, Clone, Eq, PartialEq)]
pub enum NormalizeError {
    #[error("sentence {sentence}: unreachable by primary edges: {node}")]
    Unreachable { sentence: String, node: String },
    #[error("sentence {sentence}: {violation}")]
    Structure { sentence: String, violation: String },
}

/// Converts a graph, dropping remote edges.
pub fn normalize(graph: &UccaGraph) -> Result<UnifiedDag, NormalizeError> {
    to_unified(graph, false)
}

/// Converts a graph into the unified format. Every terminal is wrapped in a
/// pre-terminal with the terminal's id; non-terminals and primary edges are
/// kept as they are. Remote edges are kept only when `keep_remote` is set.
pub fn to_unified(graph: &UccaGraph, keep_remote: bool) -> Result<UnifiedDag, NormalizeError> {
    let mut nodes: Vec<Node> = graph
        .nodes
        .iter()
        .map(|id| Node::non_terminal(id.as_str()))
        .collect();
    nodes.extend((1..=graph.tokens.len()).map(|k| Node::pre_terminal(terminal_id(k), vec![k])));
    let edges: Vec<Edge> = graph
        .edges
        .iter()
        .filter(|e| keep_remote || !e.remote)
        .map(|e| Edge {
            parent: NodeId::new(e.parent.as_str()),
            child: NodeId::new(e.child.as_str()),
            label: e.categories.clone(),
            remote: e.remote,
        })
        .collect();
    let mut dag = UnifiedDag {
        sentence_id: graph.sentence_id.clone(),
        terminals: graph
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| Terminal {
                index: i + 1,
                form: t.text.clone(),
                is_punct: t.punct,
            })
            .collect(),
        nodes,
        edges,
        root: NodeId::new(graph.root.as_str()),
    };

    if let Some(v) = dag.validate().into_iter().next() {
        return Err(match v.kind {
            ViolationKind::Unreachable => NormalizeError::Unreachable {
                sentence: dag.sentence_id.clone(),
                node: v.subject,
            },
            _ => NormalizeError::Structure {
                sentence: dag.sentence_id.clone(),
                violation: v.to_string(),
            },
        });
    }

    // everything under a U edge counts as punctuation
    let mut punct = HashSet::new();
    for e in dag.primary_edges() {
        if e.label.contains(PUNCT_CATEGORY) {
            punct.extend(dag.yield_of(&e.child, false).expect("validated"));
        }
    }
    for t in &mut dag.terminals {
        t.is_punct |= punct.contains(&t.index);
    }
    Ok(dag)
}

/// Maps every distinct non-empty punctuation-free yield to the label of the
/// topmost node carrying it. The whole-sentence yield maps to the `ROOT`
/// sentinel.
pub type TopCategoryIndex = BTreeMap<Yield, CategorySet>;

pub fn top_category_index(dag: &UnifiedDag) -> TopCategoryIndex {
    let table = YieldTable::new(dag, &dag.punct_terminals());
    let mut best: BTreeMap<&Yield, (usize, CategorySet)> = BTreeMap::new();
    for (i, y) in table.yields.iter().enumerate() {
        let Some(depth) = table.depth[i] else {
            continue;
        };
        if y.is_empty() {
            continue;
        }
        let label = table.label[i].clone().unwrap_or_else(CategorySet::root);
        match best.get(y) {
            Some((d, _)) if *d <= depth => {}
            _ => {
                best.insert(y, (depth, label));
            }
        }
    }
    let whole = dag.terminal_indices(true);
    best.into_iter()
        .map(|(y, (_, label))| {
            let label = if *y == whole {
                CategorySet::root()
            } else {
                label
            };
            (y.clone(), label)
        })
        .collect()
}
