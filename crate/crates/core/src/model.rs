//! The unified DAG shared by both annotation schemes.
//!
//! A [`UnifiedDag`] holds the tokens of one sentence as [`Terminal`]s, one
//! pre-terminal node per token (or per joined unanalyzable unit), non-terminal
//! nodes above them, and labeled edges. Primary edges form a tree; remote
//! edges add reentrancy and never contribute to terminal yields.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Set of 1-based terminal indices covered by a unit. Units may be
/// discontiguous, so this is a set and not a span.
pub type Yield = BTreeSet<usize>;

/// Label used for the whole-sentence yield in top-category indices.
pub const ROOT_LABEL: &str = "ROOT";

/// Label of the edge that connects a converted dependency head to its
/// non-terminal.
pub const HEAD_LABEL: &str = "head";

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    /// 1-based position within the sentence.
    pub index: usize,
    pub form: String,
    pub is_punct: bool,
}

#[derive(Debug, Error, Clone, Eq, PartialEq)]
pub enum CategoryError {
    #[error("empty category set")]
    Empty,
    #[error("empty category name")]
    EmptyName,
}

/// Non-empty set of edge categories, kept in lexicographic order.
///
/// A UD edge carries exactly one relation; UCCA edges may carry several
/// categories at once (e.g. `A|P`).
#[derive(Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash)]
pub struct CategorySet(BTreeSet<String>);

impl CategorySet {
    pub fn new<I, S>(categories: I) -> Result<Self, CategoryError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for cat in categories {
            let cat = cat.into();
            if cat.is_empty() {
                return Err(CategoryError::EmptyName);
            }
            set.insert(cat);
        }
        if set.is_empty() {
            return Err(CategoryError::Empty);
        }
        Ok(CategorySet(set))
    }

    /// Single-category set. Panics on an empty name.
    pub fn single(category: impl Into<String>) -> Self {
        CategorySet::new([category.into()]).expect("category name must be non-empty")
    }

    pub fn root() -> Self {
        CategorySet::single(ROOT_LABEL)
    }

    pub fn is_root(&self) -> bool {
        self.0.len() == 1 && self.contains(ROOT_LABEL)
    }

    pub fn contains(&self, category: &str) -> bool {
        self.0.contains(category)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The single member, if this set has exactly one.
    pub fn as_single(&self) -> Option<&str> {
        if self.0.len() == 1 {
            self.0.iter().next().map(String::as_str)
        } else {
            None
        }
    }
}

impl fmt::Display for CategorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, cat) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(cat)?;
        }
        Ok(())
    }
}

impl Serialize for CategorySet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CategorySet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let cats = Vec::<String>::deserialize(deserializer)?;
        CategorySet::new(cats).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub enum NodeKind {
    /// Wraps one or more terminals (more than one only for joined
    /// unanalyzable units).
    PreTerminal(Vec<usize>),
    NonTerminal,
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

impl Node {
    pub fn pre_terminal(id: impl Into<String>, terminals: Vec<usize>) -> Self {
        Node {
            id: NodeId::new(id),
            kind: NodeKind::PreTerminal(terminals),
        }
    }

    pub fn non_terminal(id: impl Into<String>) -> Self {
        Node {
            id: NodeId::new(id),
            kind: NodeKind::NonTerminal,
        }
    }

    pub fn covered_terminals(&self) -> &[usize] {
        match &self.kind {
            NodeKind::PreTerminal(ts) => ts,
            NodeKind::NonTerminal => &[],
        }
    }

    pub fn is_pre_terminal(&self) -> bool {
        matches!(self.kind, NodeKind::PreTerminal(_))
    }
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct Edge {
    pub parent: NodeId,
    pub child: NodeId,
    pub label: CategorySet,
    pub remote: bool,
}

impl Edge {
    pub fn primary(
        parent: impl Into<String>,
        child: impl Into<String>,
        label: CategorySet,
    ) -> Self {
        Edge {
            parent: NodeId::new(parent),
            child: NodeId::new(child),
            label,
            remote: false,
        }
    }
}

/// One sentence in the shared format. Node and edge order is significant:
/// the children of a node are ordered by the position of their edges.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct UnifiedDag {
    pub sentence_id: String,
    pub terminals: Vec<Terminal>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub root: NodeId,
}

#[derive(Debug, Error, Clone, Eq, PartialEq)]
pub enum LookupError {
    #[error("unknown node id: {0}")]
    UnknownNode(NodeId),
}

#[derive(Clone, Copy, Debug, Eq, PartialEq, Ord, PartialOrd, Hash)]
pub enum ViolationKind {
    DuplicateNodeId,
    DanglingEdge,
    SelfLoop,
    RootHasParent,
    MultiplePrimaryParents,
    PrimaryCycle,
    Cycle,
    Unreachable,
    DoubleCover,
    Uncovered,
    NonContiguousTerminals,
    EmptyForm,
    EmptyPreTerminal,
    PreTerminalWithChildren,
    UnknownRoot,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::DuplicateNodeId => "duplicate-node-id",
            ViolationKind::DanglingEdge => "dangling-edge",
            ViolationKind::SelfLoop => "self-loop",
            ViolationKind::RootHasParent => "root-has-parent",
            ViolationKind::MultiplePrimaryParents => "multiple-primary-parents",
            ViolationKind::PrimaryCycle => "primary-cycle",
            ViolationKind::Cycle => "cycle",
            ViolationKind::Unreachable => "unreachable",
            ViolationKind::DoubleCover => "double-cover",
            ViolationKind::Uncovered => "uncovered",
            ViolationKind::NonContiguousTerminals => "non-contiguous-terminals",
            ViolationKind::EmptyForm => "empty-form",
            ViolationKind::EmptyPreTerminal => "empty-pre-terminal",
            ViolationKind::PreTerminalWithChildren => "pre-terminal-with-children",
            ViolationKind::UnknownRoot => "unknown-root",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A broken structural invariant, naming the offending node, edge or
/// terminal.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.subject)
    }
}

impl UnifiedDag {
    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.terminals.iter().map(|t| t.form.as_str())
    }

    pub fn primary_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| !e.remote)
    }

    pub fn remote_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.remote)
    }

    /// Terminal indices marked as punctuation.
    pub fn punct_terminals(&self) -> HashSet<usize> {
        self.terminals
            .iter()
            .filter(|t| t.is_punct)
            .map(|t| t.index)
            .collect()
    }

    /// Indices of all terminals, optionally without punctuation.
    pub fn terminal_indices(&self, exclude_punct: bool) -> Yield {
        self.terminals
            .iter()
            .filter(|t| !(exclude_punct && t.is_punct))
            .map(|t| t.index)
            .collect()
    }

    /// Returns a copy of this dag without remote edges.
    pub fn without_remotes(&self) -> UnifiedDag {
        let mut dag = self.clone();
        dag.edges.retain(|e| !e.remote);
        dag
    }

    /// Terminal yield of `node` over primary edges.
    pub fn yield_of(&self, node: &NodeId, exclude_punct: bool) -> Result<Yield, LookupError> {
        let view = DagView::new(self);
        let idx = view
            .index_of(node)
            .ok_or_else(|| LookupError::UnknownNode(node.clone()))?;
        let punct = self.punct_terminals();
        let mut out = Yield::new();
        let mut stack = vec![idx];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            out.extend(
                self.nodes[n]
                    .covered_terminals()
                    .iter()
                    .filter(|t| !(exclude_punct && punct.contains(t))),
            );
            stack.extend(view.children[n].iter().map(|&(c, _)| c));
        }
        Ok(out)
    }

    /// Checks every structural invariant and reports the violations found.
    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }
}

/// Index-based adjacency over the primary edges of a dag. Node positions
/// follow `dag.nodes`; children keep edge order.
pub(crate) struct DagView<'a> {
    pub positions: HashMap<&'a NodeId, usize>,
    /// (child position, edge position) per node.
    pub children: Vec<Vec<(usize, usize)>>,
}

impl<'a> DagView<'a> {
    pub fn new(dag: &'a UnifiedDag) -> Self {
        let mut positions = HashMap::with_capacity(dag.nodes.len());
        for (i, n) in dag.nodes.iter().enumerate() {
            positions.entry(&n.id).or_insert(i);
        }
        let mut children = vec![Vec::new(); dag.nodes.len()];
        for (ei, e) in dag.edges.iter().enumerate() {
            if e.remote {
                continue;
            }
            if let (Some(&p), Some(&c)) = (positions.get(&e.parent), positions.get(&e.child)) {
                children[p].push((c, ei));
            }
        }
        DagView {
            positions,
            children,
        }
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.positions.get(id).copied()
    }

    /// Nodes reachable from `start` over primary edges, in pre-order.
    pub fn preorder(&self, start: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.children.len()];
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            out.push(n);
            for &(c, _) in self.children[n].iter().rev() {
                stack.push(c);
            }
        }
        out
    }
}

/// Per-node yields and root distances of a structurally valid dag.
pub struct YieldTable {
    /// Yield of every node, indexed like `dag.nodes`.
    pub yields: Vec<Yield>,
    /// Primary-edge distance from the root, `None` if unreachable.
    pub depth: Vec<Option<usize>>,
    /// Label of the incoming primary edge, `None` for the root.
    pub label: Vec<Option<CategorySet>>,
}

impl YieldTable {
    /// Computes all yields in one post-order pass. `punct` lists the
    /// terminals to leave out; pass an empty set to keep everything.
    pub fn new(dag: &UnifiedDag, punct: &HashSet<usize>) -> Self {
        let view = DagView::new(dag);
        let n = dag.nodes.len();
        let mut yields = vec![Yield::new(); n];
        let mut depth = vec![None; n];
        let mut label = vec![None; n];
        if let Some(root) = view.index_of(&dag.root) {
            let order = view.preorder(root);
            depth[root] = Some(0);
            for &v in &order {
                for &(c, ei) in &view.children[v] {
                    if depth[c].is_none() {
                        depth[c] = depth[v].map(|d| d + 1);
                        label[c] = Some(dag.edges[ei].label.clone());
                    }
                }
            }
            for &v in order.iter().rev() {
                let mut y: Yield = dag.nodes[v]
                    .covered_terminals()
                    .iter()
                    .copied()
                    .filter(|t| !punct.contains(t))
                    .collect();
                for &(c, _) in &view.children[v] {
                    y.extend(yields[c].iter().copied());
                }
                yields[v] = y;
            }
        }
        YieldTable {
            yields,
            depth,
            label,
        }
    }
}

fn validate(dag: &UnifiedDag) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, subject: String| out.push(Violation { kind, subject });

    for (i, t) in dag.terminals.iter().enumerate() {
        if t.index != i + 1 {
            push(
                ViolationKind::NonContiguousTerminals,
                format!("terminal at position {} has index {}", i + 1, t.index),
            );
        }
        if t.form.is_empty() {
            push(ViolationKind::EmptyForm, format!("terminal {}", t.index));
        }
    }

    let mut ids = HashSet::new();
    for n in &dag.nodes {
        if !ids.insert(&n.id) {
            push(ViolationKind::DuplicateNodeId, n.id.to_string());
        }
        if let NodeKind::PreTerminal(ts) = &n.kind {
            if ts.is_empty() {
                push(ViolationKind::EmptyPreTerminal, n.id.to_string());
            }
        }
    }
    if !ids.contains(&dag.root) {
        push(ViolationKind::UnknownRoot, dag.root.to_string());
    }

    let view = DagView::new(dag);
    let mut primary_parents: HashMap<&NodeId, usize> = HashMap::new();
    for e in &dag.edges {
        let subject = || format!("{} -> {}", e.parent, e.child);
        if !ids.contains(&e.parent) || !ids.contains(&e.child) {
            push(ViolationKind::DanglingEdge, subject());
            continue;
        }
        if e.parent == e.child {
            push(ViolationKind::SelfLoop, subject());
            continue;
        }
        if !e.remote {
            *primary_parents.entry(&e.child).or_default() += 1;
            if e.child == dag.root {
                push(ViolationKind::RootHasParent, subject());
            }
            if dag.node(&e.parent).is_some_and(Node::is_pre_terminal) {
                push(ViolationKind::PreTerminalWithChildren, subject());
            }
        }
    }
    let mut multi: Vec<_> = primary_parents
        .iter()
        .filter(|(_, &count)| count > 1)
        .map(|(id, _)| id.to_string())
        .collect();
    multi.sort();
    for id in multi {
        push(ViolationKind::MultiplePrimaryParents, id);
    }

    // Cycles: primary-only first, then the full graph for cycles that need a
    // remote edge to close.
    let primary_cycles = cycles(dag, false);
    let mut on_primary_cycle = HashSet::new();
    for cycle in &primary_cycles {
        on_primary_cycle.extend(cycle.iter().cloned());
        push(ViolationKind::PrimaryCycle, cycle.join(" "));
    }
    for cycle in cycles(dag, true) {
        if cycle.iter().all(|id| on_primary_cycle.contains(id)) && primary_cycles.contains(&cycle) {
            continue;
        }
        push(ViolationKind::Cycle, cycle.join(" "));
    }

    if let Some(root) = view.index_of(&dag.root) {
        let mut reachable = vec![false; dag.nodes.len()];
        for v in view.preorder(root) {
            reachable[v] = true;
        }
        for (i, n) in dag.nodes.iter().enumerate() {
            if !reachable[i] && !on_primary_cycle.contains(n.id.as_str()) {
                push(ViolationKind::Unreachable, n.id.to_string());
            }
        }
    }

    let mut cover: HashMap<usize, Vec<&NodeId>> = HashMap::new();
    for n in &dag.nodes {
        for &t in n.covered_terminals() {
            cover.entry(t).or_default().push(&n.id);
        }
    }
    let known: HashSet<usize> = dag.terminals.iter().map(|t| t.index).collect();
    for t in &dag.terminals {
        match cover.get(&t.index).map(Vec::len).unwrap_or(0) {
            0 => push(ViolationKind::Uncovered, format!("terminal {}", t.index)),
            1 => {}
            _ => {
                let owners: Vec<_> = cover[&t.index].iter().map(|id| id.to_string()).collect();
                push(
                    ViolationKind::DoubleCover,
                    format!("terminal {} covered by {}", t.index, owners.join(", ")),
                );
            }
        }
    }
    let mut stray: Vec<_> = cover.keys().filter(|t| !known.contains(t)).collect();
    stray.sort();
    for t in stray {
        push(
            ViolationKind::Uncovered,
            format!("pre-terminal covers unknown terminal {t}"),
        );
    }
    out
}

/// Strongly connected components with more than one node, as sorted id
/// lists, in a deterministic order.
fn cycles(dag: &UnifiedDag, include_remote: bool) -> Vec<Vec<String>> {
    let mut graph = DiGraph::<&str, ()>::new();
    let mut index = HashMap::new();
    for n in &dag.nodes {
        index
            .entry(&n.id)
            .or_insert_with(|| graph.add_node(n.id.as_str()));
    }
    for e in &dag.edges {
        if e.remote && !include_remote {
            continue;
        }
        if let (Some(&p), Some(&c)) = (index.get(&e.parent), index.get(&e.child)) {
            if p != c {
                graph.add_edge(p, c, ());
            }
        }
    }
    let mut out: Vec<Vec<String>> = tarjan_scc(&graph)
        .into_iter()
        .filter(|scc| scc.len() > 1)
        .map(|scc| {
            let mut ids: Vec<String> = scc.iter().map(|&i| graph[i].to_owned()).collect();
            ids.sort();
            ids
        })
        .collect();
    out.sort();
    out
}

/// Id-independent description of a dag's structure: each node is named by
/// its full (punctuation-inclusive) yield and its distance from the root,
/// which is unique within a primary tree.
pub type CanonicalEdge = ((Vec<usize>, usize), (Vec<usize>, usize), String, bool);

/// Canonical edge set used to compare structures built with different ids.
pub fn canonical_form(dag: &UnifiedDag) -> BTreeSet<CanonicalEdge> {
    let table = YieldTable::new(dag, &HashSet::new());
    let view = DagView::new(dag);
    let key = |i: usize| {
        (
            table.yields[i].iter().copied().collect::<Vec<_>>(),
            table.depth[i].unwrap_or(usize::MAX),
        )
    };
    dag.edges
        .iter()
        .filter_map(|e| {
            let p = view.index_of(&e.parent)?;
            let c = view.index_of(&e.child)?;
            Some((key(p), key(c), e.label.to_string(), e.remote))
        })
        .collect()
}

/// Bracketed rendering of the primary tree, e.g.
/// `[obl [case After] [head graduation]]`.
pub fn bracketed(dag: &UnifiedDag) -> String {
    fn walk(
        dag: &UnifiedDag,
        view: &DagView,
        v: usize,
        label: Option<&CategorySet>,
        out: &mut String,
    ) {
        let node = &dag.nodes[v];
        let is_leaf = view.children[v].is_empty();
        if let Some(l) = label {
            if is_leaf && node.is_pre_terminal() {
                out.push('[');
                out.push_str(&l.to_string());
                for &t in node.covered_terminals() {
                    out.push(' ');
                    out.push_str(dag.terminals.get(t - 1).map_or("?", |t| t.form.as_str()));
                }
                out.push(']');
                return;
            }
            out.push('[');
            out.push_str(&l.to_string());
        } else {
            out.push_str("[ROOT");
        }
        for &t in node.covered_terminals() {
            out.push(' ');
            out.push_str(dag.terminals.get(t - 1).map_or("?", |t| t.form.as_str()));
        }
        for &(c, ei) in &view.children[v] {
            out.push(' ');
            walk(dag, view, c, Some(&dag.edges[ei].label), out);
        }
        out.push(']');
    }
    let view = DagView::new(dag);
    let mut out = String::new();
    if let Some(root) = view.index_of(&dag.root) {
        walk(dag, &view, root, None, &mut out);
    }
    out
}
