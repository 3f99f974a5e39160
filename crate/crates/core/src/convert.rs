//! Conversion of basic dependency trees into unified DAGs.
//!
//! The basic conversion adds a pre-terminal per token and, for every token
//! with dependents, a non-terminal whose children are the token itself
//! (under a `head` edge) and its dependents (under their relation). The
//! extensions join unanalyzable units (`flat`, `fixed`, `goeswith` chains)
//! into single pre-terminals and raise coordinating conjunctions and
//! adverbial-clause markers out of the conjunct they attach to.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::io::conllu::{universal_relation, UdTree};
use crate::model::{CategorySet, Edge, Node, NodeId, NodeKind, Terminal, UnifiedDag, HEAD_LABEL};

/// The 37 universal dependency relations.
pub const UNIVERSAL_RELATIONS: [&str; 37] = [
    "acl",
    "advcl",
    "advmod",
    "amod",
    "appos",
    "aux",
    "case",
    "cc",
    "ccomp",
    "clf",
    "compound",
    "conj",
    "cop",
    "csubj",
    "dep",
    "det",
    "discourse",
    "dislocated",
    "expl",
    "fixed",
    "flat",
    "goeswith",
    "iobj",
    "list",
    "mark",
    "nmod",
    "nsubj",
    "nummod",
    "obj",
    "obl",
    "orphan",
    "parataxis",
    "punct",
    "reparandum",
    "root",
    "vocative",
    "xcomp",
];

/// Relations whose chains form a single unanalyzable unit.
pub const MWE_RELATIONS: [&str; 3] = ["flat", "fixed", "goeswith"];

/// Core and oblique argument relations.
pub const ARGUMENT_RELATIONS: [&str; 7] =
    ["ccomp", "csubj", "iobj", "nsubj", "obj", "obl", "xcomp"];

/// Relations left out of every comparison.
pub const EXCLUDED_RELATIONS: [&str; 9] = [
    "root",
    "punct",
    "dep",
    "orphan",
    "fixed",
    "flat",
    "goeswith",
    "reparandum",
    "dislocated",
];

pub fn is_universal(rel: &str) -> bool {
    UNIVERSAL_RELATIONS.contains(&rel)
}

pub fn is_mwe(rel: &str) -> bool {
    MWE_RELATIONS.contains(&rel)
}

pub fn is_argument(rel: &str) -> bool {
    ARGUMENT_RELATIONS.contains(&rel)
}

pub fn is_excluded(rel: &str) -> bool {
    EXCLUDED_RELATIONS.contains(&rel)
}

#[derive(Debug, Error, Clone, Eq, PartialEq)]
pub enum ConvertError {
    #[error("sentence {sentence}: {message}")]
    InvalidTree { sentence: String, message: String },
}

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub struct ConvertOptions {
    pub join_mwes: bool,
    pub promote_conjunctions: bool,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        ConvertOptions {
            join_mwes: true,
            promote_conjunctions: true,
        }
    }
}

/// Truncates every relation at its first `:`.
pub fn strip_subtypes(tree: &UdTree) -> UdTree {
    let mut out = tree.clone();
    for t in &mut out.tokens {
        if let Some((base, _)) = t.deprel.split_once(':') {
            t.deprel = base.to_owned();
        }
    }
    out
}

fn check_tree(tree: &UdTree) -> Result<usize, ConvertError> {
    let fail = |message: String| ConvertError::InvalidTree {
        sentence: tree.sentence_id.clone(),
        message,
    };
    let n = tree.tokens.len();
    if n == 0 {
        return Err(fail("empty sentence".into()));
    }
    let mut root = None;
    for (i, t) in tree.tokens.iter().enumerate() {
        if t.index != i + 1 {
            return Err(fail(format!("token {} out of order", t.index)));
        }
        if t.head > n {
            return Err(fail(format!("head of token {} out of range", t.index)));
        }
        if t.head == 0 {
            if root.is_some() {
                return Err(fail("multiple roots".into()));
            }
            root = Some(t.index);
        }
    }
    for t in &tree.tokens {
        let mut cur = t.index;
        let mut steps = 0;
        while cur != 0 {
            cur = tree.tokens[cur - 1].head;
            steps += 1;
            if steps > n {
                return Err(fail("head cycle".into()));
            }
        }
    }
    root.ok_or_else(|| fail("no root".into()))
}

fn pre_terminal_id(token: usize) -> String {
    format!("t{token}")
}

fn non_terminal_id(token: usize) -> String {
    format!("n{token}")
}

/// Basic conversion of a tree whose subtypes have already been stripped.
pub fn convert_basic(tree: &UdTree) -> Result<UnifiedDag, ConvertError> {
    let root_token = check_tree(tree)?;
    let deps = tree.dependents();
    let n = tree.tokens.len();

    let mut arena = Arena::new(&tree.sentence_id, terminals_of(tree));
    let top = arena.add(Node::non_terminal("top"));
    let pre: Vec<usize> = (1..=n)
        .map(|k| arena.add(Node::pre_terminal(pre_terminal_id(k), vec![k])))
        .collect();
    let non: Vec<Option<usize>> = (1..=n)
        .map(|k| (!deps[k].is_empty()).then(|| arena.add(Node::non_terminal(non_terminal_id(k)))))
        .collect();
    let unit = |k: usize| non[k - 1].unwrap_or(pre[k - 1]);

    for h in 1..=n {
        let Some(nt) = non[h - 1] else { continue };
        let mut members = deps[h].clone();
        members.push(h);
        members.sort_unstable();
        for k in members {
            if k == h {
                arena.attach(nt, pre[h - 1], CategorySet::single(HEAD_LABEL));
            } else {
                let rel = &tree.tokens[k - 1].deprel;
                let label =
                    CategorySet::new([rel.as_str()]).map_err(|_| ConvertError::InvalidTree {
                        sentence: tree.sentence_id.clone(),
                        message: format!("token {k} has an empty relation"),
                    })?;
                arena.attach(nt, unit(k), label);
            }
        }
    }
    arena.attach(top, unit(root_token), CategorySet::single(HEAD_LABEL));
    arena.root = top;
    Ok(arena.into_dag())
}

fn terminals_of(tree: &UdTree) -> Vec<Terminal> {
    tree.tokens
        .iter()
        .map(|t| Terminal {
            index: t.index,
            form: t.form.clone(),
            is_punct: universal_relation(&t.deprel) == "punct",
        })
        .collect()
}

/// Groups of tokens connected by `flat`/`fixed`/`goeswith` arcs, computed on
/// the original tree. Returns the representative (topmost member) of every
/// token; singleton groups map to themselves.
pub fn mwe_groups(tree: &UdTree) -> Vec<usize> {
    let n = tree.tokens.len();
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for t in &tree.tokens {
        if t.head != 0 && t.head <= n && is_mwe(universal_relation(&t.deprel)) {
            let a = find(&mut parent, t.index);
            let b = find(&mut parent, t.head);
            parent[a] = b;
        }
    }
    let roots: Vec<usize> = (0..=n).map(|k| find(&mut parent, k)).collect();
    // the representative is the member whose head lies outside the group
    let mut top_of: HashMap<usize, usize> = HashMap::new();
    for t in &tree.tokens {
        let g = roots[t.index];
        if t.head == 0 || t.head > n || roots[t.head] != g {
            top_of.insert(g, t.index);
        }
    }
    let mut out = vec![0; n + 1];
    for k in 1..=n {
        out[k] = top_of.get(&roots[k]).copied().unwrap_or(k);
    }
    out
}

/// Joins every unanalyzable-unit chain into one pre-terminal. Dependents of
/// the joined tokens move under the group's non-terminal with their labels.
pub fn join_mwes(dag: &UnifiedDag, tree: &UdTree) -> UnifiedDag {
    let groups = mwe_groups(tree);
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &rep) in groups.iter().enumerate().skip(1) {
        if rep != k {
            members.entry(rep).or_default().push(k);
        }
    }
    if members.is_empty() {
        return dag.clone();
    }
    let mut arena = Arena::from_dag(dag);
    let mut reps: Vec<usize> = members.keys().copied().collect();
    reps.sort_unstable();

    for rep in reps {
        let others = &members[&rep];
        let Some(rep_pre) = arena.pre_terminal_of(rep) else {
            continue;
        };
        let Some(rep_nt) = arena.head_parent(rep_pre) else {
            continue;
        };

        let member_units: HashSet<usize> = others
            .iter()
            .filter_map(|&m| arena.pre_terminal_of(m))
            .flat_map(|p| [Some(p), arena.head_parent(p)])
            .flatten()
            .collect();

        let mut moved = Vec::new();
        let mut covered: Vec<usize> = arena.covered(rep_pre).to_vec();
        for &m in others {
            let Some(pre) = arena.pre_terminal_of(m) else {
                continue;
            };
            let own_nt = arena.head_parent(pre);
            if let Some(nt) = own_nt {
                for (child, label) in arena.children[nt].clone() {
                    if child != pre && !member_units.contains(&child) {
                        moved.push((child, label));
                    }
                }
            }
            covered.extend_from_slice(arena.covered(pre));
            arena.remove(pre);
            if let Some(nt) = own_nt {
                arena.remove(nt);
            }
        }
        covered.sort_unstable();
        covered.dedup();
        arena.nodes[rep_pre].kind = NodeKind::PreTerminal(covered);
        for (child, label) in moved {
            arena.insert_by_anchor(rep_nt, child, label);
        }
    }
    arena.into_dag()
}

/// Raises `cc` units whose head is `conj`-attached, and `mark` units whose
/// head is `advcl`-attached, to the parent of their conjunct's non-terminal,
/// immediately before it.
pub fn promote_conjunctions(dag: &UnifiedDag, tree: &UdTree) -> UnifiedDag {
    let groups = mwe_groups(tree);
    let mut in_group = vec![false; groups.len()];
    for k in 1..groups.len() {
        if groups[k] != k {
            in_group[k] = true;
            in_group[groups[k]] = true;
        }
    }
    let mut arena = Arena::from_dag(dag);
    let mut changed = false;
    for t in &tree.tokens {
        let rel = universal_relation(&t.deprel);
        if t.head == 0 || in_group[t.index] {
            continue;
        }
        let Some(head) = tree.token(t.head) else {
            continue;
        };
        let head_rel = universal_relation(&head.deprel);
        let promotable =
            (rel == "cc" && head_rel == "conj") || (rel == "mark" && head_rel == "advcl");
        if !promotable {
            continue;
        }
        let Some(pre) = arena.pre_terminal_of(t.index) else {
            continue;
        };
        let unit = arena.head_parent(pre).unwrap_or(pre);
        let Some(conjunct) = arena.parent[unit] else {
            continue;
        };
        // only units still inside their head's own non-terminal move
        let owns_head = arena.children[conjunct].iter().any(|&(c, ref l)| {
            l.as_single() == Some(HEAD_LABEL) && arena.covered(c).contains(&t.head)
        });
        if !owns_head {
            continue;
        }
        let Some(grand) = arena.parent[conjunct] else {
            continue;
        };
        arena.move_before(unit, grand, conjunct);
        changed = true;
    }
    if changed {
        arena.into_dag()
    } else {
        dag.clone()
    }
}

/// Full conversion: subtype stripping, basic conversion, unanalyzable-unit
/// joining and conjunction promotion, in that order.
pub fn convert_extended(tree: &UdTree) -> Result<UnifiedDag, ConvertError> {
    convert_with(tree, ConvertOptions::default())
}

/// Conversion with the extensions individually switchable.
pub fn convert_with(tree: &UdTree, options: ConvertOptions) -> Result<UnifiedDag, ConvertError> {
    let tree = strip_subtypes(tree);
    let mut dag = convert_basic(&tree)?;
    if options.join_mwes {
        dag = join_mwes(&dag, &tree);
    }
    if options.promote_conjunctions {
        dag = promote_conjunctions(&dag, &tree);
    }
    Ok(dag)
}

/// Mutable primary tree used while rewriting a dag.
struct Arena {
    sentence_id: String,
    terminals: Vec<Terminal>,
    nodes: Vec<Node>,
    alive: Vec<bool>,
    children: Vec<Vec<(usize, CategorySet)>>,
    parent: Vec<Option<usize>>,
    remotes: Vec<Edge>,
    root: usize,
}

impl Arena {
    fn new(sentence_id: &str, terminals: Vec<Terminal>) -> Self {
        Arena {
            sentence_id: sentence_id.to_owned(),
            terminals,
            nodes: Vec::new(),
            alive: Vec::new(),
            children: Vec::new(),
            parent: Vec::new(),
            remotes: Vec::new(),
            root: 0,
        }
    }

    fn from_dag(dag: &UnifiedDag) -> Self {
        let mut arena = Arena::new(&dag.sentence_id, dag.terminals.clone());
        let mut index: HashMap<&NodeId, usize> = HashMap::new();
        for n in &dag.nodes {
            let i = arena.add(n.clone());
            index.insert(&n.id, i);
        }
        for e in &dag.edges {
            if e.remote {
                arena.remotes.push(e.clone());
            } else if let (Some(&p), Some(&c)) = (index.get(&e.parent), index.get(&e.child)) {
                arena.attach(p, c, e.label.clone());
            }
        }
        arena.root = index.get(&dag.root).copied().unwrap_or(0);
        arena
    }

    fn add(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.alive.push(true);
        self.children.push(Vec::new());
        self.parent.push(None);
        self.nodes.len() - 1
    }

    fn attach(&mut self, parent: usize, child: usize, label: CategorySet) {
        self.children[parent].push((child, label));
        self.parent[child] = Some(parent);
    }

    fn detach(&mut self, child: usize) -> Option<CategorySet> {
        let p = self.parent[child].take()?;
        let pos = self.children[p].iter().position(|&(c, _)| c == child)?;
        Some(self.children[p].remove(pos).1)
    }

    fn remove(&mut self, node: usize) {
        self.detach(node);
        for (c, _) in std::mem::take(&mut self.children[node]) {
            if self.parent[c] == Some(node) {
                self.parent[c] = None;
            }
        }
        self.alive[node] = false;
    }

    fn covered(&self, node: usize) -> &[usize] {
        self.nodes[node].covered_terminals()
    }

    fn pre_terminal_of(&self, token: usize) -> Option<usize> {
        (0..self.nodes.len()).find(|&i| self.alive[i] && self.covered(i).contains(&token))
    }

    /// Parent of `pre` when it hangs under a `head` edge.
    fn head_parent(&self, pre: usize) -> Option<usize> {
        let p = self.parent[pre]?;
        self.children[p]
            .iter()
            .any(|&(c, ref l)| c == pre && l.as_single() == Some(HEAD_LABEL))
            .then_some(p)
    }

    /// Token position used to order siblings: the head token of a
    /// non-terminal, the first covered token of a pre-terminal.
    fn anchor(&self, node: usize) -> usize {
        if let Some(&t) = self.covered(node).first() {
            return t;
        }
        for (c, l) in &self.children[node] {
            if l.as_single() == Some(HEAD_LABEL) {
                return self.anchor(*c);
            }
        }
        self.children[node]
            .iter()
            .map(|&(c, _)| self.anchor(c))
            .min()
            .unwrap_or(usize::MAX)
    }

    fn insert_by_anchor(&mut self, parent: usize, child: usize, label: CategorySet) {
        self.detach(child);
        let key = self.anchor(child);
        let pos = self.children[parent]
            .iter()
            .position(|&(c, _)| self.anchor(c) > key)
            .unwrap_or(self.children[parent].len());
        self.children[parent].insert(pos, (child, label));
        self.parent[child] = Some(parent);
    }

    fn move_before(&mut self, node: usize, new_parent: usize, sibling: usize) {
        let Some(label) = self.detach(node) else {
            return;
        };
        let pos = self.children[new_parent]
            .iter()
            .position(|&(c, _)| c == sibling)
            .unwrap_or(self.children[new_parent].len());
        self.children[new_parent].insert(pos, (node, label));
        self.parent[node] = Some(new_parent);
    }

    /// Emits reachable nodes in pre-order; each edge follows its child.
    fn into_dag(self) -> UnifiedDag {
        let mut order = Vec::new();
        let mut incoming: Vec<Option<(usize, CategorySet)>> = vec![None; self.nodes.len()];
        let mut stack = vec![self.root];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(v) = stack.pop() {
            if seen[v] || !self.alive[v] {
                continue;
            }
            seen[v] = true;
            order.push(v);
            for (c, l) in self.children[v].iter().rev() {
                incoming[*c] = Some((v, l.clone()));
                stack.push(*c);
            }
        }
        let kept: HashSet<&NodeId> = order.iter().map(|&v| &self.nodes[v].id).collect();
        let mut edges: Vec<Edge> = order
            .iter()
            .filter_map(|&v| {
                let (p, label) = incoming[v].clone()?;
                Some(Edge {
                    parent: self.nodes[p].id.clone(),
                    child: self.nodes[v].id.clone(),
                    label,
                    remote: false,
                })
            })
            .collect();
        edges.extend(
            self.remotes
                .iter()
                .filter(|e| kept.contains(&e.parent) && kept.contains(&e.child))
                .cloned(),
        );
        UnifiedDag {
            sentence_id: self.sentence_id,
            terminals: self.terminals,
            root: self.nodes[self.root].id.clone(),
            nodes: order.iter().map(|&v| self.nodes[v].clone()).collect(),
            edges,
        }
    }
}
