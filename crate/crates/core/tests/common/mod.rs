//! Random generators and brute-force oracles shared by the integration
//! tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

pub mod props;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use synsem_core::io::{UccaEdge, UccaGraph, UccaToken, UdToken, UdTree};
use synsem_core::model::{CategorySet, Edge, Node, NodeId, Terminal, UnifiedDag, Yield};

pub type Rng8 = ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn set(items: &[usize]) -> Yield {
    items.iter().copied().collect()
}

pub fn cat(label: &str) -> CategorySet {
    CategorySet::single(label)
}

const UD_RELATIONS: [&str; 16] = [
    "nsubj", "obj", "obl", "case", "det", "amod", "advmod", "aux", "cc", "conj", "mark", "advcl",
    "flat", "fixed", "goeswith", "compound",
];

const UCCA_CATEGORIES: [&str; 11] = ["A", "C", "D", "E", "F", "H", "L", "N", "P", "R", "S"];

/// Token forms and punctuation flags shared by a generated UD tree and UCCA
/// graph.
pub fn random_tokens(rng: &mut Rng8, max_len: usize) -> Vec<(String, bool)> {
    let n = rng.gen_range(1..=max_len);
    (1..=n)
        .map(|i| {
            if i > 1 && rng.gen_bool(0.15) {
                (",".to_owned(), true)
            } else {
                (format!("w{i}"), false)
            }
        })
        .collect()
}

/// A random dependency tree over `tokens`. Punctuation tokens are leaves
/// labeled `punct`; subtypes appear on some relations.
pub fn random_tree(rng: &mut Rng8, tokens: &[(String, bool)]) -> UdTree {
    let n = tokens.len();
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    // Heads must be non-punctuation tokens; put one first as the root.
    if let Some(p) = order.iter().position(|&k| !tokens[k - 1].1) {
        order.swap(0, p);
    }
    let mut head = vec![0; n + 1];
    for i in 1..order.len() {
        let candidates: Vec<usize> = order[..i]
            .iter()
            .copied()
            .filter(|&k| !tokens[k - 1].1)
            .collect();
        head[order[i]] = *candidates.choose(rng).unwrap_or(&order[0]);
    }
    let mut tokens: Vec<UdToken> = (1..=n)
        .map(|k| {
            let (form, punct) = &tokens[k - 1];
            let deprel = if head[k] == 0 {
                "root".to_owned()
            } else if *punct {
                "punct".to_owned()
            } else {
                let rel = UD_RELATIONS.choose(rng).unwrap();
                if rng.gen_bool(0.1) {
                    format!("{rel}:sub")
                } else {
                    (*rel).to_owned()
                }
            };
            UdToken {
                index: k,
                form: form.clone(),
                upos: if *punct { "PUNCT" } else { "X" }.to_owned(),
                deprel,
                head: head[k],
                is_punct: *punct,
            }
        })
        .collect();
    // Make the promotion contexts common.
    for k in 0..n {
        let h = tokens[k].head;
        if h == 0 || tokens[h - 1].head == 0 || !rng.gen_bool(0.7) {
            continue;
        }
        let rel = match tokens[k].deprel.as_str() {
            "cc" => "conj",
            "mark" => "advcl",
            _ => continue,
        };
        tokens[h - 1].deprel = rel.to_owned();
    }
    UdTree {
        sentence_id: "s".to_owned(),
        tokens,
    }
}

/// A random UCCA graph over `tokens`: every non-terminal has at least one
/// child, punctuation hangs under `U` edges, and remote edges point at
/// terminals.
pub fn random_graph(rng: &mut Rng8, tokens: &[(String, bool)]) -> UccaGraph {
    let mut nodes = vec!["root".to_owned()];
    let mut edges = Vec::new();
    let mut primary_parent = BTreeMap::new();
    for (i, (_, punct)) in tokens.iter().enumerate() {
        let k = i + 1;
        let mut parent = nodes.choose(rng).unwrap().clone();
        if rng.gen_bool(0.5) {
            let fresh = format!("u{}", nodes.len());
            edges.push(UccaEdge {
                parent: parent.clone(),
                child: fresh.clone(),
                categories: random_categories(rng),
                remote: false,
            });
            nodes.push(fresh.clone());
            parent = fresh;
        }
        let categories = if *punct {
            cat("U")
        } else {
            random_categories(rng)
        };
        edges.push(UccaEdge {
            parent: parent.clone(),
            child: format!("t{k}"),
            categories,
            remote: false,
        });
        primary_parent.insert(k, parent);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let k = rng.gen_range(1..=tokens.len());
        let parent = nodes.choose(rng).unwrap().clone();
        if primary_parent[&k] != parent {
            edges.push(UccaEdge {
                parent,
                child: format!("t{k}"),
                categories: cat("A"),
                remote: true,
            });
        }
    }
    UccaGraph {
        sentence_id: "s".to_owned(),
        tokens: tokens
            .iter()
            .map(|(text, punct)| UccaToken {
                text: text.clone(),
                punct: *punct,
            })
            .collect(),
        nodes,
        edges,
        root: "root".to_owned(),
    }
}

fn random_categories(rng: &mut Rng8) -> CategorySet {
    let first = *UCCA_CATEGORIES.choose(rng).unwrap();
    if rng.gen_bool(0.1) {
        let second = *UCCA_CATEGORIES.choose(rng).unwrap();
        CategorySet::new([first, second]).unwrap()
    } else {
        cat(first)
    }
}

/// Same tokens and structure, with about a third of the labels redrawn.
pub fn perturb(rng: &mut Rng8, dag: &UnifiedDag) -> UnifiedDag {
    let mut out = dag.clone();
    for e in &mut out.edges {
        if rng.gen_bool(0.3) {
            e.label = random_categories(rng);
        }
    }
    out
}

/// Hand-built unified dag: `pre` lists (id, token) pre-terminals, `edges`
/// lists primary (parent, child, label) triples.
pub fn build_dag(
    forms: &[&str],
    punct: &[usize],
    pre: &[(&str, usize)],
    edges: &[(&str, &str, &str)],
) -> UnifiedDag {
    let mut ids: Vec<&str> = Vec::new();
    for (p, c, _) in edges {
        for id in [p, c] {
            if !ids.contains(id) {
                ids.push(id);
            }
        }
    }
    let nodes = ids
        .iter()
        .map(|id| match pre.iter().find(|(p, _)| p == id) {
            Some((_, k)) => Node::pre_terminal(*id, vec![*k]),
            None => Node::non_terminal(*id),
        })
        .collect();
    UnifiedDag {
        sentence_id: "s".to_owned(),
        terminals: forms
            .iter()
            .enumerate()
            .map(|(i, f)| Terminal {
                index: i + 1,
                form: (*f).to_owned(),
                is_punct: punct.contains(&(i + 1)),
            })
            .collect(),
        nodes,
        edges: edges
            .iter()
            .map(|(p, c, l)| Edge::primary(*p, *c, cat(l)))
            .collect(),
        root: NodeId::new(ids[0]),
    }
}

/// Subtree of every token by transitive closure of the head relation.
pub fn closure_yields(tree: &UdTree) -> Vec<Yield> {
    let n = tree.tokens.len();
    let mut out = vec![Yield::new(); n + 1];
    for t in &tree.tokens {
        let mut k = t.index;
        loop {
            out[k].insert(t.index);
            if k == 0 {
                break;
            }
            k = tree.tokens[k - 1].head;
        }
    }
    out
}

/// Connected components of multiword-expression edges, found by repeated
/// label propagation.
pub fn mwe_components(tree: &UdTree) -> Vec<Yield> {
    let n = tree.tokens.len();
    let mut label: Vec<usize> = (0..=n).collect();
    let is_mwe = |r: &str| matches!(r.split(':').next(), Some("flat" | "fixed" | "goeswith"));
    loop {
        let mut changed = false;
        for t in &tree.tokens {
            if t.head != 0 && is_mwe(&t.deprel) {
                let m = label[t.index].min(label[t.head]);
                if label[t.index] != m || label[t.head] != m {
                    label[t.index] = m;
                    label[t.head] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<usize, Yield> = BTreeMap::new();
    for (k, &l) in label.iter().enumerate().skip(1) {
        groups.entry(l).or_default().insert(k);
    }
    groups.into_values().collect()
}

/// Punctuation-free yield and depth of every node, by naive recursion over
/// the edge list.
pub fn naive_units(dag: &UnifiedDag) -> Vec<(Yield, usize, Option<CategorySet>)> {
    fn walk(
        dag: &UnifiedDag,
        id: &NodeId,
        depth: usize,
        label: Option<CategorySet>,
        out: &mut Vec<(Yield, usize, Option<CategorySet>)>,
    ) -> Yield {
        let node = dag.nodes.iter().find(|n| &n.id == id).unwrap();
        let mut y: Yield = node
            .covered_terminals()
            .iter()
            .copied()
            .filter(|&k| !dag.terminals[k - 1].is_punct)
            .collect();
        for e in dag.edges.iter().filter(|e| !e.remote && &e.parent == id) {
            y.extend(walk(dag, &e.child, depth + 1, Some(e.label.clone()), out));
        }
        out.push((y.clone(), depth, label));
        y
    }
    let mut out = Vec::new();
    walk(dag, &dag.root, 0, None, &mut out);
    out
}

/// Top category per non-empty yield; the whole-sentence yield is dropped.
pub fn naive_top_categories(dag: &UnifiedDag) -> BTreeMap<Yield, CategorySet> {
    let units = naive_units(dag);
    let whole: Yield = units.iter().find(|u| u.1 == 0).unwrap().0.clone();
    let mut best: BTreeMap<Yield, (usize, CategorySet)> = BTreeMap::new();
    for (y, depth, label) in units {
        let Some(label) = label else { continue };
        if y.is_empty() || y == whole {
            continue;
        }
        match best.get(&y) {
            Some((d, _)) if *d <= depth => {}
            _ => {
                best.insert(y, (depth, label));
            }
        }
    }
    best.into_iter().map(|(y, (_, l))| (y, l)).collect()
}

pub type Triples = BTreeSet<(Yield, String, String)>;

/// Brute-force alignment: (matched, unmatched UD, unmatched UCCA), labels
/// as display strings.
pub fn naive_alignment(ud: &UnifiedDag, ucca: &UnifiedDag) -> (Triples, Triples, Triples) {
    let excluded = [
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
    let mut u = naive_top_categories(ud);
    let mut s = naive_top_categories(ucca);
    let dropped: Vec<Yield> = u
        .iter()
        .filter(|(_, l)| excluded.contains(&l.to_string().as_str()))
        .map(|(y, _)| y.clone())
        .collect();
    for y in &dropped {
        u.remove(y);
        s.remove(y);
    }
    let (mut m, mut mu, mut ms) = (Triples::new(), Triples::new(), Triples::new());
    for (y, l) in &u {
        match s.get(y) {
            Some(c) => m.insert((y.clone(), l.to_string(), c.to_string())),
            None => mu.insert((y.clone(), l.to_string(), String::new())),
        };
    }
    for (y, c) in &s {
        if !u.contains_key(y) {
            ms.insert((y.clone(), String::new(), c.to_string()));
        }
    }
    (m, mu, ms)
}

/// Brute-force fine-grained counts per bucket:
/// (total_in_ud, match_gold, match_pred, labeled_correct, unlabeled_correct).
pub fn naive_buckets(
    gold: &UnifiedDag,
    pred: &UnifiedDag,
    ud: &UnifiedDag,
) -> BTreeMap<String, [u64; 5]> {
    let mut pred = pred.clone();
    for (p, g) in pred.terminals.iter_mut().zip(&gold.terminals) {
        p.is_punct = g.is_punct;
    }
    let excluded = [
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
    let mut u = naive_top_categories(ud);
    let dropped: Vec<Yield> = u
        .iter()
        .filter(|(_, l)| excluded.contains(&l.to_string().as_str()))
        .map(|(y, _)| y.clone())
        .collect();
    u.retain(|y, _| !dropped.contains(y));
    let g = naive_top_categories(gold);
    let p = naive_top_categories(&pred);
    let bucket = |y: &Yield| u.get(y).map_or("(none)".to_owned(), |l| l.to_string());
    let mut out: BTreeMap<String, [u64; 5]> = BTreeMap::new();
    for l in u.values() {
        out.entry(l.to_string()).or_default()[0] += 1;
    }
    for (y, l) in g.iter().filter(|(y, _)| !dropped.contains(y)) {
        let row = out.entry(bucket(y)).or_default();
        row[1] += 1;
        if let Some(pl) = p.get(y) {
            row[4] += 1;
            if pl == l {
                row[3] += 1;
            }
        }
    }
    for y in p.keys().filter(|y| !dropped.contains(y)) {
        out.entry(bucket(y)).or_default()[2] += 1;
    }
    out
}
