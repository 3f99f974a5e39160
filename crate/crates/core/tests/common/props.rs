//! Randomized property checks, each driven by a single seed so the same
//! case can be replayed from a failure message.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use synsem_core::align::{align_sentence, confusion_matrix};
use synsem_core::convert::{
    convert_basic, convert_extended, join_mwes, promote_conjunctions, strip_subtypes,
};
use synsem_core::eval::{evaluate_ucca, fine_grained, EdgeClass, NO_RELATION};
use synsem_core::io::{
    parse_ucca_json, parse_unified, write_ucca_json, write_unified, UccaGraph, UdTree,
};
use synsem_core::model::{NodeId, UnifiedDag, Yield};
use synsem_core::normalize::{normalize, to_unified};

use super::*;

pub type Check = fn(u64) -> Result<(), String>;

/// Every property, named.
pub const ALL: [(&str, Check); 9] = [
    ("yield preservation of basic conversion", yield_preservation),
    ("promotion idempotence", promotion_idempotent),
    ("mwe join against union-find", mwe_join),
    ("serialization round-trip", round_trip),
    ("self-alignment has no unmatched units", self_alignment),
    ("alignment against yield enumeration", alignment_oracle),
    ("identity evaluation scores 1", identity_evaluation),
    ("labeled never exceeds unlabeled", labeled_within_unlabeled),
    ("matrix independent of sentence order", order_invariance),
];

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    }};
}

fn sample(seed: u64) -> (Rng8, UdTree, UccaGraph) {
    let mut rng = Rng8::seed_from_u64(seed);
    let tokens = random_tokens(&mut rng, 9);
    let tree = random_tree(&mut rng, &tokens);
    let graph = random_graph(&mut rng, &tokens);
    (rng, tree, graph)
}

fn all_tokens(dag: &UnifiedDag) -> Yield {
    (1..=dag.terminals.len()).collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn yield_preservation(seed: u64) -> Result<(), String> {
    let (_, tree, _) = sample(seed);
    let dag = convert_basic(&tree).map_err(err)?;
    ensure!(
        dag.validate().is_empty(),
        "invalid dag: {:?}",
        dag.validate()
    );
    let closure = closure_yields(&tree);
    for (k, subtree) in closure.iter().enumerate().skip(1) {
        let pre = dag
            .yield_of(&NodeId::new(format!("t{k}")), false)
            .map_err(err)?;
        ensure!(pre == set(&[k]), "pre-terminal {k} yields {pre:?}");
        match dag.yield_of(&NodeId::new(format!("n{k}")), false) {
            Ok(y) => ensure!(y == *subtree, "unit {k}: {y:?} != {subtree:?}"),
            Err(_) => ensure!(subtree.len() == 1, "token {k} has dependents but no unit"),
        }
    }
    let top = dag.yield_of(&dag.root, false).map_err(err)?;
    ensure!(top == all_tokens(&dag), "root yield {top:?}");
    Ok(())
}

pub fn promotion_idempotent(seed: u64) -> Result<(), String> {
    let (_, tree, _) = sample(seed);
    let once = convert_extended(&tree).map_err(err)?;
    ensure!(
        once.validate().is_empty(),
        "invalid dag: {:?}",
        once.validate()
    );
    let twice = promote_conjunctions(&once, &strip_subtypes(&tree));
    ensure!(once == twice, "second promotion changed the dag");
    let top = once.yield_of(&once.root, false).map_err(err)?;
    ensure!(top == all_tokens(&once), "root yield {top:?}");
    Ok(())
}

pub fn mwe_join(seed: u64) -> Result<(), String> {
    let (_, tree, _) = sample(seed);
    let tree = strip_subtypes(&tree);
    let dag = join_mwes(&convert_basic(&tree).map_err(err)?, &tree);
    ensure!(
        dag.validate().is_empty(),
        "invalid dag: {:?}",
        dag.validate()
    );
    let covers: Vec<Yield> = dag
        .nodes
        .iter()
        .filter(|n| n.is_pre_terminal())
        .map(|n| n.covered_terminals().iter().copied().collect())
        .collect();
    let mut groups = mwe_components(&tree);
    let mut got = covers.clone();
    groups.sort();
    got.sort();
    ensure!(
        got == groups,
        "pre-terminals {got:?} != components {groups:?}"
    );
    let top = dag.yield_of(&dag.root, false).map_err(err)?;
    ensure!(top == all_tokens(&dag), "root yield {top:?}");
    Ok(())
}

pub fn round_trip(seed: u64) -> Result<(), String> {
    let (_, tree, graph) = sample(seed);
    let json = write_ucca_json(std::slice::from_ref(&graph));
    let back = parse_ucca_json(&json).map_err(err)?;
    ensure!(back == vec![graph.clone()], "ucca json round-trip differs");
    for dag in [
        convert_extended(&tree).map_err(err)?,
        to_unified(&graph, true).map_err(err)?,
    ] {
        let text = write_unified(std::slice::from_ref(&dag)).map_err(err)?;
        let back = parse_unified(&text).map_err(err)?;
        ensure!(
            back == vec![dag.clone()],
            "unified round-trip differs:\n{text}"
        );
    }
    Ok(())
}

pub fn self_alignment(seed: u64) -> Result<(), String> {
    let (_, tree, graph) = sample(seed);
    for dag in [
        convert_extended(&tree).map_err(err)?,
        normalize(&graph).map_err(err)?,
    ] {
        let a = align_sentence(&dag, &dag).map_err(err)?;
        ensure!(
            a.unmatched_ud.is_empty() && a.unmatched_ucca.is_empty(),
            "unmatched: {a:?}"
        );
        // A dag aligned with itself keeps its excluded-relation yields out.
        for (_, l, c) in &a.matched {
            ensure!(*l == c.to_string(), "{l} paired with {c}");
        }
    }
    Ok(())
}

pub fn alignment_oracle(seed: u64) -> Result<(), String> {
    let (_, tree, graph) = sample(seed);
    let ud = convert_extended(&tree).map_err(err)?;
    let ucca = normalize(&graph).map_err(err)?;
    let a = align_sentence(&ud, &ucca).map_err(err)?;
    let (m, mu, ms) = naive_alignment(&ud, &ucca);
    let got_m: Triples = a
        .matched
        .iter()
        .map(|(y, l, c)| (y.clone(), l.clone(), c.to_string()))
        .collect();
    let got_mu: Triples = a
        .unmatched_ud
        .iter()
        .map(|(y, l)| (y.clone(), l.clone(), String::new()))
        .collect();
    let got_ms: Triples = a
        .unmatched_ucca
        .iter()
        .map(|(y, c)| (y.clone(), String::new(), c.to_string()))
        .collect();
    ensure!(got_m == m, "matched {got_m:?} != {m:?}");
    ensure!(got_mu == mu, "unmatched ud {got_mu:?} != {mu:?}");
    ensure!(got_ms == ms, "unmatched ucca {got_ms:?} != {ms:?}");
    Ok(())
}

pub fn identity_evaluation(seed: u64) -> Result<(), String> {
    let (_, _, graph) = sample(seed);
    let g = to_unified(&graph, true).map_err(err)?;
    for labeled in [true, false] {
        for class in [EdgeClass::Primary, EdgeClass::Remote] {
            let c = evaluate_ucca(&g, &g, labeled, class).map_err(err)?;
            ensure!(c.n_gold == c.n_pred && c.n_pred == c.n_correct, "{c:?}");
            if c.n_gold > 0 {
                ensure!(
                    c.precision() == 1.0 && c.recall() == 1.0 && c.f1() == 1.0,
                    "{c:?}"
                );
            }
        }
    }
    Ok(())
}

pub fn labeled_within_unlabeled(seed: u64) -> Result<(), String> {
    let (mut rng, tree, graph) = sample(seed);
    let gold = normalize(&graph).map_err(err)?;
    let pred = if rng.gen_bool(0.5) {
        perturb(&mut rng, &gold)
    } else {
        let tokens: Vec<(String, bool)> = graph
            .tokens
            .iter()
            .map(|t| (t.text.clone(), t.punct))
            .collect();
        normalize(&random_graph(&mut rng, &tokens)).map_err(err)?
    };
    let ud = convert_extended(&tree).map_err(err)?;
    for class in [EdgeClass::Primary, EdgeClass::Remote] {
        let l = evaluate_ucca(&gold, &pred, true, class).map_err(err)?;
        let u = evaluate_ucca(&gold, &pred, false, class).map_err(err)?;
        ensure!(l.n_correct <= u.n_correct, "{l:?} vs {u:?}");
    }
    let rows = fine_grained(&gold, &pred, &ud).map_err(err)?;
    let oracle = naive_buckets(&gold, &pred, &ud);
    ensure!(
        rows.len() == oracle.len(),
        "{} rows, oracle {}",
        rows.len(),
        oracle.len()
    );
    for r in &rows {
        ensure!(r.labeled_correct <= r.unlabeled_correct, "{r:?}");
        ensure!(r.labeled_f1 <= r.unlabeled_f1, "{r:?}");
        if r.relation != NO_RELATION {
            ensure!(r.match_gold <= r.total_in_ud, "{r:?}");
        }
        let counts = [
            r.total_in_ud,
            r.match_gold,
            r.match_pred,
            r.labeled_correct,
            r.unlabeled_correct,
        ];
        ensure!(
            oracle.get(&r.relation) == Some(&counts),
            "{}: {counts:?} != {:?}",
            r.relation,
            oracle.get(&r.relation)
        );
    }
    Ok(())
}

pub fn order_invariance(seed: u64) -> Result<(), String> {
    let mut rng = Rng8::seed_from_u64(seed);
    let mut alignments = Vec::new();
    for _ in 0..rng.gen_range(1..=5) {
        let tokens = random_tokens(&mut rng, 8);
        let tree = random_tree(&mut rng, &tokens);
        let graph = random_graph(&mut rng, &tokens);
        let ud = convert_extended(&tree).map_err(err)?;
        let ucca = normalize(&graph).map_err(err)?;
        alignments.push(align_sentence(&ud, &ucca).map_err(err)?);
    }
    let whole = confusion_matrix(&alignments);
    let mut shuffled = alignments.clone();
    shuffled.shuffle(&mut rng);
    ensure!(
        confusion_matrix(&shuffled) == whole,
        "shuffled matrix differs"
    );
    let cut = rng.gen_range(0..=alignments.len());
    let mut merged = confusion_matrix(&alignments[cut..]);
    merged.merge(&confusion_matrix(&alignments[..cut]));
    ensure!(merged == whole, "merged halves differ");
    for r in whole.row_labels() {
        let counted: usize = alignments
            .iter()
            .map(|a| {
                a.matched.iter().filter(|m| m.1 == r).count()
                    + a.unmatched_ud.iter().filter(|m| m.1 == r).count()
            })
            .sum();
        ensure!(whole.row_total(&r) == counted as u64, "row {r} total");
    }
    Ok(())
}
