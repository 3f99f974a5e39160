//! Scoring predicted UCCA graphs against gold, overall and per UD relation.
//!
//! Corpus-level scores count every edge of a class (primary or remote) as a
//! (yield, label) unit. The fine-grained breakdown uses top-category units
//! instead, so each yield falls into exactly one bucket: the relation of the
//! gold UD unit with the same yield, or `(none)`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::align::{check_tokens, AlignError};
use crate::convert::is_excluded;
use crate::model::{CategorySet, UnifiedDag, Yield, YieldTable};
use crate::normalize::top_category_index;
use crate::table::{percent, Table};

/// Bucket for units whose yield matches no UD unit.
pub const NO_RELATION: &str = "(none)";

#[derive(Clone, Copy, Debug, Eq, PartialEq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    Primary,
    Remote,
}

#[derive(Clone, Copy, Debug, Default, Eq, PartialEq, Serialize)]
pub struct EvalCounts {
    pub n_gold: u64,
    pub n_pred: u64,
    pub n_correct: u64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl EvalCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.n_correct, self.n_pred)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.n_correct, self.n_gold)
    }

    pub fn f1(&self) -> f64 {
        ratio(2 * self.n_correct, self.n_gold + self.n_pred)
    }

    pub fn add(&mut self, other: EvalCounts) {
        self.n_gold += other.n_gold;
        self.n_pred += other.n_pred;
        self.n_correct += other.n_correct;
    }
}

/// `pred` with the punctuation marks of `gold`, so both sides drop the same
/// terminals from their yields.
fn with_punct_of(pred: &UnifiedDag, gold: &UnifiedDag) -> UnifiedDag {
    let mut out = pred.clone();
    for (p, g) in out.terminals.iter_mut().zip(&gold.terminals) {
        p.is_punct = g.is_punct;
    }
    out
}

type UnitKey = (Yield, Option<CategorySet>);

fn edge_units(dag: &UnifiedDag, labeled: bool, class: EdgeClass) -> HashMap<UnitKey, u64> {
    let table = YieldTable::new(dag, &dag.punct_terminals());
    let index: HashMap<_, _> = dag
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (&n.id, i))
        .collect();
    let mut out = HashMap::new();
    for e in &dag.edges {
        if e.remote != (class == EdgeClass::Remote) {
            continue;
        }
        let Some(&c) = index.get(&e.child) else {
            continue;
        };
        let y = &table.yields[c];
        if y.is_empty() {
            continue;
        }
        let label = labeled.then(|| e.label.clone());
        *out.entry((y.clone(), label)).or_default() += 1;
    }
    out
}

/// Scores one sentence. For the remote class, pass dags that still carry
/// their remote edges.
pub fn evaluate_ucca(
    gold: &UnifiedDag,
    pred: &UnifiedDag,
    labeled: bool,
    class: EdgeClass,
) -> Result<EvalCounts, AlignError> {
    check_tokens(gold, pred)?;
    let pred = with_punct_of(pred, gold);
    let g = edge_units(gold, labeled, class);
    let p = edge_units(&pred, labeled, class);
    let n_correct = g
        .iter()
        .map(|(k, &n)| n.min(p.get(k).copied().unwrap_or(0)))
        .sum();
    Ok(EvalCounts {
        n_gold: g.values().sum(),
        n_pred: p.values().sum(),
        n_correct,
    })
}

/// Labeled and unlabeled counts for both edge classes.
#[derive(Clone, Copy, Debug, Default, Eq, PartialEq, Serialize)]
pub struct EvalSummary {
    pub primary_labeled: EvalCounts,
    pub primary_unlabeled: EvalCounts,
    pub remote_labeled: EvalCounts,
    pub remote_unlabeled: EvalCounts,
}

impl EvalSummary {
    pub fn sentence(gold: &UnifiedDag, pred: &UnifiedDag) -> Result<Self, AlignError> {
        Ok(EvalSummary {
            primary_labeled: evaluate_ucca(gold, pred, true, EdgeClass::Primary)?,
            primary_unlabeled: evaluate_ucca(gold, pred, false, EdgeClass::Primary)?,
            remote_labeled: evaluate_ucca(gold, pred, true, EdgeClass::Remote)?,
            remote_unlabeled: evaluate_ucca(gold, pred, false, EdgeClass::Remote)?,
        })
    }

    pub fn add(&mut self, other: &EvalSummary) {
        self.primary_labeled.add(other.primary_labeled);
        self.primary_unlabeled.add(other.primary_unlabeled);
        self.remote_labeled.add(other.remote_labeled);
        self.remote_unlabeled.add(other.remote_unlabeled);
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "edges",
            "mode",
            "gold",
            "predicted",
            "correct",
            "P",
            "R",
            "F1",
        ]);
        for (class, mode, c) in [
            ("primary", "labeled", self.primary_labeled),
            ("primary", "unlabeled", self.primary_unlabeled),
            ("remote", "labeled", self.remote_labeled),
            ("remote", "unlabeled", self.remote_unlabeled),
        ] {
            t.push([
                class.to_owned(),
                mode.to_owned(),
                c.n_gold.to_string(),
                c.n_pred.to_string(),
                c.n_correct.to_string(),
                format!("{:.1}", 100.0 * c.precision()),
                format!("{:.1}", 100.0 * c.recall()),
                format!("{:.1}", 100.0 * c.f1()),
            ]);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FineGrainedRow {
    pub relation: String,
    pub total_in_ud: u64,
    pub match_gold: u64,
    pub match_pred: u64,
    pub labeled_correct: u64,
    pub unlabeled_correct: u64,
    pub labeled_f1: f64,
    pub unlabeled_f1: f64,
    pub labeled_over_unlabeled_pct: f64,
    pub mode_baseline_pct: f64,
    pub avg_words: f64,
}

#[derive(Clone, Debug, Default, Eq, PartialEq)]
struct Bucket {
    total_in_ud: u64,
    match_gold: u64,
    match_pred: u64,
    labeled_correct: u64,
    unlabeled_correct: u64,
    gold_labels: BTreeMap<CategorySet, u64>,
    gold_words: u64,
}

/// Per-relation counts, summed over sentences before scores are derived.
#[derive(Clone, Debug, Default, Eq, PartialEq)]
pub struct FineGrainedTally {
    buckets: BTreeMap<String, Bucket>,
}

impl FineGrainedTally {
    /// Adds one sentence. `gold_ud` is the converted UD tree of the same
    /// tokens.
    pub fn add_sentence(
        &mut self,
        gold_ucca: &UnifiedDag,
        pred_ucca: &UnifiedDag,
        gold_ud: &UnifiedDag,
    ) -> Result<(), AlignError> {
        check_tokens(gold_ud, gold_ucca)?;
        check_tokens(gold_ucca, pred_ucca)?;
        let pred_ucca = with_punct_of(pred_ucca, gold_ucca);

        let mut ud = top_category_index(gold_ud);
        ud.retain(|_, l| !l.is_root());
        let excluded: Vec<Yield> = ud
            .iter()
            .filter(|(_, l)| l.as_single().is_some_and(is_excluded))
            .map(|(y, _)| y.clone())
            .collect();
        for y in &excluded {
            ud.remove(y);
        }
        let units = |dag: &UnifiedDag| {
            let mut idx = top_category_index(dag);
            idx.retain(|y, l| !l.is_root() && !excluded.contains(y));
            idx
        };
        let gold = units(gold_ucca);
        let pred = units(&pred_ucca);
        let bucket_of = |y: &Yield| {
            ud.get(y)
                .map_or_else(|| NO_RELATION.to_owned(), |l| l.to_string())
        };

        for label in ud.values() {
            self.buckets
                .entry(label.to_string())
                .or_default()
                .total_in_ud += 1;
        }
        for (y, label) in &gold {
            let b = self.buckets.entry(bucket_of(y)).or_default();
            b.match_gold += 1;
            *b.gold_labels.entry(label.clone()).or_default() += 1;
            b.gold_words += y.len() as u64;
            if let Some(p) = pred.get(y) {
                b.unlabeled_correct += 1;
                b.labeled_correct += (p == label) as u64;
            }
        }
        for y in pred.keys() {
            self.buckets.entry(bucket_of(y)).or_default().match_pred += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &FineGrainedTally) {
        for (rel, o) in &other.buckets {
            let b = self.buckets.entry(rel.clone()).or_default();
            b.total_in_ud += o.total_in_ud;
            b.match_gold += o.match_gold;
            b.match_pred += o.match_pred;
            b.labeled_correct += o.labeled_correct;
            b.unlabeled_correct += o.unlabeled_correct;
            b.gold_words += o.gold_words;
            for (l, n) in &o.gold_labels {
                *b.gold_labels.entry(l.clone()).or_default() += n;
            }
        }
    }

    /// Rows in relation order.
    pub fn rows(&self) -> Vec<FineGrainedRow> {
        self.buckets
            .iter()
            .map(|(rel, b)| {
                let mode = b.gold_labels.values().copied().max().unwrap_or(0);
                FineGrainedRow {
                    relation: rel.clone(),
                    total_in_ud: b.total_in_ud,
                    match_gold: b.match_gold,
                    match_pred: b.match_pred,
                    labeled_correct: b.labeled_correct,
                    unlabeled_correct: b.unlabeled_correct,
                    labeled_f1: ratio(2 * b.labeled_correct, b.match_gold + b.match_pred),
                    unlabeled_f1: ratio(2 * b.unlabeled_correct, b.match_gold + b.match_pred),
                    labeled_over_unlabeled_pct: 100.0
                        * ratio(b.labeled_correct, b.unlabeled_correct),
                    mode_baseline_pct: 100.0 * ratio(mode, b.match_gold),
                    avg_words: ratio(b.gold_words, b.match_gold),
                }
            })
            .collect()
    }
}

/// Fine-grained breakdown of a single sentence.
pub fn fine_grained(
    gold_ucca: &UnifiedDag,
    pred_ucca: &UnifiedDag,
    gold_ud: &UnifiedDag,
) -> Result<Vec<FineGrainedRow>, AlignError> {
    let mut tally = FineGrainedTally::default();
    tally.add_sentence(gold_ucca, pred_ucca, gold_ud)?;
    Ok(tally.rows())
}

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum ReportOrder {
    /// Descending labeled F1, ties by relation name.
    LabeledF1,
    Relation,
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "relation",
    "total_in_ud",
    "match_gold",
    "match_pred",
    "labeled_correct",
    "unlabeled_correct",
    "labeled_f1",
    "unlabeled_f1",
    "labeled_over_unlabeled_pct",
    "mode_baseline_pct",
    "avg_words",
];

pub fn sort_rows(rows: &mut [FineGrainedRow], order: ReportOrder) {
    match order {
        ReportOrder::Relation => rows.sort_by(|a, b| a.relation.cmp(&b.relation)),
        ReportOrder::LabeledF1 => rows.sort_by(|a, b| {
            b.labeled_f1
                .total_cmp(&a.labeled_f1)
                .then_with(|| a.relation.cmp(&b.relation))
        }),
    }
}

/// Fine-grained report table; scores as percentages with one decimal.
pub fn render_report(rows: &[FineGrainedRow], order: ReportOrder) -> Table {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows, order);
    let mut t = Table::new(REPORT_COLUMNS);
    for r in &rows {
        t.push([
            r.relation.clone(),
            r.total_in_ud.to_string(),
            r.match_gold.to_string(),
            r.match_pred.to_string(),
            r.labeled_correct.to_string(),
            r.unlabeled_correct.to_string(),
            percent(r.labeled_f1, 1.0),
            percent(r.unlabeled_f1, 1.0),
            format!("{:.1}", r.labeled_over_unlabeled_pct),
            format!("{:.1}", r.mode_baseline_pct),
            format!("{:.1}", r.avg_words),
        ]);
    }
    t
}
