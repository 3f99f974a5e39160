//! Yield-based alignment of converted UD and UCCA units.
//!
//! Units on both sides are reduced to one label per punctuation-free yield
//! (the top category). Yields present on both sides are matched; the rest
//! are counted in the No Match margins of the confusion matrix.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::convert::{is_argument, is_excluded};
use crate::model::{CategorySet, UnifiedDag, Yield, YieldTable, HEAD_LABEL};
use crate::normalize::{top_category_index, TopCategoryIndex};
use crate::table::Table;

/// Column and row title of the unmatched margins.
pub const NO_MATCH: &str = "No Match";

/// UCCA categories counted as semantic heads in the head-row breakdown.
pub const SEMANTIC_HEADS: [&str; 4] = ["C", "H", "P", "S"];

#[derive(Debug, Error, Clone, Eq, PartialEq)]
pub enum AlignError {
    #[error("sentence {sentence}: token mismatch: {detail}")]
    TokenMismatch { sentence: String, detail: String },
    #[error("sentence count mismatch: {left} vs {right}")]
    CountMismatch { left: usize, right: usize },
}

/// Checks that two dags cover the same token sequence.
pub fn check_tokens(left: &UnifiedDag, right: &UnifiedDag) -> Result<(), AlignError> {
    let mismatch = |detail: String| AlignError::TokenMismatch {
        sentence: left.sentence_id.clone(),
        detail,
    };
    if left.terminals.len() != right.terminals.len() {
        return Err(mismatch(format!(
            "{} vs {} tokens",
            left.terminals.len(),
            right.terminals.len()
        )));
    }
    for (a, b) in left.terminals.iter().zip(&right.terminals) {
        if a.form != b.form {
            return Err(mismatch(format!(
                "token {}: {:?} vs {:?}",
                a.index, a.form, b.form
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, Eq, PartialEq, Serialize)]
pub struct SentenceAlignment {
    pub sentence_id: String,
    /// (yield, UD label, UCCA label), ordered by yield.
    pub matched: Vec<(Yield, String, CategorySet)>,
    pub unmatched_ud: Vec<(Yield, String)>,
    pub unmatched_ucca: Vec<(Yield, CategorySet)>,
}

/// The counted units of one side: top categories without the root sentinel.
fn counted_units(dag: &UnifiedDag) -> TopCategoryIndex {
    let mut idx = top_category_index(dag);
    idx.retain(|_, label| !label.is_root());
    idx
}

/// Matches the units of a converted UD dag and a normalized UCCA dag by
/// yield. Yields whose UD unit carries an excluded relation are dropped
/// from both sides.
pub fn align_sentence(ud: &UnifiedDag, ucca: &UnifiedDag) -> Result<SentenceAlignment, AlignError> {
    check_tokens(ud, ucca)?;
    let mut ud_units = counted_units(ud);
    let mut ucca_units = counted_units(ucca);
    let excluded: Vec<Yield> = ud_units
        .iter()
        .filter(|(_, l)| l.as_single().is_some_and(is_excluded))
        .map(|(y, _)| y.clone())
        .collect();
    for y in &excluded {
        ud_units.remove(y);
        ucca_units.remove(y);
    }

    let mut out = SentenceAlignment {
        sentence_id: ud.sentence_id.clone(),
        ..Default::default()
    };
    for (y, ud_label) in &ud_units {
        match ucca_units.get(y) {
            Some(ucca_label) => {
                out.matched
                    .push((y.clone(), ud_label.to_string(), ucca_label.clone()))
            }
            None => out.unmatched_ud.push((y.clone(), ud_label.to_string())),
        }
    }
    for (y, ucca_label) in ucca_units {
        if !ud_units.contains_key(&y) {
            out.unmatched_ucca.push((y, ucca_label));
        }
    }
    Ok(out)
}

/// Counts of (UD relation, UCCA category set) pairs over matched yields,
/// with unmatched margins.
#[derive(Clone, Debug, Default, Eq, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub cells: BTreeMap<String, BTreeMap<CategorySet, u64>>,
    pub no_match_ud: BTreeMap<String, u64>,
    pub no_match_ucca: BTreeMap<CategorySet, u64>,
}

impl ConfusionMatrix {
    pub fn add(&mut self, alignment: &SentenceAlignment) {
        for (_, ud, ucca) in &alignment.matched {
            *self
                .cells
                .entry(ud.clone())
                .or_default()
                .entry(ucca.clone())
                .or_default() += 1;
        }
        for (_, ud) in &alignment.unmatched_ud {
            *self.no_match_ud.entry(ud.clone()).or_default() += 1;
        }
        for (_, ucca) in &alignment.unmatched_ucca {
            *self.no_match_ucca.entry(ucca.clone()).or_default() += 1;
        }
    }

    /// Adds the counts of `other`; associative and commutative.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (ud, row) in &other.cells {
            let mine = self.cells.entry(ud.clone()).or_default();
            for (ucca, n) in row {
                *mine.entry(ucca.clone()).or_default() += n;
            }
        }
        for (ud, n) in &other.no_match_ud {
            *self.no_match_ud.entry(ud.clone()).or_default() += n;
        }
        for (ucca, n) in &other.no_match_ucca {
            *self.no_match_ucca.entry(ucca.clone()).or_default() += n;
        }
    }

    pub fn get(&self, ud: &str, ucca: &str) -> u64 {
        let Ok(key) = CategorySet::new(ucca.split('|')) else {
            return 0;
        };
        self.cells
            .get(ud)
            .and_then(|row| row.get(&key))
            .copied()
            .unwrap_or(0)
    }

    /// Matched plus unmatched UD units of one relation.
    pub fn row_total(&self, ud: &str) -> u64 {
        self.cells.get(ud).map_or(0, |r| r.values().sum::<u64>())
            + self.no_match_ud.get(ud).copied().unwrap_or(0)
    }

    /// Matched plus unmatched UCCA units of one category set.
    pub fn column_total(&self, ucca: &CategorySet) -> u64 {
        self.cells.values().filter_map(|r| r.get(ucca)).sum::<u64>()
            + self.no_match_ucca.get(ucca).copied().unwrap_or(0)
    }

    pub fn n_common(&self) -> u64 {
        self.cells.values().flat_map(|r| r.values()).sum()
    }

    /// UD relations in table order: lexicographic, with `head` last.
    pub fn row_labels(&self) -> Vec<String> {
        let labels: BTreeSet<&String> = self.cells.keys().chain(self.no_match_ud.keys()).collect();
        let mut rows: Vec<String> = labels
            .iter()
            .filter(|l| l.as_str() != HEAD_LABEL)
            .map(|l| l.to_string())
            .collect();
        if labels.iter().any(|l| l.as_str() == HEAD_LABEL) {
            rows.push(HEAD_LABEL.to_owned());
        }
        rows
    }

    /// UCCA category sets in lexicographic order of their rendering.
    pub fn column_labels(&self) -> Vec<CategorySet> {
        let mut cols: Vec<CategorySet> = self
            .cells
            .values()
            .flat_map(|r| r.keys())
            .chain(self.no_match_ucca.keys())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        cols.sort_by_key(|c| c.to_string());
        cols
    }

    pub fn to_table(&self) -> Table {
        let cols = self.column_labels();
        let cell = |n: u64| if n == 0 { String::new() } else { n.to_string() };
        let mut header = vec![String::new()];
        header.extend(cols.iter().map(|c| c.to_string()));
        header.push(NO_MATCH.to_owned());
        let mut table = Table::new(header);
        for ud in self.row_labels() {
            let row = self.cells.get(&ud);
            let mut cells = vec![ud.clone()];
            cells.extend(
                cols.iter()
                    .map(|c| cell(row.and_then(|r| r.get(c)).copied().unwrap_or(0))),
            );
            cells.push(cell(self.no_match_ud.get(&ud).copied().unwrap_or(0)));
            table.push(cells);
        }
        let mut last = vec![NO_MATCH.to_owned()];
        last.extend(
            cols.iter()
                .map(|c| cell(self.no_match_ucca.get(c).copied().unwrap_or(0))),
        );
        last.push(String::new());
        table.push(last);
        table
    }

    pub fn to_tsv(&self) -> String {
        self.to_table().to_tsv()
    }

    pub fn to_markdown(&self) -> String {
        self.to_table().to_markdown()
    }
}

/// Folds sentence alignments into a confusion matrix.
pub fn confusion_matrix<'a>(
    alignments: impl IntoIterator<Item = &'a SentenceAlignment>,
) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for a in alignments {
        m.add(a);
    }
    m
}

/// Agreement between the two schemes' unit yields, read as if UD were a
/// parser output scored against UCCA.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_ud: u64,
    pub n_ucca: u64,
    pub n_common: u64,
}

impl OverlapScores {
    pub fn from_counts(n_ud: u64, n_ucca: u64, n_common: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        OverlapScores {
            precision: ratio(n_common, n_ud),
            recall: ratio(n_common, n_ucca),
            f1: ratio(2 * n_common, n_ud + n_ucca),
            n_ud,
            n_ucca,
            n_common,
        }
    }

    /// One-line summary, e.g. `P=7/8 (87.5%) R=7/8 (87.5%) F1=87.5%`.
    pub fn summary(&self) -> String {
        format!(
            "P={}/{} ({:.1}%) R={}/{} ({:.1}%) F1={:.1}%",
            self.n_common,
            self.n_ud,
            100.0 * self.precision,
            self.n_common,
            self.n_ucca,
            100.0 * self.recall,
            100.0 * self.f1
        )
    }
}

pub fn overlap_f1(matrix: &ConfusionMatrix) -> OverlapScores {
    let n_common = matrix.n_common();
    OverlapScores::from_counts(
        n_common + matrix.no_match_ud.values().sum::<u64>(),
        n_common + matrix.no_match_ucca.values().sum::<u64>(),
        n_common,
    )
}

/// A share with its counts; a zero denominator gives value 0 and sets the
/// flag.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
    pub zero_denominator: bool,
}

impl Ratio {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        Ratio {
            numerator,
            denominator,
            value: if denominator == 0 {
                0.0
            } else {
                numerator as f64 / denominator as f64
            },
            zero_denominator: denominator == 0,
        }
    }
}

/// Corpus-level divergence statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatReport {
    pub overlap: OverlapScores,
    /// UD argument units whose matched UCCA unit is a Participant.
    pub arguments_as_participants: Ratio,
    /// Participant units matched to a UD argument relation.
    pub participants_as_arguments: Ratio,
    /// Predicates (tokens with an argument dependent) that are the main
    /// relation of some Scene.
    pub predicates_as_scenes: Ratio,
    /// Scenes (units with a Participant child) whose main relation contains
    /// a predicate.
    pub scenes_as_predicates: Ratio,
    /// `head` units matched to a semantic head category (C, H, P, S).
    pub heads_semantic: Ratio,
    pub heads_unmatched: Ratio,
    pub heads_other: Ratio,
}

impl StatReport {
    pub fn entries(&self) -> Vec<(&'static str, Ratio)> {
        vec![
            ("arguments_as_participants", self.arguments_as_participants),
            ("participants_as_arguments", self.participants_as_arguments),
            ("predicates_as_scenes", self.predicates_as_scenes),
            ("scenes_as_predicates", self.scenes_as_predicates),
            ("heads_semantic", self.heads_semantic),
            ("heads_unmatched", self.heads_unmatched),
            ("heads_other", self.heads_other),
        ]
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "statistic",
            "percent",
            "numerator",
            "denominator",
            "zero_denominator",
        ]);
        let o = &self.overlap;
        t.push([
            "overlap_precision".to_owned(),
            format!("{:.1}", 100.0 * o.precision),
            o.n_common.to_string(),
            o.n_ud.to_string(),
            (o.n_ud == 0).to_string(),
        ]);
        t.push([
            "overlap_recall".to_owned(),
            format!("{:.1}", 100.0 * o.recall),
            o.n_common.to_string(),
            o.n_ucca.to_string(),
            (o.n_ucca == 0).to_string(),
        ]);
        t.push([
            "overlap_f1".to_owned(),
            format!("{:.1}", 100.0 * o.f1),
            (2 * o.n_common).to_string(),
            (o.n_ud + o.n_ucca).to_string(),
            (o.n_ud + o.n_ucca == 0).to_string(),
        ]);
        for (name, r) in self.entries() {
            t.push([
                name.to_owned(),
                format!("{:.1}", 100.0 * r.value),
                r.numerator.to_string(),
                r.denominator.to_string(),
                r.zero_denominator.to_string(),
            ]);
        }
        t
    }
}

/// Head tokens of every predicate: non-terminals with at least one child
/// under an argument relation.
fn predicates(ud: &UnifiedDag) -> Vec<BTreeSet<usize>> {
    let view = crate::model::DagView::new(ud);
    let mut out = Vec::new();
    for kids in &view.children {
        let has_arg = kids
            .iter()
            .any(|&(_, e)| ud.edges[e].label.as_single().is_some_and(is_argument));
        if !has_arg {
            continue;
        }
        let heads: BTreeSet<usize> = kids
            .iter()
            .filter(|&&(c, e)| {
                ud.edges[e].label.as_single() == Some(HEAD_LABEL) && ud.nodes[c].is_pre_terminal()
            })
            .flat_map(|&(c, _)| ud.nodes[c].covered_terminals().iter().copied())
            .collect();
        if !heads.is_empty() {
            out.push(heads);
        }
    }
    out
}

/// Main-relation tokens of every Scene: units with at least one A-labeled
/// child; the main relation is the union of their P- and S-labeled
/// children's yields.
fn scenes(ucca: &UnifiedDag) -> Vec<BTreeSet<usize>> {
    let view = crate::model::DagView::new(ucca);
    let table = YieldTable::new(ucca, &HashSet::new());
    let mut out = Vec::new();
    for kids in &view.children {
        let has_participant = kids.iter().any(|&(_, e)| ucca.edges[e].label.contains("A"));
        if !has_participant {
            continue;
        }
        let main: BTreeSet<usize> = kids
            .iter()
            .filter(|&&(_, e)| {
                let l = &ucca.edges[e].label;
                l.contains("P") || l.contains("S")
            })
            .flat_map(|&(c, _)| table.yields[c].iter().copied())
            .collect();
        out.push(main);
    }
    out
}

/// Aggregates divergence statistics over a corpus. `ud_dags` and
/// `ucca_dags` pair positionally with `alignments`.
pub fn aggregate_stats(
    alignments: &[SentenceAlignment],
    ud_dags: &[UnifiedDag],
    ucca_dags: &[UnifiedDag],
) -> Result<StatReport, AlignError> {
    if ud_dags.len() != ucca_dags.len() {
        return Err(AlignError::CountMismatch {
            left: ud_dags.len(),
            right: ucca_dags.len(),
        });
    }
    let matrix = confusion_matrix(alignments);

    let (mut args, mut args_as_a) = (0, 0);
    let (mut parts, mut parts_as_args) = (0, 0);
    let (mut heads, mut heads_sem, mut heads_unmatched) = (0, 0, 0);
    for a in alignments {
        for (_, ud, ucca) in &a.matched {
            let is_arg = is_argument(ud);
            let is_a = ucca.contains("A");
            if is_arg {
                args += 1;
                args_as_a += is_a as u64;
            }
            if is_a {
                parts += 1;
                parts_as_args += is_arg as u64;
            }
            if ud == HEAD_LABEL {
                heads += 1;
                heads_sem += SEMANTIC_HEADS.iter().any(|c| ucca.contains(c)) as u64;
            }
        }
        for (_, ud) in &a.unmatched_ud {
            args += is_argument(ud) as u64;
            if ud == HEAD_LABEL {
                heads += 1;
                heads_unmatched += 1;
            }
        }
        for (_, ucca) in &a.unmatched_ucca {
            parts += ucca.contains("A") as u64;
        }
    }

    let (mut preds, mut preds_ok, mut scns, mut scns_ok) = (0, 0, 0, 0);
    for (ud, ucca) in ud_dags.iter().zip(ucca_dags) {
        let p = predicates(ud);
        let s = scenes(ucca);
        preds += p.len() as u64;
        scns += s.len() as u64;
        preds_ok += p
            .iter()
            .filter(|heads| s.iter().any(|main| !main.is_disjoint(heads)))
            .count() as u64;
        scns_ok += s
            .iter()
            .filter(|main| p.iter().any(|heads| !main.is_disjoint(heads)))
            .count() as u64;
    }

    Ok(StatReport {
        overlap: overlap_f1(&matrix),
        arguments_as_participants: Ratio::new(args_as_a, args),
        participants_as_arguments: Ratio::new(parts_as_args, parts),
        predicates_as_scenes: Ratio::new(preds_ok, preds),
        scenes_as_predicates: Ratio::new(scns_ok, scns),
        heads_semantic: Ratio::new(heads_sem, heads),
        heads_unmatched: Ratio::new(heads_unmatched, heads),
        heads_other: Ratio::new(heads - heads_sem - heads_unmatched, heads),
    })
}
