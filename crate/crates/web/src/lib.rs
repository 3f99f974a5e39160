//! Browser bindings for the demo page in `www/`.
//!
//! Each operation has a plain Rust form returning `Result<String, String>`
//! and a `wasm_bindgen` wrapper that throws the error message.

use synsem_core::align::{align_sentence, confusion_matrix, overlap_f1, SentenceAlignment};
use synsem_core::eval::{render_report, EvalSummary, FineGrainedTally, ReportOrder};
use synsem_core::io::{dag_to_json_line, parse_conllu, parse_ucca_json};
use synsem_core::model::{bracketed, UnifiedDag, Yield};
use synsem_core::normalize::to_unified;
use synsem_core::{convert_with, ConvertOptions};
use wasm_bindgen::prelude::*;

fn ud_dags(conllu: &str, options: ConvertOptions) -> Result<Vec<UnifiedDag>, String> {
    parse_conllu(conllu)
        .map_err(|e| format!("CoNLL-U: {e}"))?
        .iter()
        .map(|t| convert_with(t, options).map_err(|e| e.to_string()))
        .collect()
}

fn ucca_dags(json: &str, keep_remote: bool) -> Result<Vec<UnifiedDag>, String> {
    parse_ucca_json(json)
        .map_err(|e| format!("UCCA: {e}"))?
        .iter()
        .map(|g| to_unified(g, keep_remote).map_err(|e| e.to_string()))
        .collect()
}

fn paired<'a>(
    a: &'a [UnifiedDag],
    b: &'a [UnifiedDag],
) -> Result<impl Iterator<Item = (&'a UnifiedDag, &'a UnifiedDag)>, String> {
    if a.len() != b.len() {
        return Err(format!(
            "sentence count mismatch: {} vs {}",
            a.len(),
            b.len()
        ));
    }
    Ok(a.iter().zip(b))
}

fn words(dag: &UnifiedDag, y: &Yield) -> String {
    y.iter()
        .map(|&k| dag.terminals[k - 1].form.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Bracketed tree and unified JSON line for every sentence.
pub fn convert_text(
    conllu: &str,
    join_mwes: bool,
    promote_conjunctions: bool,
) -> Result<String, String> {
    let options = ConvertOptions {
        join_mwes,
        promote_conjunctions,
    };
    let mut out = String::new();
    for dag in ud_dags(conllu, options)? {
        out.push_str(&format!("# {}\n{}\n", dag.sentence_id, bracketed(&dag)));
        out.push_str(&dag_to_json_line(&dag).map_err(|e| e.to_string())?);
        out.push_str("\n\n");
    }
    Ok(out)
}

fn describe(dag: &UnifiedDag, a: &SentenceAlignment) -> String {
    let mut out = format!("# {}\n", a.sentence_id);
    for (y, ud, ucca) in &a.matched {
        out.push_str(&format!("  match     {ud} = {ucca}: {}\n", words(dag, y)));
    }
    for (y, ud) in &a.unmatched_ud {
        out.push_str(&format!("  UD only   {ud}: {}\n", words(dag, y)));
    }
    for (y, ucca) in &a.unmatched_ucca {
        out.push_str(&format!("  UCCA only {ucca}: {}\n", words(dag, y)));
    }
    out
}

/// Per-sentence alignments, the confusion matrix and the overlap summary.
pub fn align_text(conllu: &str, ucca_json: &str) -> Result<String, String> {
    let ud = ud_dags(conllu, ConvertOptions::default())?;
    let ucca = ucca_dags(ucca_json, false)?;
    let mut alignments = Vec::new();
    let mut out = String::new();
    for (u, s) in paired(&ud, &ucca)? {
        let a = align_sentence(u, s).map_err(|e| e.to_string())?;
        out.push_str(&describe(u, &a));
        alignments.push(a);
    }
    let matrix = confusion_matrix(&alignments);
    out.push('\n');
    out.push_str(&matrix.to_tsv());
    out.push_str(&overlap_f1(&matrix).summary());
    out.push('\n');
    Ok(out)
}

/// Corpus scores, plus the per-relation report when `conllu` is not blank.
pub fn evaluate_text(gold_json: &str, pred_json: &str, conllu: &str) -> Result<String, String> {
    let gold = ucca_dags(gold_json, true)?;
    let pred = ucca_dags(pred_json, true)?;
    let mut summary = EvalSummary::default();
    for (g, p) in paired(&gold, &pred)? {
        summary.add(&EvalSummary::sentence(g, p).map_err(|e| e.to_string())?);
    }
    let mut out = summary.to_table().to_tsv();
    if !conllu.trim().is_empty() {
        let ud = ud_dags(conllu, ConvertOptions::default())?;
        let mut tally = FineGrainedTally::default();
        for ((g, p), (_, u)) in paired(&gold, &pred)?.zip(paired(&gold, &ud)?) {
            tally.add_sentence(g, p, u).map_err(|e| e.to_string())?;
        }
        out.push('\n');
        out.push_str(&render_report(&tally.rows(), ReportOrder::LabeledF1).to_tsv());
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn convert(
    conllu: &str,
    join_mwes: bool,
    promote_conjunctions: bool,
) -> Result<String, JsError> {
    convert_text(conllu, join_mwes, promote_conjunctions).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn align(conllu: &str, ucca_json: &str) -> Result<String, JsError> {
    align_text(conllu, ucca_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn evaluate(gold_json: &str, pred_json: &str, conllu: &str) -> Result<String, JsError> {
    evaluate_text(gold_json, pred_json, conllu).map_err(|e| JsError::new(&e))
}
