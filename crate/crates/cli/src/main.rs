//! `synsem`: convert, align and evaluate UD and UCCA treebanks.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use rayon::prelude::*;
use serde_json::json;
use synsem_core::align::{aggregate_stats, align_sentence, confusion_matrix, overlap_f1};
use synsem_core::convert::{convert_with, ConvertOptions};
use synsem_core::eval::{render_report, EvalSummary, FineGrainedTally, ReportOrder};
use synsem_core::io::{parse_conllu, parse_ucca_json, parse_unified, write_unified, UdTree};
use synsem_core::normalize::{normalize, to_unified};
use synsem_core::table::Table;
use synsem_core::UnifiedDag;

#[derive(Parser)]
#[command(
    name = "synsem",
    version,
    about = "Compare UD and UCCA treebanks through a unified DAG format"
)]
struct Cli {
    /// Worker threads for per-sentence work; output does not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,

    /// How sentences of two inputs are paired.
    #[arg(long, global = true, value_enum, default_value_t = PairBy::Position)]
    pair_by: PairBy,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairBy {
    Position,
    Id,
}

#[derive(Subcommand)]
enum Command {
    /// Write a treebank in the unified JSON-lines format.
    Convert(ConvertArgs),
    /// Confusion matrix of UD relations against UCCA categories.
    Confusion(CompareArgs),
    /// Aggregate divergence statistics.
    Stats(CompareArgs),
    /// Score predicted UCCA graphs against gold ones.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["ud", "ucca"]))]
struct ConvertArgs {
    /// CoNLL-U input.
    #[arg(long)]
    ud: Option<PathBuf>,
    /// UCCA JSON-lines input.
    #[arg(long)]
    ucca: Option<PathBuf>,
    #[arg(long, conflicts_with = "ucca")]
    no_mwe_join: bool,
    #[arg(long, conflicts_with = "ucca")]
    no_conj_promote: bool,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    ud: PathBuf,
    #[arg(long)]
    ucca: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Tsv)]
    format: TableFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold graphs, UCCA or unified JSON lines.
    #[arg(long)]
    gold: PathBuf,
    /// Predicted graphs, UCCA or unified JSON lines.
    #[arg(long)]
    pred: PathBuf,
    /// Gold CoNLL-U of the same sentences, for the per-relation report.
    #[arg(long, requires = "fine_grained")]
    ud: Option<PathBuf>,
    #[arg(long, requires = "ud")]
    fine_grained: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Tsv)]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Tsv,
    Md,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Tsv,
    Md,
    Json,
}

impl TableFormat {
    fn render(self, table: &Table) -> String {
        match self {
            TableFormat::Tsv => table.to_tsv(),
            TableFormat::Md => table.to_markdown(),
        }
    }
}

type Result<T> = std::result::Result<T, String>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SYNSEM_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build()
        .expect("thread pool");
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("synsem: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Convert(a) => convert(a),
        Command::Confusion(a) => compare(a, cli.pair_by, false),
        Command::Stats(a) => compare(a, cli.pair_by, true),
        Command::Evaluate(a) => evaluate(a, cli.pair_by),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    }
}

fn read_trees(path: &Path) -> Result<Vec<UdTree>> {
    let trees = parse_conllu(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    info!("{}: {} sentences", path.display(), trees.len());
    Ok(trees)
}

/// Runs `f` over the items in parallel, keeping input order and reporting
/// the first failure by position.
fn par_map<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<U> + Sync + Send,
) -> Result<Vec<U>> {
    items
        .par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn convert_trees(
    trees: &[UdTree],
    options: ConvertOptions,
    path: &Path,
) -> Result<Vec<UnifiedDag>> {
    par_map(trees, |t| {
        convert_with(t, options).map_err(|e| format!("{}: {e}", path.display()))
    })
}

/// UCCA graphs normalized to unified dags, remote edges kept on request.
fn read_ucca(path: &Path, keep_remote: bool) -> Result<Vec<UnifiedDag>> {
    let graphs = parse_ucca_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    info!("{}: {} graphs", path.display(), graphs.len());
    par_map(&graphs, |g| {
        to_unified(g, keep_remote).map_err(|e| format!("{}: {e}", path.display()))
    })
}

/// Reads semantic graphs in either JSON-lines format. Only unified nodes
/// carry a `kind` field.
fn read_graphs(path: &Path) -> Result<Vec<UnifiedDag>> {
    let text = read(path)?;
    let unified = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .and_then(|v| v.get("nodes")?.as_array().cloned())
        .is_some_and(|nodes| nodes.iter().any(|n| n.get("kind").is_some()));
    if unified {
        debug!("{}: unified format", path.display());
        parse_unified(&text).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        read_ucca(path, true)
    }
}

fn convert(a: &ConvertArgs) -> Result<()> {
    let dags = match (&a.ud, &a.ucca) {
        (Some(path), _) => {
            let options = ConvertOptions {
                join_mwes: !a.no_mwe_join,
                promote_conjunctions: !a.no_conj_promote,
            };
            convert_trees(&read_trees(path)?, options, path)?
        }
        (None, Some(path)) => {
            let graphs =
                parse_ucca_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
            par_map(&graphs, |g| {
                normalize(g).map_err(|e| format!("{}: {e}", path.display()))
            })?
        }
        (None, None) => unreachable!("clap requires an input"),
    };
    let text = write_unified(&dags).map_err(|e| e.to_string())?;
    write_out(a.out.as_deref(), &text)
}

/// Pairs two sentence lists positionally or by sentence id, failing on the
/// first sentence without a partner.
fn pair<'a>(
    left: &'a [UnifiedDag],
    right: &'a [UnifiedDag],
    by: PairBy,
    names: (&str, &str),
) -> Result<Vec<(&'a UnifiedDag, &'a UnifiedDag)>> {
    match by {
        PairBy::Position => {
            if left.len() != right.len() {
                let first = left
                    .get(right.len())
                    .or_else(|| right.get(left.len()))
                    .unwrap();
                return Err(format!(
                    "sentence count mismatch: {} {} vs {} {}, first unpaired sentence {}",
                    left.len(),
                    names.0,
                    right.len(),
                    names.1,
                    first.sentence_id
                ));
            }
            Ok(left.iter().zip(right).collect())
        }
        PairBy::Id => {
            let by_id: HashMap<&str, &UnifiedDag> =
                right.iter().map(|d| (d.sentence_id.as_str(), d)).collect();
            let out: Vec<_> = left
                .iter()
                .map(|l| {
                    by_id
                        .get(l.sentence_id.as_str())
                        .map(|r| (l, *r))
                        .ok_or_else(|| {
                            format!("sentence {}: missing from {}", l.sentence_id, names.1)
                        })
                })
                .collect::<Result<_>>()?;
            if left.len() != right.len() {
                let known: HashMap<&str, ()> =
                    left.iter().map(|d| (d.sentence_id.as_str(), ())).collect();
                let extra = right
                    .iter()
                    .find(|r| !known.contains_key(r.sentence_id.as_str()));
                if let Some(r) = extra {
                    return Err(format!(
                        "sentence {}: missing from {}",
                        r.sentence_id, names.0
                    ));
                }
            }
            Ok(out)
        }
    }
}

fn compare(a: &CompareArgs, by: PairBy, stats: bool) -> Result<()> {
    let ud = convert_trees(&read_trees(&a.ud)?, ConvertOptions::default(), &a.ud)?;
    let ucca = read_ucca(&a.ucca, false)?;
    let pairs = pair(&ud, &ucca, by, ("UD", "UCCA"))?;
    let alignments = par_map(&pairs, |(u, s)| {
        align_sentence(u, s).map_err(|e| e.to_string())
    })?;
    let text = if stats {
        let (u, s): (Vec<UnifiedDag>, Vec<UnifiedDag>) = pairs
            .iter()
            .map(|(u, s)| ((*u).clone(), (*s).clone()))
            .unzip();
        let report = aggregate_stats(&alignments, &u, &s).map_err(|e| e.to_string())?;
        a.format.render(&report.to_table())
    } else {
        let matrix = confusion_matrix(&alignments);
        let summary = overlap_f1(&matrix).summary();
        match a.format {
            TableFormat::Tsv => format!("{}{summary}\n", matrix.to_tsv()),
            TableFormat::Md => format!("{}\n{summary}\n", matrix.to_markdown()),
        }
    };
    write_out(a.out.as_deref(), &text)
}

fn evaluate(a: &EvaluateArgs, by: PairBy) -> Result<()> {
    let gold = read_graphs(&a.gold)?;
    let pred = read_graphs(&a.pred)?;
    let pairs = pair(&gold, &pred, by, ("gold", "predicted"))?;
    let per_sentence = par_map(&pairs, |(g, p)| {
        EvalSummary::sentence(g, p).map_err(|e| e.to_string())
    })?;
    let mut summary = EvalSummary::default();
    for s in &per_sentence {
        summary.add(s);
    }

    let rows = match &a.ud {
        Some(path) if a.fine_grained => {
            let ud = convert_trees(&read_trees(path)?, ConvertOptions::default(), path)?;
            let golds: Vec<UnifiedDag> = pairs.iter().map(|(g, _)| (*g).clone()).collect();
            let ud_pairs = pair(&golds, &ud, by, ("gold", "UD"))?;
            let triples: Vec<_> = pairs
                .iter()
                .zip(&ud_pairs)
                .map(|((g, p), (_, u))| (*g, *p, *u))
                .collect();
            let tallies = par_map(&triples, |(g, p, u)| {
                let mut t = FineGrainedTally::default();
                t.add_sentence(g, p, u).map_err(|e| e.to_string())?;
                Ok(t)
            })?;
            let mut total = FineGrainedTally::default();
            for t in &tallies {
                total.merge(t);
            }
            Some(total.rows())
        }
        _ => None,
    };

    let text = match a.format {
        ReportFormat::Json => {
            let scores = |c: synsem_core::EvalCounts| {
                json!({
                    "n_gold": c.n_gold,
                    "n_pred": c.n_pred,
                    "n_correct": c.n_correct,
                    "precision": c.precision(),
                    "recall": c.recall(),
                    "f1": c.f1(),
                })
            };
            let mut doc = json!({
                "primary_labeled": scores(summary.primary_labeled),
                "primary_unlabeled": scores(summary.primary_unlabeled),
                "remote_labeled": scores(summary.remote_labeled),
                "remote_unlabeled": scores(summary.remote_unlabeled),
            });
            if let Some(rows) = &rows {
                let mut sorted = rows.clone();
                synsem_core::eval::sort_rows(&mut sorted, ReportOrder::LabeledF1);
                doc["fine_grained"] = json!(sorted);
            }
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?
            )
        }
        ReportFormat::Tsv | ReportFormat::Md => {
            let fmt = if a.format == ReportFormat::Tsv {
                TableFormat::Tsv
            } else {
                TableFormat::Md
            };
            let mut text = fmt.render(&summary.to_table());
            if let Some(rows) = &rows {
                text.push('\n');
                text.push_str(&fmt.render(&render_report(rows, ReportOrder::LabeledF1)));
            }
            text
        }
    };
    write_out(a.out.as_deref(), &text)
}
