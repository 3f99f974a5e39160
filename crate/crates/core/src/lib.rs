//! Comparison of syntactic dependency treebanks (CoNLL-U) with semantic DAG
//! treebanks (UCCA) through a shared unified-DAG format.
//!
//! The pipeline: [`io`] reads both formats; [`convert`] turns dependency
//! trees into unified DAGs; [`normalize`] does the same for semantic graphs;
//! [`align`] matches units by terminal yield and builds confusion matrices
//! and divergence statistics; [`eval`] scores predicted semantic graphs,
//! overall and per UD relation.

pub mod align;
pub mod convert;
pub mod eval;
pub mod io;
pub mod model;
pub mod normalize;
pub mod table;

pub use align::{
    aggregate_stats, align_sentence, confusion_matrix, overlap_f1, AlignError, ConfusionMatrix,
    OverlapScores, Ratio, SentenceAlignment, StatReport,
};
pub use convert::{
    convert_basic, convert_extended, convert_with, join_mwes, promote_conjunctions, strip_subtypes,
    ConvertError, ConvertOptions,
};
pub use eval::{
    evaluate_ucca, fine_grained, render_report, EdgeClass, EvalCounts, EvalSummary, FineGrainedRow,
    FineGrainedTally, ReportOrder,
};
pub use model::{
    bracketed, canonical_form, CategorySet, Edge, Node, NodeId, NodeKind, Terminal, UnifiedDag,
    Violation, ViolationKind, Yield,
};
pub use normalize::{normalize, to_unified, top_category_index, NormalizeError};
