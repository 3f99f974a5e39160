//! Treebank readers and the unified-format writer.

pub mod conllu;
pub mod ucca_json;
pub mod unified;

pub use conllu::{parse_conllu, universal_relation, ConlluError, UdToken, UdTree};
pub use ucca_json::{
    parse_ucca_json, terminal_id, write_ucca_json, UccaEdge, UccaError, UccaGraph, UccaToken,
};
pub use unified::{dag_to_json_line, parse_unified, write_unified, UnifiedError};
