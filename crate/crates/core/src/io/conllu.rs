//! CoNLL-U reader producing basic dependency trees.
//!
//! Multiword-token range lines (`3-4`) and empty nodes (`8.1`) are skipped;
//! the DEPS column is read but not kept.

use std::collections::HashSet;

use thiserror::Error;

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct UdToken {
    /// 1-based syntactic word index.
    pub index: usize,
    pub form: String,
    pub upos: String,
    /// Dependency relation including any subtype, e.g. `obl:tmod`.
    pub deprel: String,
    /// Index of the head token, 0 for the root.
    pub head: usize,
    pub is_punct: bool,
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct UdTree {
    pub sentence_id: String,
    pub tokens: Vec<UdToken>,
}

impl UdTree {
    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }

    /// Token with 1-based `index`.
    pub fn token(&self, index: usize) -> Option<&UdToken> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Index of the token attached to the artificial root.
    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().find(|t| t.head == 0).map(|t| t.index)
    }

    /// Dependents of every token, in token order; entry 0 holds the root.
    pub fn dependents(&self) -> Vec<Vec<usize>> {
        let mut deps = vec![Vec::new(); self.tokens.len() + 1];
        for t in &self.tokens {
            if t.head < deps.len() {
                deps[t.head].push(t.index);
            }
        }
        deps
    }
}

#[derive(Debug, Error, Clone, Eq, PartialEq)]
pub enum ConlluError {
    #[error("expected 10 tab-separated columns, found {found}, line {line}")]
    ColumnCount { line: usize, found: usize },
    #[error("invalid token id {id:?}, line {line}")]
    TokenId { line: usize, id: String },
    #[error("non-integer head {head:?}, line {line}")]
    Head { line: usize, head: String },
    #[error("head out of range, line {line}")]
    HeadOutOfRange { line: usize },
    #[error("no root, sentence {sentence} (line {line})")]
    NoRoot { sentence: usize, line: usize },
    #[error("multiple roots, line {line}")]
    MultipleRoots { line: usize },
    #[error("head cycle, sentence {sentence}")]
    HeadCycle { sentence: usize },
    #[error("empty form, line {line}")]
    EmptyForm { line: usize },
}

impl ConlluError {
    pub fn line(&self) -> Option<usize> {
        match *self {
            ConlluError::ColumnCount { line, .. }
            | ConlluError::TokenId { line, .. }
            | ConlluError::Head { line, .. }
            | ConlluError::HeadOutOfRange { line }
            | ConlluError::NoRoot { line, .. }
            | ConlluError::MultipleRoots { line }
            | ConlluError::EmptyForm { line } => Some(line),
            ConlluError::HeadCycle { .. } => None,
        }
    }
}

/// Relation without its language-specific subtype (`det:def` -> `det`).
pub fn universal_relation(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

struct Block {
    sent_id: Option<String>,
    first_line: usize,
    tokens: Vec<UdToken>,
    lines: Vec<usize>,
}

/// Parses every sentence block of a CoNLL-U document.
pub fn parse_conllu(text: &str) -> Result<Vec<UdTree>, ConlluError> {
    let mut trees = Vec::new();
    let mut block: Option<Block> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if let Some(b) = block.take() {
                finish_block(b, &mut trees)?;
            }
            continue;
        }
        let b = block.get_or_insert_with(|| Block {
            sent_id: None,
            first_line: line_no,
            tokens: Vec::new(),
            lines: Vec::new(),
        });
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    b.sent_id = Some(value.trim().to_owned());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError::ColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: usize = id.parse().map_err(|_| ConlluError::TokenId {
            line: line_no,
            id: id.to_owned(),
        })?;
        if index != b.tokens.len() + 1 {
            return Err(ConlluError::TokenId {
                line: line_no,
                id: id.to_owned(),
            });
        }
        if cols[1].is_empty() {
            return Err(ConlluError::EmptyForm { line: line_no });
        }
        let head: usize = cols[6].parse().map_err(|_| ConlluError::Head {
            line: line_no,
            head: cols[6].to_owned(),
        })?;
        let deprel = cols[7].to_owned();
        b.tokens.push(UdToken {
            index,
            form: cols[1].to_owned(),
            upos: cols[3].to_owned(),
            is_punct: universal_relation(&deprel) == "punct",
            deprel,
            head,
        });
        b.lines.push(line_no);
    }
    if let Some(b) = block.take() {
        finish_block(b, &mut trees)?;
    }
    Ok(trees)
}

fn finish_block(b: Block, trees: &mut Vec<UdTree>) -> Result<(), ConlluError> {
    // comment-only blocks carry no sentence
    if b.tokens.is_empty() {
        return Ok(());
    }
    let sentence = trees.len() + 1;
    let n = b.tokens.len();
    let mut root = None;
    for (t, &line) in b.tokens.iter().zip(&b.lines) {
        if t.head > n {
            return Err(ConlluError::HeadOutOfRange { line });
        }
        if t.head == 0 {
            if root.is_some() {
                return Err(ConlluError::MultipleRoots { line });
            }
            root = Some(t.index);
        }
    }
    if root.is_none() {
        return Err(ConlluError::NoRoot {
            sentence,
            line: b.first_line,
        });
    }
    for t in &b.tokens {
        let mut seen = HashSet::new();
        let mut cur = t.index;
        while cur != 0 {
            if !seen.insert(cur) {
                return Err(ConlluError::HeadCycle { sentence });
            }
            cur = b.tokens[cur - 1].head;
        }
    }
    trees.push(UdTree {
        sentence_id: b.sent_id.unwrap_or_else(|| sentence.to_string()),
        tokens: b.tokens,
    });
    Ok(())
}
