use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },

    #[error("line {line}: duplicate concept id `{id}`")]
    DuplicateConcept { line: usize, id: String },

    #[error("line {line}: concept `{concept}` names unknown parent `{parent}`")]
    UnknownParent {
        line: usize,
        concept: String,
        parent: String,
    },

    #[error("line {line}: concept `{concept}` ({pos}) has parent `{parent}` of a different part of speech")]
    MixedPos {
        line: usize,
        concept: String,
        pos: String,
        parent: String,
    },

    #[error("cycle in parent relation: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("line {line}: sense {lemma}#{sense} ({pos}) is attached to both `{first}` and `{second}`")]
    DuplicateAttachment {
        line: usize,
        lemma: String,
        pos: String,
        sense: u32,
        first: String,
        second: String,
    },

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("line {line}: unknown concept `{id}`")]
    UnknownConceptAt { line: usize, id: String },

    #[error("line {line}: concept `{id}` is not a {expected} concept")]
    WrongPos {
        line: usize,
        id: String,
        expected: String,
    },

    #[error("line {line}: concept `{concept}` is not a sense of `{lemma}`")]
    LemmaMismatch {
        line: usize,
        lemma: String,
        concept: String,
    },

    #[error("line {line}: bad relation `{token}` (expected subj or obj)")]
    BadRel { line: usize, token: String },

    #[error("invalid fold count {k} for {n} instances")]
    InvalidFolds { k: usize, n: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}
