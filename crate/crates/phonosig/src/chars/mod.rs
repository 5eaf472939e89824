//! Wordlist ingestion and phonotactic character extraction.
//!
//! A *doculect* is one wordlist; a *form* is one word as an ordered list of
//! segment tokens. Every form is padded with the reserved word-boundary
//! token `#` on both sides, and each adjacent token pair (a *biphone*) feeds
//! three kinds of character matrix:
//!
//! - binary presence/absence of a biphone,
//! - forward transition probabilities P(y | x precedes),
//! - backward transition probabilities P(x | y follows),
//!
//! at the segment level or projected through a natural-class map.

mod classmap;
mod extract;
mod matrix;
mod tukey;
mod wordlist;

pub use classmap::{parse_class_maps, read_class_maps, ClassMap, ClassMapSet, Scheme};
pub use extract::{
    backward_transition_matrix, binary_biphone_matrix, class_transition_matrix,
    forward_transition_matrix, inventory, Direction,
};
pub use matrix::{skew, CharKey, CharKind, CharacterMatrix, FilterOptions, FilterReport};
pub use tukey::{tukey_normalize, tukey_transform, TukeyResult};
pub use wordlist::{
    parse_wordlists, read_wordlists, write_wordlists_tsv, WordlistData,
};

use thiserror::Error;

/// Reserved word-boundary token.
pub const BOUNDARY: &str = "#";

#[derive(Debug, Error)]
pub enum CharsError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("doculect {doculect:?} has an empty wordlist")]
    EmptyWordlist { doculect: String },
    #[error("segment {segment:?} is not covered by the {scheme} class map")]
    UnmappedSegment { segment: String, scheme: String },
    #[error("class {class:?} is not a valid {scheme} class")]
    InvalidClass { class: String, scheme: String },
    #[error("unknown scheme {0:?} (expected place, major_place, or manner)")]
    UnknownScheme(String),
    #[error("column contains no non-missing values")]
    AllMissing,
    #[error("expected a binary column but found value {0}")]
    NonBinaryValue(f64),
    #[error("power transform requires positive values, found {0}")]
    NonPositiveValue(f64),
    #[error("matrix has no character {0:?}")]
    UnknownCharacter(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// One word as an ordered list of segment tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedForm {
    pub segments: Vec<String>,
}

impl SegmentedForm {
    pub fn new(segments: Vec<String>) -> Self {
        SegmentedForm { segments }
    }
}

/// A language variety as documented by one wordlist.
#[derive(Debug, Clone)]
pub struct Doculect {
    pub id: String,
    pub forms: Vec<SegmentedForm>,
}
