//! Corpus engineering, evaluation, and fuzzy-match translation toolkit for
//! low-resource machine translation.
//!
//! The crate covers the data side of a multilingual NMT workflow, with
//! Ge'ez and its related Ethiopic-script languages as the motivating case:
//!
//! - parallel corpus ingestion and line-aligned plain-text I/O
//!   ([`corpus`]),
//! - key-based deduplication, overlap-safe stratified train/test/validation
//!   splits, and split verification ([`split`], [`stats`]),
//! - byte-pair-encoding subword models with shared multilingual
//!   vocabularies ([`bpe`]),
//! - target-language tagging (`<2gez>`-style) and multilingual corpus
//!   assembly ([`tag`]),
//! - corpus BLEU with a deterministic language-independent tokenizer
//!   ([`bleu`]),
//! - embedding-similarity fuzzy-match retrieval and few-shot translation
//!   through a pluggable completion backend ([`embed`], [`retrieval`],
//!   [`prompt`], [`backend`], [`mock`]).
//!
//! Neural model training itself is out of scope; this crate prepares the
//! data, scores the outputs, and drives in-context translation.

pub mod backend;
pub mod bleu;
pub mod bpe;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod mock;
pub mod prompt;
pub mod retrieval;
pub mod split;
pub mod stats;
pub mod tag;
pub mod textnorm;

mod util;

pub use corpus::{Corpus, Direction, LanguageTag, SentencePair};
pub use error::{Error, Result};
pub use split::{OverlapMode, SplitBundle, SplitRatios};
