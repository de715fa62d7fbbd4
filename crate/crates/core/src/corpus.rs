//! Core data types and file I/O for line-aligned parallel corpora.
//!
//! The on-disk format is two plain-text UTF-8 files named `<stem>.<lang>`
//! (e.g. `bible.en` / `bible.gez`), one sentence per line, Unix newlines,
//! no BOM. Text is NFC-normalized and whitespace-trimmed at ingestion and
//! never re-normalized afterwards.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::textnorm::nfc;

/// Short lowercase language identifier, e.g. `en`, `gez`, `amh`, `tir`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn new(code: &str) -> Result<Self> {
        if code.is_empty()
            || !code
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        {
            return Err(Error::Config(format!(
                "invalid language code {code:?}: must be nonempty lowercase ASCII letters/digits"
            )));
        }
        Ok(LanguageTag(code.to_string()))
    }

    pub fn code(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A translation direction, e.g. `en-gez`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub source: LanguageTag,
    pub target: LanguageTag,
}

impl Direction {
    pub fn new(source: LanguageTag, target: LanguageTag) -> Result<Self> {
        if source == target {
            return Err(Error::Config(format!(
                "direction source and target must differ (both {source})"
            )));
        }
        Ok(Direction { source, target })
    }

    /// Parses `"en-gez"` style notation.
    pub fn parse(s: &str) -> Result<Self> {
        let (src, tgt) = s
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("invalid direction {s:?}: expected src-tgt")))?;
        Direction::new(LanguageTag::new(src)?, LanguageTag::new(tgt)?)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

/// One aligned sentence pair with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    /// NFC-normalized, trimmed, newline-free source sentence.
    pub source_text: String,
    /// NFC-normalized, trimmed, newline-free target sentence.
    pub target_text: String,
    pub direction: Direction,
    /// Domain label, e.g. "bible", "tanzil".
    pub domain: String,
    /// Where the pair came from: file and 1-based line number.
    pub origin: String,
}

/// An ordered parallel corpus for a single direction. Order is ingestion
/// order and is stable across runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub direction: Direction,
    pairs: Vec<SentencePair>,
}

impl Corpus {
    pub fn new(direction: Direction) -> Self {
        Corpus {
            direction,
            pairs: Vec::new(),
        }
    }

    pub fn from_pairs(direction: Direction, pairs: Vec<SentencePair>) -> Result<Self> {
        for p in &pairs {
            if p.direction != direction {
                return Err(Error::Config(format!(
                    "pair from {} in a {} corpus (origin {})",
                    p.direction, direction, p.origin
                )));
            }
        }
        Ok(Corpus { direction, pairs })
    }

    pub fn push(&mut self, pair: SentencePair) -> Result<()> {
        if pair.direction != self.direction {
            return Err(Error::Config(format!(
                "pair from {} in a {} corpus (origin {})",
                pair.direction, self.direction, pair.origin
            )));
        }
        self.pairs.push(pair);
        Ok(())
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Result of ingesting a file pair: the corpus plus how many aligned lines
/// were dropped because one side was empty after trimming.
#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub dropped_lines: usize,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    let mut lines: Vec<&str> = text.split('\n').collect();
    // A trailing newline produces one empty final element, not a line.
    if lines.last() == Some(&"") {
        lines.pop();
    }
    Ok(lines.into_iter().map(str::to_string).collect())
}

/// Reads two line-aligned files into a corpus. Texts are NFC-normalized and
/// trimmed; aligned lines where either side ends up empty are dropped and
/// counted rather than failing, since real corpora contain blank lines.
pub fn ingest_parallel(
    source_path: &Path,
    target_path: &Path,
    direction: &Direction,
    domain: &str,
) -> Result<IngestOutcome> {
    let source_lines = read_lines(source_path)?;
    let target_lines = read_lines(target_path)?;
    if source_lines.len() != target_lines.len() {
        return Err(Error::Alignment {
            source_path: source_path.to_path_buf(),
            target_path: target_path.to_path_buf(),
            source_lines: source_lines.len(),
            target_lines: target_lines.len(),
        });
    }

    let mut corpus = Corpus::new(direction.clone());
    let mut dropped = 0usize;
    for (idx, (src, tgt)) in source_lines.iter().zip(&target_lines).enumerate() {
        let src = nfc(src.trim());
        let tgt = nfc(tgt.trim());
        if src.is_empty() || tgt.is_empty() {
            dropped += 1;
            continue;
        }
        corpus.pairs.push(SentencePair {
            source_text: src,
            target_text: tgt,
            direction: direction.clone(),
            domain: domain.to_string(),
            origin: format!("{}:{}", source_path.display(), idx + 1),
        });
    }
    Ok(IngestOutcome {
        corpus,
        dropped_lines: dropped,
    })
}

/// Writes a corpus back to two line-aligned files, one sentence per line,
/// newline-terminated. `ingest_parallel` of the output reproduces the
/// corpus texts exactly.
pub fn write_parallel(corpus: &Corpus, source_path: &Path, target_path: &Path) -> Result<()> {
    let mut src = String::new();
    let mut tgt = String::new();
    for p in &corpus.pairs {
        src.push_str(&p.source_text);
        src.push('\n');
        tgt.push_str(&p.target_text);
        tgt.push('\n');
    }
    fs::write(source_path, src).map_err(|e| Error::io(source_path, e))?;
    fs::write(target_path, tgt).map_err(|e| Error::io(target_path, e))?;
    Ok(())
}
