//! On-disk corpus store: one JSON record per line, so every stage of the
//! pipeline can reload pairs with their domain and origin intact.

use std::path::Path;

use anyhow::{Context, Result};
use gezmt_core::corpus::{Corpus, Direction, SentencePair};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct Record<'a> {
    source: &'a str,
    target: &'a str,
    domain: &'a str,
    origin: &'a str,
}

#[derive(Debug, Deserialize)]
struct OwnedRecord {
    source: String,
    target: String,
    domain: String,
    origin: String,
}

pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut out = String::new();
    for p in corpus.pairs() {
        let record = Record {
            source: &p.source_text,
            target: &p.target_text,
            domain: &p.domain,
            origin: &p.origin,
        };
        out.push_str(&serde_json::to_string(&record)?);
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_corpus(path: &Path, direction: &Direction) -> Result<Corpus> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let r: OwnedRecord = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: bad corpus record", path.display(), i + 1))?;
        pairs.push(SentencePair {
            source_text: r.source,
            target_text: r.target,
            direction: direction.clone(),
            domain: r.domain,
            origin: r.origin,
        });
    }
    Corpus::from_pairs(direction.clone(), pairs).map_err(Into::into)
}
