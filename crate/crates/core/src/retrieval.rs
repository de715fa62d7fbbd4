//! Fuzzy-match retrieval: an immutable index of embedded source sentences
//! with their translations, searched by exhaustive cosine similarity.
//! Corpus sizes here never justify an approximate structure, so the index
//! IS the brute-force scan.

use std::fs;
use std::path::Path;

use crate::corpus::Corpus;
use crate::embed::Embedder;
use crate::error::{Error, Result};

/// Retrieval never returns more than this many matches.
pub const MAX_FUZZY_MATCHES: usize = 10;

struct IndexEntry {
    source: String,
    target: String,
    vector: Vec<f64>,
}

/// Immutable collection of embedded source sentences and their
/// translations. Safe for concurrent reads once built.
pub struct RetrievalIndex {
    embedder: Box<dyn Embedder>,
    entries: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyMatch {
    pub source: String,
    pub target: String,
    pub similarity: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Embeds every source sentence of the corpus. Deterministic for a fixed
/// corpus and embedder.
pub fn build_index(corpus: &Corpus, embedder: Box<dyn Embedder>) -> RetrievalIndex {
    let entries = corpus
        .pairs()
        .iter()
        .map(|p| IndexEntry {
            source: p.source_text.clone(),
            target: p.target_text.clone(),
            vector: embedder.embed(&p.source_text),
        })
        .collect();
    RetrievalIndex { embedder, entries }
}

impl RetrievalIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn embedder_identity(&self) -> String {
        self.embedder.identity()
    }

    /// Top-k entries by cosine similarity against the query, descending.
    /// Ties break toward the earlier index position. Returns fewer than k
    /// only when the index is smaller.
    pub fn retrieve(&self, query: &str, k: usize) -> Vec<FuzzyMatch> {
        let query_vec = self.embedder.embed(query);
        let mut scored: Vec<(usize, f64)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i, dot(&e.vector, &query_vec)))
            .collect();
        scored.sort_by(|(ia, sa), (ib, sb)| {
            sb.partial_cmp(sa).expect("finite similarity").then(ia.cmp(ib))
        });
        scored
            .into_iter()
            .take(k)
            .map(|(i, similarity)| FuzzyMatch {
                source: self.entries[i].source.clone(),
                target: self.entries[i].target.clone(),
                similarity,
            })
            .collect()
    }

    /// Persists the index. Entry texts are stored and vectors recomputed at
    /// load time; the header records the embedder identity so a mismatched
    /// embedder cannot silently produce incomparable vectors.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = format!(
            "retrieval-index v1 {} {}\n",
            self.entries.len(),
            self.embedder.identity()
        );
        for e in &self.entries {
            s.push_str(&escape(&e.source));
            s.push('\t');
            s.push_str(&escape(&e.target));
            s.push('\n');
        }
        fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, embedder: Box<dyn Embedder>) -> Result<RetrievalIndex> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::ModelFormat {
            line: 1,
            message: "empty index file".to_string(),
        })?;
        let parts: Vec<&str> = header.splitn(4, ' ').collect();
        if parts.len() != 4 || parts[0] != "retrieval-index" || parts[1] != "v1" {
            return Err(Error::ModelFormat {
                line: 1,
                message: "expected header `retrieval-index v1 <count> <embedder>`".to_string(),
            });
        }
        let count: usize = parts[2].parse().map_err(|_| Error::ModelFormat {
            line: 1,
            message: "entry count is not an integer".to_string(),
        })?;
        if parts[3] != embedder.identity() {
            return Err(Error::EmbedderMismatch {
                expected: parts[3].to_string(),
                found: embedder.identity(),
            });
        }
        let mut entries = Vec::with_capacity(count);
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let (src, tgt) = line.split_once('\t').ok_or_else(|| Error::ModelFormat {
                line: lineno,
                message: "entry is not `source<TAB>target`".to_string(),
            })?;
            let source = unescape(src).ok_or_else(|| Error::ModelFormat {
                line: lineno,
                message: "bad escape in source".to_string(),
            })?;
            let target = unescape(tgt).ok_or_else(|| Error::ModelFormat {
                line: lineno,
                message: "bad escape in target".to_string(),
            })?;
            let vector = embedder.embed(&source);
            entries.push(IndexEntry {
                source,
                target,
                vector,
            });
        }
        if entries.len() != count {
            return Err(Error::ModelFormat {
                line: 1,
                message: format!(
                    "header declares {count} entries, file has {}",
                    entries.len()
                ),
            });
        }
        Ok(RetrievalIndex { embedder, entries })
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t")
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                '\\' => out.push('\\'),
                't' => out.push('\t'),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Direction, SentencePair};
    use crate::embed::CharNgramEmbedder;

    fn corpus(pairs: &[(&str, &str)]) -> Corpus {
        let d = Direction::parse("en-gez").unwrap();
        let pairs = pairs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| SentencePair {
                source_text: s.to_string(),
                target_text: t.to_string(),
                direction: d.clone(),
                domain: "test".to_string(),
                origin: format!("test:{}", i + 1),
            })
            .collect();
        Corpus::from_pairs(d, pairs).unwrap()
    }

    #[test]
    fn empty_corpus_empty_index() {
        let index = build_index(&corpus(&[]), Box::<CharNgramEmbedder>::default());
        assert!(index.is_empty());
        assert!(index.retrieve("anything", 5).is_empty());
    }

    #[test]
    fn exact_query_ranks_first_with_similarity_one() {
        let index = build_index(
            &corpus(&[
                ("good morning friends", "a"),
                ("good evening friends", "b"),
                ("completely different words", "c"),
            ]),
            Box::<CharNgramEmbedder>::default(),
        );
        let matches = index.retrieve("good evening friends", 3);
        assert_eq!(matches[0].target, "b");
        assert!((matches[0].similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_index_returns_fewer_than_k() {
        let index = build_index(
            &corpus(&[("aa bb", "1"), ("cc dd", "2"), ("ee ff", "3")]),
            Box::<CharNgramEmbedder>::default(),
        );
        assert_eq!(index.retrieve("aa bb", 10).len(), 3);
    }

    #[test]
    fn ties_break_toward_earlier_entry() {
        // identical sources: identical similarity, first entry wins
        let index = build_index(
            &corpus(&[("same text", "first"), ("same text", "second")]),
            Box::<CharNgramEmbedder>::default(),
        );
        let matches = index.retrieve("same text", 2);
        assert_eq!(matches[0].target, "first");
        assert_eq!(matches[1].target, "second");
    }

    #[test]
    fn save_load_round_trip_with_tabs() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("x.idx");
        let index = build_index(
            &corpus(&[("has\ttab here", "tgt\twith tab"), ("plain", "y")]),
            Box::<CharNgramEmbedder>::default(),
        );
        index.save(&path).unwrap();
        let loaded = RetrievalIndex::load(&path, Box::<CharNgramEmbedder>::default()).unwrap();
        assert_eq!(loaded.len(), 2);
        let matches = loaded.retrieve("has\ttab here", 1);
        assert_eq!(matches[0].target, "tgt\twith tab");
        assert!((matches[0].similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn load_rejects_mismatched_embedder() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("x.idx");
        build_index(&corpus(&[("a b", "c")]), Box::new(CharNgramEmbedder::new(4096)))
            .save(&path)
            .unwrap();
        match RetrievalIndex::load(&path, Box::new(CharNgramEmbedder::new(512))) {
            Err(Error::EmbedderMismatch { .. }) => {}
            Err(other) => panic!("unexpected error: {other}"),
            Ok(_) => panic!("mismatched embedder was accepted"),
        }
    }
}
