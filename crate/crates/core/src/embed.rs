//! Sentence embedders for fuzzy-match retrieval.
//!
//! The built-in embedder hashes character n-grams (n = 2..4) into a
//! fixed-dimension vector with sublinear term-frequency weighting and L2
//! normalization. It is stateless and deterministic, so indexes stay
//! reproducible and the test suite needs no network. Character n-grams
//! also behave sensibly on Ethiopic script, where whitespace words are a
//! weak unit. External embedding services plug in behind the same trait.

use crate::util::fnv1a64;

/// A named, versioned function from text to a fixed-dimension real vector.
/// Identical text must produce identical vectors, L2-normalized for
/// nonempty output.
pub trait Embedder: Send + Sync {
    /// Stable identity (name + version), recorded in indexes; loading an
    /// index with a different embedder identity is an error. Must contain
    /// no whitespace.
    fn identity(&self) -> String;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Hashed character n-gram TF embedder, the deterministic default.
#[derive(Debug, Clone)]
pub struct CharNgramEmbedder {
    dim: usize,
}

pub const DEFAULT_EMBED_DIM: usize = 4096;
const MIN_NGRAM: usize = 2;
const MAX_NGRAM: usize = 4;

impl CharNgramEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0);
        CharNgramEmbedder { dim }
    }
}

impl Default for CharNgramEmbedder {
    fn default() -> Self {
        CharNgramEmbedder::new(DEFAULT_EMBED_DIM)
    }
}

impl Embedder for CharNgramEmbedder {
    fn identity(&self) -> String {
        format!("char-ngram-tf-v1-d{}-n{}..{}", self.dim, MIN_NGRAM, MAX_NGRAM)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let chars: Vec<char> = text.chars().collect();
        let mut vector = vec![0.0f64; self.dim];
        let mut buf = String::new();
        for n in MIN_NGRAM..=MAX_NGRAM {
            if chars.len() < n {
                break;
            }
            for window in chars.windows(n) {
                buf.clear();
                buf.extend(window.iter());
                let bucket = (fnv1a64(buf.as_bytes()) % self.dim as u64) as usize;
                vector[bucket] += 1.0;
            }
        }
        // Sublinear TF, then L2 normalization.
        for v in &mut vector {
            if *v > 0.0 {
                *v = 1.0 + v.ln();
            }
        }
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut vector {
                *v /= norm;
            }
        }
        vector
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_unit_norm() {
        let e = CharNgramEmbedder::default();
        let a = e.embed("ሰላም ለከ እጅ ገደርከሙ");
        let b = e.embed("ሰላም ለከ እጅ ገደርከሙ");
        assert_eq!(a, b);
        let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single_char_embed_to_zero() {
        let e = CharNgramEmbedder::default();
        assert!(e.embed("").iter().all(|&v| v == 0.0));
        assert!(e.embed("a").iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonnegative_components() {
        let e = CharNgramEmbedder::default();
        assert!(e.embed("the quick brown fox").iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn different_texts_differ() {
        let e = CharNgramEmbedder::default();
        assert_ne!(e.embed("good morning"), e.embed("good evening"));
    }
}
