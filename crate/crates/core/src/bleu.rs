//! Corpus-level BLEU with a deterministic, language-independent tokenizer.
//!
//! The tokenizer NFC-normalizes, puts spaces around every Unicode
//! punctuation character (Latin marks and the Ethiopic ፠–፨ block alike),
//! and splits on whitespace, without lowercasing. Scoring is classic
//! single-reference corpus BLEU: clipped n-gram counts (n = 1..4) summed
//! over the corpus before division, a brevity penalty, and the geometric
//! mean of the four precisions. Unsmoothed by default; an add-one mode is
//! available for small sets where 4-gram zeros are likely, and it changes
//! nothing when all raw precisions are positive.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::Direction;
use crate::error::{Error, Result};
use crate::tag::MultilingualBundle;
use crate::textnorm::{is_punctuation, nfc};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    AddOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// Corpus BLEU in [0, 100].
    pub score: f64,
    /// Modified n-gram precisions for n = 1..4, each in [0, 1].
    pub precisions: [f64; MAX_ORDER],
    /// In (0, 1]; 1 when the hypothesis is at least as long as the reference.
    pub brevity_penalty: f64,
    pub hyp_length: usize,
    pub ref_length: usize,
    pub smoothing: Smoothing,
}

/// Splits a text for scoring: NFC, spaces around punctuation, whitespace
/// split, case preserved.
pub fn eval_tokenize(text: &str) -> Vec<String> {
    let normalized = nfc(text);
    let mut spaced = String::with_capacity(normalized.len());
    for c in normalized.chars() {
        if is_punctuation(c) {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            *counts.entry(&tokens[i..i + n]).or_default() += 1;
        }
    }
    counts
}

/// Corpus BLEU over paired hypothesis/reference sentences.
pub fn bleu_corpus_with(
    hypotheses: &[String],
    references: &[String],
    smoothing: Smoothing,
) -> Result<BleuReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let mut hyp_length = 0usize;
    let mut ref_length = 0usize;
    for (hyp, reference) in hypotheses.iter().zip(references) {
        let hyp_tokens = eval_tokenize(hyp);
        let ref_tokens = eval_tokenize(reference);
        hyp_length += hyp_tokens.len();
        ref_length += ref_tokens.len();
        for n in 1..=MAX_ORDER {
            let hyp_counts = ngram_counts(&hyp_tokens, n);
            let ref_counts = ngram_counts(&ref_tokens, n);
            for (gram, count) in &hyp_counts {
                totals[n - 1] += count;
                let clip = ref_counts.get(gram).copied().unwrap_or(0);
                matches[n - 1] += (*count).min(clip);
            }
        }
    }

    let mut precisions = [0.0f64; MAX_ORDER];
    for n in 0..MAX_ORDER {
        precisions[n] = match smoothing {
            Smoothing::None => {
                if totals[n] > 0 {
                    matches[n] as f64 / totals[n] as f64
                } else {
                    0.0
                }
            }
            Smoothing::AddOne => {
                // Only zero-match orders get smoothed, so the score equals
                // the unsmoothed one whenever all raw precisions are > 0.
                if matches[n] > 0 {
                    matches[n] as f64 / totals[n] as f64
                } else {
                    1.0 / (totals[n] as f64 + 1.0)
                }
            }
        };
    }

    let brevity_penalty = if hyp_length == 0 {
        0.0
    } else if hyp_length > ref_length {
        1.0
    } else {
        (1.0 - ref_length as f64 / hyp_length as f64).exp()
    };

    let score = if precisions.iter().any(|&p| p <= 0.0) {
        0.0
    } else {
        let log_mean: f64 =
            precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        100.0 * brevity_penalty * log_mean.exp()
    };

    Ok(BleuReport {
        score,
        precisions,
        brevity_penalty,
        hyp_length,
        ref_length,
        smoothing,
    })
}

/// Unsmoothed corpus BLEU.
pub fn bleu_corpus(hypotheses: &[String], references: &[String]) -> Result<BleuReport> {
    bleu_corpus_with(hypotheses, references, Smoothing::None)
}

/// Scores each direction of a multilingual bundle separately, using that
/// direction's test targets as references.
pub fn bleu_by_direction(
    bundle: &MultilingualBundle,
    hypotheses: &BTreeMap<Direction, Vec<String>>,
) -> Result<BTreeMap<Direction, BleuReport>> {
    let directions = bundle.directions();
    let missing: Vec<String> = directions
        .iter()
        .filter(|d| !hypotheses.contains_key(d))
        .map(|d| d.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingDirections(missing.join(", ")));
    }
    let mut out = BTreeMap::new();
    for direction in directions {
        let references: Vec<String> = bundle
            .test_for(&direction)
            .iter()
            .map(|p| p.target_text.clone())
            .collect();
        let hyps = &hypotheses[&direction];
        if hyps.len() != references.len() {
            return Err(Error::LengthMismatch {
                hypotheses: hyps.len(),
                references: references.len(),
            });
        }
        out.insert(direction, bleu_corpus(hyps, references.as_slice())?);
    }
    Ok(out)
}

impl BleuReport {
    /// One-line human-readable form, precisions as percentages.
    pub fn to_human_line(&self) -> String {
        format!(
            "BLEU = {:.2} {:.1}/{:.1}/{:.1}/{:.1} (BP = {:.3} ratio = {:.3} hyp_len = {} ref_len = {})",
            self.score,
            self.precisions[0] * 100.0,
            self.precisions[1] * 100.0,
            self.precisions[2] * 100.0,
            self.precisions[3] * 100.0,
            self.brevity_penalty,
            if self.ref_length > 0 {
                self.hyp_length as f64 / self.ref_length as f64
            } else {
                0.0
            },
            self.hyp_length,
            self.ref_length
        )
    }

    /// Machine-readable key-value form.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("bleu={:.6}\n", self.score));
        for (i, p) in self.precisions.iter().enumerate() {
            s.push_str(&format!("p{}={:.6}\n", i + 1, p));
        }
        s.push_str(&format!("bp={:.6}\n", self.brevity_penalty));
        s.push_str(&format!("hyp_len={}\n", self.hyp_length));
        s.push_str(&format!("ref_len={}\n", self.ref_length));
        s.push_str(&format!(
            "smoothed={}\n",
            matches!(self.smoothing, Smoothing::AddOne)
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_splits_latin_punctuation() {
        assert_eq!(eval_tokenize("Hello, world."), strs(&["Hello", ",", "world", "."]));
    }

    #[test]
    fn tokenize_splits_ethiopic_punctuation() {
        assert_eq!(eval_tokenize("እጅ ገደርከሙ።"), strs(&["እጅ", "ገደርከሙ", "።"]));
    }

    #[test]
    fn tokenize_empty() {
        assert!(eval_tokenize("").is_empty());
    }

    #[test]
    fn tokenize_keeps_case() {
        assert_eq!(eval_tokenize("Hello World"), strs(&["Hello", "World"]));
    }

    #[test]
    fn identity_scores_100() {
        let sentences = strs(&["the cat sat on the mat", "ሰላም ለከ እጅ ገደርከሙ"]);
        let report = bleu_corpus(&sentences, &sentences).unwrap();
        assert_eq!(report.score, 100.0);
        assert_eq!(report.precisions, [1.0; 4]);
        assert_eq!(report.brevity_penalty, 1.0);
    }

    #[test]
    fn hand_derived_fixture() {
        // hyp "a b c d" vs ref "a b c d e": p = (4/4, 3/3, 2/2, 1/1),
        // BP = exp(1 - 5/4) = exp(-0.25).
        let report = bleu_corpus(&strs(&["a b c d"]), &strs(&["a b c d e"])).unwrap();
        assert_eq!(report.precisions, [1.0; 4]);
        let expected_bp = (-0.25f64).exp();
        assert!((report.brevity_penalty - expected_bp).abs() < 1e-12);
        assert!((report.score - 100.0 * expected_bp).abs() < 1e-9);
        assert!((report.score - 77.88).abs() < 0.01);
        assert_eq!((report.hyp_length, report.ref_length), (4, 5));
    }

    #[test]
    fn disjoint_tokens_score_zero() {
        let report = bleu_corpus(&strs(&["x y z w"]), &strs(&["a b c d"])).unwrap();
        assert_eq!(report.score, 0.0);
        assert_eq!(report.precisions, [0.0; 4]);
    }

    #[test]
    fn length_mismatch_and_empty_error() {
        assert!(matches!(
            bleu_corpus(&strs(&["a"]), &strs(&["a", "b"])),
            Err(Error::LengthMismatch { hypotheses: 1, references: 2 })
        ));
        assert!(matches!(bleu_corpus(&[], &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn paired_permutation_invariance() {
        let hyps = strs(&["a b c d", "e f g h", "i j k l m"]);
        let refs = strs(&["a b c x", "e f y h", "i j k l"]);
        let base = bleu_corpus(&hyps, &refs).unwrap();
        let perm = [2usize, 0, 1];
        let hyps_p: Vec<String> = perm.iter().map(|&i| hyps[i].clone()).collect();
        let refs_p: Vec<String> = perm.iter().map(|&i| refs[i].clone()).collect();
        let permuted = bleu_corpus(&hyps_p, &refs_p).unwrap();
        assert_eq!(base.score, permuted.score);
        assert_eq!(base.precisions, permuted.precisions);
    }

    #[test]
    fn smoothing_only_kicks_in_on_zero_orders() {
        // All positive precisions: modes agree exactly.
        let hyps = strs(&["a b c d e"]);
        let refs = strs(&["a b c d f"]);
        let plain = bleu_corpus_with(&hyps, &refs, Smoothing::None).unwrap();
        let smooth = bleu_corpus_with(&hyps, &refs, Smoothing::AddOne).unwrap();
        assert!(plain.precisions.iter().all(|&p| p > 0.0));
        assert_eq!(plain.score, smooth.score);

        // Overlapping but no 4-gram match: smoothed is nonzero.
        let hyps = strs(&["a b x d"]);
        let refs = strs(&["a b c d"]);
        assert_eq!(bleu_corpus(&hyps, &refs).unwrap().score, 0.0);
        assert!(bleu_corpus_with(&hyps, &refs, Smoothing::AddOne).unwrap().score > 0.0);
    }

    #[test]
    fn clipping_limits_repeated_ngrams() {
        // "the the the the" vs "the cat": only 1 unigram match after clipping...
        // ref has one "the", hyp has four.
        let report = bleu_corpus(&strs(&["the the the the"]), &strs(&["the cat"])).unwrap();
        assert!((report.precisions[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn human_line_format() {
        let report = bleu_corpus(&strs(&["a b c d"]), &strs(&["a b c d e"])).unwrap();
        let line = report.to_human_line();
        assert!(line.starts_with("BLEU = 77.88 100.0/100.0/100.0/100.0 (BP = 0.779"), "{line}");
        assert!(line.contains("hyp_len = 4"));
    }

    #[test]
    fn kv_format_is_parseable() {
        let report = bleu_corpus(&strs(&["a b c d"]), &strs(&["a b c d e"])).unwrap();
        let kv = report.to_kv();
        assert!(kv.contains("bleu=77.88"));
        assert!(kv.contains("hyp_len=4\n"));
        assert!(kv.contains("smoothed=false\n"));
    }
}
