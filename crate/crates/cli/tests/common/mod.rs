//! Shared synthetic-corpus builders for the integration suites.
// Not every suite uses every helper.
#![allow(dead_code)]

use gezmt_core::corpus::{Corpus, Direction, SentencePair};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const LATIN_SYLLABLES: [&str; 12] = [
    "ba", "ke", "lo", "mi", "nu", "ra", "se", "ti", "vo", "wu", "za", "del",
];
const ETHIOPIC_SYLLABLES: [&str; 12] = [
    "ሰ", "ላ", "ም", "ገ", "ደ", "ር", "ከ", "ሙ", "እ", "ጅ", "ብ", "ት",
];

fn word(rng: &mut ChaCha20Rng, syllables: &[&str]) -> String {
    let n = rng.gen_range(2..=4);
    (0..n)
        .map(|_| *syllables.choose(rng).unwrap())
        .collect()
}

fn sentence(rng: &mut ChaCha20Rng, syllables: &[&str], words: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.gen_range(words);
    let mut s = (0..n)
        .map(|_| word(rng, syllables))
        .collect::<Vec<_>>()
        .join(" ");
    if rng.gen_bool(0.5) {
        s.push('.');
    }
    s
}

pub fn pair(src: &str, tgt: &str, domain: &str, origin: usize) -> SentencePair {
    SentencePair {
        source_text: src.to_string(),
        target_text: tgt.to_string(),
        direction: Direction::parse("en-gez").unwrap(),
        domain: domain.to_string(),
        origin: format!("synthetic:{origin}"),
    }
}

/// A punctuation/case variant with the same normalization keys.
fn key_equivalent_variant(text: &str, rng: &mut ChaCha20Rng) -> String {
    let mut s: String = if rng.gen_bool(0.5) {
        text.to_uppercase()
    } else {
        text.to_string()
    };
    s.push_str(if rng.gen_bool(0.5) { "!" } else { " ።" });
    s
}

/// Builds a synthetic parallel corpus of exactly
/// `base + duplicates + contaminated` pairs across the given domains:
/// `duplicates` pairs are key-equivalent copies of earlier pairs, and
/// `contaminated` pairs reuse an earlier pair's source verbatim (with a
/// fresh target) under a different domain, creating cross-domain overlap
/// pressure without being pair-level duplicates.
pub fn synthetic_corpus(
    base: usize,
    duplicates: usize,
    contaminated: usize,
    domains: &[&str],
    seed: u64,
) -> Corpus {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut pairs: Vec<SentencePair> = Vec::with_capacity(base + duplicates + contaminated);
    for i in 0..base {
        // Serial number keeps base pairs pairwise key-distinct.
        let src = format!("{} x{i}", sentence(&mut rng, &LATIN_SYLLABLES, 3..=10));
        let tgt = format!("{} የ{i}", sentence(&mut rng, &ETHIOPIC_SYLLABLES, 3..=10));
        pairs.push(pair(&src, &tgt, domains[i % domains.len()], i));
    }
    for i in 0..duplicates {
        let victim = pairs[rng.gen_range(0..base)].clone();
        let src = key_equivalent_variant(&victim.source_text, &mut rng);
        let tgt = key_equivalent_variant(&victim.target_text, &mut rng);
        pairs.push(pair(&src, &tgt, &victim.domain, base + i));
    }
    for i in 0..contaminated {
        let victim = pairs[rng.gen_range(0..base)].clone();
        let other_domain = domains
            .iter()
            .find(|d| **d != victim.domain)
            .unwrap_or(&domains[0]);
        let tgt = format!(
            "{} ፰{i}",
            sentence(&mut rng, &ETHIOPIC_SYLLABLES, 3..=10)
        );
        pairs.push(pair(
            &victim.source_text,
            &tgt,
            other_domain,
            base + duplicates + i,
        ));
    }
    pairs.shuffle(&mut rng);
    Corpus::from_pairs(Direction::parse("en-gez").unwrap(), pairs).unwrap()
}

/// Random sentences mixing Latin and Ethiopic scripts.
pub fn synthetic_sentences(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                sentence(&mut rng, &LATIN_SYLLABLES, 2..=9)
            } else {
                sentence(&mut rng, &ETHIOPIC_SYLLABLES, 2..=9)
            }
        })
        .collect()
}
