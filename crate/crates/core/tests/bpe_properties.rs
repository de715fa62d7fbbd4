//! BPE round-trip, monotonicity, and determinism over synthetic
//! multi-script data.

mod common;

use gezmt_core::bpe::{bpe_train, BpeModel, WORD_END_MARKER};

use common::synthetic_sentences;

fn train(sentences: &[String], vocab_size: usize) -> BpeModel {
    bpe_train(sentences, vocab_size, &[]).unwrap()
}

#[test]
fn decode_encode_identity_on_1000_sentences() {
    let sentences = synthetic_sentences(1000, 77);
    let model = train(&sentences, 600);
    for s in &sentences {
        let tokens = model.encode(s);
        assert_eq!(model.decode(&tokens).unwrap(), *s, "round trip failed for {s:?}");
    }
}

#[test]
fn token_count_bounded_by_codepoints_plus_words() {
    let sentences = synthetic_sentences(200, 5);
    let model = train(&sentences, 400);
    for s in &sentences {
        let bound = s.chars().filter(|c| !c.is_whitespace()).count()
            + s.split_whitespace().count();
        assert!(model.encode(s).len() <= bound);
    }
}

#[test]
fn more_merges_never_lengthen_encodings() {
    let sentences = synthetic_sentences(300, 21);
    let small = train(&sentences, 200);
    let large = train(&sentences, 500);
    // The larger model's merge list extends the smaller one's.
    assert_eq!(&large.merges()[..small.merges().len()], small.merges());
    for s in sentences.iter().take(100) {
        assert!(large.encode(s).len() <= small.encode(s).len());
    }
}

#[test]
fn encoding_concatenation_equals_concatenated_encodings() {
    let sentences = synthetic_sentences(100, 8);
    let model = train(&sentences, 300);
    for pair in sentences.chunks(2) {
        if pair.len() < 2 {
            continue;
        }
        let joined = format!("{} {}", pair[0], pair[1]);
        let mut split_tokens = model.encode(&pair[0]);
        split_tokens.extend(model.encode(&pair[1]));
        assert_eq!(model.encode(&joined), split_tokens);
    }
}

#[test]
fn merge_lists_identical_across_runs() {
    let sentences = synthetic_sentences(500, 99);
    let tags = vec!["<2gez>".to_string(), "<2en>".to_string()];
    let m1 = bpe_train(&sentences, 700, &tags).unwrap();
    let m2 = bpe_train(&sentences, 700, &tags).unwrap();
    assert_eq!(m1.merges(), m2.merges());
    assert_eq!(m1, m2);
}

#[test]
fn save_load_preserves_encodings() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("model.bpe");
    let sentences = synthetic_sentences(300, 31);
    let model = train(&sentences, 450);
    model.save(&path).unwrap();
    let loaded = BpeModel::load(&path).unwrap();
    for s in sentences.iter().take(50) {
        assert_eq!(model.encode(s), loaded.encode(s));
    }
}

#[test]
fn word_end_marker_terminates_every_word() {
    let sentences = synthetic_sentences(100, 63);
    let model = train(&sentences, 300);
    for s in sentences.iter().take(30) {
        let tokens = model.encode(s);
        let words = s.split_whitespace().count();
        let markers = tokens
            .iter()
            .filter(|t| t.ends_with(WORD_END_MARKER))
            .count();
        assert_eq!(markers, words);
    }
}
