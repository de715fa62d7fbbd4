//! Few-shot translation plumbing: request parameters, prompt/response
//! flow, and HTTP backend retry behavior against the mock server.

mod common;

use std::time::Duration;

use gezmt_core::backend::{
    translate_few_shot, BackendParams, CompletionBackend, CompletionCall, HttpBackend,
};
use gezmt_core::bleu::bleu_corpus;
use gezmt_core::corpus::{Corpus, Direction, LanguageTag, SentencePair};
use gezmt_core::embed::CharNgramEmbedder;
use gezmt_core::error::Error;
use gezmt_core::mock::{MockBackend, MockResponse, MockServer};
use gezmt_core::retrieval::build_index;

use common::synthetic_sentences;

fn sample_corpus(n: usize, seed: u64) -> Corpus {
    let direction = Direction::parse("en-gez").unwrap();
    let sources = synthetic_sentences(n, seed);
    let targets = synthetic_sentences(n, seed + 1000);
    let pairs = sources
        .into_iter()
        .zip(targets)
        .enumerate()
        .map(|(i, (s, t))| SentencePair {
            source_text: s,
            target_text: t,
            direction: direction.clone(),
            domain: "test".to_string(),
            origin: format!("synthetic:{i}"),
        })
        .collect();
    Corpus::from_pairs(direction, pairs).unwrap()
}

fn langs() -> (LanguageTag, LanguageTag) {
    (LanguageTag::new("en").unwrap(), LanguageTag::new("gez").unwrap())
}

#[test]
fn request_carries_contract_parameters() {
    let corpus = sample_corpus(20, 1);
    let index = build_index(&corpus, Box::<CharNgramEmbedder>::default());
    let backend = MockBackend::fixed("ውጽኢት");
    let (src, tgt) = langs();
    let params = BackendParams::default();

    let query = "one two three four five six seven eight nine ten eleven twelve";
    let result =
        translate_few_shot(&index, &backend, query, &params, 10, &src, &tgt).unwrap();
    assert_eq!(result.translation, "ውጽኢት");

    let calls = backend.calls();
    assert_eq!(calls.len(), 1);
    assert_eq!(calls[0].top_p, 1.0);
    assert_eq!(calls[0].temperature, 0.3);
    assert_eq!(calls[0].max_tokens, 60); // 5 x 12 query tokens
    assert_eq!(calls[0].prompt, result.prompt);
}

#[test]
fn copy_reference_mock_scores_bleu_100_on_50_pairs() {
    let corpus = sample_corpus(50, 9);
    let index = build_index(&corpus, Box::<CharNgramEmbedder>::default());
    let backend = MockBackend::echo_last_example_target();
    let (src, tgt) = langs();
    let params = BackendParams::default();

    let mut hypotheses = Vec::new();
    let mut references = Vec::new();
    for p in corpus.pairs() {
        // Self-retrieval puts the pair itself closest to the query, so the
        // echo backend returns its reference translation.
        let result = translate_few_shot(
            &index,
            &backend,
            &p.source_text,
            &params,
            10,
            &src,
            &tgt,
        )
        .unwrap();
        hypotheses.push(result.translation);
        references.push(p.target_text.clone());
    }
    let report = bleu_corpus(&hypotheses, &references).unwrap();
    assert_eq!(report.score, 100.0);
}

#[test]
fn first_completion_line_is_taken() {
    let corpus = sample_corpus(5, 2);
    let index = build_index(&corpus, Box::<CharNgramEmbedder>::default());
    let backend = MockBackend::fixed("ቀዳማይ መስመር\nEnglish: spurious continuation");
    let (src, tgt) = langs();
    let result = translate_few_shot(
        &index,
        &backend,
        "query text",
        &BackendParams::default(),
        3,
        &src,
        &tgt,
    )
    .unwrap();
    assert_eq!(result.translation, "ቀዳማይ መስመር");
}

#[test]
fn empty_completion_is_an_error() {
    let corpus = sample_corpus(5, 3);
    let index = build_index(&corpus, Box::<CharNgramEmbedder>::default());
    let backend = MockBackend::fixed("");
    let (src, tgt) = langs();
    let err = translate_few_shot(
        &index,
        &backend,
        "query text",
        &BackendParams::default(),
        3,
        &src,
        &tgt,
    )
    .unwrap_err();
    assert!(matches!(err, Error::EmptyCompletion));
}

fn http_backend(url: &str, retries: u32) -> HttpBackend {
    HttpBackend::with_retry(
        url,
        "test-model",
        None,
        retries,
        Duration::from_millis(5),
        Duration::from_secs(5),
    )
    .unwrap()
}

fn call(prompt: &str) -> CompletionCall {
    CompletionCall {
        prompt: prompt.to_string(),
        top_p: 1.0,
        temperature: 0.3,
        max_tokens: 40,
    }
}

#[test]
fn http_backend_round_trips_the_wire_protocol() {
    let server = MockServer::start(|req| MockResponse::Ok(format!("echo:{}", req.prompt)));
    let backend = http_backend(&server.url(), 0);
    let completion = backend.complete(&call("ሰላም prompt")).unwrap();
    assert_eq!(completion, "echo:ሰላም prompt");

    let requests = server.requests();
    assert_eq!(requests.len(), 1);
    assert_eq!(requests[0].model, "test-model");
    assert_eq!(requests[0].prompt, "ሰላም prompt");
    assert_eq!(requests[0].top_p, 1.0);
    assert_eq!(requests[0].temperature, 0.3);
    assert_eq!(requests[0].max_tokens, 40);
}

#[test]
fn http_backend_retries_transient_500s() {
    use std::sync::atomic::{AtomicUsize, Ordering};
    let attempts = std::sync::Arc::new(AtomicUsize::new(0));
    let attempts_bg = attempts.clone();
    let server = MockServer::start(move |_| {
        if attempts_bg.fetch_add(1, Ordering::SeqCst) < 2 {
            MockResponse::Status(500)
        } else {
            MockResponse::Ok("done".to_string())
        }
    });
    let backend = http_backend(&server.url(), 3);
    assert_eq!(backend.complete(&call("p")).unwrap(), "done");
    assert_eq!(attempts.load(Ordering::SeqCst), 3);
}

#[test]
fn http_backend_gives_up_after_max_retries() {
    let server = MockServer::start(|_| MockResponse::Status(503));
    let backend = http_backend(&server.url(), 2);
    let err = backend.complete(&call("p")).unwrap_err();
    match err {
        Error::Backend {
            status, retriable, ..
        } => {
            assert_eq!(status, Some(503));
            assert!(retriable);
        }
        other => panic!("unexpected error: {other}"),
    }
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn http_backend_does_not_retry_client_errors() {
    let server = MockServer::start(|_| MockResponse::Status(401));
    let backend = http_backend(&server.url(), 5);
    let err = backend.complete(&call("p")).unwrap_err();
    match err {
        Error::Backend {
            status, retriable, ..
        } => {
            assert_eq!(status, Some(401));
            assert!(!retriable);
        }
        other => panic!("unexpected error: {other}"),
    }
    assert_eq!(server.requests().len(), 1);
}
