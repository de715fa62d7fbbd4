//! Completion backends and the few-shot translation orchestrator.
//!
//! Wire protocol: one HTTP POST of a JSON object
//! `{model, prompt, temperature, top_p, max_tokens}`; the response JSON
//! carries the completion text as `{completion}`. The credential, when
//! set, is sent as a bearer token and must come from the environment, not
//! a flag.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::LanguageTag;
use crate::error::{Error, Result};
use crate::prompt::{build_prompt, PromptSpec};
use crate::retrieval::RetrievalIndex;

/// Sampling parameters for the completion backend. The defaults are
/// top-p 1, temperature 0.3, length multiplier 5; the output budget is
/// length_multiplier times the query's whitespace token count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackendParams {
    pub top_p: f64,
    pub temperature: f64,
    pub length_multiplier: f64,
}

impl Default for BackendParams {
    fn default() -> Self {
        BackendParams {
            top_p: 1.0,
            temperature: 0.3,
            length_multiplier: 5.0,
        }
    }
}

impl BackendParams {
    pub fn max_output_tokens(&self, query_source: &str) -> u32 {
        let tokens = query_source.split_whitespace().count();
        ((tokens as f64 * self.length_multiplier).round() as u32).max(1)
    }
}

/// One fully resolved completion call.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionCall {
    pub prompt: String,
    pub top_p: f64,
    pub temperature: f64,
    pub max_tokens: u32,
}

pub trait CompletionBackend: Send + Sync {
    fn complete(&self, call: &CompletionCall) -> Result<String>;
}

/// JSON request body on the wire.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WireRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

/// JSON response body on the wire.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WireResponse {
    pub completion: String,
}

/// HTTP completion backend with per-request timeout and exponential
/// backoff on retriable failures (connection errors, timeouts, 429, 5xx).
pub struct HttpBackend {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    max_retries: u32,
    initial_backoff: Duration,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: &str, model: &str, api_key: Option<String>) -> Result<Self> {
        Self::with_retry(endpoint, model, api_key, 3, Duration::from_millis(250), Duration::from_secs(60))
    }

    pub fn with_retry(
        endpoint: &str,
        model: &str,
        api_key: Option<String>,
        max_retries: u32,
        initial_backoff: Duration,
        timeout: Duration,
    ) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Backend {
                status: None,
                message: format!("failed to build HTTP client: {e}"),
                retriable: false,
            })?;
        Ok(HttpBackend {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key,
            max_retries,
            initial_backoff,
            client,
        })
    }

    fn send_once(&self, body: &WireRequest) -> Result<String> {
        let mut req = self.client.post(&self.endpoint).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let response = req.send().map_err(|e| Error::Backend {
            status: None,
            message: e.to_string(),
            retriable: true,
        })?;
        let status = response.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Error::Backend {
                status: Some(status.as_u16()),
                message: format!("retriable backend status {status}"),
                retriable: true,
            });
        }
        if !status.is_success() {
            return Err(Error::Backend {
                status: Some(status.as_u16()),
                message: format!("backend request failed with {status}"),
                retriable: false,
            });
        }
        let parsed: WireResponse = response.json().map_err(|e| Error::Backend {
            status: Some(status.as_u16()),
            message: format!("unparseable backend response: {e}"),
            retriable: false,
        })?;
        Ok(parsed.completion)
    }
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, call: &CompletionCall) -> Result<String> {
        let body = WireRequest {
            model: self.model.clone(),
            prompt: call.prompt.clone(),
            temperature: call.temperature,
            top_p: call.top_p,
            max_tokens: call.max_tokens,
        };
        let mut backoff = self.initial_backoff;
        let mut attempt = 0;
        loop {
            match self.send_once(&body) {
                Ok(text) => return Ok(text),
                Err(Error::Backend { retriable: true, .. }) if attempt < self.max_retries => {
                    std::thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// A completed few-shot translation with the exact prompt used, for audit
/// logging.
#[derive(Debug, Clone, PartialEq)]
pub struct FewShotTranslation {
    pub translation: String,
    pub prompt: String,
}

/// Retrieves up to `k` fuzzy matches, assembles the prompt, and issues one
/// completion call. The first nonempty line of the completion is the
/// translation; backends tend to keep generating spurious extra pairs.
pub fn translate_few_shot(
    index: &RetrievalIndex,
    backend: &dyn CompletionBackend,
    query_source: &str,
    params: &BackendParams,
    k: usize,
    source_lang: &LanguageTag,
    target_lang: &LanguageTag,
) -> Result<FewShotTranslation> {
    let matches = index.retrieve(query_source, k);
    let examples = matches
        .into_iter()
        .map(|m| (m.source, m.target))
        .collect();
    let spec = PromptSpec::new(
        examples,
        query_source.to_string(),
        source_lang.clone(),
        target_lang.clone(),
    )?;
    let prompt = build_prompt(&spec);
    let call = CompletionCall {
        prompt: prompt.clone(),
        top_p: params.top_p,
        temperature: params.temperature,
        max_tokens: params.max_output_tokens(query_source),
    };
    let completion = backend.complete(&call)?;
    let translation = completion
        .lines()
        .next()
        .map(str::trim)
        .unwrap_or("")
        .to_string();
    if translation.is_empty() {
        return Err(Error::EmptyCompletion);
    }
    Ok(FewShotTranslation {
        translation,
        prompt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_match_contract() {
        let p = BackendParams::default();
        assert_eq!(p.top_p, 1.0);
        assert_eq!(p.temperature, 0.3);
        assert_eq!(p.length_multiplier, 5.0);
    }

    #[test]
    fn output_budget_is_multiplier_times_tokens() {
        let p = BackendParams::default();
        let query = "one two three four five six seven eight nine ten eleven twelve";
        assert_eq!(p.max_output_tokens(query), 60);
        assert_eq!(p.max_output_tokens("single"), 5);
    }

    #[test]
    fn wire_request_serializes_all_fields() {
        let r = WireRequest {
            model: "m".into(),
            prompt: "p".into(),
            temperature: 0.3,
            top_p: 1.0,
            max_tokens: 10,
        };
        let json = serde_json::to_value(&r).unwrap();
        for field in ["model", "prompt", "temperature", "top_p", "max_tokens"] {
            assert!(json.get(field).is_some(), "missing {field}");
        }
    }
}
