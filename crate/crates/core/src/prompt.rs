//! Few-shot prompt assembly for translation with fuzzy matches.
//!
//! The template is versioned so tests can pin exact bytes. Examples are
//! ordered most-similar LAST, i.e. closest to the query line.

use crate::corpus::LanguageTag;
use crate::error::{Error, Result};
use crate::retrieval::MAX_FUZZY_MATCHES;

pub const PROMPT_TEMPLATE_VERSION: &str = "v1";

/// Everything needed to render one few-shot translation prompt.
#[derive(Debug, Clone)]
pub struct PromptSpec {
    /// (source, target) pairs in descending similarity, at most
    /// [`MAX_FUZZY_MATCHES`].
    examples: Vec<(String, String)>,
    query_source: String,
    source_lang: LanguageTag,
    target_lang: LanguageTag,
}

impl PromptSpec {
    pub fn new(
        examples: Vec<(String, String)>,
        query_source: String,
        source_lang: LanguageTag,
        target_lang: LanguageTag,
    ) -> Result<Self> {
        if examples.len() > MAX_FUZZY_MATCHES {
            return Err(Error::Config(format!(
                "at most {MAX_FUZZY_MATCHES} prompt examples allowed, got {}",
                examples.len()
            )));
        }
        Ok(PromptSpec {
            examples,
            query_source,
            source_lang,
            target_lang,
        })
    }

    pub fn examples(&self) -> &[(String, String)] {
        &self.examples
    }

    pub fn query_source(&self) -> &str {
        &self.query_source
    }
}

/// Display name used in prompt lines; unknown codes fall back to the code.
pub fn language_name(lang: &LanguageTag) -> &str {
    match lang.code() {
        "en" => "English",
        "gez" => "Ge'ez",
        "amh" => "Amharic",
        "tir" => "Tigrinya",
        other => other,
    }
}

/// Renders the prompt: example pairs least-similar first, then the query
/// source line and a dangling target-language cue.
pub fn build_prompt(spec: &PromptSpec) -> String {
    let src_name = language_name(&spec.source_lang);
    let tgt_name = language_name(&spec.target_lang);
    let mut prompt = String::new();
    for (source, target) in spec.examples.iter().rev() {
        prompt.push_str(&format!("{src_name}: {source}\n{tgt_name}: {target}\n"));
    }
    prompt.push_str(&format!("{src_name}: {}\n{tgt_name}:", spec.query_source));
    prompt
}
