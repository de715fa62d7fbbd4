//! Target-language tagging and multilingual corpus assembly.
//!
//! A multilingual model is steered by prepending an artificial token such
//! as `<2gez>` to the source sentence; the tag names the target language
//! and must survive tokenization as one unit (it is registered as a BPE
//! special token).

use std::collections::BTreeSet;
use std::fmt;

use crate::corpus::{Direction, LanguageTag, SentencePair};
use crate::error::{Error, Result};
use crate::split::SplitBundle;

/// The `<2xx>` token marking the target language of a source sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetTag(String);

impl TargetTag {
    pub fn for_language(lang: &LanguageTag) -> Self {
        TargetTag(format!("<2{}>", lang.code()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TargetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Prefixes the pair's source text with its target-language tag.
/// Idempotent: an already-tagged source is returned unchanged.
pub fn tag_source(pair: &SentencePair) -> SentencePair {
    let tag = TargetTag::for_language(&pair.direction.target);
    let prefix = format!("{tag} ");
    if pair.source_text.starts_with(&prefix) {
        return pair.clone();
    }
    let mut tagged = pair.clone();
    tagged.source_text = format!("{prefix}{}", pair.source_text);
    tagged
}

/// Splits a leading well-formed `<2xx> ` tag off a text. Malformed or
/// absent tags leave the text intact.
pub fn strip_tag(text: &str) -> (Option<TargetTag>, &str) {
    let Some(rest) = text.strip_prefix("<2") else {
        return (None, text);
    };
    let Some(end) = rest.find('>') else {
        return (None, text);
    };
    let code = &rest[..end];
    if LanguageTag::new(code).is_err() {
        return (None, text);
    }
    let Some(remainder) = rest[end + 1..].strip_prefix(' ') else {
        return (None, text);
    };
    (
        Some(TargetTag(format!("<2{code}>"))),
        remainder,
    )
}

/// A corpus combining several directions; every pair keeps its own
/// direction so evaluation can score each direction separately.
#[derive(Debug, Clone)]
pub struct MultilingualBundle {
    pub train: Vec<SentencePair>,
    pub test: Vec<SentencePair>,
    pub validation: Vec<SentencePair>,
}

impl MultilingualBundle {
    pub fn directions(&self) -> Vec<Direction> {
        let set: BTreeSet<Direction> = self
            .train
            .iter()
            .chain(&self.test)
            .chain(&self.validation)
            .map(|p| p.direction.clone())
            .collect();
        set.into_iter().collect()
    }

    pub fn test_for(&self, direction: &Direction) -> Vec<&SentencePair> {
        self.test
            .iter()
            .filter(|p| &p.direction == direction)
            .collect()
    }
}

/// Tags and concatenates per-direction split bundles into one multilingual
/// bundle. Bundles are interleaved deterministically: sorted by direction,
/// then original order.
pub fn assemble_multilingual(bundles: &[(Direction, &SplitBundle)]) -> Result<MultilingualBundle> {
    let mut seen = BTreeSet::new();
    for (direction, _) in bundles {
        if !seen.insert(direction.clone()) {
            return Err(Error::Config(format!(
                "direction {direction} supplied twice"
            )));
        }
    }
    let mut ordered: Vec<&(Direction, &SplitBundle)> = bundles.iter().collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));

    let mut out = MultilingualBundle {
        train: Vec::new(),
        test: Vec::new(),
        validation: Vec::new(),
    };
    for (_, bundle) in ordered {
        out.train.extend(bundle.train.pairs().iter().map(tag_source));
        out.test.extend(bundle.test.pairs().iter().map(tag_source));
        out.validation
            .extend(bundle.validation.pairs().iter().map(tag_source));
    }
    Ok(out)
}
