//! Unicode text normalization shared by ingestion, duplicate keying, and
//! BLEU tokenization.
//!
//! Everything downstream assumes NFC-normalized text, so normalization
//! happens exactly once, at ingestion. Duplicate detection uses a canonical
//! key: the sentence lowercased with all punctuation and whitespace removed.
//! "Punctuation" means the Unicode punctuation categories (Pc, Pd, Pe, Pf,
//! Pi, Po, Ps), which covers both Latin marks and the Ethiopic block
//! U+1360–U+1368 (፠ ፡ ። ፣ ፤ ፥ ፦ ፧ ፨).

use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Canonical (NFC) form of a string.
pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// True for characters in any Unicode punctuation category.
pub fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Canonical duplicate-detection form of a sentence: lowercased, with all
/// punctuation and whitespace removed. Two sentences are "the same" for
/// dedup and overlap purposes iff their keys are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalizationKey(String);

impl NormalizationKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Computes the normalization key of a sentence. Idempotent: keying a key
/// returns the key itself.
pub fn normalize_key(text: &str) -> NormalizationKey {
    let key = text
        .chars()
        .filter(|c| !c.is_whitespace() && !is_punctuation(*c))
        .flat_map(char::to_lowercase)
        .collect();
    NormalizationKey(key)
}
