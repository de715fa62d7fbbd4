//! Byte-pair-encoding subword model: training, encoding, decoding, and a
//! plain-text model format.
//!
//! Words are whitespace-separated; each word is initialized as its
//! character sequence plus a word-end marker, and the most frequent
//! adjacent symbol pair is merged repeatedly until the vocabulary reaches
//! the requested size. Frequency ties break lexicographically on
//! (left, right) so training is deterministic across platforms. Training
//! on the pooled sentence streams of several languages yields the shared
//! multilingual vocabulary.
//!
//! Special tokens (unknown/padding markers, target-language tags) are
//! atomic: they never participate in merges, and a word exactly equal to a
//! special token encodes as that single token.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// End-of-word symbol appended to every word before merging. Decoding
/// turns it back into a single space.
pub const WORD_END_MARKER: &str = "</w>";
/// Emitted for characters unseen at training time.
pub const UNKNOWN_TOKEN: &str = "<unk>";
/// Reserved padding token.
pub const PADDING_TOKEN: &str = "<pad>";

/// A trained BPE model: ordered merge rules plus a dense-id vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    specials: Vec<String>,
    merges: Vec<(String, String)>,
    vocab: Vec<String>,
    token_ids: HashMap<String, u32>,
    merge_rank: HashMap<(String, String), usize>,
    special_set: HashSet<String>,
}

impl BpeModel {
    fn build(specials: Vec<String>, merges: Vec<(String, String)>, vocab: Vec<String>) -> Self {
        let token_ids = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let merge_rank = merges
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let special_set = specials.iter().cloned().collect();
        BpeModel {
            specials,
            merges,
            vocab,
            token_ids,
            merge_rank,
            special_set,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn specials(&self) -> &[String] {
        &self.specials
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.token_ids.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_ids.contains_key(token)
    }

    /// Segments a text into subword tokens, word by word.
    pub fn encode(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for word in text.split_whitespace() {
            self.encode_word(word, &mut out);
        }
        out
    }

    pub fn encode_ids(&self, text: &str) -> Vec<u32> {
        self.encode(text)
            .iter()
            .map(|t| self.token_ids[t])
            .collect()
    }

    fn encode_word(&self, word: &str, out: &mut Vec<String>) {
        if self.special_set.contains(word) {
            out.push(word.to_string());
            out.push(WORD_END_MARKER.to_string());
            return;
        }
        let mut symbols: Vec<String> = word
            .chars()
            .map(|c| {
                let s = c.to_string();
                if self.token_ids.contains_key(&s) {
                    s
                } else {
                    UNKNOWN_TOKEN.to_string()
                }
            })
            .collect();
        symbols.push(WORD_END_MARKER.to_string());

        // Repeatedly apply the lowest-rank merge present.
        loop {
            let mut best: Option<(usize, usize)> = None; // (rank, position)
            for i in 0..symbols.len().saturating_sub(1) {
                if let Some(&rank) = self
                    .merge_rank
                    .get(&(symbols[i].clone(), symbols[i + 1].clone()))
                {
                    if best.map_or(true, |(r, _)| rank < r) {
                        best = Some((rank, i));
                    }
                }
            }
            let Some((rank, _)) = best else { break };
            let (left, right) = &self.merges[rank];
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && &symbols[i] == left && &symbols[i + 1] == right {
                    merged.push(format!("{left}{right}"));
                    i += 2;
                } else {
                    merged.push(symbols[i].clone());
                    i += 1;
                }
            }
            symbols = merged;
        }
        out.extend(symbols);
    }

    /// Inverse of [`encode`](Self::encode): concatenates the tokens and
    /// turns word-end markers back into spaces.
    pub fn decode(&self, tokens: &[String]) -> Result<String> {
        let mut s = String::new();
        for t in tokens {
            if !self.token_ids.contains_key(t) {
                return Err(Error::UnknownToken(t.clone()));
            }
            s.push_str(t);
        }
        let spaced = s.replace(WORD_END_MARKER, " ");
        Ok(spaced.trim_end_matches(' ').to_string())
    }

    /// Writes the model in its versioned text format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = format!("bpe-model v1 {}\n", self.vocab.len());
        s.push_str("[specials]\n");
        for t in &self.specials {
            s.push_str(t);
            s.push('\n');
        }
        s.push_str("[merges]\n");
        for (l, r) in &self.merges {
            s.push_str(l);
            s.push('\t');
            s.push_str(r);
            s.push('\n');
        }
        s.push_str("[vocab]\n");
        for (i, t) in self.vocab.iter().enumerate() {
            s.push_str(t);
            s.push('\t');
            s.push_str(&i.to_string());
            s.push('\n');
        }
        fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<BpeModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn parse(text: &str) -> Result<BpeModel> {
        let malformed = |line: usize, message: &str| Error::ModelFormat {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| malformed(1, "empty model file"))?;
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.len() != 3 || parts[0] != "bpe-model" {
            return Err(malformed(1, "expected header `bpe-model v1 <vocab_size>`"));
        }
        if parts[1] != "v1" {
            return Err(malformed(
                1,
                &format!("unsupported model version {:?}", parts[1]),
            ));
        }
        let declared_size: usize = parts[2]
            .parse()
            .map_err(|_| malformed(1, "vocab size is not an integer"))?;

        #[derive(PartialEq)]
        enum Section {
            None,
            Specials,
            Merges,
            Vocab,
        }
        let mut section = Section::None;
        let mut specials = Vec::new();
        let mut merges = Vec::new();
        let mut vocab_entries: Vec<(String, u32)> = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            match line {
                "[specials]" => section = Section::Specials,
                "[merges]" => section = Section::Merges,
                "[vocab]" => section = Section::Vocab,
                _ => match section {
                    Section::None => return Err(malformed(lineno, "content before any section")),
                    Section::Specials => specials.push(line.to_string()),
                    Section::Merges => {
                        let (l, r) = line
                            .split_once('\t')
                            .ok_or_else(|| malformed(lineno, "merge line is not `left<TAB>right`"))?;
                        merges.push((l.to_string(), r.to_string()));
                    }
                    Section::Vocab => {
                        let (tok, id) = line
                            .split_once('\t')
                            .ok_or_else(|| malformed(lineno, "vocab line is not `token<TAB>id`"))?;
                        let id: u32 = id
                            .parse()
                            .map_err(|_| malformed(lineno, "vocab id is not an integer"))?;
                        if vocab_entries.iter().any(|(t, _)| t == tok) {
                            return Err(malformed(
                                lineno,
                                &format!("duplicate vocabulary entry {tok:?}"),
                            ));
                        }
                        vocab_entries.push((tok.to_string(), id));
                    }
                },
            }
        }

        if vocab_entries.len() != declared_size {
            return Err(malformed(
                1,
                &format!(
                    "header declares {} vocabulary entries, file has {}",
                    declared_size,
                    vocab_entries.len()
                ),
            ));
        }
        let mut vocab = vec![String::new(); vocab_entries.len()];
        let mut filled = vec![false; vocab_entries.len()];
        for (tok, id) in vocab_entries {
            let i = id as usize;
            if i >= vocab.len() || filled[i] {
                return Err(malformed(1, &format!("vocabulary ids are not dense at id {id}")));
            }
            vocab[i] = tok;
            filled[i] = true;
        }
        for (l, r) in &merges {
            let cat = format!("{l}{r}");
            if !vocab.contains(&cat) {
                return Err(malformed(
                    1,
                    &format!("merge product {cat:?} missing from vocabulary"),
                ));
            }
        }
        for s in &specials {
            if !vocab.contains(s) {
                return Err(malformed(
                    1,
                    &format!("special token {s:?} missing from vocabulary"),
                ));
            }
        }
        Ok(BpeModel::build(specials, merges, vocab))
    }
}

/// Trains a BPE model on pooled sentence streams.
///
/// `extra_specials` are reserved on top of the built-in unknown and
/// padding markers (target-language tags go here). The minimum vocabulary
/// is all specials, the word-end marker, and every distinct character in
/// the data; `vocab_size` below that is a configuration error.
pub fn bpe_train<I, S>(sentences: I, vocab_size: usize, extra_specials: &[String]) -> Result<BpeModel>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut specials: Vec<String> =
        vec![UNKNOWN_TOKEN.to_string(), PADDING_TOKEN.to_string()];
    for s in extra_specials {
        if s.chars().any(char::is_whitespace) || s.is_empty() {
            return Err(Error::Config(format!(
                "special token {s:?} must be nonempty and whitespace-free"
            )));
        }
        if !specials.contains(s) {
            specials.push(s.clone());
        }
    }
    let special_set: HashSet<&String> = specials.iter().collect();

    // BTreeMap keeps word iteration order (and thus training) deterministic.
    let mut word_freqs: BTreeMap<String, u64> = BTreeMap::new();
    for sentence in sentences {
        for word in sentence.as_ref().split_whitespace() {
            if special_set.contains(&word.to_string()) {
                continue; // atomic, never merged
            }
            *word_freqs.entry(word.to_string()).or_default() += 1;
        }
    }

    let mut alphabet: Vec<String> = word_freqs
        .keys()
        .flat_map(|w| w.chars())
        .map(|c| c.to_string())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    alphabet.retain(|c| !specials.contains(c));

    let mut vocab: Vec<String> = specials.clone();
    vocab.push(WORD_END_MARKER.to_string());
    vocab.extend(alphabet);
    let min_size = vocab.len();
    if vocab_size < min_size {
        return Err(Error::Config(format!(
            "vocab_size {vocab_size} too small: minimum is {min_size} \
             ({} specials + word-end marker + {} distinct characters)",
            specials.len(),
            min_size - specials.len() - 1
        )));
    }

    // Symbolized words with frequencies, plus incremental pair counts.
    let mut words: Vec<(Vec<String>, u64)> = word_freqs
        .iter()
        .map(|(w, &f)| {
            let mut syms: Vec<String> = w.chars().map(|c| c.to_string()).collect();
            syms.push(WORD_END_MARKER.to_string());
            (syms, f)
        })
        .collect();

    let mut pair_counts: HashMap<(String, String), i64> = HashMap::new();
    let mut pair_words: HashMap<(String, String), HashSet<usize>> = HashMap::new();
    for (idx, (syms, freq)) in words.iter().enumerate() {
        for win in syms.windows(2) {
            let pair = (win[0].clone(), win[1].clone());
            *pair_counts.entry(pair.clone()).or_default() += *freq as i64;
            pair_words.entry(pair).or_default().insert(idx);
        }
    }

    let mut merges: Vec<(String, String)> = Vec::new();
    let mut vocab_set: HashSet<String> = vocab.iter().cloned().collect();
    while vocab.len() < vocab_size {
        // Highest count wins; ties break on the lexicographically smallest
        // (left, right), so the scan order over the HashMap is irrelevant.
        let best = pair_counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(p, &c)| (c, p.clone()))
            .max_by(|(ca, pa), (cb, pb)| ca.cmp(cb).then_with(|| pb.cmp(pa)))
            .map(|(_, p)| p);
        let Some(pair) = best else { break };

        let new_symbol = format!("{}{}", pair.0, pair.1);
        let affected: Vec<usize> = pair_words
            .get(&pair)
            .map(|s| {
                let mut v: Vec<usize> = s.iter().copied().collect();
                v.sort_unstable();
                v
            })
            .unwrap_or_default();
        for idx in affected {
            let (syms, freq) = &mut words[idx];
            let freq = *freq as i64;
            for win in syms.windows(2) {
                let p = (win[0].clone(), win[1].clone());
                *pair_counts.entry(p.clone()).or_default() -= freq;
                if let Some(set) = pair_words.get_mut(&p) {
                    set.remove(&idx);
                }
            }
            let mut merged = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == pair.0 && syms[i + 1] == pair.1 {
                    merged.push(new_symbol.clone());
                    i += 2;
                } else {
                    merged.push(syms[i].clone());
                    i += 1;
                }
            }
            *syms = merged;
            for win in syms.windows(2) {
                let p = (win[0].clone(), win[1].clone());
                *pair_counts.entry(p.clone()).or_default() += freq;
                pair_words.entry(p).or_default().insert(idx);
            }
        }
        pair_counts.remove(&pair);
        pair_words.remove(&pair);

        merges.push(pair);
        if vocab_set.insert(new_symbol.clone()) {
            vocab.push(new_symbol);
        }
    }

    Ok(BpeModel::build(specials, merges, vocab))
}
