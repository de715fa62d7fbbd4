//! Pair deduplication, overlap-safe stratified splitting, and split
//! verification.
//!
//! Duplicates are pairs whose source and target share normalization keys
//! (see [`crate::textnorm::normalize_key`]). The split keeps four
//! guarantees:
//!
//! 1. the train set has no pair-level key duplicates (repeated source keys
//!    with different targets are allowed),
//! 2. no train key collides with any test/validation key (strict mode
//!    checks all four source/target combinations),
//! 3. every domain contributes to every split at the requested ratios,
//! 4. the final global split approximates the requested ratios even after
//!    overlap pruning, via a rebalancing pass.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::corpus::{Corpus, SentencePair};
use crate::error::{Error, Result};
use crate::textnorm::{normalize_key, NormalizationKey};
use crate::util::fnv1a64;

/// Requested train/test/validation fractions. Must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl SplitRatios {
    pub fn new(train: f64, test: f64, validation: f64) -> Result<Self> {
        let parts = [train, test, validation];
        if parts.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Config(format!(
                "split ratios must each be in [0,1]: ({train}, {test}, {validation})"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        Ok(SplitRatios {
            train,
            test,
            validation,
        })
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.7,
            test: 0.2,
            validation: 0.1,
        }
    }
}

/// How train/eval key collisions are detected.
///
/// `Strict` treats a collision on any of source-source, source-target,
/// target-source, or target-target as an overlap. `SourceSource` checks
/// only source-side collisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapMode {
    Strict,
    SourceSource,
}

impl OverlapMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            OverlapMode::Strict => "strict",
            OverlapMode::SourceSource => "source-source",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(OverlapMode::Strict),
            "source-source" => Ok(OverlapMode::SourceSource),
            other => Err(Error::Config(format!(
                "unknown overlap mode {other:?}: expected strict or source-source"
            ))),
        }
    }
}

/// Global ratio tolerance used for rebalancing and verification.
pub const RATIO_TOLERANCE: f64 = 0.02;

/// Looser per-domain tolerance: pruning is uneven across domains.
const DOMAIN_RATIO_TOLERANCE: f64 = 0.05;

/// Ratio checks are skipped below this size; integer rounding dominates.
const RATIO_CHECK_MIN_PAIRS: usize = 1000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SplitCounts {
    pub original: usize,
    pub after_dedup: usize,
    pub train: usize,
    pub test: usize,
    pub validation: usize,
}

/// Bookkeeping for one stratified split.
#[derive(Debug, Clone)]
pub struct SplitReport {
    pub per_domain: BTreeMap<String, SplitCounts>,
    pub totals: SplitCounts,
    pub duplicates_removed: usize,
    pub pruned_from_train: usize,
    pub rebalanced_to_train: usize,
    pub warnings: Vec<String>,
    pub ratios: SplitRatios,
    pub overlap_mode: OverlapMode,
    pub seed: u64,
}

/// A corpus partitioned into train/test/validation.
#[derive(Debug, Clone)]
pub struct SplitBundle {
    pub train: Corpus,
    pub test: Corpus,
    pub validation: Corpus,
    pub report: SplitReport,
}

fn pair_key(p: &SentencePair) -> (NormalizationKey, NormalizationKey) {
    (normalize_key(&p.source_text), normalize_key(&p.target_text))
}

/// Removes pair-level duplicates, keeping the first occurrence of each
/// (source key, target key). Pairs sharing only one side are kept.
pub fn dedup_pairs(corpus: &Corpus) -> (Corpus, usize) {
    let mut seen: HashSet<(NormalizationKey, NormalizationKey)> = HashSet::new();
    let mut kept = Vec::new();
    for p in corpus.pairs() {
        if seen.insert(pair_key(p)) {
            kept.push(p.clone());
        }
    }
    let removed = corpus.len() - kept.len();
    (
        Corpus::from_pairs(corpus.direction.clone(), kept).expect("direction preserved"),
        removed,
    )
}

fn domain_rng(seed: u64, domain: &str) -> ChaCha20Rng {
    // splitmix64-style mixing of (seed, domain hash)
    let mut z = seed ^ fnv1a64(domain.as_bytes());
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha20Rng::seed_from_u64(z ^ (z >> 31))
}

/// Keys a pair contributes to overlap detection, per mode.
fn overlap_keys(p: &SentencePair, mode: OverlapMode) -> Vec<NormalizationKey> {
    match mode {
        OverlapMode::Strict => vec![
            normalize_key(&p.source_text),
            normalize_key(&p.target_text),
        ],
        OverlapMode::SourceSource => vec![normalize_key(&p.source_text)],
    }
}

fn collides(p: &SentencePair, eval_keys: &HashMap<NormalizationKey, usize>, mode: OverlapMode) -> bool {
    overlap_keys(p, mode)
        .iter()
        .any(|k| eval_keys.get(k).copied().unwrap_or(0) > 0)
}

struct DomainState {
    test: Vec<SentencePair>,
    validation: Vec<SentencePair>,
    train: Vec<SentencePair>,
    rest: Vec<SentencePair>, // shuffled remainder after the test cut
    counts: SplitCounts,
}

/// Per-domain stratified split with cross-split overlap pruning and a
/// global rebalancing pass. Deterministic for fixed (corpus, ratios, seed).
pub fn split_stratified(
    corpus: &Corpus,
    ratios: &SplitRatios,
    seed: u64,
    mode: OverlapMode,
) -> Result<SplitBundle> {
    let mut original_by_domain: BTreeMap<String, usize> = BTreeMap::new();
    for p in corpus.pairs() {
        *original_by_domain.entry(p.domain.clone()).or_default() += 1;
    }

    let (deduped, duplicates_removed) = dedup_pairs(corpus);
    let mut warnings = Vec::new();
    if duplicates_removed > 0 {
        warnings.push(format!(
            "input was not pair-deduplicated: removed {duplicates_removed} duplicate pairs"
        ));
    }

    let mut by_domain: BTreeMap<String, Vec<SentencePair>> = BTreeMap::new();
    for p in deduped.pairs() {
        by_domain.entry(p.domain.clone()).or_default().push(p.clone());
    }

    // Pass 1: shuffle each domain and cut its test set.
    let mut domains: BTreeMap<String, DomainState> = BTreeMap::new();
    for (domain, mut pairs) in by_domain {
        let n = pairs.len();
        let mut state = DomainState {
            test: Vec::new(),
            validation: Vec::new(),
            train: Vec::new(),
            rest: Vec::new(),
            counts: SplitCounts {
                original: original_by_domain[&domain],
                after_dedup: n,
                ..Default::default()
            },
        };
        if n < 3 {
            warnings.push(format!(
                "domain {domain:?} has only {n} pairs; placed wholly in train"
            ));
            state.train = pairs;
            domains.insert(domain, state);
            continue;
        }
        pairs.shuffle(&mut domain_rng(seed, &domain));
        let n_test = ((n as f64) * ratios.test).round() as usize;
        let n_test = n_test.min(n);
        state.rest = pairs.split_off(n_test);
        state.test = pairs;
        domains.insert(domain, state);
    }

    // Eval keys are shared across domains; test keys first.
    let mut eval_keys: HashMap<NormalizationKey, usize> = HashMap::new();
    for state in domains.values() {
        for p in &state.test {
            for k in overlap_keys(p, mode) {
                *eval_keys.entry(k).or_default() += 1;
            }
        }
    }

    // Pass 2: cut validation, skipping pairs that collide with any test
    // pair; skipped pairs fall back to the train pool.
    for state in domains.values_mut() {
        let n = state.counts.after_dedup;
        if state.rest.is_empty() && state.validation.is_empty() && state.test.is_empty() {
            continue; // sub-3 domain, already in train
        }
        let n_val = ((n as f64) * ratios.validation).round() as usize;
        let rest = std::mem::take(&mut state.rest);
        for p in rest {
            if state.validation.len() < n_val && !collides(&p, &eval_keys, mode) {
                for k in overlap_keys(&p, mode) {
                    *eval_keys.entry(k).or_default() += 1;
                }
                state.validation.push(p);
            } else {
                state.train.push(p);
            }
        }
    }

    // Pass 3: prune train pairs that collide with any eval key.
    let mut pruned_from_train = 0usize;
    for state in domains.values_mut() {
        let before = state.train.len();
        state
            .train
            .retain(|p| !collides(p, &eval_keys, mode));
        pruned_from_train += before - state.train.len();
    }

    // Pass 4: rebalance. Pruning only ever shrinks train, so if the global
    // train fraction fell below target - tolerance, move surplus eval pairs
    // back to train where that creates no new overlap.
    let mut rebalanced = 0usize;
    {
        let total: usize = domains
            .values()
            .map(|s| s.train.len() + s.test.len() + s.validation.len())
            .sum();
        let target_train = ((total as f64) * ratios.train).round() as usize;
        let mut train_count: usize = domains.values().map(|s| s.train.len()).sum();

        if total > 0
            && (train_count as f64) / (total as f64) < ratios.train - RATIO_TOLERANCE
        {
            // A pair can move iff, once its own keys are removed from the
            // eval multiset, neither of its keys remains in eval.
            let movable = |p: &SentencePair, eval_keys: &HashMap<NormalizationKey, usize>| {
                let mut own: HashMap<&NormalizationKey, usize> = HashMap::new();
                let keys = overlap_keys(p, mode);
                for k in &keys {
                    *own.entry(k).or_default() += 1;
                }
                keys.iter().all(|k| {
                    eval_keys.get(k).copied().unwrap_or(0) <= own[&k]
                })
            };
            let domain_names: Vec<String> = domains.keys().cloned().collect();
            'outer: while train_count < target_train {
                // Take from whichever eval split is most over its own target.
                let test_count: usize = domains.values().map(|s| s.test.len()).sum();
                let val_count: usize = domains.values().map(|s| s.validation.len()).sum();
                let test_surplus = test_count as f64 - (total as f64) * ratios.test;
                let val_surplus = val_count as f64 - (total as f64) * ratios.validation;
                let from_test_first = test_surplus >= val_surplus;
                let order: [bool; 2] = [from_test_first, !from_test_first];
                for &from_test in &order {
                    for name in domain_names.iter().rev() {
                        let state = domains.get_mut(name).unwrap();
                        let split = if from_test {
                            &mut state.test
                        } else {
                            &mut state.validation
                        };
                        let found = split
                            .iter()
                            .enumerate()
                            .rev()
                            .find(|(_, p)| movable(p, &eval_keys))
                            .map(|(i, _)| i);
                        if let Some(i) = found {
                            let p = split.remove(i);
                            for k in overlap_keys(&p, mode) {
                                let c = eval_keys.get_mut(&k).unwrap();
                                *c -= 1;
                            }
                            state.train.push(p);
                            train_count += 1;
                            rebalanced += 1;
                            continue 'outer;
                        }
                    }
                }
                warnings.push(format!(
                    "rebalancing stalled: train fraction {:.4} below target {:.4} with no movable eval pairs",
                    train_count as f64 / total as f64,
                    ratios.train
                ));
                break;
            }
        }
    }

    // Assemble: per-domain order, domains sorted by name.
    let mut train = Corpus::new(corpus.direction.clone());
    let mut test = Corpus::new(corpus.direction.clone());
    let mut validation = Corpus::new(corpus.direction.clone());
    let mut per_domain = BTreeMap::new();
    for (name, mut state) in domains {
        state.counts.train = state.train.len();
        state.counts.test = state.test.len();
        state.counts.validation = state.validation.len();
        for p in state.train {
            train.push(p)?;
        }
        for p in state.test {
            test.push(p)?;
        }
        for p in state.validation {
            validation.push(p)?;
        }
        per_domain.insert(name, state.counts);
    }
    let totals = SplitCounts {
        original: per_domain.values().map(|c| c.original).sum(),
        after_dedup: per_domain.values().map(|c| c.after_dedup).sum(),
        train: train.len(),
        test: test.len(),
        validation: validation.len(),
    };

    Ok(SplitBundle {
        train,
        test,
        validation,
        report: SplitReport {
            per_domain,
            totals,
            duplicates_removed,
            pruned_from_train,
            rebalanced_to_train: rebalanced,
            warnings,
            ratios: *ratios,
            overlap_mode: mode,
            seed,
        },
    })
}

/// Which split-bundle rule a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Rule (i): duplicate (source key, target key) inside train.
    TrainPairDuplicate,
    /// Rule (ii): train key collides with a test/validation key.
    TrainEvalOverlap,
    /// Test/validation internal duplicate or test-validation overlap.
    EvalOverlap,
    /// Rule (iii)/(iv): split sizes drift from the requested ratios.
    RatioDrift,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub rule: Rule,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:?}] {}", self.rule, self.message)
    }
}

/// Checks every split-bundle invariant and returns the violations found.
/// An empty list means the bundle is sound.
pub fn verify_bundle(bundle: &SplitBundle) -> Vec<Violation> {
    let mode = bundle.report.overlap_mode;
    let mut violations = Vec::new();

    // Rule (i): train pair-key uniqueness.
    let mut seen: HashMap<(NormalizationKey, NormalizationKey), &SentencePair> = HashMap::new();
    for p in bundle.train.pairs() {
        let k = pair_key(p);
        if let Some(prev) = seen.get(&k) {
            violations.push(Violation {
                rule: Rule::TrainPairDuplicate,
                message: format!(
                    "train pairs {} and {} share key ({:?}, {:?})",
                    prev.origin,
                    p.origin,
                    k.0.as_str(),
                    k.1.as_str()
                ),
            });
        } else {
            seen.insert(k, p);
        }
    }

    // Pair-key uniqueness inside test and inside validation.
    for (name, split) in [("test", &bundle.test), ("validation", &bundle.validation)] {
        let mut seen: HashMap<(NormalizationKey, NormalizationKey), &SentencePair> =
            HashMap::new();
        for p in split.pairs() {
            let k = pair_key(p);
            if let Some(prev) = seen.get(&k) {
                violations.push(Violation {
                    rule: Rule::EvalOverlap,
                    message: format!(
                        "{name} pairs {} and {} share key ({:?}, {:?})",
                        prev.origin,
                        p.origin,
                        k.0.as_str(),
                        k.1.as_str()
                    ),
                });
            } else {
                seen.insert(k, p);
            }
        }
    }

    // Rule (ii): no train key among eval keys.
    let mut eval_key_owner: HashMap<NormalizationKey, String> = HashMap::new();
    for p in bundle.test.pairs().iter().chain(bundle.validation.pairs()) {
        for k in overlap_keys(p, mode) {
            eval_key_owner.entry(k).or_insert_with(|| p.origin.clone());
        }
    }
    for p in bundle.train.pairs() {
        for k in overlap_keys(p, mode) {
            if let Some(owner) = eval_key_owner.get(&k) {
                violations.push(Violation {
                    rule: Rule::TrainEvalOverlap,
                    message: format!(
                        "train pair {} collides with eval pair {} on key {:?}",
                        p.origin,
                        owner,
                        k.as_str()
                    ),
                });
            }
        }
    }

    // Test vs validation overlap under the same key rule.
    let mut test_keys: HashMap<NormalizationKey, String> = HashMap::new();
    for p in bundle.test.pairs() {
        for k in overlap_keys(p, mode) {
            test_keys.entry(k).or_insert_with(|| p.origin.clone());
        }
    }
    for p in bundle.validation.pairs() {
        for k in overlap_keys(p, mode) {
            if let Some(owner) = test_keys.get(&k) {
                violations.push(Violation {
                    rule: Rule::EvalOverlap,
                    message: format!(
                        "validation pair {} collides with test pair {} on key {:?}",
                        p.origin,
                        owner,
                        k.as_str()
                    ),
                });
            }
        }
    }

    // Rules (iii)/(iv): ratio drift, only meaningful at scale.
    let ratios = bundle.report.ratios;
    let check_ratios = |label: &str,
                        counts: &SplitCounts,
                        tol: f64,
                        violations: &mut Vec<Violation>| {
        let total = counts.train + counts.test + counts.validation;
        if total < RATIO_CHECK_MIN_PAIRS {
            return;
        }
        let t = total as f64;
        for (split, got, want) in [
            ("train", counts.train, ratios.train),
            ("test", counts.test, ratios.test),
            ("validation", counts.validation, ratios.validation),
        ] {
            let frac = got as f64 / t;
            if (frac - want).abs() > tol {
                violations.push(Violation {
                    rule: Rule::RatioDrift,
                    message: format!(
                        "{label} {split} fraction {frac:.4} deviates from {want:.4} by more than {tol}"
                    ),
                });
            }
        }
    };
    check_ratios("total", &bundle.report.totals, RATIO_TOLERANCE, &mut violations);
    for (domain, counts) in &bundle.report.per_domain {
        check_ratios(
            &format!("domain {domain:?}"),
            counts,
            DOMAIN_RATIO_TOLERANCE,
            &mut violations,
        );
    }

    violations
}
