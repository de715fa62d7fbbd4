//! The pipeline subcommands. Each command reads its inputs from the
//! previous stage's output directory, writes deterministic artifacts, and
//! drops a provenance manifest beside them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gezmt_core::backend::{translate_few_shot, BackendParams, HttpBackend};
use gezmt_core::bleu::{bleu_corpus_with, Smoothing};
use gezmt_core::bpe::{bpe_train, BpeModel};
use gezmt_core::corpus::{ingest_parallel, write_parallel, Corpus, Direction};
use gezmt_core::embed::CharNgramEmbedder;
use gezmt_core::retrieval::{build_index, RetrievalIndex};
use gezmt_core::split::{split_stratified, verify_bundle, SplitBundle, SplitReport};
use gezmt_core::stats::stats_report;
use gezmt_core::tag::assemble_multilingual;

use crate::config::{DirectionConfig, PipelineConfig};
use crate::manifest::write_manifest;
use crate::store::{read_corpus, write_corpus};

const SPLIT_NAMES: [&str; 3] = ["train", "test", "validation"];

/// Name of the environment variable holding the backend credential. A
/// flag would leak the key into shell history and process listings.
pub const API_KEY_ENV: &str = "GEZMT_API_KEY";

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn corpus_store_path(config: &PipelineConfig, direction: &Direction) -> PathBuf {
    config.out_dir.join("corpus").join(format!("{direction}.jsonl"))
}

fn split_dir(config: &PipelineConfig, direction: &Direction) -> PathBuf {
    config.out_dir.join("split").join(direction.to_string())
}

pub fn cmd_ingest(config: &PipelineConfig) -> Result<()> {
    let dir = config.out_dir.join("corpus");
    ensure_dir(&dir)?;
    for dc in &config.directions {
        let mut corpus = Corpus::new(dc.direction.clone());
        let mut dropped = 0usize;
        let mut inputs = vec![("config".to_string(), config.config_path.as_path())];
        for (domain, src, tgt) in &dc.files {
            let outcome = ingest_parallel(src, tgt, &dc.direction, domain)?;
            dropped += outcome.dropped_lines;
            for p in outcome.corpus.pairs() {
                corpus.push(p.clone())?;
            }
            inputs.push((format!("{domain}.src"), src.as_path()));
            inputs.push((format!("{domain}.tgt"), tgt.as_path()));
        }
        if corpus.is_empty() {
            bail!("direction {}: no usable pairs ingested", dc.direction);
        }
        write_corpus(&corpus, &corpus_store_path(config, &dc.direction))?;
        write_manifest(&dir, &format!("ingest.{}", dc.direction), config.seed, &inputs)?;
        println!(
            "ingest {}: {} pairs ({} dropped lines)",
            dc.direction,
            corpus.len(),
            dropped
        );
    }
    Ok(())
}

fn render_report(report: &SplitReport) -> String {
    let counts = |c: &gezmt_core::split::SplitCounts| {
        format!(
            "original={} after_dedup={} train={} test={} validation={}",
            c.original, c.after_dedup, c.train, c.test, c.validation
        )
    };
    let mut lines = vec![
        format!("seed = {}", report.seed),
        format!(
            "ratios = {:.2}/{:.2}/{:.2}",
            report.ratios.train, report.ratios.test, report.ratios.validation
        ),
        format!("overlap_mode = {}", report.overlap_mode.as_str()),
        format!("duplicates_removed = {}", report.duplicates_removed),
        format!("pruned_from_train = {}", report.pruned_from_train),
        format!("rebalanced_to_train = {}", report.rebalanced_to_train),
        format!("totals = {}", counts(&report.totals)),
    ];
    for (domain, c) in &report.per_domain {
        lines.push(format!("domain {domain} = {}", counts(c)));
    }
    for w in &report.warnings {
        lines.push(format!("warning = {w}"));
    }
    lines.join("\n") + "\n"
}

fn split_one(config: &PipelineConfig, dc: &DirectionConfig) -> Result<SplitBundle> {
    let store = corpus_store_path(config, &dc.direction);
    let corpus = read_corpus(&store, &dc.direction)
        .with_context(|| format!("direction {}: run `ingest` first", dc.direction))?;
    let bundle = split_stratified(&corpus, &config.ratios, config.seed, config.overlap_mode)?;
    let violations = verify_bundle(&bundle);
    if !violations.is_empty() {
        bail!(
            "direction {}: split verification failed with {} violations; first: {}",
            dc.direction,
            violations.len(),
            violations[0].message
        );
    }
    Ok(bundle)
}

pub fn cmd_split(config: &PipelineConfig) -> Result<()> {
    for dc in &config.directions {
        let bundle = split_one(config, dc)?;
        let dir = split_dir(config, &dc.direction);
        ensure_dir(&dir)?;
        let src_code = dc.direction.source.code();
        let tgt_code = dc.direction.target.code();
        for (name, corpus) in SPLIT_NAMES
            .iter()
            .zip([&bundle.train, &bundle.test, &bundle.validation])
        {
            write_parallel(
                corpus,
                &dir.join(format!("{name}.{src_code}")),
                &dir.join(format!("{name}.{tgt_code}")),
            )?;
            write_corpus(corpus, &dir.join(format!("{name}.jsonl")))?;
            // Per-domain views of the same split.
            let mut by_domain: BTreeMap<&str, Vec<_>> = BTreeMap::new();
            for p in corpus.pairs() {
                by_domain.entry(&p.domain).or_default().push(p.clone());
            }
            for (domain, pairs) in by_domain {
                let domain_dir = dir.join(domain);
                ensure_dir(&domain_dir)?;
                let sub = Corpus::from_pairs(dc.direction.clone(), pairs)?;
                write_parallel(
                    &sub,
                    &domain_dir.join(format!("{name}.{src_code}")),
                    &domain_dir.join(format!("{name}.{tgt_code}")),
                )?;
            }
        }
        std::fs::write(dir.join("report.txt"), render_report(&bundle.report))?;
        let store = corpus_store_path(config, &dc.direction);
        write_manifest(
            &dir,
            "split",
            config.seed,
            &[
                ("config".to_string(), config.config_path.as_path()),
                ("corpus".to_string(), store.as_path()),
            ],
        )?;
        let t = &bundle.report.totals;
        println!(
            "split {}: {} pairs -> train {} / test {} / validation {}",
            dc.direction, t.after_dedup, t.train, t.test, t.validation
        );
    }
    Ok(())
}

pub fn cmd_stats(config: &PipelineConfig) -> Result<()> {
    // Recomputed from the corpus store: cheap, and deterministic for the
    // same seed, so it always agrees with `split` outputs.
    let mut bundles = Vec::new();
    for dc in &config.directions {
        bundles.push((dc.direction.clone(), split_one(config, dc)?));
    }
    let refs: Vec<(Direction, &SplitBundle)> =
        bundles.iter().map(|(d, b)| (d.clone(), b)).collect();
    let table = stats_report(&refs);
    ensure_dir(&config.out_dir)?;
    std::fs::write(config.out_dir.join("stats.tsv"), table.to_tsv())?;
    std::fs::write(config.out_dir.join("stats.txt"), table.to_text())?;
    let inputs: Vec<(String, PathBuf)> = config
        .directions
        .iter()
        .map(|dc| (dc.direction.to_string(), corpus_store_path(config, &dc.direction)))
        .collect();
    let input_refs: Vec<(String, &Path)> = inputs
        .iter()
        .map(|(l, p)| (l.clone(), p.as_path()))
        .collect();
    write_manifest(&config.out_dir, "stats", config.seed, &input_refs)?;
    print!("{}", table.to_text());
    Ok(())
}

fn train_stores(config: &PipelineConfig) -> Vec<(String, PathBuf)> {
    config
        .directions
        .iter()
        .map(|dc| {
            (
                dc.direction.to_string(),
                split_dir(config, &dc.direction).join("train.jsonl"),
            )
        })
        .collect()
}

pub fn cmd_bpe_train(config: &PipelineConfig) -> Result<()> {
    // Shared vocabulary: one model over the pooled text of every side of
    // every direction, with the target tags registered as atomic specials.
    let mut sentences = Vec::new();
    let mut specials = std::collections::BTreeSet::new();
    for dc in &config.directions {
        let corpus = read_corpus(
            &split_dir(config, &dc.direction).join("train.jsonl"),
            &dc.direction,
        )
        .with_context(|| format!("direction {}: run `split` first", dc.direction))?;
        for p in corpus.pairs() {
            sentences.push(p.source_text.clone());
            sentences.push(p.target_text.clone());
        }
        specials.insert(format!("<2{}>", dc.direction.target.code()));
    }
    let specials: Vec<String> = specials.into_iter().collect();
    let model = bpe_train(&sentences, config.bpe_vocab_size, &specials)?;
    if let Some(parent) = config.bpe_model_path.parent() {
        ensure_dir(parent)?;
    }
    model.save(&config.bpe_model_path)?;
    let inputs = train_stores(config);
    let input_refs: Vec<(String, &Path)> =
        inputs.iter().map(|(l, p)| (l.clone(), p.as_path())).collect();
    write_manifest(
        config.bpe_model_path.parent().unwrap_or(Path::new(".")),
        "bpe-train",
        config.seed,
        &input_refs,
    )?;
    println!(
        "bpe-train: vocabulary {} ({} merges) -> {}",
        model.vocab_size(),
        model.merges().len(),
        config.bpe_model_path.display()
    );
    Ok(())
}

fn segment_file(model: &BpeModel, input: &Path, output: &Path) -> Result<()> {
    let text =
        std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let mut out = String::new();
    for line in text.lines() {
        out.push_str(&model.encode(line).join(" "));
        out.push('\n');
    }
    std::fs::write(output, out).with_context(|| format!("writing {}", output.display()))
}

pub fn cmd_bpe_apply(config: &PipelineConfig) -> Result<()> {
    let model = BpeModel::load(&config.bpe_model_path)
        .with_context(|| format!("loading {}: run `bpe-train` first", config.bpe_model_path.display()))?;
    let mut inputs = vec![("model".to_string(), config.bpe_model_path.clone())];
    for dc in &config.directions {
        let in_dir = split_dir(config, &dc.direction);
        let out_dir = config.out_dir.join("bpe").join(dc.direction.to_string());
        ensure_dir(&out_dir)?;
        for name in SPLIT_NAMES {
            for code in [dc.direction.source.code(), dc.direction.target.code()] {
                let file = format!("{name}.{code}");
                segment_file(&model, &in_dir.join(&file), &out_dir.join(&file))?;
                inputs.push((format!("{}/{file}", dc.direction), in_dir.join(&file)));
            }
        }
    }
    // Segment the multilingual corpus too, if `tag` has already run.
    let multi_dir = config.out_dir.join("multilingual");
    if multi_dir.join("train.src").is_file() {
        let out_dir = config.out_dir.join("bpe").join("multilingual");
        ensure_dir(&out_dir)?;
        for name in SPLIT_NAMES {
            for side in ["src", "tgt"] {
                let file = format!("{name}.{side}");
                segment_file(&model, &multi_dir.join(&file), &out_dir.join(&file))?;
                inputs.push((format!("multilingual/{file}"), multi_dir.join(&file)));
            }
        }
    }
    let input_refs: Vec<(String, &Path)> =
        inputs.iter().map(|(l, p)| (l.clone(), p.as_path())).collect();
    write_manifest(&config.out_dir.join("bpe"), "bpe-apply", config.seed, &input_refs)?;
    println!("bpe-apply: segmented {} directions", config.directions.len());
    Ok(())
}

fn load_bundle(config: &PipelineConfig, dc: &DirectionConfig) -> Result<SplitBundle> {
    let dir = split_dir(config, &dc.direction);
    let mut parts = Vec::new();
    for name in SPLIT_NAMES {
        parts.push(
            read_corpus(&dir.join(format!("{name}.jsonl")), &dc.direction)
                .with_context(|| format!("direction {}: run `split` first", dc.direction))?,
        );
    }
    let mut it = parts.into_iter();
    let (train, test, validation) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    // Reconstruct enough of the report for downstream consumers.
    let mut per_domain: BTreeMap<String, gezmt_core::split::SplitCounts> = BTreeMap::new();
    for (corpus, field) in [(&train, 0usize), (&test, 1), (&validation, 2)] {
        for p in corpus.pairs() {
            let c = per_domain.entry(p.domain.clone()).or_default();
            match field {
                0 => c.train += 1,
                1 => c.test += 1,
                _ => c.validation += 1,
            }
        }
    }
    let mut totals = gezmt_core::split::SplitCounts::default();
    for c in per_domain.values_mut() {
        c.after_dedup = c.train + c.test + c.validation;
        c.original = c.after_dedup;
        totals.train += c.train;
        totals.test += c.test;
        totals.validation += c.validation;
    }
    totals.after_dedup = totals.train + totals.test + totals.validation;
    totals.original = totals.after_dedup;
    let report = SplitReport {
        per_domain,
        totals,
        duplicates_removed: 0,
        pruned_from_train: 0,
        rebalanced_to_train: 0,
        warnings: Vec::new(),
        ratios: config.ratios,
        overlap_mode: config.overlap_mode,
        seed: config.seed,
    };
    Ok(SplitBundle { train, test, validation, report })
}

pub fn cmd_tag(config: &PipelineConfig) -> Result<()> {
    let mut bundles = Vec::new();
    for dc in &config.directions {
        bundles.push((dc.direction.clone(), load_bundle(config, dc)?));
    }
    let refs: Vec<(Direction, &SplitBundle)> =
        bundles.iter().map(|(d, b)| (d.clone(), b)).collect();
    let combined = assemble_multilingual(&refs)?;

    let dir = config.out_dir.join("multilingual");
    ensure_dir(&dir)?;
    for (name, pairs) in SPLIT_NAMES
        .iter()
        .zip([&combined.train, &combined.test, &combined.validation])
    {
        let mut src = String::new();
        let mut tgt = String::new();
        let mut dirs = String::new();
        for p in pairs {
            src.push_str(&p.source_text);
            src.push('\n');
            tgt.push_str(&p.target_text);
            tgt.push('\n');
            dirs.push_str(&p.direction.to_string());
            dirs.push('\n');
        }
        std::fs::write(dir.join(format!("{name}.src")), src)?;
        std::fs::write(dir.join(format!("{name}.tgt")), tgt)?;
        // Direction per line, so evaluation can score each direction.
        std::fs::write(dir.join(format!("{name}.dir")), dirs)?;
    }
    let inputs: Vec<(String, PathBuf)> = config
        .directions
        .iter()
        .flat_map(|dc| {
            SPLIT_NAMES.iter().map(|name| {
                (
                    format!("{}/{name}", dc.direction),
                    split_dir(config, &dc.direction).join(format!("{name}.jsonl")),
                )
            })
        })
        .collect();
    let input_refs: Vec<(String, &Path)> =
        inputs.iter().map(|(l, p)| (l.clone(), p.as_path())).collect();
    write_manifest(&dir, "tag", config.seed, &input_refs)?;
    println!(
        "tag: {} directions -> {} train / {} test / {} validation pairs",
        config.directions.len(),
        combined.train.len(),
        combined.test.len(),
        combined.validation.len()
    );
    Ok(())
}

fn read_plain_lines(path: &Path) -> Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

pub fn cmd_bleu(hyp_path: &Path, ref_path: &Path, smoothing: Smoothing) -> Result<()> {
    let hypotheses = read_plain_lines(hyp_path)?;
    let references = read_plain_lines(ref_path)?;
    let report = bleu_corpus_with(&hypotheses, &references, smoothing)?;
    println!("{}", report.to_human_line());
    Ok(())
}

fn build_train_index(config: &PipelineConfig, dc: &DirectionConfig) -> Result<RetrievalIndex> {
    let corpus = read_corpus(
        &split_dir(config, &dc.direction).join("train.jsonl"),
        &dc.direction,
    )
    .with_context(|| format!("direction {}: run `split` first", dc.direction))?;
    Ok(build_index(&corpus, Box::<CharNgramEmbedder>::default()))
}

fn escape_cell(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t")
}

pub fn cmd_retrieve(
    config: &PipelineConfig,
    direction: Option<&str>,
    input: Option<&Path>,
    k: usize,
) -> Result<()> {
    let dc = config.direction(direction)?;
    let index = build_train_index(config, dc)?;
    let index_dir = config.out_dir.join("index");
    ensure_dir(&index_dir)?;
    let index_path = index_dir.join(format!("{}.idx", dc.direction));
    index.save(&index_path)?;
    println!(
        "retrieve {}: indexed {} pairs -> {}",
        dc.direction,
        index.len(),
        index_path.display()
    );

    if let Some(input) = input {
        let queries = read_plain_lines(input)?;
        let out_dir = config.out_dir.join("retrieve");
        ensure_dir(&out_dir)?;
        let mut out = String::new();
        for (i, query) in queries.iter().enumerate() {
            for (rank, m) in index.retrieve(query, k).iter().enumerate() {
                out.push_str(&format!(
                    "{}\t{}\t{:.6}\t{}\t{}\n",
                    i + 1,
                    rank + 1,
                    m.similarity,
                    escape_cell(&m.source),
                    escape_cell(&m.target),
                ));
            }
        }
        let out_path = out_dir.join(format!("{}.matches.tsv", dc.direction));
        std::fs::write(&out_path, out)?;
        write_manifest(
            &out_dir,
            &format!("retrieve.{}", dc.direction),
            config.seed,
            &[
                ("input".to_string(), input),
                ("index".to_string(), index_path.as_path()),
            ],
        )?;
        println!(
            "retrieve {}: {} queries -> {}",
            dc.direction,
            queries.len(),
            out_path.display()
        );
    }
    Ok(())
}

pub fn cmd_translate(
    config: &PipelineConfig,
    direction: Option<&str>,
    input: &Path,
    k: Option<usize>,
) -> Result<()> {
    let backend_config = config
        .backend
        .as_ref()
        .context("config has no [backend] section")?;
    let dc = config.direction(direction)?;
    let api_key = std::env::var(API_KEY_ENV).ok();
    let backend = HttpBackend::new(&backend_config.endpoint, &backend_config.model, api_key)?;
    let params = BackendParams {
        top_p: backend_config.top_p,
        temperature: backend_config.temperature,
        length_multiplier: backend_config.length_multiplier,
    };
    let k = k.unwrap_or(backend_config.max_matches);

    let index = build_train_index(config, dc)?;
    let queries = read_plain_lines(input)?;
    let out_dir = config.out_dir.join("translate");
    ensure_dir(&out_dir)?;
    let mut hyp = String::new();
    let mut prompts = String::new();
    for (i, query) in queries.iter().enumerate() {
        let result = translate_few_shot(
            &index,
            &backend,
            query,
            &params,
            k,
            &dc.direction.source,
            &dc.direction.target,
        )
        .with_context(|| format!("{}:{}", input.display(), i + 1))?;
        hyp.push_str(&result.translation);
        hyp.push('\n');
        prompts.push_str(&format!("# line {}\n{}\n\n", i + 1, result.prompt));
    }
    let hyp_path = out_dir.join(format!("{}.hyp", dc.direction));
    std::fs::write(&hyp_path, hyp)?;
    // Audit trail: the exact prompt sent for every line.
    std::fs::write(out_dir.join(format!("{}.prompts", dc.direction)), prompts)?;
    let train_store = split_dir(config, &dc.direction).join("train.jsonl");
    write_manifest(
        &out_dir,
        &format!("translate.{}", dc.direction),
        config.seed,
        &[
            ("input".to_string(), input),
            ("train".to_string(), train_store.as_path()),
        ],
    )?;
    println!(
        "translate {}: {} lines -> {}",
        dc.direction,
        queries.len(),
        hyp_path.display()
    );
    Ok(())
}
