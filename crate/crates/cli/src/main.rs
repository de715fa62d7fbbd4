//! `gezmt` — corpus engineering, evaluation, and fuzzy-match translation
//! pipeline for Ge'ez-script machine translation experiments.

mod commands;
mod config;
mod manifest;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gezmt_core::bleu::Smoothing;

use config::PipelineConfig;

#[derive(Parser)]
#[command(name = "gezmt", version, about = "Low-resource MT corpus pipeline")]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory from the config file.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read the configured parallel files into the corpus store.
    Ingest,
    /// Deduplicate, split into train/test/validation, and verify.
    Split,
    /// Print and write the per-direction, per-domain statistics table.
    Stats,
    /// Train the shared BPE model on all training sides.
    BpeTrain,
    /// Segment every split (and the multilingual corpus, if present).
    BpeApply,
    /// Apply target-language tags and assemble the multilingual corpus.
    Tag,
    /// Score a hypothesis file against a reference file.
    Bleu {
        hyp: PathBuf,
        reference: PathBuf,
        /// Smoothing: "none" or "add-one".
        #[arg(long, default_value = "none")]
        smoothing: String,
    },
    /// Build the fuzzy-match index; optionally run queries from a file.
    Retrieve {
        #[arg(long)]
        direction: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = gezmt_core::retrieval::MAX_FUZZY_MATCHES)]
        k: usize,
    },
    /// Few-shot translate an input file via the configured backend.
    ///
    /// The backend credential is read from the GEZMT_API_KEY environment
    /// variable; there is deliberately no flag for it.
    Translate {
        #[arg(long)]
        direction: Option<String>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli.config.as_ref().context("--config is required for this command")?;
    PipelineConfig::load(path, cli.seed, cli.out_dir.clone())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest => commands::cmd_ingest(&load_config(&cli)?),
        Command::Split => commands::cmd_split(&load_config(&cli)?),
        Command::Stats => commands::cmd_stats(&load_config(&cli)?),
        Command::BpeTrain => commands::cmd_bpe_train(&load_config(&cli)?),
        Command::BpeApply => commands::cmd_bpe_apply(&load_config(&cli)?),
        Command::Tag => commands::cmd_tag(&load_config(&cli)?),
        Command::Bleu { hyp, reference, smoothing } => {
            let smoothing = match smoothing.as_str() {
                "none" => Smoothing::None,
                "add-one" => Smoothing::AddOne,
                other => anyhow::bail!("unknown smoothing {other:?} (expected none | add-one)"),
            };
            commands::cmd_bleu(hyp, reference, smoothing)
        }
        Command::Retrieve { direction, input, k } => commands::cmd_retrieve(
            &load_config(&cli)?,
            direction.as_deref(),
            input.as_deref(),
            *k,
        ),
        Command::Translate { direction, input, k } => {
            commands::cmd_translate(&load_config(&cli)?, direction.as_deref(), input, *k)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // One line, colon-chained, for machine consumption.
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
