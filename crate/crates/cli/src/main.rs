//! newsflow: a desk-scale business-news stream processor.
//!
//! Ingest news chunks, clean and score them, tag near-duplicates online,
//! link company mentions, classify business events, and serve the enriched
//! items through a faceted search API.

mod commands;
mod corpus;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};

use newsflow_core::config::AppConfig;

#[derive(Parser)]
#[command(name = "newsflow", version, about = "Business-news stream processor")]
struct Cli {
    /// Path to the JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress details to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a news-items file (one JSON object per line) into chunk files.
    Ingest {
        /// Items file to split.
        path: PathBuf,
        /// Items per chunk.
        #[arg(long, default_value_t = 200)]
        chunk_size: usize,
        /// Write gzipped chunks (.gz suffix).
        #[arg(long)]
        gzip: bool,
    },
    /// Poll the chunk store and enqueue work orders for new chunks.
    Coordinator {
        /// Run a single tick and exit.
        #[arg(long)]
        once: bool,
    },
    /// Process work orders: cleanse, dedup, link, classify, index.
    Worker {
        /// Worker threads (0 = config value).
        #[arg(long, default_value_t = 0)]
        concurrency: usize,
        /// Exit once the queue is empty instead of polling forever.
        #[arg(long)]
        drain: bool,
    },
    /// Serve the query API over the index.
    Serve {
        /// Listen port (overrides config).
        #[arg(long)]
        port: Option<u16>,
    },
    /// Train one category's classifier from a labeled JSONL dataset.
    Train {
        #[arg(long)]
        category: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Model output path (defaults to events.models_path/<category>.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratified k-fold cross-validation for one category.
    Cv {
        #[arg(long)]
        category: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 3)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expand seed words to their nearest embedding neighbors.
    Expand {
        /// Seed words, one per line.
        #[arg(long)]
        seeds: PathBuf,
        /// Embeddings in word2vec text format.
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value_t = 10)]
        topk: usize,
    },
    /// Boolean retrieval over a JSONL corpus, with optional seeded sampling.
    Retrieve {
        /// Boolean query JSON file: {"groups": [["a","b"],["c"]]}.
        #[arg(long)]
        query: PathBuf,
        /// Corpus file: one {doc_id, text, label} JSON object per line.
        #[arg(long)]
        corpus: PathBuf,
        /// Sample size (omit to list all matches).
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pick the confidence threshold maximizing F-beta on a dev set.
    TuneThreshold {
        /// Annotated dev set: JSONL with confidence and gold fields.
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
    },
    /// Query the persisted index directly.
    Query {
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        company: Option<String>,
        #[arg(long)]
        event: Option<String>,
        /// RFC 3339 lower bound on publication time.
        #[arg(long)]
        from: Option<String>,
        /// RFC 3339 upper bound on publication time.
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        include_duplicates: bool,
        #[arg(long)]
        include_low_quality: bool,
        #[arg(long, default_value_t = 0)]
        page: usize,
        #[arg(long)]
        size: Option<usize>,
    },
    /// Generate a synthetic corpus with ground truth and a ready config.
    GenCorpus {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Total items, planted duplicate copies included.
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, default_value_t = 0.1)]
        duplicate_rate: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        chunk_size: usize,
        /// Write gzipped chunks.
        #[arg(long)]
        gzip: bool,
    },
}

fn load_config(cli: &Cli) -> Result<AppConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow!("this command requires --config <FILE>"))?;
    Ok(AppConfig::load(path)?)
}

fn run(cli: Cli) -> Result<()> {
    // Commands that can run without a config still validate one if given.
    if let Some(path) = &cli.config {
        AppConfig::load(path)?;
    }
    match &cli.command {
        Command::Ingest {
            path,
            chunk_size,
            gzip,
        } => {
            let config = load_config(&cli)?;
            let chunks = commands::ingest(&config, path, *chunk_size, *gzip)?;
            println!("{}", serde_json::json!({"chunks_written": chunks}));
            Ok(())
        }
        Command::Coordinator { once } => {
            let config = load_config(&cli)?;
            commands::coordinator(&config, *once, cli.verbose)
        }
        Command::Worker { concurrency, drain } => {
            let config = load_config(&cli)?;
            commands::worker(&config, *concurrency, *drain, cli.verbose)
        }
        Command::Serve { port } => {
            let config = load_config(&cli)?;
            commands::serve_index(&config, *port, cli.verbose)
        }
        Command::Train {
            category,
            data,
            seed,
            out,
        } => {
            let config = load_config(&cli)?;
            commands::train(&config, category, data, *seed, out.as_deref())
        }
        Command::Cv {
            category,
            data,
            folds,
            seed,
        } => {
            let config = load_config(&cli)?;
            commands::cross_validate_cmd(&config, category, data, *folds, *seed)
        }
        Command::Expand {
            seeds,
            embeddings,
            topk,
        } => commands::expand(seeds, embeddings, *topk),
        Command::Retrieve {
            query,
            corpus,
            sample,
            seed,
        } => commands::retrieve(query, corpus, *sample, *seed),
        Command::TuneThreshold { annotations, beta } => {
            commands::tune_threshold_cmd(annotations, *beta)
        }
        Command::Query {
            q,
            company,
            event,
            from,
            to,
            include_duplicates,
            include_low_quality,
            page,
            size,
        } => {
            let config = load_config(&cli)?;
            commands::query(
                &config,
                q.clone(),
                company.clone(),
                event.clone(),
                from.clone(),
                to.clone(),
                *include_duplicates,
                *include_low_quality,
                *page,
                *size,
            )
        }
        Command::GenCorpus {
            out,
            size,
            duplicate_rate,
            seed,
            chunk_size,
            gzip,
        } => {
            let spec = corpus::CorpusSpec {
                size: *size,
                duplicate_rate: *duplicate_rate,
                seed: *seed,
                chunk_size: *chunk_size,
                gzip_chunks: *gzip,
            };
            let manifest = corpus::generate(out, &spec)?;
            println!(
                "{}",
                serde_json::json!({
                    "out": out,
                    "size": manifest.size,
                    "originals": manifest.originals,
                    "duplicates": manifest.duplicate_count,
                    "chunks": manifest.chunk_count,
                    "config": out.join("config.json"),
                })
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("newsflow: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
