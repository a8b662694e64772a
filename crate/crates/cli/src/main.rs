//! `textwm`: watermark toolkit pipelines over n-gram language models.
//!
//! Subcommands: `train`, `generate`, `detect`, `attack`, `steal`, `spoof`,
//! `asr`, `eval`, `sweep`. Every command is a deterministic wrapper over
//! the library: identical config and seed produce byte-identical outputs,
//! and every output file embeds its resolved configuration, format tag,
//! version, and seed. No command mutates its inputs.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use config::ToolkitConfig;
use textwm_core::adversary::{attack_success_rate, estimate_greenlist, spoof_generate};
use textwm_core::attack::{copy_paste, word_delete, word_substitute, AttackKind, SubstituteMode};
use textwm_core::dual::{detect_grouped, detect_unified, generate, group_tokens, Strategy};
use textwm_core::experiment::{run_experiment, sweep_thresholds};
use textwm_core::logits_wm::GreenList;
use textwm_core::model::{TextModel, TrainOptions};
use textwm_core::ngram::NGramModel;
use textwm_core::rng::derive_seed;
use textwm_core::TokenId;

const FILE_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "textwm",
    version,
    about = "Dual-channel text watermarking toolkit"
)]
struct Cli {
    /// Toolkit config file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a language model (vocabulary, n-gram counts, embeddings).
    Train {
        /// UTF-8 corpus text file.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 32)]
        embed_dim: usize,
        #[arg(long, default_value_t = 2)]
        embed_window: usize,
        /// Reuse another model's vocabulary (token ids), e.g. to train a
        /// judge model compatible with the main one.
        #[arg(long)]
        vocab_from: Option<PathBuf>,
    },

    /// Generate watermarked text with the configured strategy.
    Generate {
        /// Prompt text (tokenized with the model vocabulary).
        #[arg(long, default_value = "")]
        prompt: String,
        /// Read the prompt from a file instead.
        #[arg(long, conflicts_with = "prompt")]
        prompt_file: Option<PathBuf>,
        /// Override the configured strategy.
        #[arg(long)]
        strategy: Option<String>,
        /// Override the configured length.
        #[arg(long)]
        max_tokens: Option<usize>,
        #[command(flatten)]
        overrides: ChannelOverrides,
    },

    /// Detect watermarks in a token file (or raw text).
    Detect {
        /// Token-sequence JSON (any file with a "token_ids" field).
        #[arg(long, required_unless_present = "text_file")]
        input: Option<PathBuf>,
        /// Raw text alternative; tokenized with the model vocabulary.
        #[arg(long)]
        text_file: Option<PathBuf>,
        /// Group tokens per strategy and detect each group separately.
        #[arg(long)]
        grouped: bool,
        #[command(flatten)]
        overrides: ChannelOverrides,
    },

    /// Perturb a token sequence (deletion, substitution, copy-paste).
    Attack {
        #[arg(long)]
        input: PathBuf,
        /// word_delete | word_sub_random | word_sub_embed | copy_paste
        #[arg(long)]
        kind: String,
        /// Deletion/substitution fraction, or copy-paste retain ratio.
        #[arg(long)]
        ratio: f64,
        /// Copy-paste chunk count.
        #[arg(long, default_value_t = 3)]
        segments: usize,
        /// Host token file for copy-paste.
        #[arg(long)]
        host: Option<PathBuf>,
    },

    /// Estimate the green list from observed watermarked tokens.
    Steal {
        /// Watermarked token file (the attacker's observations).
        #[arg(long)]
        input: PathBuf,
        /// Observation budget in tokens (prefix of the input).
        #[arg(long)]
        budget: Option<usize>,
        /// Fraction of the vocabulary to declare green.
        #[arg(long)]
        gamma: Option<f64>,
    },

    /// Generate spoofed texts biased toward an estimated green list.
    Spoof {
        /// Estimated green-list file from `steal`.
        #[arg(long)]
        green: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        strength: f64,
        #[arg(long, default_value_t = 100)]
        n_texts: usize,
        #[arg(long)]
        max_tokens: Option<usize>,
        #[arg(long, default_value_t = 8)]
        prompt_len: usize,
    },

    /// Attack success rate of spoofed texts against the true-key detector.
    Asr {
        /// Spoofed-texts file from `spoof`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6.0)]
        z_threshold: f64,
    },

    /// Run the configured experiment: generate, attack, detect, score.
    Eval,

    /// Sweep hybrid entropy thresholds: detection/quality grid.
    Sweep {
        /// Comma-separated token-entropy thresholds.
        #[arg(long)]
        alphas: String,
        /// Comma-separated semantic-entropy thresholds.
        #[arg(long)]
        betas: String,
    },
}

/// Per-invocation overrides of the watermark channel parameters; anything
/// left unset keeps the config-file value.
#[derive(clap::Args, Clone, Default)]
struct ChannelOverrides {
    /// Logits partition scheme (unigram | kgw).
    #[arg(long)]
    scheme: Option<String>,
    /// Logits watermark key.
    #[arg(long)]
    logits_key: Option<u64>,
    /// Green fraction of the vocabulary.
    #[arg(long)]
    gamma: Option<f64>,
    /// Additive green-logit bias.
    #[arg(long)]
    delta: Option<f64>,
    /// Context width of the kgw partition.
    #[arg(long)]
    prefix_len: Option<usize>,
    /// Logits detection threshold z1.
    #[arg(long)]
    z_threshold: Option<f64>,
    /// Sampling watermark key.
    #[arg(long)]
    sampling_key: Option<u64>,
    /// Sampling detection significance.
    #[arg(long)]
    p_threshold: Option<f64>,
}

impl ChannelOverrides {
    fn apply(&self, wm: &mut textwm_core::dual::DualConfig) -> Result<()> {
        if let Some(scheme) = &self.scheme {
            wm.logits.scheme = match scheme.as_str() {
                "unigram" => textwm_core::logits_wm::PartitionScheme::Unigram,
                "kgw" => textwm_core::logits_wm::PartitionScheme::Kgw,
                other => bail!("unknown scheme {other:?} (unigram|kgw)"),
            };
        }
        if let Some(k) = self.logits_key {
            wm.logits.key = k;
        }
        if let Some(g) = self.gamma {
            wm.logits.gamma = g;
        }
        if let Some(d) = self.delta {
            wm.logits.delta = d;
        }
        if let Some(p) = self.prefix_len {
            wm.logits.prefix_len = p;
        }
        if let Some(z) = self.z_threshold {
            wm.logits.z_threshold = z;
        }
        if let Some(k) = self.sampling_key {
            wm.sampling.key = k;
        }
        if let Some(p) = self.p_threshold {
            wm.sampling.p_threshold = p;
        }
        wm.logits.validate()?;
        wm.sampling.validate()?;
        Ok(())
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            ref corpus,
            order,
            lambda,
            embed_dim,
            embed_window,
            ref vocab_from,
        } => {
            let out = need_out(&cli)?;
            let text = fs::read_to_string(corpus)
                .with_context(|| format!("cannot read corpus {}", corpus.display()))?;
            let options = TrainOptions {
                order,
                lambda,
                embed_dim,
                embed_window,
                embed_seed: cli.seed.unwrap_or(TrainOptions::default().embed_seed),
            };
            let model = match vocab_from {
                Some(path) => {
                    let donor = TextModel::load(path)?;
                    TextModel::train_with_vocab(donor.vocab, &text, &options)?
                }
                None => TextModel::train(&text, &options)?,
            };
            model.save(&out)?;
            eprintln!("trained model: vocab={} order={order}", model.vocab_size());
            Ok(())
        }

        Command::Generate {
            ref prompt,
            ref prompt_file,
            ref strategy,
            max_tokens,
            ref overrides,
        } => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let seed = cli.seed.unwrap_or(cfg.seed);
            let model = TextModel::load(&cfg.model)?;
            let mut wm = cfg.watermark.clone();
            wm.sampler_seed = seed;
            if let Some(s) = strategy {
                wm.strategy = parse_strategy(s)?;
            }
            if let Some(t) = max_tokens {
                wm.max_tokens = t;
            }
            overrides.apply(&mut wm)?;
            let prompt_text = match prompt_file {
                Some(p) => fs::read_to_string(p)
                    .with_context(|| format!("cannot read prompt {}", p.display()))?,
                None => prompt.clone(),
            };
            let prompt_ids = model.vocab.encode(&prompt_text)?;
            let (tokens, trace) = generate(&model, &prompt_ids, &wm)?;
            let text = model.vocab.decode(&tokens);
            write_json(
                &out,
                &json!({
                    "format": "textwm-generation",
                    "version": FILE_VERSION,
                    "seed": seed,
                    "config": wm,
                    "prompt_ids": prompt_ids,
                    "token_ids": tokens,
                    "text": text,
                }),
            )?;
            let trace_path = sibling(&out, "trace.jsonl");
            fs::write(&trace_path, trace.to_jsonl()?)?;
            eprintln!("wrote {} and {}", out.display(), trace_path.display());
            Ok(())
        }

        Command::Detect {
            ref input,
            ref text_file,
            grouped,
            ref overrides,
        } => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let model = TextModel::load(&cfg.model)?;
            let mut wm = cfg.watermark.clone();
            overrides.apply(&mut wm)?;
            let tokens: Vec<TokenId> = match (input, text_file) {
                (Some(path), _) => read_tokens(path)?,
                (None, Some(path)) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("cannot read text {}", path.display()))?;
                    model.vocab.encode(&text)?
                }
                (None, None) => bail!("detect needs --input or --text-file"),
            };
            let v = model.vocab_size();
            check_ids(&tokens, v, "detect input")?;
            let report = if grouped {
                let (y_l, y_s) = group_tokens(&model, &tokens, &wm)?;
                detect_grouped(&y_l, &y_s, &wm.logits, &wm.sampling, v)?
            } else {
                detect_unified(&tokens, &wm.logits, &wm.sampling, v)?
            };
            write_json(
                &out,
                &json!({
                    "format": "textwm-detection",
                    "version": FILE_VERSION,
                    "grouped": grouped,
                    "config": { "logits": wm.logits, "sampling": wm.sampling },
                    "combined_statistic": report.combined_statistic(),
                    "report": report,
                }),
            )?;
            println!(
                "{}",
                if report.detected {
                    "WATERMARKED"
                } else {
                    "clean"
                }
            );
            Ok(())
        }

        Command::Attack {
            ref input,
            ref kind,
            ratio,
            segments,
            ref host,
        } => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let seed = cli.seed.unwrap_or(cfg.seed);
            let model = TextModel::load(&cfg.model)?;
            let tokens = read_tokens(input)?;
            check_ids(&tokens, model.vocab_size(), "attack input")?;
            let kind = parse_attack(kind)?;
            let attacked = match kind {
                AttackKind::WordDelete => word_delete(&tokens, ratio, seed)?,
                AttackKind::WordSubRandom => word_substitute(
                    &tokens,
                    ratio,
                    SubstituteMode::Random,
                    None,
                    model.vocab_size(),
                    seed,
                )?,
                AttackKind::WordSubEmbed => word_substitute(
                    &tokens,
                    ratio,
                    SubstituteMode::EmbedNearest,
                    Some(&model.embeddings),
                    model.vocab_size(),
                    seed,
                )?,
                AttackKind::CopyPaste => {
                    let host_path = host.as_ref().context("copy_paste needs --host")?;
                    let host_tokens = read_tokens(host_path)?;
                    check_ids(&host_tokens, model.vocab_size(), "copy_paste host")?;
                    copy_paste(&tokens, &host_tokens, ratio, segments, seed)?
                }
            };
            write_json(
                &out,
                &json!({
                    "format": "textwm-tokens",
                    "version": FILE_VERSION,
                    "seed": seed,
                    "config": { "attack": kind, "ratio": ratio, "segments": segments },
                    "token_ids": attacked,
                }),
            )?;
            Ok(())
        }

        Command::Steal {
            ref input,
            budget,
            gamma,
        } => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let model = TextModel::load(&cfg.model)?;
            let observed = read_tokens(input)?;
            check_ids(&observed, model.vocab_size(), "stealing corpus")?;
            let budget = budget.unwrap_or(observed.len()).min(observed.len());
            let gamma = gamma.unwrap_or(cfg.watermark.logits.gamma);
            let base = model.ngram.unigram_probs();
            let est = estimate_greenlist(&observed[..budget], &base, gamma)?;
            write_json(
                &out,
                &json!({
                    "format": "textwm-greenlist",
                    "version": FILE_VERSION,
                    "config": { "gamma": gamma, "budget": budget },
                    "green_ids": est.green_ids(),
                }),
            )?;
            Ok(())
        }

        Command::Spoof {
            ref green,
            strength,
            n_texts,
            max_tokens,
            prompt_len,
        } => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let seed = cli.seed.unwrap_or(cfg.seed);
            let model = TextModel::load(&cfg.model)?;
            let est = read_greenlist(green, model.vocab_size())?;
            let max_tokens = max_tokens.unwrap_or(cfg.watermark.max_tokens);
            let natural = read_natural(&cfg, &model)?;
            if natural.len() < n_texts * prompt_len {
                bail!("natural corpus too short for {n_texts} spoof prompts");
            }
            let texts: Vec<Vec<TokenId>> = (0..n_texts)
                .map(|i| {
                    let prompt = &natural[i * prompt_len..(i + 1) * prompt_len];
                    spoof_generate(
                        &model,
                        &est,
                        strength,
                        prompt,
                        max_tokens,
                        derive_seed(seed, i as u64),
                    )
                })
                .collect();
            write_json(
                &out,
                &json!({
                    "format": "textwm-spoofed",
                    "version": FILE_VERSION,
                    "seed": seed,
                    "config": { "strength": strength, "n_texts": n_texts, "max_tokens": max_tokens },
                    "texts": texts,
                }),
            )?;
            Ok(())
        }

        Command::Asr {
            ref input,
            z_threshold,
        } => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let model = TextModel::load(&cfg.model)?;
            let texts = read_spoofed(input)?;
            for t in &texts {
                check_ids(t, model.vocab_size(), "spoofed text")?;
            }
            let asr = attack_success_rate(
                &texts,
                &cfg.watermark.logits,
                model.vocab_size(),
                z_threshold,
            )?;
            write_json(
                &out,
                &json!({
                    "format": "textwm-asr",
                    "version": FILE_VERSION,
                    "config": { "logits": cfg.watermark.logits, "z_threshold": z_threshold },
                    "n": texts.len(),
                    "asr": asr,
                }),
            )?;
            println!("asr {asr}");
            Ok(())
        }

        Command::Eval => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let seed = cli.seed.unwrap_or(cfg.seed);
            let model = TextModel::load(&cfg.model)?;
            let natural = read_natural(&cfg, &model)?;
            let spec = cfg.experiment_spec(seed)?;
            let results = run_experiment(&model, &natural, &spec)?;
            write_json(
                &out,
                &json!({
                    "format": "textwm-eval",
                    "version": FILE_VERSION,
                    "seed": seed,
                    "results": results,
                }),
            )?;
            let csv_path = sibling(&out, "csv");
            fs::write(&csv_path, results.to_csv())?;
            println!(
                "best_f1 {} auc {} tpr {} tnr {}",
                results.summary.best_f1,
                results.summary.auc,
                results.summary.tpr,
                results.summary.tnr
            );
            Ok(())
        }

        Command::Sweep {
            ref alphas,
            ref betas,
        } => {
            let out = need_out(&cli)?;
            let cfg = need_config(&cli)?;
            let seed = cli.seed.unwrap_or(cfg.seed);
            let model = TextModel::load(&cfg.model)?;
            let judge_path = cfg
                .judge_model
                .as_ref()
                .context("sweep needs a \"judge_model\" in the config")?;
            let judge = load_judge(judge_path, &model)?;
            let natural = read_natural(&cfg, &model)?;
            let spec = cfg.experiment_spec(seed)?;
            let alphas = parse_floats(alphas)?;
            let betas = parse_floats(betas)?;
            let sweep = sweep_thresholds(&model, &judge, &natural, &spec, &alphas, &betas)?;
            write_json(
                &out,
                &json!({
                    "format": "textwm-sweep",
                    "version": FILE_VERSION,
                    "seed": seed,
                    "sweep": sweep,
                }),
            )?;
            Ok(())
        }
    }
}

fn need_out(cli: &Cli) -> Result<PathBuf> {
    cli.out.clone().context("this command needs --out")
}

fn need_config(cli: &Cli) -> Result<ToolkitConfig> {
    let path = cli.config.as_ref().context("this command needs --config")?;
    ToolkitConfig::load(path)
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    match s {
        "series" => Ok(Strategy::Series),
        "parallel" => Ok(Strategy::Parallel),
        "hybrid" => Ok(Strategy::Hybrid),
        other => bail!("unknown strategy {other:?} (series|parallel|hybrid)"),
    }
}

fn parse_attack(s: &str) -> Result<AttackKind> {
    match s {
        "word_delete" => Ok(AttackKind::WordDelete),
        "word_sub_random" => Ok(AttackKind::WordSubRandom),
        "word_sub_embed" => Ok(AttackKind::WordSubEmbed),
        "copy_paste" => Ok(AttackKind::CopyPaste),
        other => bail!("unknown attack kind {other:?}"),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            match x {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => x
                    .parse::<f64>()
                    .with_context(|| format!("bad number {x:?}")),
            }
        })
        .collect()
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[derive(Deserialize)]
struct TokensFile {
    token_ids: Vec<TokenId>,
}

/// Any JSON file carrying a "token_ids" array (generation or attack output).
fn read_tokens(path: &Path) -> Result<Vec<TokenId>> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read tokens {}", path.display()))?;
    let f: TokensFile = serde_json::from_str(&raw)
        .with_context(|| format!("{} has no token_ids array", path.display()))?;
    Ok(f.token_ids)
}

/// Token files come from outside the process; ids must index into the
/// model's vocabulary before any detector touches them.
fn check_ids(tokens: &[TokenId], vocab_size: usize, what: &str) -> Result<()> {
    if let Some(&bad) = tokens.iter().find(|&&id| id as usize >= vocab_size) {
        bail!("{what}: token id {bad} outside vocabulary of size {vocab_size}");
    }
    Ok(())
}

#[derive(Deserialize)]
struct GreenlistFile {
    green_ids: Vec<TokenId>,
}

fn read_greenlist(path: &Path, vocab_size: usize) -> Result<GreenList> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read green list {}", path.display()))?;
    let f: GreenlistFile = serde_json::from_str(&raw)
        .with_context(|| format!("{} has no green_ids array", path.display()))?;
    if let Some(&bad) = f.green_ids.iter().find(|&&id| id as usize >= vocab_size) {
        bail!("green id {bad} outside vocabulary of size {vocab_size}");
    }
    Ok(GreenList::from_ids(&f.green_ids, vocab_size))
}

#[derive(Deserialize)]
struct SpoofedFile {
    texts: Vec<Vec<TokenId>>,
}

fn read_spoofed(path: &Path) -> Result<Vec<Vec<TokenId>>> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read spoofed texts {}", path.display()))?;
    let f: SpoofedFile = serde_json::from_str(&raw)
        .with_context(|| format!("{} has no texts array", path.display()))?;
    Ok(f.texts)
}

/// Natural corpus tokens encoded with the model vocabulary.
fn read_natural(cfg: &ToolkitConfig, model: &TextModel) -> Result<Vec<TokenId>> {
    let path = cfg
        .natural
        .as_ref()
        .context("config has no \"natural\" corpus path")?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read natural corpus {}", path.display()))?;
    Ok(model.vocab.encode(&text)?)
}

/// A judge model must share the main model's vocabulary so token ids mean
/// the same thing.
fn load_judge(path: &Path, model: &TextModel) -> Result<NGramModel> {
    let judge = TextModel::load(path)?;
    if judge.vocab_size() != model.vocab_size() {
        bail!(
            "judge vocabulary size {} differs from model vocabulary size {}",
            judge.vocab_size(),
            model.vocab_size()
        );
    }
    for id in 0..model.vocab_size() as TokenId {
        if judge.vocab.token(id) != model.vocab.token(id) {
            bail!("judge vocabulary disagrees with model vocabulary at id {id}");
        }
    }
    Ok(judge.ngram)
}
