//! Toolkit configuration file: one JSON document wiring models, watermark
//! parameters, and experiment settings into reproducible pipelines.
//!
//! Unknown keys are rejected. Referenced files are checked at load time.
//! Every command embeds the resolved configuration and seed into its output
//! so artifacts are self-describing.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use textwm_core::attack::AttackKind;
use textwm_core::dual::DualConfig;
use textwm_core::experiment::{AttackSpec, ExperimentSpec};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_pos: usize,
    pub n_neg: usize,
    pub gen_len: usize,
    #[serde(default = "default_prompt_len")]
    pub prompt_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    pub kind: AttackKind,
    pub ratio: f64,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_host_len")]
    pub host_len: usize,
}

fn default_prompt_len() -> usize {
    8
}

fn default_segments() -> usize {
    3
}

fn default_host_len() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolkitConfig {
    pub version: u32,
    /// Language model file produced by `textwm train`.
    pub model: PathBuf,
    /// Optional judge model for perplexity scoring (threshold sweeps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_model: Option<PathBuf>,
    /// Natural (human) text file: detection negatives, prompts, hosts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub natural: Option<PathBuf>,
    pub watermark: DualConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
    /// Master seed; `--seed` overrides it.
    pub seed: u64,
}

impl ToolkitConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: ToolkitConfig = serde_json::from_str(&raw)
            .with_context(|| format!("invalid config {}", path.display()))?;
        if cfg.version != CONFIG_VERSION {
            bail!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            );
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = cfg;
        cfg.model = resolve(base, &cfg.model);
        cfg.judge_model = cfg.judge_model.as_ref().map(|p| resolve(base, p));
        cfg.natural = cfg.natural.as_ref().map(|p| resolve(base, p));
        for (name, p) in [("model", Some(&cfg.model))].into_iter().chain([
            ("judge_model", cfg.judge_model.as_ref()),
            ("natural", cfg.natural.as_ref()),
        ]) {
            if let Some(p) = p {
                if !p.exists() {
                    bail!("config key {name:?}: file {} does not exist", p.display());
                }
            }
        }
        cfg.watermark
            .validate()
            .map_err(|e| anyhow::anyhow!("config key \"watermark\": {e}"))?;
        Ok(cfg)
    }

    /// Experiment spec assembled from the config sections and the resolved
    /// master seed.
    pub fn experiment_spec(&self, seed: u64) -> Result<ExperimentSpec> {
        let section = self
            .experiment
            .as_ref()
            .context("config has no \"experiment\" section")?;
        Ok(ExperimentSpec {
            watermark: self.watermark.clone(),
            n_pos: section.n_pos,
            n_neg: section.n_neg,
            gen_len: section.gen_len,
            prompt_len: section.prompt_len,
            attack: section.attack.as_ref().map(|a| AttackSpec {
                kind: a.kind,
                ratio: a.ratio,
                segments: a.segments,
                host_len: a.host_len,
            }),
            master_seed: seed,
        })
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
