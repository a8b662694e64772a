//! End-to-end experiment orchestration: generate watermarked positives and
//! natural negatives, optionally attack the positives, score everything
//! with the unified detector, and aggregate metrics. Also the entropy
//! threshold sweep for the hybrid strategy.
//!
//! Everything derives from a master seed: sample i uses seed
//! `derive_seed(master, i)` for its sampler stream and a salted variant for
//! its attack, so results files reproduce byte-for-byte, with or without
//! the parallel feature.

use serde::{Deserialize, Serialize};

use crate::attack::{copy_paste, word_delete, word_substitute, AttackKind, SubstituteMode};
use crate::batch::map_indexed;
use crate::dual::{
    detect_unified, generate, CategoryCounts, DetectionReport, DualConfig, Strategy,
};
use crate::error::{Error, Result};
use crate::metrics::{best_f1, roc_auc, verdict_rates, ScoredSample};
use crate::model::TextModel;
use crate::ngram::NGramModel;
use crate::rng::derive_seed;
use crate::vocab::TokenId;

const ATTACK_SALT: u64 = 0xA77A_C4ED;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Deletion/substitution fraction, or the retain ratio for copy-paste.
    pub ratio: f64,
    /// Copy-paste chunk count (ignored by the word attacks).
    #[serde(default = "default_segments")]
    pub segments: usize,
    /// Host text length for copy-paste, taken from the natural corpus.
    #[serde(default = "default_host_len")]
    pub host_len: usize,
}

fn default_segments() -> usize {
    3
}

fn default_host_len() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub watermark: DualConfig,
    pub n_pos: usize,
    pub n_neg: usize,
    /// Generated (and natural) sequence length.
    pub gen_len: usize,
    /// Prompt length fed to generation, sliced from the natural corpus.
    pub prompt_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackSpec>,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.watermark.validate()?;
        if self.n_pos < 1 || self.n_neg < 1 {
            return Err(Error::InvalidConfig("n_pos and n_neg must be >= 1".into()));
        }
        if self.gen_len < 1 {
            return Err(Error::InvalidConfig("gen_len must be >= 1".into()));
        }
        Ok(())
    }

    fn natural_need(&self) -> usize {
        let host = match &self.attack {
            Some(a) if a.kind == AttackKind::CopyPaste => a.host_len * self.n_pos,
            _ => 0,
        };
        self.n_neg * self.gen_len + self.n_pos * self.prompt_len + host
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub watermarked: bool,
    pub tokens: usize,
    pub z: f64,
    pub p_value: f64,
    pub combined: f64,
    pub verdict: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub n_pos: usize,
    pub n_neg: usize,
    /// Verdict rates at the configured thresholds.
    pub tpr: f64,
    pub tnr: f64,
    pub best_f1: f64,
    pub best_f1_threshold: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub spec: ExperimentSpec,
    pub summary: ExperimentSummary,
    pub roc: Vec<(f64, f64)>,
    pub samples: Vec<SampleRecord>,
}

impl ExperimentResults {
    /// Deterministic JSON encoding of the whole result.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-sample records as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,watermarked,tokens,z,p_value,combined,verdict\n");
        for r in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.index, r.watermarked, r.tokens, r.z, r.p_value, r.combined, r.verdict
            ));
        }
        out
    }
}

fn record(
    index: usize,
    watermarked: bool,
    tokens: usize,
    report: &DetectionReport,
) -> SampleRecord {
    SampleRecord {
        index,
        watermarked,
        tokens,
        z: report.logits.as_ref().map(|l| l.z).unwrap_or(f64::NAN),
        p_value: report
            .sampling
            .as_ref()
            .map(|s| s.p_value)
            .unwrap_or(f64::NAN),
        combined: report.combined_statistic(),
        verdict: report.detected,
    }
}

fn apply_attack(
    tokens: &[TokenId],
    attack: &AttackSpec,
    host: &[TokenId],
    model: &TextModel,
    seed: u64,
) -> Result<Vec<TokenId>> {
    match attack.kind {
        AttackKind::WordDelete => word_delete(tokens, attack.ratio, seed),
        AttackKind::WordSubRandom => word_substitute(
            tokens,
            attack.ratio,
            SubstituteMode::Random,
            None,
            model.vocab_size(),
            seed,
        ),
        AttackKind::WordSubEmbed => word_substitute(
            tokens,
            attack.ratio,
            SubstituteMode::EmbedNearest,
            Some(&model.embeddings),
            model.vocab_size(),
            seed,
        ),
        AttackKind::CopyPaste => copy_paste(tokens, host, attack.ratio, attack.segments, seed),
    }
}

/// Run one experiment: positives are watermarked generations (attacked when
/// configured), negatives are untouched held-out corpus slices.
pub fn run_experiment(
    model: &TextModel,
    natural: &[TokenId],
    spec: &ExperimentSpec,
) -> Result<ExperimentResults> {
    spec.validate()?;
    let need = spec.natural_need();
    if natural.len() < need {
        return Err(Error::InsufficientNatural {
            need,
            got: natural.len(),
        });
    }
    let v = model.vocab_size();
    let neg_base = 0;
    let prompt_base = spec.n_neg * spec.gen_len;
    let host_base = prompt_base + spec.n_pos * spec.prompt_len;

    let positives: Vec<Result<SampleRecord>> = map_indexed(spec.n_pos, |i| {
        let mut cfg = spec.watermark.clone();
        cfg.max_tokens = spec.gen_len;
        cfg.sampler_seed = derive_seed(spec.master_seed, i as u64);
        let prompt =
            &natural[prompt_base + i * spec.prompt_len..prompt_base + (i + 1) * spec.prompt_len];
        let (tokens, _) = generate(model, prompt, &cfg)?;
        let attacked = match &spec.attack {
            None => tokens,
            Some(a) => {
                let host = if a.kind == AttackKind::CopyPaste {
                    &natural[host_base + i * a.host_len..host_base + (i + 1) * a.host_len]
                } else {
                    &[][..]
                };
                apply_attack(
                    &tokens,
                    a,
                    host,
                    model,
                    derive_seed(spec.master_seed ^ ATTACK_SALT, i as u64),
                )?
            }
        };
        let report = detect_unified(&attacked, &cfg.logits, &cfg.sampling, v)?;
        Ok(record(i, true, attacked.len(), &report))
    });

    let negatives: Vec<Result<SampleRecord>> = map_indexed(spec.n_neg, |i| {
        let slice = &natural[neg_base + i * spec.gen_len..neg_base + (i + 1) * spec.gen_len];
        let report = detect_unified(slice, &spec.watermark.logits, &spec.watermark.sampling, v)?;
        Ok(record(spec.n_pos + i, false, slice.len(), &report))
    });

    let mut samples = Vec::with_capacity(spec.n_pos + spec.n_neg);
    for r in positives.into_iter().chain(negatives) {
        samples.push(r?);
    }

    let scored: Vec<ScoredSample> = samples
        .iter()
        .map(|r| ScoredSample::new(r.watermarked, r.combined, r.verdict))
        .collect();
    let (tpr, tnr) = verdict_rates(&scored)?;
    let (f1, f1_thr) = best_f1(&scored)?;
    let (roc, auc) = roc_auc(&scored)?;

    Ok(ExperimentResults {
        spec: spec.clone(),
        summary: ExperimentSummary {
            n_pos: spec.n_pos,
            n_neg: spec.n_neg,
            tpr,
            tnr,
            best_f1: f1,
            best_f1_threshold: f1_thr,
            auc,
        },
        roc,
        samples,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub best_f1: f64,
    pub auc: f64,
    pub mean_judge_ppl: f64,
    pub ratio_both: f64,
    pub ratio_logits_only: f64,
    pub ratio_sampling_only: f64,
    pub ratio_none: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResults {
    pub spec: ExperimentSpec,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

/// Hybrid threshold sweep: regenerate, detect, and judge at every
/// (alpha, beta) pair. The judge model scores text quality by perplexity;
/// category ratios come from the generation traces.
pub fn sweep_thresholds(
    model: &TextModel,
    judge: &NGramModel,
    natural: &[TokenId],
    spec: &ExperimentSpec,
    alphas: &[f64],
    betas: &[f64],
) -> Result<SweepResults> {
    if spec.watermark.strategy != Strategy::Hybrid {
        return Err(Error::InvalidConfig(
            "threshold sweeps need the hybrid strategy".into(),
        ));
    }
    spec.validate()?;
    let need = spec.natural_need();
    if natural.len() < need {
        return Err(Error::InsufficientNatural {
            need,
            got: natural.len(),
        });
    }
    let v = model.vocab_size();
    let prompt_base = spec.n_neg * spec.gen_len;

    // Negatives do not depend on the thresholds; score them once.
    let negative_results: Vec<Result<ScoredSample>> = map_indexed(spec.n_neg, |i| {
        let slice = &natural[i * spec.gen_len..(i + 1) * spec.gen_len];
        let report = detect_unified(slice, &spec.watermark.logits, &spec.watermark.sampling, v)?;
        Ok(ScoredSample::new(
            false,
            report.combined_statistic(),
            report.detected,
        ))
    });
    let mut negatives = Vec::with_capacity(spec.n_neg);
    for r in negative_results {
        negatives.push(r?);
    }

    let mut cells = Vec::with_capacity(alphas.len() * betas.len());
    for &alpha in alphas {
        for &beta in betas {
            let mut cfg = spec.watermark.clone();
            cfg.max_tokens = spec.gen_len;
            {
                let entropy = cfg.entropy.as_mut().expect("validated hybrid config");
                entropy.alpha = alpha;
                entropy.beta = beta;
            }
            let runs: Vec<Result<(ScoredSample, CategoryCounts, f64)>> =
                map_indexed(spec.n_pos, |i| {
                    let mut cfg_i = cfg.clone();
                    cfg_i.sampler_seed = derive_seed(spec.master_seed, i as u64);
                    let prompt = &natural[prompt_base + i * spec.prompt_len
                        ..prompt_base + (i + 1) * spec.prompt_len];
                    let (tokens, trace) = generate(model, prompt, &cfg_i)?;
                    let report = detect_unified(&tokens, &cfg_i.logits, &cfg_i.sampling, v)?;
                    let ppl = judge.perplexity(&tokens)?;
                    Ok((
                        ScoredSample::new(true, report.combined_statistic(), report.detected),
                        trace.categories(),
                        ppl,
                    ))
                });

            let mut scored = negatives.clone();
            let mut counts = CategoryCounts::default();
            let mut ppl_sum = 0.0;
            for run in runs {
                let (s, c, ppl) = run?;
                scored.push(s);
                counts.both += c.both;
                counts.logits_only += c.logits_only;
                counts.sampling_only += c.sampling_only;
                counts.none += c.none;
                ppl_sum += ppl;
            }
            let total =
                (counts.both + counts.logits_only + counts.sampling_only + counts.none) as f64;
            let (f1, _) = best_f1(&scored)?;
            let (_, auc) = roc_auc(&scored)?;
            cells.push(SweepCell {
                alpha,
                beta,
                best_f1: f1,
                auc,
                mean_judge_ppl: ppl_sum / spec.n_pos as f64,
                ratio_both: counts.both as f64 / total,
                ratio_logits_only: counts.logits_only as f64 / total,
                ratio_sampling_only: counts.sampling_only as f64 / total,
                ratio_none: counts.none as f64 / total,
            });
        }
    }

    Ok(SweepResults {
        spec: spec.clone(),
        alphas: alphas.to_vec(),
        betas: betas.to_vec(),
        cells,
    })
}
