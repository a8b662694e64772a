//! Dual-channel watermark strategies and their unified detector.
//!
//! Three ways to combine the logits and sampling channels while generating:
//!
//! * `series`   - every token gets the logit bias and is drawn with
//!   exponential-minimum sampling;
//! * `parallel` - even positions (0-based, counting generated tokens) get
//!   the bias plus the original sampler, odd positions get unbiased logits
//!   plus exponential-minimum sampling;
//! * `hybrid`   - per token, the bias applies when token entropy exceeds
//!   `alpha` and exponential-minimum sampling applies when semantic entropy
//!   falls below `beta`; otherwise the original sampler draws the token.
//!
//! Detection runs both channel detectors over the whole sequence and ORs the
//! verdicts; it needs only the two key configs, never the strategy or any
//! generation-time state. Group-based detection first routes tokens to a
//! logits group and a sampling group (by strategy) and detects each group
//! separately.

use serde::{Deserialize, Serialize};

use crate::entropy::{entropies, EntropyConfig};
use crate::error::{Error, Result};
use crate::logits_wm::{
    apply_bias, detect_logits, partition, LogitsDetection, LogitsWatermarkConfig, PartitionScheme,
};
use crate::math::softmax;
use crate::model::TextModel;
use crate::rng::SplitMix64;
use crate::sampling_wm::{
    aar_sample, detect_sampling, random_vector, SamplingDetection, SamplingWatermarkConfig,
};
use crate::vocab::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Series,
    Parallel,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseSampler {
    Multinomial,
    Greedy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualConfig {
    pub strategy: Strategy,
    pub logits: LogitsWatermarkConfig,
    pub sampling: SamplingWatermarkConfig,
    /// Required by the hybrid strategy, unused otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropyConfig>,
    pub base_sampler: BaseSampler,
    /// Seed of the original sampler's stream.
    pub sampler_seed: u64,
    pub max_tokens: usize,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Hybrid,
            logits: LogitsWatermarkConfig::default(),
            sampling: SamplingWatermarkConfig::default(),
            entropy: Some(EntropyConfig::default()),
            base_sampler: BaseSampler::Multinomial,
            sampler_seed: 0,
            max_tokens: 200,
        }
    }
}

impl DualConfig {
    pub fn validate(&self) -> Result<()> {
        self.logits.validate()?;
        self.sampling.validate()?;
        if self.max_tokens < 1 {
            return Err(Error::InvalidConfig("max_tokens must be >= 1".into()));
        }
        match (&self.strategy, &self.entropy) {
            (Strategy::Hybrid, None) => Err(Error::InvalidConfig(
                "hybrid strategy requires an entropy config".into(),
            )),
            (Strategy::Hybrid, Some(e)) => e.validate(),
            _ => Ok(()),
        }
    }
}

/// Per-token audit record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStep {
    pub position: usize,
    pub token: TokenId,
    pub applied_logits: bool,
    pub applied_sampling: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub token_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic_entropy: Option<f64>,
    /// Position parity, recorded by the parallel strategy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<u8>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub steps: Vec<TraceStep>,
}

/// Counts of the four per-token watermark categories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub both: usize,
    pub logits_only: usize,
    pub sampling_only: usize,
    pub none: usize,
}

impl GenerationTrace {
    pub fn categories(&self) -> CategoryCounts {
        let mut c = CategoryCounts::default();
        for s in &self.steps {
            match (s.applied_logits, s.applied_sampling) {
                (true, true) => c.both += 1,
                (true, false) => c.logits_only += 1,
                (false, true) => c.sampling_only += 1,
                (false, false) => c.none += 1,
            }
        }
        c
    }

    /// One JSON object per token.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&serde_json::to_string(step)?);
            out.push('\n');
        }
        Ok(out)
    }
}

fn sample_multinomial(probs: &[f64], rng: &mut SplitMix64) -> TokenId {
    let u = rng.next_f64();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as TokenId;
        }
    }
    (probs.len() - 1) as TokenId
}

fn sample_greedy(probs: &[f64]) -> TokenId {
    let mut best = 0usize;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best as TokenId
}

fn base_sample(probs: &[f64], sampler: BaseSampler, rng: &mut SplitMix64) -> TokenId {
    match sampler {
        BaseSampler::Multinomial => sample_multinomial(probs, rng),
        BaseSampler::Greedy => sample_greedy(probs),
    }
}

/// Generate without any watermark: plain logits through the base sampler.
pub fn generate_plain(
    model: &TextModel,
    prompt: &[TokenId],
    sampler: BaseSampler,
    sampler_seed: u64,
    max_tokens: usize,
) -> Vec<TokenId> {
    let mut rng = SplitMix64::new(sampler_seed);
    let mut seq = prompt.to_vec();
    for _ in 0..max_tokens {
        let probs = model.conditional(&seq);
        seq.push(base_sample(&probs, sampler, &mut rng));
    }
    seq[prompt.len()..].to_vec()
}

/// Generate `cfg.max_tokens` tokens with the configured strategy.
///
/// Determinism: the watermark channels consume no sampling noise, so series
/// output depends only on (model, prompt, keys); parallel and hybrid are
/// additionally a function of `sampler_seed` wherever the base sampler runs.
pub fn generate(
    model: &TextModel,
    prompt: &[TokenId],
    cfg: &DualConfig,
) -> Result<(Vec<TokenId>, GenerationTrace)> {
    cfg.validate()?;
    let v = model.vocab_size();
    let mut rng = SplitMix64::new(cfg.sampler_seed);
    let mut seq = prompt.to_vec();
    let mut trace = GenerationTrace::default();
    // The unigram partition is context-free; derive it once.
    let fixed_green =
        (cfg.logits.scheme == PartitionScheme::Unigram).then(|| partition(&cfg.logits, v, &[]));

    for t in 0..cfg.max_tokens {
        let logits = model.logits(&seq);
        let (apply_l, apply_s, h_te, h_se, parity) = match cfg.strategy {
            Strategy::Series => (true, true, None, None, None),
            Strategy::Parallel => {
                let even = t % 2 == 0;
                (even, !even, None, None, Some((t % 2) as u8))
            }
            Strategy::Hybrid => {
                let ecfg = cfg.entropy.as_ref().expect("validated");
                let unbiased = softmax(&logits);
                let (te, se) = entropies(&unbiased, &model.embeddings, ecfg)?;
                (te > ecfg.alpha, se < ecfg.beta, Some(te), Some(se), None)
            }
        };

        let effective = if apply_l {
            let derived;
            let green = match &fixed_green {
                Some(g) => g,
                None => {
                    derived = partition(&cfg.logits, v, &seq);
                    &derived
                }
            };
            apply_bias(&logits, green, cfg.logits.delta)?
        } else {
            logits
        };
        let probs = softmax(&effective);

        let token = if apply_s {
            let r = random_vector(&cfg.sampling, &seq, v);
            aar_sample(&probs, &r)
        } else {
            base_sample(&probs, cfg.base_sampler, &mut rng)
        };

        trace.steps.push(TraceStep {
            position: t,
            token,
            applied_logits: apply_l,
            applied_sampling: apply_s,
            token_entropy: h_te,
            semantic_entropy: h_se,
            parity,
        });
        seq.push(token);
    }
    Ok((seq[prompt.len()..].to_vec(), trace))
}

/// Combined detection verdict over both channels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Logits-channel fragment; `None` when that group was not evaluated.
    pub logits: Option<LogitsDetection>,
    /// Sampling-channel fragment; `None` when that group was not evaluated.
    pub sampling: Option<SamplingDetection>,
    /// OR of the fragment verdicts.
    pub detected: bool,
}

impl DetectionReport {
    /// Combine the two channel fragments; the verdict is their OR, with a
    /// missing (not evaluated) fragment contributing false.
    pub fn new(logits: Option<LogitsDetection>, sampling: Option<SamplingDetection>) -> Self {
        let detected = logits.as_ref().is_some_and(|l| l.detected)
            || sampling.as_ref().is_some_and(|s| s.detected);
        Self {
            logits,
            sampling,
            detected,
        }
    }

    /// Scalar score for threshold sweeps and ROC curves: how many multiples
    /// of its own threshold each channel reaches, combined with max. The
    /// logits channel contributes z / z1; the sampling channel ln p / ln p1
    /// (>= 1 exactly when p <= p1). Missing fragments contribute -inf.
    pub fn combined_statistic(&self) -> f64 {
        let lz = self
            .logits
            .as_ref()
            .map(|l| l.z / l.z_threshold)
            .unwrap_or(f64::NEG_INFINITY);
        let sp = self
            .sampling
            .as_ref()
            .map(|s| s.ln_p / s.p_threshold.ln())
            .unwrap_or(f64::NEG_INFINITY);
        lz.max(sp)
    }
}

/// Run both channel detectors over all tokens; verdict is the OR.
/// Too-short input errors name the failing detector.
pub fn detect_unified(
    tokens: &[TokenId],
    logits_cfg: &LogitsWatermarkConfig,
    sampling_cfg: &SamplingWatermarkConfig,
    vocab_size: usize,
) -> Result<DetectionReport> {
    let l = detect_logits(tokens, logits_cfg, vocab_size)?;
    let s = detect_sampling(tokens, sampling_cfg, vocab_size)?;
    Ok(DetectionReport::new(Some(l), Some(s)))
}

/// Route tokens into (logits group, sampling group) by strategy.
///
/// Series duplicates the whole sequence into both groups; parallel splits by
/// position parity; hybrid re-derives the entropy gates per position from
/// the model, conditioning on the observed tokens alone.
pub fn group_tokens(
    model: &TextModel,
    tokens: &[TokenId],
    cfg: &DualConfig,
) -> Result<(Vec<TokenId>, Vec<TokenId>)> {
    match cfg.strategy {
        Strategy::Series => Ok((tokens.to_vec(), tokens.to_vec())),
        Strategy::Parallel => {
            let mut y_l = Vec::new();
            let mut y_s = Vec::new();
            for (t, &tok) in tokens.iter().enumerate() {
                if t % 2 == 0 {
                    y_l.push(tok);
                } else {
                    y_s.push(tok);
                }
            }
            Ok((y_l, y_s))
        }
        Strategy::Hybrid => {
            let ecfg = cfg.entropy.as_ref().ok_or_else(|| {
                Error::InvalidConfig("hybrid grouping requires an entropy config".into())
            })?;
            let mut y_l = Vec::new();
            let mut y_s = Vec::new();
            for (t, &tok) in tokens.iter().enumerate() {
                let probs = model.conditional(&tokens[..t]);
                let (te, se) = entropies(&probs, &model.embeddings, ecfg)?;
                if te > ecfg.alpha {
                    y_l.push(tok);
                }
                if se < ecfg.beta {
                    y_s.push(tok);
                }
            }
            Ok((y_l, y_s))
        }
    }
}

/// Detect each group with its own channel; a group too short to score is
/// reported as not evaluated and the verdict rests on the other fragment.
pub fn detect_grouped(
    y_l: &[TokenId],
    y_s: &[TokenId],
    logits_cfg: &LogitsWatermarkConfig,
    sampling_cfg: &SamplingWatermarkConfig,
    vocab_size: usize,
) -> Result<DetectionReport> {
    let logits = match detect_logits(y_l, logits_cfg, vocab_size) {
        Ok(l) => Some(l),
        Err(Error::TooShortForDetection { .. }) => None,
        Err(e) => return Err(e),
    };
    let sampling = match detect_sampling(y_s, sampling_cfg, vocab_size) {
        Ok(s) => Some(s),
        Err(Error::TooShortForDetection { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(DetectionReport::new(logits, sampling))
}
