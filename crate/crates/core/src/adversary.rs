//! Watermark stealing and spoofing: estimate the green list from observed
//! watermarked text by frequency analysis, generate spoofed text biased
//! toward the estimated list, and measure the attack success rate against
//! the true-key detector.
//!
//! The attacker sees watermarked tokens and the unwatermarked base
//! distribution but never touches either watermark key.

use serde::{Deserialize, Serialize};

use crate::dual::{generate_plain, BaseSampler};
use crate::error::{Error, Result};
use crate::logits_wm::{z_score, GreenList, LogitsWatermarkConfig};
use crate::model::TextModel;
use crate::rng::SplitMix64;
use crate::vocab::TokenId;

const FREQ_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StealingConfig {
    /// Number of watermarked tokens the attacker observes.
    pub budget_tokens: usize,
    /// Fraction of the vocabulary the attacker declares green.
    pub top_fraction: f64,
    /// Logit bias the attacker applies to the estimated list.
    pub spoof_strength: f64,
    /// Success bar: a spoofed text counts when its true-key z exceeds this.
    pub z_spoof_threshold: f64,
}

impl Default for StealingConfig {
    fn default() -> Self {
        Self {
            budget_tokens: 100_000,
            top_fraction: 0.25,
            spoof_strength: 5.0,
            z_spoof_threshold: 6.0,
        }
    }
}

impl StealingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget_tokens < 1 {
            return Err(Error::InvalidConfig("budget_tokens must be >= 1".into()));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "top_fraction must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Frequency-ratio estimator: score each token by observed frequency over
/// base frequency and declare the top `floor(gamma * |V|)` green. Always
/// returns exactly that many tokens; ties resolve to lower ids.
pub fn estimate_greenlist(
    wm_corpus: &[TokenId],
    base_freqs: &[f64],
    gamma: f64,
) -> Result<GreenList> {
    if wm_corpus.is_empty() {
        return Err(Error::EmptyInput("stealing corpus"));
    }
    let v = base_freqs.len();
    let mut counts = vec![0u64; v];
    for &t in wm_corpus {
        counts[t as usize] += 1;
    }
    let total = wm_corpus.len() as f64;
    let mut order: Vec<TokenId> = (0..v as TokenId).collect();
    let score =
        |id: TokenId| (counts[id as usize] as f64 / total) / (base_freqs[id as usize] + FREQ_EPS);
    order.sort_by(|&a, &b| score(b).partial_cmp(&score(a)).unwrap().then(a.cmp(&b)));
    let green = (gamma * v as f64).floor() as usize;
    Ok(GreenList::from_ids(&order[..green], v))
}

/// Generate a spoofed text: the attacker's model with `strength` added to
/// the estimated-green logits, multinomial sampling.
pub fn spoof_generate(
    model: &TextModel,
    estimated_green: &GreenList,
    strength: f64,
    prompt: &[TokenId],
    max_tokens: usize,
    seed: u64,
) -> Vec<TokenId> {
    if strength == 0.0 {
        // No-op bias: plain sampling from the attacker's model.
        return generate_plain(model, prompt, BaseSampler::Multinomial, seed, max_tokens);
    }
    let mut rng = SplitMix64::new(seed);
    let mut seq = prompt.to_vec();
    for _ in 0..max_tokens {
        let mut logits = model.logits(&seq);
        for (i, l) in logits.iter_mut().enumerate() {
            if estimated_green.contains(i as TokenId) {
                *l += strength;
            }
        }
        let probs = crate::math::softmax(&logits);
        let u = rng.next_f64();
        let mut acc = 0.0;
        let mut token = (probs.len() - 1) as TokenId;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                token = i as TokenId;
                break;
            }
        }
        seq.push(token);
    }
    seq[prompt.len()..].to_vec()
}

/// Fraction of spoofed texts whose true-key logits z-score exceeds the
/// threshold.
pub fn attack_success_rate(
    spoofed: &[Vec<TokenId>],
    true_cfg: &LogitsWatermarkConfig,
    vocab_size: usize,
    z_threshold: f64,
) -> Result<f64> {
    if spoofed.is_empty() {
        return Err(Error::EmptyInput("spoofed text list"));
    }
    let mut hits = 0usize;
    for text in spoofed {
        if z_score(text, true_cfg, vocab_size)? > z_threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / spoofed.len() as f64)
}
