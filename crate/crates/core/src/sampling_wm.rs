//! Sampling-channel watermark: exponential-minimum token selection over a
//! keyed pseudorandom vector, with a Gamma-tail p-value detector.
//!
//! Generation picks `y = argmax_i r_i^(1/p_i)` where `r` is re-derivable
//! from the key and the previous `prefix_len` tokens. Under the null each
//! detection term `-ln(1 - r[y])` is Exp(1), so the sum over `L` scored
//! positions is Gamma(L, 1) and the p-value is the upper regularized
//! incomplete gamma Q(L, score).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logits_wm::PAD_SENTINEL;
use crate::math::{gamma_q, ln_gamma_q};
use crate::rng::{fold_context, SplitMix64};
use crate::vocab::TokenId;

/// Clamp keeping r away from 0 and 1 so logs stay finite.
pub const R_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingWatermarkConfig {
    /// Watermark key (independent of the logits-channel key).
    pub key: u64,
    /// Number of preceding tokens hashed into the random vector.
    pub prefix_len: usize,
    /// Detection significance; verdict is p < p_threshold.
    pub p_threshold: f64,
}

impl Default for SamplingWatermarkConfig {
    fn default() -> Self {
        Self {
            key: 15485863,
            prefix_len: 4,
            p_threshold: 1e-4,
        }
    }
}

impl SamplingWatermarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prefix_len < 1 {
            return Err(Error::InvalidConfig(
                "sampling prefix_len must be >= 1".into(),
            ));
        }
        if self.p_threshold.is_nan() || self.p_threshold <= 0.0 || self.p_threshold >= 1.0 {
            return Err(Error::InvalidConfig(
                "p_threshold must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Keyed pseudorandom vector for one position, componentwise in
/// (R_CLAMP, 1 - R_CLAMP). Contexts shorter than the prefix are left-padded
/// with the sentinel id.
pub fn random_vector(
    cfg: &SamplingWatermarkConfig,
    context: &[TokenId],
    vocab_size: usize,
) -> Vec<f64> {
    let h = cfg.prefix_len;
    let mut window = vec![PAD_SENTINEL; h.saturating_sub(context.len())];
    let take = context.len().min(h);
    window.extend_from_slice(&context[context.len() - take..]);
    let mut rng = SplitMix64::new(fold_context(cfg.key, &window));
    (0..vocab_size)
        .map(|_| rng.next_f64().clamp(R_CLAMP, 1.0 - R_CLAMP))
        .collect()
}

/// argmax_i r_i^(1/p_i), computed as argmax of ln(r_i)/p_i. Tokens with zero
/// probability are excluded; ties resolve to the lowest index.
pub fn aar_sample(probs: &[f64], r: &[f64]) -> TokenId {
    debug_assert_eq!(probs.len(), r.len());
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..probs.len() {
        if probs[i] <= 0.0 {
            continue;
        }
        let score = r[i].ln() / probs[i];
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    best as TokenId
}

/// Sum of `-ln(1 - r_t[y_t])` over positions `t >= prefix_len`, with `r_t`
/// re-derived from the preceding tokens. Returns (score, scored count).
pub fn aar_statistic(
    tokens: &[TokenId],
    cfg: &SamplingWatermarkConfig,
    vocab_size: usize,
) -> Result<(f64, usize)> {
    let h = cfg.prefix_len;
    if tokens.len() <= h {
        return Err(Error::TooShortForDetection {
            detector: "sampling",
            need: h + 1,
            got: tokens.len(),
        });
    }
    let mut score = 0.0;
    for t in h..tokens.len() {
        let r = random_vector(cfg, &tokens[..t], vocab_size);
        score -= (1.0 - r[tokens[t] as usize]).ln();
    }
    Ok((score, tokens.len() - h))
}

/// Upper-tail p-value of the detection score: Q(L_eff, score).
pub fn aar_pvalue(score: f64, effective_len: usize) -> f64 {
    gamma_q(effective_len as f64, score)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingDetection {
    pub score: f64,
    pub effective_len: usize,
    pub p_value: f64,
    /// ln of the p-value, finite even when p_value underflows.
    pub ln_p: f64,
    pub p_threshold: f64,
    pub detected: bool,
}

/// Full sampling-channel detection record; verdict is strict `p < threshold`.
pub fn detect_sampling(
    tokens: &[TokenId],
    cfg: &SamplingWatermarkConfig,
    vocab_size: usize,
) -> Result<SamplingDetection> {
    let (score, effective_len) = aar_statistic(tokens, cfg, vocab_size)?;
    let p_value = aar_pvalue(score, effective_len);
    let ln_p = ln_gamma_q(effective_len as f64, score);
    Ok(SamplingDetection {
        score,
        effective_len,
        p_value,
        ln_p,
        p_threshold: cfg.p_threshold,
        detected: p_value < cfg.p_threshold,
    })
}
