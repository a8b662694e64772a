//! Logits-channel watermark: keyed green/red vocabulary partition, additive
//! bias on green logits, and binomial z-score detection.
//!
//! Two partition schemes are supported. `unigram` derives one fixed global
//! split from the key alone. `kgw` re-derives the split at every position
//! from the key and the previous `prefix_len` token ids. Both build the
//! green list the same way: seed a splitmix64 stream with the mixed
//! key/context hash, Fisher-Yates shuffle the token ids, and take the first
//! `floor(gamma * |V|)` as green. Detection replays the identical
//! construction, so it needs nothing beyond the config and the tokens.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{fold_context, SplitMix64};
use crate::vocab::TokenId;

/// Sentinel id used to left-pad contexts shorter than the kgw prefix.
pub const PAD_SENTINEL: TokenId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionScheme {
    Unigram,
    Kgw,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogitsWatermarkConfig {
    pub scheme: PartitionScheme,
    /// Watermark key.
    pub key: u64,
    /// Green fraction of the vocabulary, in (0, 1).
    pub gamma: f64,
    /// Additive bias applied to green logits, >= 0.
    pub delta: f64,
    /// Context width hashed by the kgw scheme (ignored by unigram).
    pub prefix_len: usize,
    /// Detection threshold z1; verdict is z > z1.
    pub z_threshold: f64,
}

impl Default for LogitsWatermarkConfig {
    /// Fixed-global-split scheme with the common published defaults.
    fn default() -> Self {
        Self {
            scheme: PartitionScheme::Unigram,
            key: 15485863,
            gamma: 0.5,
            delta: 2.0,
            prefix_len: 1,
            z_threshold: 4.0,
        }
    }
}

impl LogitsWatermarkConfig {
    /// Context-hashed scheme preset (weaker bias, prefix width 1).
    pub fn kgw_preset() -> Self {
        Self {
            scheme: PartitionScheme::Kgw,
            delta: 0.2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_nan() || self.gamma <= 0.0 || self.gamma >= 1.0 {
            return Err(Error::InvalidConfig("gamma must lie in (0, 1)".into()));
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(Error::InvalidConfig("delta must be >= 0".into()));
        }
        if self.scheme == PartitionScheme::Kgw && self.prefix_len < 1 {
            return Err(Error::InvalidConfig("kgw prefix_len must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of positions skipped before scoring starts.
    pub fn detection_skip(&self) -> usize {
        match self.scheme {
            PartitionScheme::Unigram => 0,
            PartitionScheme::Kgw => self.prefix_len,
        }
    }
}

/// Boolean membership mask with exactly `floor(gamma * |V|)` green entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreenList {
    mask: Vec<bool>,
    green_count: usize,
}

impl GreenList {
    pub fn from_ids(green_ids: &[TokenId], vocab_size: usize) -> Self {
        let mut mask = vec![false; vocab_size];
        for &id in green_ids {
            mask[id as usize] = true;
        }
        let green_count = mask.iter().filter(|&&g| g).count();
        Self { mask, green_count }
    }

    pub fn contains(&self, id: TokenId) -> bool {
        self.mask[id as usize]
    }

    pub fn vocab_size(&self) -> usize {
        self.mask.len()
    }

    pub fn green_count(&self) -> usize {
        self.green_count
    }

    pub fn green_ids(&self) -> Vec<TokenId> {
        (0..self.mask.len() as TokenId)
            .filter(|&id| self.mask[id as usize])
            .collect()
    }

    /// Fraction of `other`'s green tokens that are also green here.
    pub fn overlap(&self, other: &GreenList) -> f64 {
        let both = other
            .green_ids()
            .iter()
            .filter(|&&id| self.contains(id))
            .count();
        both as f64 / other.green_count().max(1) as f64
    }
}

fn partition_seed(cfg: &LogitsWatermarkConfig, context: &[TokenId]) -> u64 {
    match cfg.scheme {
        PartitionScheme::Unigram => fold_context(cfg.key, &[]),
        PartitionScheme::Kgw => {
            let k = cfg.prefix_len;
            let mut window = vec![PAD_SENTINEL; k.saturating_sub(context.len())];
            let take = context.len().min(k);
            window.extend_from_slice(&context[context.len() - take..]);
            fold_context(cfg.key, &window)
        }
    }
}

/// Derive the green list for one position. `context` is everything before
/// the position; unigram ignores it entirely.
pub fn partition(cfg: &LogitsWatermarkConfig, vocab_size: usize, context: &[TokenId]) -> GreenList {
    let mut ids: Vec<TokenId> = (0..vocab_size as TokenId).collect();
    let mut rng = SplitMix64::new(partition_seed(cfg, context));
    rng.shuffle(&mut ids);
    let green = (cfg.gamma * vocab_size as f64).floor() as usize;
    let mut mask = vec![false; vocab_size];
    for &id in ids.iter().take(green) {
        mask[id as usize] = true;
    }
    GreenList {
        mask,
        green_count: green,
    }
}

/// `out[i] = logits[i] + delta * [i in green]`; red logits pass through.
pub fn apply_bias(logits: &[f64], green: &GreenList, delta: f64) -> Result<Vec<f64>> {
    if logits.len() != green.vocab_size() {
        return Err(Error::LengthMismatch {
            expected: green.vocab_size(),
            got: logits.len(),
        });
    }
    Ok(logits
        .iter()
        .enumerate()
        .map(|(i, &l)| if green.mask[i] { l + delta } else { l })
        .collect())
}

/// Green-count statistics over the scored positions.
fn green_stats(
    tokens: &[TokenId],
    cfg: &LogitsWatermarkConfig,
    vocab_size: usize,
) -> Result<(usize, usize)> {
    let skip = cfg.detection_skip();
    if tokens.len() <= skip {
        return Err(Error::TooShortForDetection {
            detector: "logits",
            need: skip + 1,
            got: tokens.len(),
        });
    }
    let n_green = match cfg.scheme {
        PartitionScheme::Unigram => {
            let green = partition(cfg, vocab_size, &[]);
            tokens.iter().filter(|&&t| green.contains(t)).count()
        }
        PartitionScheme::Kgw => (skip..tokens.len())
            .filter(|&t| partition(cfg, vocab_size, &tokens[..t]).contains(tokens[t]))
            .count(),
    };
    Ok((n_green, tokens.len() - skip))
}

/// (n_green - gamma L) / sqrt(L gamma (1 - gamma)) over the scored tokens.
pub fn z_score(tokens: &[TokenId], cfg: &LogitsWatermarkConfig, vocab_size: usize) -> Result<f64> {
    let (n_green, scored) = green_stats(tokens, cfg, vocab_size)?;
    let l = scored as f64;
    Ok((n_green as f64 - cfg.gamma * l) / (l * cfg.gamma * (1.0 - cfg.gamma)).sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogitsDetection {
    pub z: f64,
    pub n_green: usize,
    pub scored_tokens: usize,
    pub z_threshold: f64,
    pub detected: bool,
}

/// Full logits-channel detection record; verdict is strict `z > z_threshold`.
pub fn detect_logits(
    tokens: &[TokenId],
    cfg: &LogitsWatermarkConfig,
    vocab_size: usize,
) -> Result<LogitsDetection> {
    let (n_green, scored) = green_stats(tokens, cfg, vocab_size)?;
    let l = scored as f64;
    let z = (n_green as f64 - cfg.gamma * l) / (l * cfg.gamma * (1.0 - cfg.gamma)).sqrt();
    Ok(LogitsDetection {
        z,
        n_green,
        scored_tokens: scored,
        z_threshold: cfg.z_threshold,
        detected: z > cfg.z_threshold,
    })
}
