//! Text-perturbation attacks for robustness evaluation: random token
//! deletion, token substitution (random or embedding-nearest), and
//! copy-paste embedding of watermark fragments into host text.
//!
//! All attacks are deterministic given their seed.

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::vocab::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    WordDelete,
    WordSubRandom,
    WordSubEmbed,
    CopyPaste,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstituteMode {
    Random,
    EmbedNearest,
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidConfig(format!(
            "attack ratio {ratio} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Remove `floor(ratio * L)` uniformly chosen positions, preserving the
/// order of survivors.
pub fn word_delete(tokens: &[TokenId], ratio: f64, seed: u64) -> Result<Vec<TokenId>> {
    check_ratio(ratio)?;
    let remove = (ratio * tokens.len() as f64).floor() as usize;
    let mut rng = SplitMix64::new(seed);
    let victims = rng.choose_indices(tokens.len(), remove);
    let mut dead = vec![false; tokens.len()];
    for i in victims {
        dead[i] = true;
    }
    Ok(tokens
        .iter()
        .enumerate()
        .filter(|(i, _)| !dead[*i])
        .map(|(_, &t)| t)
        .collect())
}

/// Replace `floor(ratio * L)` uniformly chosen positions. Random mode draws
/// a uniform replacement from the vocabulary minus the original; embed mode
/// substitutes the nearest-cosine neighbour (ties to the lowest id).
pub fn word_substitute(
    tokens: &[TokenId],
    ratio: f64,
    mode: SubstituteMode,
    embeddings: Option<&EmbeddingTable>,
    vocab_size: usize,
    seed: u64,
) -> Result<Vec<TokenId>> {
    check_ratio(ratio)?;
    if vocab_size < 2 {
        return Err(Error::InvalidConfig(
            "substitution needs a vocabulary of at least 2 tokens".into(),
        ));
    }
    if mode == SubstituteMode::EmbedNearest && embeddings.is_none() {
        return Err(Error::InvalidConfig(
            "embedding-nearest substitution needs an embedding table".into(),
        ));
    }
    let replace = (ratio * tokens.len() as f64).floor() as usize;
    let mut rng = SplitMix64::new(seed);
    let positions = rng.choose_indices(tokens.len(), replace);
    let mut out = tokens.to_vec();
    for pos in positions {
        let original = out[pos];
        out[pos] = match mode {
            SubstituteMode::Random => {
                let draw = rng.below(vocab_size as u64 - 1) as TokenId;
                if draw >= original {
                    draw + 1
                } else {
                    draw
                }
            }
            SubstituteMode::EmbedNearest => {
                nearest_neighbor(embeddings.expect("checked"), original, vocab_size)
            }
        };
    }
    Ok(out)
}

fn nearest_neighbor(table: &EmbeddingTable, original: TokenId, vocab_size: usize) -> TokenId {
    let mut best: Option<(f64, TokenId)> = None;
    for cand in 0..vocab_size as TokenId {
        if cand == original {
            continue;
        }
        let sim = table.cosine(original, cand);
        let better = match best {
            None => true,
            Some((bs, _)) => sim > bs,
        };
        if better {
            best = Some((sim, cand));
        }
    }
    best.expect("vocab_size >= 2").1
}

/// Keep `floor(retain_ratio * L)` watermark tokens as `segments` contiguous
/// chunks drawn from random non-overlapping spots of the watermark text, and
/// insert them in order at random non-overlapping positions of the host.
pub fn copy_paste(
    wm_tokens: &[TokenId],
    human_tokens: &[TokenId],
    retain_ratio: f64,
    segments: usize,
    seed: u64,
) -> Result<Vec<TokenId>> {
    if !(retain_ratio > 0.0 && retain_ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "retain_ratio {retain_ratio} outside (0, 1]"
        )));
    }
    if segments < 1 {
        return Err(Error::InvalidConfig("segments must be >= 1".into()));
    }
    let keep = (retain_ratio * wm_tokens.len() as f64).floor() as usize;
    if keep < segments {
        return Err(Error::HostingImpossible {
            segments,
            reason: format!("only {keep} retained tokens to split"),
        });
    }
    if human_tokens.len() + 1 < segments {
        return Err(Error::HostingImpossible {
            segments,
            reason: format!("host has only {} insertion slots", human_tokens.len() + 1),
        });
    }

    let mut rng = SplitMix64::new(seed);

    // Chunk lengths: near-equal split of the retained budget.
    let base = keep / segments;
    let extra = keep % segments;
    let lengths: Vec<usize> = (0..segments)
        .map(|i| base + usize::from(i < extra))
        .collect();

    // Non-overlapping source chunks, in order: a sorted combination draw
    // distributes the leftover tokens among the gaps between chunks.
    let slack = wm_tokens.len() - keep;
    let cuts = rng.choose_indices(slack + segments, segments);
    let mut chunks: Vec<&[TokenId]> = Vec::with_capacity(segments);
    let mut placed = 0usize;
    for (i, &cut) in cuts.iter().enumerate() {
        let offset = cut - i; // non-decreasing, in [0, slack]
        let start = placed + offset;
        chunks.push(&wm_tokens[start..start + lengths[i]]);
        placed += lengths[i];
    }

    // Distinct host insertion points, ascending, chunk order preserved.
    let spots = rng.choose_indices(human_tokens.len() + 1, segments);
    let mut out = Vec::with_capacity(human_tokens.len() + keep);
    let mut next_chunk = 0usize;
    for pos in 0..=human_tokens.len() {
        if next_chunk < segments && spots[next_chunk] == pos {
            out.extend_from_slice(chunks[next_chunk]);
            next_chunk += 1;
        }
        if pos < human_tokens.len() {
            out.push(human_tokens[pos]);
        }
    }
    Ok(out)
}
