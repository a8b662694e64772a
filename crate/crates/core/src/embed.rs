//! Token embeddings from positive PMI co-occurrence rows compressed with a
//! seeded random projection.
//!
//! Tokens that occur in similar neighbourhoods get similar PPMI rows and so
//! similar projected vectors, which is all the semantic clustering needs.
//! The projection uses Rademacher (+-1/sqrt(dim)) entries drawn from a
//! splitmix64 stream, so the table is a deterministic function of
//! (corpus, dim, window, seed).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::vocab::TokenId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, id: TokenId) -> &[f64] {
        &self.vectors[id as usize]
    }

    /// Cosine similarity; zero-norm vectors compare as -1.
    pub fn cosine(&self, a: TokenId, b: TokenId) -> f64 {
        let (va, vb) = (self.vector(a), self.vector(b));
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            -1.0
        } else {
            dot / (na * nb)
        }
    }
}

/// Build the embedding table from a token stream.
pub fn train_embeddings(
    tokens: &[TokenId],
    vocab_size: usize,
    dim: usize,
    window: usize,
    seed: u64,
) -> Result<EmbeddingTable> {
    if dim < 2 {
        return Err(Error::InvalidConfig("embedding dim must be >= 2".into()));
    }
    if window < 1 {
        return Err(Error::InvalidConfig("embedding window must be >= 1".into()));
    }

    // Symmetric co-occurrence counts within the window.
    let mut rows: Vec<BTreeMap<TokenId, u64>> = vec![BTreeMap::new(); vocab_size];
    let mut row_sums = vec![0u64; vocab_size];
    let mut grand_total = 0u64;
    for t in 0..tokens.len() {
        for off in 1..=window {
            if t + off >= tokens.len() {
                break;
            }
            let (a, b) = (tokens[t], tokens[t + off]);
            *rows[a as usize].entry(b).or_insert(0) += 1;
            *rows[b as usize].entry(a).or_insert(0) += 1;
            row_sums[a as usize] += 1;
            row_sums[b as usize] += 1;
            grand_total += 2;
        }
    }

    // Rademacher projection matrix, one row per vocabulary token.
    let mut rng = SplitMix64::new(seed);
    let scale = 1.0 / (dim as f64).sqrt();
    let projection: Vec<Vec<f64>> = (0..vocab_size)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    if rng.next_u64() & 1 == 0 {
                        scale
                    } else {
                        -scale
                    }
                })
                .collect()
        })
        .collect();

    let total = grand_total.max(1) as f64;
    let mut vectors = Vec::with_capacity(vocab_size);
    for i in 0..vocab_size {
        let mut v = vec![0.0; dim];
        let si = row_sums[i] as f64;
        for (&j, &cnt) in &rows[i] {
            let sj = row_sums[j as usize] as f64;
            let pmi = ((cnt as f64 * total) / (si * sj)).ln();
            if pmi > 0.0 {
                let pj = &projection[j as usize];
                for d in 0..dim {
                    v[d] += pmi * pj[d];
                }
            }
        }
        vectors.push(v);
    }
    Ok(EmbeddingTable { dim, vectors })
}
