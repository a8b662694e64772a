//! Token entropy and semantic entropy, the two per-position gates of the
//! hybrid strategy.
//!
//! Token entropy is the Shannon entropy (natural log) of the model's full
//! next-token distribution. Semantic entropy takes the top-k candidates,
//! renormalizes their probabilities, clusters their embeddings with seeded
//! k-means, merges probability mass per cluster, and measures the entropy of
//! the merged distribution. The logits gate opens on high token entropy
//! (`H_TE > alpha`); the sampling gate opens on low semantic entropy
//! (`H_SE < beta`). The gates are evaluated independently.

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingTable;
use crate::error::Result;
use crate::kmeans::kmeans;
use crate::vocab::TokenId;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    /// Candidate pool size for semantic entropy.
    pub top_k: usize,
    /// Cluster count for semantic entropy (<= top_k).
    pub n_clusters: usize,
    pub kmeans_iters: usize,
    pub kmeans_seed: u64,
    /// Token-entropy threshold: logits watermark applies when H_TE > alpha.
    pub alpha: f64,
    /// Semantic-entropy threshold: sampling watermark applies when H_SE < beta.
    pub beta: f64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            top_k: 64,
            n_clusters: 10,
            kmeans_iters: 25,
            kmeans_seed: 0x5E3D,
            alpha: 1.0,
            beta: 0.5,
        }
    }
}

impl EntropyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k < 2 {
            return Err(crate::Error::InvalidConfig("top_k must be >= 2".into()));
        }
        if self.n_clusters < 1 || self.n_clusters > self.top_k {
            return Err(crate::Error::InvalidConfig(
                "n_clusters must satisfy 1 <= n <= top_k".into(),
            ));
        }
        if self.alpha.is_nan() || self.beta.is_nan() {
            return Err(crate::Error::InvalidConfig(
                "entropy thresholds must not be NaN".into(),
            ));
        }
        Ok(())
    }
}

/// Shannon entropy in nats with the 0 ln 0 = 0 convention.
pub fn token_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Indices of the k largest probabilities, ties broken toward lower ids.
pub fn top_k_indices(probs: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    idx.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(k.min(probs.len()));
    idx
}

/// Merge renormalized candidate probabilities by cluster label.
pub fn merge_cluster_probs(renormalized: &[f64], labels: &[usize], n_clusters: usize) -> Vec<f64> {
    let mut q = vec![0.0; n_clusters];
    for (i, &l) in labels.iter().enumerate() {
        q[l] += renormalized[i];
    }
    q
}

/// Both entropies of one next-token distribution: (H_TE, H_SE).
pub fn entropies(
    probs: &[f64],
    embeddings: &EmbeddingTable,
    cfg: &EntropyConfig,
) -> Result<(f64, f64)> {
    Ok((
        token_entropy(probs),
        semantic_entropy(probs, embeddings, cfg)?,
    ))
}

/// Semantic entropy of the top-k candidate pool.
pub fn semantic_entropy(
    probs: &[f64],
    embeddings: &EmbeddingTable,
    cfg: &EntropyConfig,
) -> Result<f64> {
    let chosen = top_k_indices(probs, cfg.top_k);
    let mass: f64 = chosen.iter().map(|&i| probs[i]).sum();
    let renormalized: Vec<f64> = chosen.iter().map(|&i| probs[i] / mass).collect();
    let points: Vec<Vec<f64>> = chosen
        .iter()
        .map(|&i| embeddings.vector(i as TokenId).to_vec())
        .collect();
    let n = cfg.n_clusters.min(points.len());
    let assignment = kmeans(&points, n, cfg.kmeans_iters, cfg.kmeans_seed)?;
    let q = merge_cluster_probs(
        &renormalized,
        &assignment.labels,
        assignment.centroids.len(),
    );
    Ok(token_entropy(&q))
}

/// (apply_logits, apply_sampling) = (H_TE > alpha, H_SE < beta), strict.
pub fn entropy_gates(
    probs: &[f64],
    embeddings: &EmbeddingTable,
    cfg: &EntropyConfig,
) -> Result<(bool, bool)> {
    let (h_te, h_se) = entropies(probs, embeddings, cfg)?;
    Ok((h_te > cfg.alpha, h_se < cfg.beta))
}
