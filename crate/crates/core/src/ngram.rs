//! Additively smoothed n-gram language model with shorter-context backoff.
//!
//! Count tables are kept for every context length `0..=order`. A conditional
//! query walks from the longest available suffix of the context down to the
//! unigram table, stopping at the first context that was observed in
//! training, and smooths that table's counts with the additive constant
//! `lambda`. Probabilities are therefore strictly positive everywhere, and
//! logits are defined as their natural logs, so `softmax(logits)` recovers
//! the distribution exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::TokenId;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct ContextCounts {
    total: u64,
    counts: BTreeMap<TokenId, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    lambda: f64,
    vocab_size: usize,
    /// tables[k] maps contexts of length k to next-token counts.
    tables: Vec<BTreeMap<Vec<TokenId>, ContextCounts>>,
}

impl NGramModel {
    /// Train on a token sequence. Requires `order >= 1`, `lambda > 0` and a
    /// corpus strictly longer than `order`.
    pub fn train(tokens: &[TokenId], order: usize, lambda: f64, vocab_size: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidConfig("n-gram order must be >= 1".into()));
        }
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::InvalidConfig("smoothing lambda must be > 0".into()));
        }
        if tokens.len() <= order {
            return Err(Error::CorpusTooShort {
                got: tokens.len(),
                order,
                need: order + 1,
            });
        }
        if vocab_size < 2 {
            return Err(Error::InvalidConfig(
                "vocabulary must have at least 2 tokens".into(),
            ));
        }
        let mut tables: Vec<BTreeMap<Vec<TokenId>, ContextCounts>> =
            vec![BTreeMap::new(); order + 1];
        for (k, table) in tables.iter_mut().enumerate() {
            for t in k..tokens.len() {
                let ctx = tokens[t - k..t].to_vec();
                let entry = table.entry(ctx).or_default();
                entry.total += 1;
                *entry.counts.entry(tokens[t]).or_insert(0) += 1;
            }
        }
        Ok(Self {
            order,
            lambda,
            vocab_size,
            tables,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Longest observed suffix of `context`, ending at the unigram table.
    fn backoff_counts(&self, context: &[TokenId]) -> &ContextCounts {
        let max_k = context.len().min(self.order);
        for k in (1..=max_k).rev() {
            if let Some(c) = self.tables[k].get(&context[context.len() - k..]) {
                return c;
            }
        }
        self.tables[0]
            .get([].as_slice())
            .expect("unigram table populated at training")
    }

    /// Smoothed conditional distribution over the vocabulary.
    pub fn conditional(&self, context: &[TokenId]) -> Vec<f64> {
        let cc = self.backoff_counts(context);
        let denom = cc.total as f64 + self.lambda * self.vocab_size as f64;
        let mut probs = vec![self.lambda / denom; self.vocab_size];
        for (&tok, &cnt) in &cc.counts {
            probs[tok as usize] += cnt as f64 / denom;
        }
        probs
    }

    /// Natural-log probabilities; `softmax(logits)` equals `conditional`.
    pub fn logits(&self, context: &[TokenId]) -> Vec<f64> {
        self.conditional(context).iter().map(|p| p.ln()).collect()
    }

    /// Smoothed probability of a single continuation.
    pub fn prob_of(&self, context: &[TokenId], token: TokenId) -> f64 {
        let cc = self.backoff_counts(context);
        let denom = cc.total as f64 + self.lambda * self.vocab_size as f64;
        let cnt = cc.counts.get(&token).copied().unwrap_or(0);
        (cnt as f64 + self.lambda) / denom
    }

    /// Smoothed unigram distribution (empty-context conditional).
    pub fn unigram_probs(&self) -> Vec<f64> {
        self.conditional(&[])
    }

    /// exp(-(1/L) Σ_t ln P(y_t | y_{<t})). Errors on empty text.
    pub fn perplexity(&self, tokens: &[TokenId]) -> Result<f64> {
        if tokens.is_empty() {
            return Err(Error::EmptyInput("perplexity of empty text"));
        }
        let mut nll = 0.0;
        for t in 0..tokens.len() {
            nll -= self.prob_of(&tokens[..t], tokens[t]).ln();
        }
        Ok((nll / tokens.len() as f64).exp())
    }
}

// Serialized form: context tables flattened to sorted entry lists so the
// encoding is deterministic and self-describing.
#[derive(Serialize, Deserialize)]
struct TableEntry {
    ctx: Vec<TokenId>,
    total: u64,
    counts: Vec<(TokenId, u64)>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct NGramModelRepr {
    order: usize,
    lambda: f64,
    vocab_size: usize,
    tables: Vec<Vec<TableEntry>>,
}

impl From<&NGramModel> for NGramModelRepr {
    fn from(m: &NGramModel) -> Self {
        let tables = m
            .tables
            .iter()
            .map(|t| {
                t.iter()
                    .map(|(ctx, cc)| TableEntry {
                        ctx: ctx.clone(),
                        total: cc.total,
                        counts: cc.counts.iter().map(|(&k, &v)| (k, v)).collect(),
                    })
                    .collect()
            })
            .collect();
        NGramModelRepr {
            order: m.order,
            lambda: m.lambda,
            vocab_size: m.vocab_size,
            tables,
        }
    }
}

impl TryFrom<NGramModelRepr> for NGramModel {
    type Error = Error;

    fn try_from(r: NGramModelRepr) -> Result<Self> {
        if r.tables.len() != r.order + 1 {
            return Err(Error::ModelFormat(format!(
                "expected {} count tables, found {}",
                r.order + 1,
                r.tables.len()
            )));
        }
        let mut tables = Vec::with_capacity(r.tables.len());
        for (k, entries) in r.tables.into_iter().enumerate() {
            let mut table = BTreeMap::new();
            for e in entries {
                if e.ctx.len() != k {
                    return Err(Error::ModelFormat(format!(
                        "context {:?} in table of length-{k} contexts",
                        e.ctx
                    )));
                }
                let cc = ContextCounts {
                    total: e.total,
                    counts: e.counts.into_iter().collect(),
                };
                table.insert(e.ctx, cc);
            }
            tables.push(table);
        }
        Ok(NGramModel {
            order: r.order,
            lambda: r.lambda,
            vocab_size: r.vocab_size,
            tables,
        })
    }
}

impl Serialize for NGramModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NGramModelRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for NGramModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = NGramModelRepr::deserialize(d)?;
        NGramModel::try_from(repr).map_err(serde::de::Error::custom)
    }
}
