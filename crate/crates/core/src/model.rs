//! Bundled language model: vocabulary, n-gram counts, and embeddings, with
//! versioned single-file persistence.
//!
//! The format is self-describing JSON with deterministic field and map
//! ordering, so saving, loading, and saving again produces identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::{train_embeddings, EmbeddingTable};
use crate::error::{Error, Result};
use crate::ngram::NGramModel;
use crate::vocab::{TokenId, Vocabulary};

pub const MODEL_FORMAT: &str = "textwm-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOptions {
    pub order: usize,
    pub lambda: f64,
    pub embed_dim: usize,
    pub embed_window: usize,
    pub embed_seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            order: 2,
            lambda: 0.1,
            embed_dim: 32,
            embed_window: 2,
            embed_seed: 0x7031,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TextModel {
    format: String,
    version: u32,
    pub options: TrainOptions,
    pub vocab: Vocabulary,
    pub ngram: NGramModel,
    pub embeddings: EmbeddingTable,
}

impl TextModel {
    /// Train everything from corpus text.
    pub fn train(corpus: &str, options: &TrainOptions) -> Result<Self> {
        let vocab = Vocabulary::from_corpus(corpus)?;
        Self::train_with_vocab(vocab, corpus, options)
    }

    /// Train against a fixed vocabulary (e.g. a judge model that must share
    /// the main model's token ids). Errors if the corpus contains tokens
    /// outside the vocabulary.
    pub fn train_with_vocab(
        vocab: Vocabulary,
        corpus: &str,
        options: &TrainOptions,
    ) -> Result<Self> {
        let ids = vocab.encode(corpus)?;
        let ngram = NGramModel::train(&ids, options.order, options.lambda, vocab.size())?;
        let embeddings = train_embeddings(
            &ids,
            vocab.size(),
            options.embed_dim,
            options.embed_window,
            options.embed_seed,
        )?;
        Ok(Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            options: options.clone(),
            vocab,
            ngram,
            embeddings,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.size()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: TextModel = serde_json::from_str(json)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unexpected format tag {:?}",
                model.format
            )));
        }
        if model.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {}",
                model.version
            )));
        }
        if model.ngram.vocab_size() != model.vocab.size() {
            return Err(Error::ModelFormat(
                "n-gram vocabulary size disagrees with vocabulary".into(),
            ));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Convenience passthrough: logits for a context of token ids.
    pub fn logits(&self, context: &[TokenId]) -> Vec<f64> {
        self.ngram.logits(context)
    }

    /// Convenience passthrough: conditional probabilities.
    pub fn conditional(&self, context: &[TokenId]) -> Vec<f64> {
        self.ngram.conditional(context)
    }
}
