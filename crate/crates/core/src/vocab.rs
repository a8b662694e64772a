//! Tokenization and vocabulary construction.
//!
//! The tokenizer splits on whitespace and treats every non-alphanumeric
//! character as a standalone token, so `"Hello, world."` becomes
//! `["Hello", ",", "world", "."]`. The vocabulary assigns ids in first
//! occurrence order, which makes it a deterministic function of the corpus.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TokenId = u32;

/// Split text into tokens: runs of alphanumeric characters, with every
/// other non-whitespace character emitted as its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if c.is_alphanumeric() {
            current.push(c);
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(c.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Closed token set; id assignment follows first occurrence in the corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    /// Build from corpus text. Errors on an empty corpus.
    pub fn from_corpus(text: &str) -> Result<Self> {
        let words = tokenize(text);
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut tokens = Vec::new();
        let mut index = HashMap::new();
        for w in words {
            if !index.contains_key(&w) {
                index.insert(w.clone(), tokens.len() as TokenId);
                tokens.push(w);
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Tokenize and map to ids; unknown tokens are an error.
    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>> {
        tokenize(text)
            .into_iter()
            .map(|w| self.id(&w).ok_or(Error::UnknownToken { token: w }))
            .collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .map(|&id| self.token(id))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(Error::ModelFormat(format!(
                    "duplicate vocabulary token {t:?}"
                )));
            }
        }
        Ok(Self { tokens, index })
    }
}
