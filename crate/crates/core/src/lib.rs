//! Dual-channel text watermarking over a self-contained n-gram language model.
//!
//! The crate embeds and detects two complementary watermark families in
//! autoregressively generated token sequences:
//!
//! * a **logits watermark** (`unigram` / `kgw`): a keyed green/red
//!   vocabulary partition whose green half receives an additive logit bias,
//!   detected with a binomial z-score on the green-token count;
//! * a **sampling watermark**: exponential-minimum token selection
//!   `argmax_i r_i^(1/p_i)` over a keyed pseudorandom vector `r`, detected
//!   with a Gamma-tail p-value on the accumulated `-ln(1 - r[y])` scores.
//!
//! The channels combine per token (`series`), alternate by position
//! (`parallel`), or gate adaptively on token and semantic entropy
//! (`hybrid`). Detection re-derives everything from the keys and the
//! observed tokens; no generation-time state is needed.
//!
//! The rest of the crate is the machinery to study those schemes end to
//! end: corpus ingestion and n-gram modelling ([`model`], [`ngram`],
//! [`vocab`], [`embed`]), perturbation attacks ([`attack`]), green-list
//! stealing and spoofing ([`adversary`]), metrics and experiment
//! orchestration ([`metrics`], [`experiment`]), and a synthetic corpus
//! generator with controlled entropy structure ([`synth`]).
//!
//! Everything is deterministic given the configured seeds. With the default
//! `parallel` feature batch work fans out over rayon; disabling it yields a
//! sequential build with identical outputs.

pub mod adversary;
pub mod attack;
pub mod batch;
pub mod dual;
pub mod embed;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod kmeans;
pub mod logits_wm;
pub mod math;
pub mod metrics;
pub mod model;
pub mod ngram;
pub mod rng;
pub mod sampling_wm;
pub mod synth;
pub mod vocab;

pub use error::{Error, Result};
pub use model::TextModel;
pub use vocab::{TokenId, Vocabulary};
