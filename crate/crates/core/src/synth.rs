//! Synthetic corpus generator with controlled entropy structure.
//!
//! Text is built from sentence templates. Every template slot owns a
//! cluster of interchangeable synonym words, and the slot kind decides the
//! conditional entropy an order-2 model sees there:
//!
//! * `Free`       - uniform synonym draw: high token entropy, one semantic
//!   cluster (low semantic entropy);
//! * `Weighted`   - synonym index `(previous + k) mod m` with geometric
//!   weights over k: a skewed high-entropy conditional (biasing it has a
//!   real quality cost) whose marginal stays uniform thanks to the
//!   rotation;
//! * `Copy`       - repeats the previous slot's synonym index in its own
//!   cluster: near-deterministic, low token entropy;
//! * `Choice`     - picks between its own cluster and its mirror partner's
//!   with probability `hi`, uniform synonym: high token entropy across two
//!   clusters (high semantic entropy);
//! * `ChoiceCopy` - same two-cluster branch but one-hot within each branch:
//!   the own-cluster branch copies the synonym index, the partner branch
//!   uses the reversed index. A two-point conditional (moderate token
//!   entropy) whose two candidates live in different co-occurrence
//!   neighbourhoods, so their embeddings land in different clusters.
//!
//! Choice-style slots must come in pairs; the second member swaps the
//! branch probabilities, so every cluster still receives total weight one
//! and the corpus-level unigram distribution stays uniform over the whole
//! vocabulary. That keeps the green-token mass of any fixed key split at
//! almost exactly gamma, which is what calibrated null z-scores need.

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Free,
    Weighted,
    Copy,
    Choice { hi: f64 },
    ChoiceCopy { hi: f64 },
}

/// Geometric decay of the `Weighted` slot distribution.
const WEIGHTED_RATIO: f64 = 0.7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub templates: usize,
    pub layout: Vec<SlotKind>,
    pub synonyms: usize,
    pub sentences: usize,
    pub seed: u64,
}

impl CorpusSpec {
    /// Mixed-entropy corpus: 544 word types (4 templates x 17 slots x 8
    /// synonyms), all four entropy categories represented, and no fully
    /// deterministic run longer than two tokens.
    pub fn standard(sentences: usize, seed: u64) -> Self {
        use SlotKind::*;
        Self {
            templates: 4,
            layout: vec![
                Free,
                Weighted,
                Copy,
                Weighted,
                Choice { hi: 0.7 },
                Weighted,
                Copy,
                ChoiceCopy { hi: 0.7 },
                Weighted,
                Free,
                Choice { hi: 0.7 },
                Weighted,
                Weighted,
                ChoiceCopy { hi: 0.7 },
                Weighted,
                Free,
                Weighted,
            ],
            synonyms: 8,
            sentences,
            seed,
        }
    }

    /// Low-context-variety corpus (192 types) dominated by copy chains, so
    /// most free slots sit behind only eight distinct contexts. Keyed
    /// per-context sampling then leaves strong token-frequency artifacts
    /// that drown the faint bias signal frequency analysis feeds on.
    pub fn low_variety(sentences: usize, seed: u64) -> Self {
        use SlotKind::*;
        Self {
            templates: 2,
            layout: vec![
                Free,
                Copy,
                Copy,
                Free,
                Copy,
                Copy,
                Free,
                Copy,
                Copy,
                Choice { hi: 0.7 },
                Choice { hi: 0.7 },
                Copy,
            ],
            synonyms: 8,
            sentences,
            seed,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.templates * self.layout.len() * self.synonyms
    }

    fn validate(&self) {
        assert!(self.templates >= 1 && self.synonyms >= 2 && !self.layout.is_empty());
        assert!(self.layout[0] == SlotKind::Free, "first slot must be Free");
        let choices = self
            .layout
            .iter()
            .filter(|k| matches!(k, SlotKind::Choice { .. }))
            .count();
        let choice_copies = self
            .layout
            .iter()
            .filter(|k| matches!(k, SlotKind::ChoiceCopy { .. }))
            .count();
        assert!(choices % 2 == 0, "Choice slots must pair up");
        assert!(choice_copies % 2 == 0, "ChoiceCopy slots must pair up");
    }

    /// Mirror partner slot for each Choice/ChoiceCopy slot: first pairs
    /// with second in order of appearance, and so on.
    fn partners(&self) -> Vec<usize> {
        let mut partner = (0..self.layout.len()).collect::<Vec<_>>();
        for matcher in [
            |k: &SlotKind| matches!(k, SlotKind::Choice { .. }),
            |k: &SlotKind| matches!(k, SlotKind::ChoiceCopy { .. }),
        ] {
            let slots: Vec<usize> = self
                .layout
                .iter()
                .enumerate()
                .filter(|(_, k)| matcher(k))
                .map(|(i, _)| i)
                .collect();
            for pair in slots.chunks(2) {
                partner[pair[0]] = pair[1];
                partner[pair[1]] = pair[0];
            }
        }
        partner
    }
}

fn word(template: usize, slot: usize, layout_len: usize, syn: usize) -> String {
    format!("q{}x{}", template * layout_len + slot, syn)
}

/// Offset draw with weights proportional to WEIGHTED_RATIO^k, k in [0, m).
fn sample_geometric(rng: &mut SplitMix64, m: usize) -> usize {
    let norm = (1.0 - WEIGHTED_RATIO.powi(m as i32)) / (1.0 - WEIGHTED_RATIO);
    let mut u = rng.next_f64() * norm;
    let mut w = 1.0;
    for k in 0..m {
        if u < w {
            return k;
        }
        u -= w;
        w *= WEIGHTED_RATIO;
    }
    m - 1
}

/// Generate the corpus as whitespace-separated text, one sentence per line.
pub fn generate_corpus(spec: &CorpusSpec) -> String {
    spec.validate();
    let partner = spec.partners();
    let mut rng = SplitMix64::new(spec.seed);
    let m = spec.synonyms as u64;
    let len = spec.layout.len();
    let mut out = String::new();
    let mut prev_syn = 0usize;
    for _ in 0..spec.sentences {
        let template = rng.below(spec.templates as u64) as usize;
        for (slot, kind) in spec.layout.iter().enumerate() {
            let (cluster_slot, syn) = match *kind {
                SlotKind::Free => (slot, rng.below(m) as usize),
                SlotKind::Weighted => {
                    let k = sample_geometric(&mut rng, spec.synonyms);
                    (slot, (prev_syn + k) % spec.synonyms)
                }
                SlotKind::Copy => (slot, prev_syn),
                SlotKind::Choice { hi } => {
                    let own = rng.chance(hi);
                    (
                        if own { slot } else { partner[slot] },
                        rng.below(m) as usize,
                    )
                }
                SlotKind::ChoiceCopy { hi } => {
                    // Reversing the index on the partner branch keeps the
                    // two candidate tokens' anchor neighbourhoods disjoint.
                    if rng.chance(hi) {
                        (slot, prev_syn)
                    } else {
                        (partner[slot], spec.synonyms - 1 - prev_syn)
                    }
                }
            };
            out.push_str(&word(template, cluster_slot, len, syn));
            out.push(' ');
            prev_syn = syn;
        }
        out.push('\n');
    }
    out
}
