//! Binary classification metrics for detector evaluation: confusion rates,
//! best F1 over thresholds, and the ROC curve with its AUC.
//!
//! Predictions are `statistic > threshold` with the watermarked class
//! positive. AUC accumulates in integer half-pair units before a single
//! final division, so it equals the pairwise-ordering definition exactly
//! (ties count one half).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScoredSample {
    /// True label: watermarked (positive) or natural.
    pub watermarked: bool,
    /// Detection statistic (z, threshold multiples, etc.).
    pub statistic: f64,
    /// Detector verdict at its own configured threshold.
    pub verdict: bool,
}

impl ScoredSample {
    pub fn new(watermarked: bool, statistic: f64, verdict: bool) -> Self {
        Self {
            watermarked,
            statistic,
            verdict,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Confusion {
    pub tpr: f64,
    pub tnr: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

fn class_counts(samples: &[ScoredSample]) -> Result<(usize, usize)> {
    let pos = samples.iter().filter(|s| s.watermarked).count();
    let neg = samples.len() - pos;
    if pos == 0 {
        return Err(Error::SingleClass("no watermarked samples"));
    }
    if neg == 0 {
        return Err(Error::SingleClass("no natural samples"));
    }
    Ok((pos, neg))
}

/// TPR, TNR, and F1 of the rule `statistic > threshold`.
pub fn confusion_metrics(samples: &[ScoredSample], threshold: f64) -> Result<Confusion> {
    let (pos, neg) = class_counts(samples)?;
    let mut tp = 0usize;
    let mut fp = 0usize;
    for s in samples {
        if s.statistic > threshold {
            if s.watermarked {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    let fn_ = pos - tp;
    let tn = neg - fp;
    let f1_den = 2 * tp + fp + fn_;
    Ok(Confusion {
        tpr: tp as f64 / pos as f64,
        tnr: tn as f64 / neg as f64,
        f1: if f1_den == 0 {
            0.0
        } else {
            2.0 * tp as f64 / f1_den as f64
        },
        tp,
        fp,
        tn,
        fn_,
    })
}

/// Confusion rates of the detectors' own verdicts.
pub fn verdict_rates(samples: &[ScoredSample]) -> Result<(f64, f64)> {
    let (pos, neg) = class_counts(samples)?;
    let tp = samples
        .iter()
        .filter(|s| s.watermarked && s.verdict)
        .count();
    let tn = samples
        .iter()
        .filter(|s| !s.watermarked && !s.verdict)
        .count();
    Ok((tp as f64 / pos as f64, tn as f64 / neg as f64))
}

/// Maximize F1 over midpoint thresholds between adjacent distinct scores
/// (plus a catch-all-positive threshold below the minimum). Ties prefer the
/// lower threshold. Returns (best F1, threshold achieving it).
pub fn best_f1(samples: &[ScoredSample]) -> Result<(f64, f64)> {
    class_counts(samples)?;
    let mut scores: Vec<f64> = samples.iter().map(|s| s.statistic).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scores.dedup();
    let mut thresholds = vec![scores[0] - 1.0];
    for w in scores.windows(2) {
        thresholds.push(w[0] + (w[1] - w[0]) / 2.0);
    }

    // Exact rational comparison of 2tp/(2tp+fp+fn) avoids float ties.
    let mut best_num = 0u64;
    let mut best_den = 1u64;
    let mut best_thr = thresholds[0];
    let mut first = true;
    for &thr in &thresholds {
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut fn_ = 0u64;
        for s in samples {
            match (s.watermarked, s.statistic > thr) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let num = 2 * tp;
        let den = 2 * tp + fp + fn_;
        let better = if den == 0 {
            false
        } else if first {
            true
        } else {
            (num as u128) * (best_den as u128) > (best_num as u128) * (den as u128)
        };
        if better {
            best_num = num;
            best_den = den;
            best_thr = thr;
            first = false;
        }
    }
    Ok((best_num as f64 / best_den as f64, best_thr))
}

/// ROC curve points (FPR, TPR) swept from high to low threshold, with tied
/// scores stepping together, plus the trapezoidal AUC.
pub fn roc_auc(samples: &[ScoredSample]) -> Result<(Vec<(f64, f64)>, f64)> {
    let (pos, neg) = class_counts(samples)?;
    let mut sorted: Vec<(f64, bool)> = samples
        .iter()
        .map(|s| (s.statistic, s.watermarked))
        .collect();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut curve = vec![(0.0, 0.0)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut area2 = 0u128; // in units of half pairs
    let mut i = 0usize;
    while i < sorted.len() {
        let mut j = i;
        let mut dtp = 0u64;
        let mut dfp = 0u64;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                dtp += 1;
            } else {
                dfp += 1;
            }
            j += 1;
        }
        area2 += dfp as u128 * (2 * tp + dtp) as u128;
        tp += dtp;
        fp += dfp;
        curve.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        i = j;
    }
    let auc = area2 as f64 / (2 * pos as u128 * neg as u128) as f64;
    Ok((curve, auc))
}
