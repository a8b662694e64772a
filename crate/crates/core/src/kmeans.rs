//! Seeded Lloyd's k-means with farthest-point initialization.
//!
//! Deterministic given the seed: the first centroid is a seeded pick, each
//! further centroid is the point farthest from the chosen set (ties to the
//! lowest index), and assignment ties also resolve to the lowest centroid
//! index. Empty clusters are repaired by reseeding them with the point
//! farthest from its own centroid; when duplicate points make `n` distinct
//! clusters impossible the effective cluster count drops instead.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    /// Cluster id per input point, each in [0, centroids.len()).
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = dist2(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

pub fn kmeans(points: &[Vec<f64>], n: usize, iters: usize, seed: u64) -> Result<ClusterAssignment> {
    if n == 0 {
        return Err(Error::InvalidConfig("cluster count must be >= 1".into()));
    }
    if points.len() < n {
        return Err(Error::TooFewPoints {
            clusters: n,
            points: points.len(),
        });
    }

    // Farthest-point init; stops early if fewer than n distinct points exist.
    let mut rng = SplitMix64::new(seed);
    let mut centroids: Vec<Vec<f64>> =
        vec![points[rng.below(points.len() as u64) as usize].clone()];
    while centroids.len() < n {
        let mut far_idx = 0usize;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let (_, d) = nearest(p, &centroids);
            if d > far_d {
                far_d = d;
                far_idx = i;
            }
        }
        if far_d <= 0.0 {
            break; // all remaining points duplicate an existing centroid
        }
        centroids.push(points[far_idx].clone());
    }

    let dim = points[0].len();
    let mut labels = vec![0usize; points.len()];
    let mut first_pass = true;
    for _ in 0..iters.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, _) = nearest(p, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }

        // Repair empty clusters with the worst-fitting point.
        let mut sizes = vec![0usize; centroids.len()];
        for &l in &labels {
            sizes[l] += 1;
        }
        for c in 0..centroids.len() {
            if sizes[c] > 0 {
                continue;
            }
            let mut far_idx = None;
            let mut far_d = 0.0;
            for (i, p) in points.iter().enumerate() {
                if sizes[labels[i]] <= 1 {
                    continue;
                }
                let d = dist2(p, &centroids[labels[i]]);
                if d > far_d {
                    far_d = d;
                    far_idx = Some(i);
                }
            }
            if let Some(i) = far_idx {
                sizes[labels[i]] -= 1;
                labels[i] = c;
                sizes[c] = 1;
                centroids[c] = points[i].clone();
                changed = true;
            }
        }

        // Converged once an assignment pass changes nothing after the
        // centroids have been refreshed at least once.
        if !changed && !first_pass {
            break;
        }
        first_pass = false;

        // Mean update.
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (i, p) in points.iter().enumerate() {
            counts[labels[i]] += 1;
            for d in 0..dim {
                sums[labels[i]][d] += p[d];
            }
        }
        for c in 0..centroids.len() {
            if counts[c] > 0 {
                for d in 0..dim {
                    centroids[c][d] = sums[c][d] / counts[c] as f64;
                }
            }
        }
    }

    // Drop clusters that ended up empty (possible when duplicates collapsed).
    let mut remap = vec![usize::MAX; centroids.len()];
    let mut kept = Vec::new();
    for label in &mut labels {
        if remap[*label] == usize::MAX {
            remap[*label] = kept.len();
            kept.push(centroids[*label].clone());
        }
        *label = remap[*label];
    }

    Ok(ClusterAssignment {
        labels,
        centroids: kept,
    })
}
