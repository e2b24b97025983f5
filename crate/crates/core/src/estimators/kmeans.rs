//! k-means over estimated emissivity profiles (k-means++ seeding, Lloyd
//! iterations, Euclidean distance).
//!
//! Points are processed in lexicographic order of their profiles, so the
//! partition does not depend on the order pixels are handed in.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EstimationResult;
use crate::error::{Error, Result};

const MAX_LLOYD: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    /// Cluster index per input profile, in input order.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Cluster arbitrary equal-length profiles.
pub fn kmeans(profiles: &[Vec<f64>], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::field("k", "must be >= 1"));
    }
    let Some(dim) = profiles.first().map(Vec::len) else {
        return Err(Error::Precondition("no profiles to cluster".into()));
    };
    if let Some(i) = profiles.iter().position(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::Precondition(format!("profile {i} is malformed")));
    }

    let cmp = |a: &Vec<f64>, b: &Vec<f64>| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by(|&i, &j| cmp(&profiles[i], &profiles[j]));
    let points: Vec<&Vec<f64>> = order.iter().map(|&i| &profiles[i]).collect();
    let distinct = 1 + points.windows(2).filter(|w| cmp(w[0], w[1]).is_ne()).count();
    if distinct < k {
        return Err(Error::Precondition(format!(
            "{distinct} distinct profiles for k = {k}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    while centroids.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|p| centroids.iter().map(|c| dist2(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let pick = WeightedIndex::new(&weights)
            .map_err(|e| Error::Precondition(format!("k-means++ seeding: {e}")))?
            .sample(&mut rng);
        centroids.push(points[pick].clone());
    }

    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    let mut iterations = 0;
    while iterations < MAX_LLOYD {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for j in 0..k {
            // an emptied cluster keeps its previous centre
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }

    let mut out = vec![0; profiles.len()];
    for (pos, &orig) in order.iter().enumerate() {
        out[orig] = labels[pos];
    }
    Ok(Clustering {
        labels: out,
        centroids,
        iterations,
    })
}

/// Cluster the emissivity estimates of a set of pixels.
pub fn cluster_emissivities(results: &[EstimationResult], k: usize, seed: u64) -> Result<Clustering> {
    let profiles: Vec<Vec<f64>> = results.iter().map(|r| r.eps_hat.values().to_vec()).collect();
    kmeans(&profiles, k, seed)
}
