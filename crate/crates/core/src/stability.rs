//! Cluster stability under subsampling.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::extract::{ClusterCandidate, Pipeline};

pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_FRACTION: f64 = 0.8;

/// Sorted original row ids of sample `k`: ⌈f·n⌉ rows drawn without replacement.
pub fn draw_sample(n_rows: usize, fraction: f64, seed: u64, k: usize) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::arg(format!("sample fraction must be in (0, 1], got {fraction}")));
    }
    let m = ((fraction * n_rows as f64).ceil() as usize).min(n_rows);
    if m == n_rows {
        return Ok((0..n_rows).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let mut rows = index::sample(&mut rng, n_rows, m).into_vec();
    rows.sort_unstable();
    Ok(rows)
}

/// Jaccard index of `original ∩ sample` and `found`. All three are sorted.
/// Two empty sets agree perfectly.
pub fn pairwise_score(original: &[usize], found: &[usize], sample: &[usize]) -> f64 {
    let restricted = intersect(original, sample);
    let inter = intersect(&restricted, found).len();
    let union = restricted.len() + found.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStability {
    pub cluster: usize,
    /// Best score in each sample, by sample index.
    pub per_sample: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub samples: usize,
    pub fraction: f64,
    pub seed: u64,
    pub clusters: Vec<ClusterStability>,
}

/// Reruns `pipeline` on `samples` subsamples of `raw` and scores, for each
/// original cluster, its best match among the clusters found in each sample.
/// A sample that yields no clusters scores 0 for every cluster.
pub fn stability_report(
    raw: &Dataset,
    clusters: &[ClusterCandidate],
    pipeline: &Pipeline,
    samples: usize,
    fraction: f64,
    seed: u64,
) -> Result<StabilityReport> {
    if samples == 0 {
        return Err(Error::arg("number of samples must be at least 1"));
    }
    let draws: Vec<Vec<usize>> = (0..samples)
        .map(|k| draw_sample(raw.row_count(), fraction, seed, k))
        .collect::<Result<_>>()?;
    let originals: Vec<Vec<usize>> = clusters
        .iter()
        .map(|c| {
            let mut rows = c.row_ids.clone();
            rows.sort_unstable();
            rows
        })
        .collect();

    let per_sample: Vec<Vec<f64>> = draws
        .par_iter()
        .enumerate()
        .map(|(k, rows)| -> Result<Vec<f64>> {
            let sub = raw.subset(rows);
            let found: Vec<Vec<usize>> = match pipeline.run(&sub) {
                Ok((_, ex)) => ex
                    .clusters
                    .iter()
                    .map(|c| {
                        let mut ids: Vec<usize> = c.row_ids.iter().map(|&r| rows[r]).collect();
                        ids.sort_unstable();
                        ids
                    })
                    .collect(),
                Err(e @ (Error::Data(_) | Error::InvalidArgument(_))) => {
                    log::warn!("sample {k}: extraction failed ({e}), scoring 0");
                    Vec::new()
                }
                Err(e) => return Err(e),
            };
            Ok(originals
                .iter()
                .map(|orig| found.iter().map(|f| pairwise_score(orig, f, rows)).fold(0.0, f64::max))
                .collect())
        })
        .collect::<Result<_>>()?;

    let clusters = (0..originals.len())
        .map(|i| {
            let scores: Vec<f64> = per_sample.iter().map(|s| s[i]).collect();
            ClusterStability {
                cluster: i + 1,
                mean: scores.iter().sum::<f64>() / scores.len() as f64,
                min: scores.iter().copied().fold(f64::INFINITY, f64::min),
                max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                per_sample: scores,
            }
        })
        .collect();
    Ok(StabilityReport {
        samples,
        fraction,
        seed,
        clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_sizes_and_determinism() {
        assert_eq!(draw_sample(10, 1.0, 7, 0).unwrap(), (0..10).collect::<Vec<_>>());
        let s = draw_sample(100, 0.5, 7, 3).unwrap();
        assert_eq!(s.len(), 50);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, draw_sample(100, 0.5, 7, 3).unwrap());
        assert_ne!(s, draw_sample(100, 0.5, 7, 4).unwrap());
        assert_eq!(draw_sample(7, 0.5, 1, 0).unwrap().len(), 4);
        assert!(draw_sample(10, 0.0, 1, 0).is_err());
        assert!(draw_sample(10, 1.5, 1, 0).is_err());
    }

    #[test]
    fn jaccard_cases() {
        let all: Vec<usize> = (0..10).collect();
        assert_eq!(pairwise_score(&[1, 2, 3], &[1, 2, 3], &all), 1.0);
        assert_eq!(pairwise_score(&[1, 2], &[3, 4], &all), 0.0);
        assert_eq!(pairwise_score(&[1, 2, 3], &[2, 3, 4], &all), 0.5);
        assert_eq!(pairwise_score(&[8, 9], &[], &[0, 1, 2]), 1.0);
        // rows outside the sample are ignored
        assert_eq!(pairwise_score(&[1, 2, 9], &[1, 2], &[0, 1, 2, 3]), 1.0);
    }
}
