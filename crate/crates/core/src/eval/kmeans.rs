//! Lloyd's k-means with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: FeatureMatrix,
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_centroids(x: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    let n = x.rows();
    let mut centroids = FeatureMatrix::zeros(k, x.cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(x.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            // rounding can exhaust `target`; fall back to the last eligible point
            let mut chosen = closest.iter().rposition(|&d| d > 0.0).unwrap_or(n - 1);
            for (i, &d) in closest.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(x.row(pick));
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(pick)));
        }
    }
    centroids
}

/// Nearest centroid per point (lowest index on ties) and its squared distance.
fn assign(x: &FeatureMatrix, centroids: &FeatureMatrix) -> Vec<(usize, f64)> {
    (0..x.rows())
        .into_par_iter()
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for c in 0..centroids.rows() {
                let d = sq_dist(x.row(i), centroids.row(c));
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect()
}

fn lloyd(x: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> KMeansResult {
    let n = x.rows();
    let f = x.cols();
    let mut centroids = seed_centroids(x, k, rng);
    let mut assignments: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let nearest = assign(x, &centroids);
        let next: Vec<usize> = nearest.iter().map(|&(c, _)| c).collect();
        history.push(nearest.iter().map(|&(_, d)| d).sum());
        iterations += 1;
        let stable = next == assignments;
        assignments = next;
        if stable || iterations >= MAX_ITERATIONS {
            break;
        }

        let mut sums = FeatureMatrix::zeros(k, f);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums.row_mut(c).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        let mut dist: Vec<f64> = nearest.iter().map(|&(_, d)| d).collect();
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let inv = count as f64;
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s / inv;
                }
            } else {
                // empty cluster: move it onto the worst-fit point
                let mut far = 0;
                for (i, &d) in dist.iter().enumerate() {
                    if d > dist[far] {
                        far = i;
                    }
                }
                centroids.row_mut(c).copy_from_slice(x.row(far));
                dist[far] = 0.0;
            }
        }
    }
    let inertia = *history.last().expect("at least one assignment step");
    debug_assert_eq!(assignments.len(), n);
    KMeansResult {
        assignments,
        centroids,
        inertia,
        inertia_history: history,
        iterations,
    }
}

/// Best of `restarts` seeded runs by final inertia.
pub fn kmeans_fit(x: &FeatureMatrix, k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(Error::ClusterCount { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(x, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub fn kmeans(x: &FeatureMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    kmeans_fit(x, k, seed, 1).map(|r| r.assignments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_pairs() {
        let x = FeatureMatrix::from_rows(&[[0.0, 0.0], [100.0, 100.0], [0.1, 0.0], [100.0, 100.1]])
            .unwrap();
        let a = kmeans(&x, 2, 3).unwrap();
        assert_eq!(a[0], a[2]);
        assert_eq!(a[1], a[3]);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn one_cluster_and_n_clusters() {
        let x = FeatureMatrix::from_rows(&[[0.0], [1.0], [5.0], [2.5]]).unwrap();
        assert_eq!(kmeans(&x, 1, 0).unwrap(), vec![0; 4]);
        let r = kmeans_fit(&x, 4, 0, 1).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut sorted = r.assignments.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }

    #[test]
    fn bad_cluster_count() {
        let x = FeatureMatrix::zeros(3, 1);
        assert!(matches!(
            kmeans(&x, 4, 0),
            Err(Error::ClusterCount { k: 4, n: 3 })
        ));
        assert!(kmeans(&x, 0, 0).is_err());
    }

    #[test]
    fn duplicate_points_still_terminate() {
        let x = FeatureMatrix::from_rows(&[[1.0], [1.0], [1.0]]).unwrap();
        let r = kmeans_fit(&x, 2, 9, 2).unwrap();
        assert_eq!(r.inertia, 0.0);
    }
}
