//! Per-feature quantile binning.
//!
//! Bin `b` of a feature holds values in `(edges[b-1], edges[b]]`, so a split
//! "bins <= b go left" is the same as "value <= edges[b] goes left" and trees
//! can store the real-valued edge as their threshold.

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone)]
pub(crate) struct BinnedMatrix {
    pub n_rows: usize,
    /// Column-major bin indices.
    pub bins: Vec<u8>,
    pub edges: Vec<Vec<f64>>,
}

impl BinnedMatrix {
    #[inline]
    pub fn column(&self, feature: usize) -> &[u8] {
        &self.bins[feature * self.n_rows..(feature + 1) * self.n_rows]
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.edges[feature].len() + 1
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

/// Cut points for one feature, at most `n_bins - 1` of them.
pub(crate) fn feature_edges(values: &mut [f64], n_bins: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mut unique: Vec<f64> = values.to_vec();
    unique.dedup();
    let mut edges = Vec::new();
    if unique.len() <= n_bins {
        for w in unique.windows(2) {
            edges.push(midpoint(w[0], w[1]));
        }
    } else {
        for q in 1..n_bins {
            let pos = q * n / n_bins;
            if pos == 0 || pos >= n {
                continue;
            }
            let (lo, hi) = (values[pos - 1], values[pos]);
            if lo < hi {
                edges.push(midpoint(lo, hi));
            }
        }
        edges.dedup();
    }
    edges
}

pub(crate) fn bin_of(edges: &[f64], x: f64) -> u8 {
    edges.partition_point(|&e| e < x) as u8
}

pub(crate) fn bin_matrix(x: &FeatureMatrix, n_bins: usize) -> BinnedMatrix {
    let n = x.rows();
    let f = x.cols();
    let mut bins = vec![0u8; n * f];
    let mut edges = Vec::with_capacity(f);
    for j in 0..f {
        let mut col = x.column(j);
        let e = feature_edges(&mut col, n_bins);
        for (i, b) in bins[j * n..(j + 1) * n].iter_mut().enumerate() {
            *b = bin_of(&e, x.get(i, j));
        }
        edges.push(e);
    }
    BinnedMatrix {
        n_rows: n,
        bins,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn few_unique_values_use_midpoints() {
        let mut v = vec![3.0, 1.0, 2.0, 1.0];
        assert_eq!(feature_edges(&mut v, 256), vec![1.5, 2.5]);
        assert_eq!(bin_of(&[1.5, 2.5], 1.0), 0);
        assert_eq!(bin_of(&[1.5, 2.5], 2.5), 1);
        assert_eq!(bin_of(&[1.5, 2.5], 9.0), 2);
    }

    #[test]
    fn many_values_are_capped() {
        let mut v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let e = feature_edges(&mut v, 16);
        assert_eq!(e.len(), 15);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        // roughly equal mass per bin
        let counts = (0..1000).fold(vec![0; 16], |mut c, i| {
            c[bin_of(&e, i as f64) as usize] += 1;
            c
        });
        assert!(counts.iter().all(|&c| (60..=65).contains(&c)), "{counts:?}");
    }

    #[test]
    fn constant_feature_has_one_bin() {
        let mut v = vec![4.0; 10];
        assert!(feature_edges(&mut v, 256).is_empty());
    }
}
