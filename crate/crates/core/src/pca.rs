//! Exact PCA through the eigendecomposition of the sample covariance.
//!
//! Rows are accumulated in a canonical (lexicographic) order and in fixed
//! blocks, so a fit is bitwise reproducible under row permutation and under
//! any worker count.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{cmp_rows, FeatureMatrix};

const BLOCK_ROWS: usize = 512;
const RELATIVE_ZERO: f64 = 1e-12;

const MAGIC: &[u8; 4] = b"PCAM";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `d × f`, rows orthonormal, ordered by descending eigenvalue.
    components: FeatureMatrix,
    eigenvalues: Vec<f64>,
    total_variance: f64,
}

impl PcaModel {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &FeatureMatrix {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Trace of the sample covariance over all input columns.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let f = self.n_features();
        let d = self.n_components();
        let mut out = Vec::with_capacity(24 + 8 * (f + d * f + d + 1));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(f as u64).to_le_bytes());
        out.extend_from_slice(&(d as u64).to_le_bytes());
        for v in self
            .mean
            .iter()
            .chain(self.components.as_slice())
            .chain(&self.eigenvalues)
            .chain(std::iter::once(&self.total_variance))
        {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = crate::bytes::Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad PCA model magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported PCA model version {version}"
            )));
        }
        let f = r.u64()? as usize;
        let d = r.u64()? as usize;
        let mean = r.f64_vec(f)?;
        let components = FeatureMatrix::from_vec(d, f, r.f64_vec(d * f)?)?;
        let eigenvalues = r.f64_vec(d)?;
        let total_variance = r.f64()?;
        r.finish()?;
        Ok(PcaModel {
            mean,
            components,
            eigenvalues,
            total_variance,
        })
    }
}

fn canonical_order(x: &FeatureMatrix) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.rows()).collect();
    idx.sort_by(|&a, &b| cmp_rows(x.row(a), x.row(b)));
    idx
}

fn column_means(x: &FeatureMatrix, order: &[usize]) -> Vec<f64> {
    let f = x.cols();
    let partials: Vec<Vec<f64>> = order
        .par_chunks(BLOCK_ROWS)
        .map(|block| {
            let mut s = vec![0.0; f];
            for &i in block {
                for (acc, v) in s.iter_mut().zip(x.row(i)) {
                    *acc += v;
                }
            }
            s
        })
        .collect();
    let mut sum = vec![0.0; f];
    for p in partials {
        for (a, v) in sum.iter_mut().zip(p) {
            *a += v;
        }
    }
    let n = x.rows() as f64;
    sum.iter_mut().for_each(|v| *v /= n);
    sum
}

/// Sample covariance `(X - mean)ᵀ(X - mean) / (n - 1)`, full symmetric.
fn covariance(x: &FeatureMatrix, mean: &[f64], order: &[usize]) -> Vec<f64> {
    let f = x.cols();
    let partials: Vec<Vec<f64>> = order
        .par_chunks(BLOCK_ROWS)
        .map(|block| {
            let mut acc = vec![0.0; f * f];
            let mut centered = vec![0.0; f];
            for &i in block {
                for ((c, v), m) in centered.iter_mut().zip(x.row(i)).zip(mean) {
                    *c = v - m;
                }
                for a in 0..f {
                    let ca = centered[a];
                    let row = &mut acc[a * f..];
                    for b in a..f {
                        row[b] += ca * centered[b];
                    }
                }
            }
            acc
        })
        .collect();
    let mut cov = vec![0.0; f * f];
    for p in partials {
        for (c, v) in cov.iter_mut().zip(p) {
            *c += v;
        }
    }
    let denom = (x.rows() - 1) as f64;
    for a in 0..f {
        for b in a..f {
            let v = cov[a * f + b] / denom;
            cov[a * f + b] = v;
            cov[b * f + a] = v;
        }
    }
    cov
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits `min(d, f, n)` principal components of `x`.
pub fn pca_fit(x: &FeatureMatrix, d: usize) -> Result<PcaModel> {
    let n = x.rows();
    let f = x.cols();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least 2 rows, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter(
            "PCA target dimension must be >= 1".into(),
        ));
    }
    if f == 0 {
        return Err(Error::InsufficientData("PCA input has no columns".into()));
    }
    if let Some((row, col)) = x.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    let order = canonical_order(x);
    let mean = column_means(x, &order);
    let cov = covariance(x, &mean, &order);
    let total_variance = (0..f).map(|i| cov[i * f + i]).sum::<f64>().max(0.0);

    let eig = SymmetricEigen::new(DMatrix::from_row_slice(f, f, &cov));
    let mut by_value: Vec<usize> = (0..f).collect();
    by_value.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let largest = eig.eigenvalues[by_value[0]].max(0.0);

    let keep = d.min(f).min(n);
    let mut components = FeatureMatrix::zeros(keep, f);
    let mut eigenvalues = Vec::with_capacity(keep);
    for (k, &src) in by_value.iter().take(keep).enumerate() {
        let lambda = eig.eigenvalues[src];
        eigenvalues.push(if lambda <= RELATIVE_ZERO * largest {
            0.0
        } else {
            lambda
        });
        let row = components.row_mut(k);
        for (j, r) in row.iter_mut().enumerate() {
            *r = eig.eigenvectors[(j, src)];
        }
        fix_sign(row);
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        total_variance,
    })
}

/// `(X - mean) · componentsᵀ`.
pub fn pca_transform(m: &PcaModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    let f = m.n_features();
    if x.cols() != f {
        return Err(Error::DimensionMismatch {
            expected: f,
            found: x.cols(),
        });
    }
    let d = m.n_components();
    let mut out = FeatureMatrix::zeros(x.rows(), d);
    if d == 0 {
        return Ok(out);
    }
    out.as_mut_slice()
        .par_chunks_mut(d)
        .enumerate()
        .for_each_init(
            || vec![0.0; f],
            |centered, (i, dst)| {
                for ((c, v), mu) in centered.iter_mut().zip(x.row(i)).zip(&m.mean) {
                    *c = v - mu;
                }
                for (k, y) in dst.iter_mut().enumerate() {
                    *y = m
                        .components
                        .row(k)
                        .iter()
                        .zip(centered.iter())
                        .map(|(a, b)| a * b)
                        .sum();
                }
            },
        );
    Ok(out)
}

/// `Y · components + mean`; exact inverse when all `f` components are kept.
pub fn pca_inverse_transform(m: &PcaModel, y: &FeatureMatrix) -> Result<FeatureMatrix> {
    let d = m.n_components();
    if y.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: y.cols(),
        });
    }
    let f = m.n_features();
    let mut out = FeatureMatrix::zeros(y.rows(), f);
    for i in 0..y.rows() {
        let dst = out.row_mut(i);
        dst.copy_from_slice(&m.mean);
        for (k, &coef) in y.row(i).iter().enumerate() {
            for (o, c) in dst.iter_mut().zip(m.components.row(k)) {
                *o += coef * c;
            }
        }
    }
    Ok(out)
}

/// Eigenvalue share of the total variance; all zeros for constant input.
pub fn explained_variance_ratio(m: &PcaModel) -> Vec<f64> {
    if m.total_variance <= 0.0 {
        return vec![0.0; m.eigenvalues.len()];
    }
    m.eigenvalues
        .iter()
        .map(|l| (l / m.total_variance).clamp(0.0, 1.0))
        .collect()
}
