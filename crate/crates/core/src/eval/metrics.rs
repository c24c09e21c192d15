use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

const PROBA_FLOOR: f64 = 1e-15;

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    same_len(pred.len(), truth.len())?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Mean of `-ln p[true]`, with `p` floored at 1e-15.
pub fn cross_entropy(proba: &FeatureMatrix, truth: &[usize]) -> Result<f64> {
    same_len(proba.rows(), truth.len())?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (row, &t) in proba.iter_rows().zip(truth) {
        let p = *row.get(t).ok_or(Error::DimensionMismatch {
            expected: t + 1,
            found: row.len(),
        })?;
        total -= p.max(PROBA_FLOOR).ln();
    }
    Ok(total / truth.len() as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    same_len(xs.len(), ys.len())?;
    if xs.len() < 2 {
        return Err(Error::InsufficientData(
            "correlation needs two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Column-wise z-scores using the sample (n - 1) standard deviation;
/// zero-variance columns become zeros.
pub fn standardize(x: &FeatureMatrix) -> FeatureMatrix {
    let n = x.rows();
    let mut out = x.clone();
    if n < 2 {
        out.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
        return out;
    }
    for j in 0..x.cols() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        // relative cutoff: a column that is constant up to rounding is constant
        let degenerate = sd.is_nan() || sd <= 1e-12 * mean.abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            out.set(
                i,
                j,
                if degenerate {
                    0.0
                } else {
                    (x.get(i, j) - mean) / sd
                },
            );
        }
    }
    out
}

fn entropy_of(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `(homogeneity, completeness, v_measure)` of a clustering against labels.
pub fn homogeneity_completeness_v_measure(
    truth: &[usize],
    pred: &[usize],
) -> Result<(f64, f64, f64)> {
    same_len(truth.len(), pred.len())?;
    if truth.is_empty() {
        return Err(Error::InsufficientData(
            "v-measure of an empty labeling".into(),
        ));
    }
    let n = truth.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut classes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut clusters: BTreeMap<usize, usize> = BTreeMap::new();
    for (&c, &k) in truth.iter().zip(pred) {
        *joint.entry((c, k)).or_default() += 1;
        *classes.entry(c).or_default() += 1;
        *clusters.entry(k).or_default() += 1;
    }
    let h_c = entropy_of(classes.values().copied(), n);
    let h_k = entropy_of(clusters.values().copied(), n);
    // H(C|K) = -Σ n_ck/n · ln(n_ck / n_k), and symmetrically for H(K|C)
    let mut h_c_given_k = 0.0;
    let mut h_k_given_c = 0.0;
    for (&(c, k), &nck) in &joint {
        let p = nck as f64 / n;
        h_c_given_k -= p * (nck as f64 / clusters[&k] as f64).ln();
        h_k_given_c -= p * (nck as f64 / classes[&c] as f64).ln();
    }
    let homogeneity = if h_c == 0.0 {
        1.0
    } else {
        1.0 - h_c_given_k / h_c
    };
    let completeness = if h_k == 0.0 {
        1.0
    } else {
        1.0 - h_k_given_c / h_k
    };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    Ok((homogeneity, completeness, v.clamp(0.0, 1.0)))
}

pub fn v_measure(truth: &[usize], pred: &[usize]) -> Result<f64> {
    homogeneity_completeness_v_measure(truth, pred).map(|(_, _, v)| v)
}
