//! Over-smoothing sweep: for each embedder and each hop count, standardize
//! the embeddings, cluster them with k-means and score the clustering
//! against the true labels with v-measure.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::kmeans::kmeans_fit;
use super::metrics::{standardize, v_measure};
use crate::aggregate::Aggregator;
use crate::embed::{embed_with, EmbedConfig, Method};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub max_hops: usize,
    /// Defaults to the number of distinct labels.
    pub k_clusters: Option<usize>,
    pub restarts: usize,
    pub aggregator: Aggregator,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            methods: Method::ALL.to_vec(),
            max_hops: 30,
            k_clusters: None,
            restarts: 1,
            aggregator: Aggregator::Mean,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub method: Method,
    /// `raw[k - 1]` is the v-measure after `k` hops.
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Hop count (1-based) of the best raw score; earliest on ties.
    pub best_hops: usize,
}

/// Divides by the maximum; a sweep that never scores above zero maps to
/// all ones.
pub fn normalize_scores(raw: &[f64]) -> Vec<f64> {
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 {
        raw.iter().map(|v| v / max).collect()
    } else {
        vec![1.0; raw.len()]
    }
}

fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub fn oversmoothing_sweep(
    g: &CsrGraph,
    x: &FeatureMatrix,
    labels: &[usize],
    cfg: &SweepConfig,
) -> Result<Vec<SweepResult>> {
    if labels.len() != x.rows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: x.rows(),
        });
    }
    if cfg.max_hops == 0 {
        return Err(Error::InvalidParameter(
            "sweep needs at least one hop".into(),
        ));
    }
    let k_clusters = cfg
        .k_clusters
        .unwrap_or_else(|| labels.iter().collect::<BTreeSet<_>>().len());

    cfg.methods
        .par_iter()
        .enumerate()
        .map(|(mi, &method)| {
            // embedding width is kept at the input width for every method
            let ecfg = EmbedConfig {
                hops: cfg.max_hops,
                dim: x.cols(),
                aggregator: cfg.aggregator,
                method,
            };
            let mut raw = Vec::with_capacity(cfg.max_hops);
            embed_with(g, x, &ecfg, |hop, h| {
                let cell = (mi * cfg.max_hops + hop - 1) as u64;
                let clusters =
                    kmeans_fit(&standardize(h), k_clusters, cfg.seed ^ cell, cfg.restarts)?;
                raw.push(v_measure(labels, &clusters.assignments)?);
                Ok(())
            })?;
            let normalized = normalize_scores(&raw);
            Ok(SweepResult {
                method,
                best_hops: first_argmax(&raw) + 1,
                raw,
                normalized,
            })
        })
        .collect()
}
