//! Unsupervised node embedders.
//!
//! [`pcapass_embed`] runs the hop recurrence
//!
//! ```text
//! a   = AGG(h[s-1])
//! h[s] = PCA_s([a | h[s-1]])
//! ```
//!
//! starting from the raw features, so the aggregated neighborhood and the
//! previous state are concatenated (a skip connection) and squeezed back to
//! at most `dim` columns on every hop. Two baselines share the same driver:
//! plain repeated aggregation and an averaging skip connection.

use std::fmt;
use std::str::FromStr;

use crate::aggregate::{aggregate, Aggregator};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::matrix::FeatureMatrix;
use crate::pca::{pca_fit, pca_transform, PcaModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    PcaPass,
    MessagePassing,
    SkipConnections,
}

impl Method {
    pub const ALL: [Method; 3] = [
        Method::PcaPass,
        Method::MessagePassing,
        Method::SkipConnections,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::PcaPass => "pcapass",
            Method::MessagePassing => "message_passing",
            Method::SkipConnections => "skip",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcapass" => Ok(Method::PcaPass),
            "message_passing" | "mp" => Ok(Method::MessagePassing),
            "skip" | "skip_connections" => Ok(Method::SkipConnections),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedConfig {
    pub hops: usize,
    /// Target width for PCAPass; ignored by the baselines.
    pub dim: usize,
    pub aggregator: Aggregator,
    pub method: Method,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            hops: 8,
            dim: 16,
            aggregator: Aggregator::Mean,
            method: Method::PcaPass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedResult {
    pub embeddings: FeatureMatrix,
    /// One fitted model per hop, PCAPass only.
    pub per_hop_models: Vec<PcaModel>,
    pub hops_run: usize,
    pub warnings: Vec<String>,
}

fn check_rows(g: &CsrGraph, x: &FeatureMatrix) -> Result<()> {
    if x.rows() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            found: x.rows(),
        });
    }
    Ok(())
}

/// Runs `cfg.hops` steps, handing every intermediate state `h[s]`
/// (`s = 1..=hops`) to `on_hop` before moving on.
pub fn embed_with<F>(
    g: &CsrGraph,
    x: &FeatureMatrix,
    cfg: &EmbedConfig,
    mut on_hop: F,
) -> Result<EmbedResult>
where
    F: FnMut(usize, &FeatureMatrix) -> Result<()>,
{
    check_rows(g, x)?;
    if cfg.method == Method::PcaPass && cfg.dim == 0 {
        return Err(Error::InvalidParameter("embedding dim must be >= 1".into()));
    }
    let mut h = x.clone();
    let mut models = Vec::new();
    let mut warnings = Vec::new();
    for step in 1..=cfg.hops {
        let a = aggregate(g, &h, cfg.aggregator)?;
        h = match cfg.method {
            Method::MessagePassing => a,
            Method::SkipConnections => {
                let mut s = a;
                for (o, prev) in s.as_mut_slice().iter_mut().zip(h.as_slice()) {
                    *o = (*o + prev) / 2.0;
                }
                s
            }
            Method::PcaPass => {
                let c = FeatureMatrix::concat_columns(&a, &h)?;
                let model = pca_fit(&c, cfg.dim)?;
                if model.n_components() < cfg.dim && warnings.is_empty() {
                    warnings.push(format!(
                        "hop {step}: requested dim {} exceeds achievable width {}; capped",
                        cfg.dim,
                        model.n_components()
                    ));
                }
                let next = pca_transform(&model, &c)?;
                models.push(model);
                next
            }
        };
        on_hop(step, &h)?;
    }
    Ok(EmbedResult {
        embeddings: h,
        per_hop_models: models,
        hops_run: cfg.hops,
        warnings,
    })
}

/// Dispatches on `cfg.method`.
pub fn embed(g: &CsrGraph, x: &FeatureMatrix, cfg: &EmbedConfig) -> Result<EmbedResult> {
    embed_with(g, x, cfg, |_, _| Ok(()))
}

pub fn pcapass_embed(
    g: &CsrGraph,
    x: &FeatureMatrix,
    hops: usize,
    dim: usize,
    aggregator: Aggregator,
) -> Result<EmbedResult> {
    embed(
        g,
        x,
        &EmbedConfig {
            hops,
            dim,
            aggregator,
            method: Method::PcaPass,
        },
    )
}

/// `h[s] = (AGG(h[s-1]) + h[s-1]) / 2`.
pub fn skip_embed(
    g: &CsrGraph,
    x: &FeatureMatrix,
    hops: usize,
    aggregator: Aggregator,
) -> Result<EmbedResult> {
    embed(
        g,
        x,
        &EmbedConfig {
            hops,
            dim: x.cols().max(1),
            aggregator,
            method: Method::SkipConnections,
        },
    )
}

/// Replays the PCAPass recurrence with frozen per-hop models, e.g. on
/// updated features or an extended graph.
pub fn pcapass_apply(
    g: &CsrGraph,
    x: &FeatureMatrix,
    models: &[PcaModel],
    aggregator: Aggregator,
) -> Result<FeatureMatrix> {
    check_rows(g, x)?;
    let mut h = x.clone();
    for m in models {
        let a = aggregate(g, &h, aggregator)?;
        let c = FeatureMatrix::concat_columns(&a, &h)?;
        h = pca_transform(m, &c)?;
    }
    Ok(h)
}
