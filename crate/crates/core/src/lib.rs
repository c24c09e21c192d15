//! Graph node embeddings built from repeated neighborhood aggregation,
//! concatenation skip connections and per-hop PCA, plus a histogram
//! gradient-boosted tree classifier and analysis tooling (k-means
//! over-smoothing sweeps, random-search generalization studies) over
//! synthetic stochastic-block-model graphs or user-supplied datasets.

mod bytes;

pub mod aggregate;
pub mod datagen;
pub mod embed;
pub mod error;
pub mod eval;
pub mod gbdt;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod pca;

pub use aggregate::{aggregate, aggregate_k, Aggregator};
pub use datagen::{generate_sbm, load_dataset, Dataset, SbmParams, Split};
pub use embed::{embed, pcapass_embed, skip_embed, EmbedConfig, EmbedResult, Method};
pub use error::{Error, Result};
pub use gbdt::{gbdt_predict, gbdt_predict_proba, gbdt_train, GbdtModel, GbdtParams};
pub use graph::{degrees, load_edge_list, prepare, CsrGraph, EdgeList};
pub use matrix::FeatureMatrix;
pub use pca::{explained_variance_ratio, pca_fit, pca_transform, PcaModel};
