//! Metrics, classifier evaluation over dataset splits, and the two
//! analyses: the over-smoothing clustering sweep and the random-search
//! generalization study.

pub mod hpo;
pub mod kmeans;
pub mod metrics;
pub mod sweep;

use crate::datagen::{Dataset, Split};
use crate::error::{Error, Result};
use crate::gbdt::{gbdt_predict_proba, gbdt_train, GbdtModel, GbdtParams};
use crate::matrix::FeatureMatrix;

pub use hpo::{random_search, HpoRecord, HpoSummary, SearchSpace};
pub use kmeans::{kmeans, kmeans_fit, KMeansResult};
pub use metrics::{accuracy, cross_entropy, pearson_correlation, standardize, v_measure};
pub use sweep::{normalize_scores, oversmoothing_sweep, SweepConfig, SweepResult};

/// Per-split scores of a trained classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitMetrics {
    pub train_accuracy: f64,
    pub valid_accuracy: f64,
    pub test_accuracy: f64,
    pub valid_cross_entropy: f64,
    pub test_cross_entropy: f64,
    pub best_round: usize,
}

fn split_rows(ds: &Dataset, features: &FeatureMatrix, which: Split) -> (FeatureMatrix, Vec<usize>) {
    let idx = ds.indices(which);
    (features.select_rows(&idx), ds.labels_at(&idx))
}

fn score(model: &GbdtModel, x: &FeatureMatrix, y: &[usize]) -> Result<(f64, f64)> {
    let p = gbdt_predict_proba(model, x)?;
    let pred: Vec<usize> = p.iter_rows().map(crate::gbdt::argmax).collect();
    Ok((accuracy(&pred, y)?, cross_entropy(&p, y)?))
}

/// Scores `model` on every split of `ds`, using `features` as node inputs.
pub fn score_model(
    model: &GbdtModel,
    ds: &Dataset,
    features: &FeatureMatrix,
) -> Result<SplitMetrics> {
    if features.rows() != ds.n_nodes() {
        return Err(Error::RowCount {
            what: "node features".into(),
            expected: ds.n_nodes(),
            found: features.rows(),
        });
    }
    let (xt, yt) = split_rows(ds, features, Split::Train);
    let (xv, yv) = split_rows(ds, features, Split::Valid);
    let (xs, ys) = split_rows(ds, features, Split::Test);
    let (train_accuracy, _) = score(model, &xt, &yt)?;
    let (valid_accuracy, valid_cross_entropy) = score(model, &xv, &yv)?;
    let (test_accuracy, test_cross_entropy) = score(model, &xs, &ys)?;
    Ok(SplitMetrics {
        train_accuracy,
        valid_accuracy,
        test_accuracy,
        valid_cross_entropy,
        test_cross_entropy,
        best_round: model.best_round(),
    })
}

/// Trains on the train split with validation early stopping and scores
/// all three splits.
pub fn fit_classifier(
    ds: &Dataset,
    features: &FeatureMatrix,
    params: &GbdtParams,
) -> Result<(GbdtModel, SplitMetrics)> {
    if features.rows() != ds.n_nodes() {
        return Err(Error::RowCount {
            what: "node features".into(),
            expected: ds.n_nodes(),
            found: features.rows(),
        });
    }
    let (xt, yt) = split_rows(ds, features, Split::Train);
    let (xv, yv) = split_rows(ds, features, Split::Valid);
    let model = gbdt_train(&xt, &yt, &xv, &yv, params)?;
    let metrics = score_model(&model, ds, features)?;
    Ok((model, metrics))
}
