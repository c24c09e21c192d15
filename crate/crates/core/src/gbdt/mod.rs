//! Second-order gradient-boosted trees for multiclass softmax classification.
//!
//! Each round fits one regression tree per class to the softmax gradients
//! `p - y` and hessians `p(1 - p)` over quantile-binned features. Training
//! tracks validation cross-entropy after every round, stops once it has not
//! improved for `patience` rounds, and keeps only the rounds up to the best.

mod binning;
mod io;
mod tree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::metrics::cross_entropy;
use crate::matrix::FeatureMatrix;

pub use tree::{Node, Tree};

use binning::bin_matrix;
use tree::{grow_tree, GrowParams};

const MIN_HESSIAN: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtParams {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_rounds: usize,
    pub lambda: f64,
    pub min_child_hessian: f64,
    pub patience: usize,
    pub n_bins: usize,
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            learning_rate: 0.1,
            max_depth: 6,
            n_rounds: 500,
            lambda: 1.0,
            min_child_hessian: 1.0,
            patience: 10,
            n_bins: 256,
            subsample: 1.0,
            seed: 0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be >= 1");
        }
        if self.lambda.is_nan()
            || self.lambda < 0.0
            || self.min_child_hessian.is_nan()
            || self.min_child_hessian < 0.0
        {
            return bad("lambda and min_child_hessian must be >= 0");
        }
        if self.patience == 0 {
            return bad("patience must be >= 1");
        }
        if !(2..=256).contains(&self.n_bins) {
            return bad("n_bins must be in 2..=256");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must be in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub(crate) params: GbdtParams,
    pub(crate) n_classes: usize,
    pub(crate) n_features: usize,
    pub(crate) base_score: Vec<f64>,
    /// `rounds[r][c]` is the class-`c` tree of round `r`; truncated to the
    /// best round.
    pub(crate) rounds: Vec<Vec<Tree>>,
    pub(crate) best_round: usize,
    pub(crate) rounds_trained: usize,
    pub(crate) valid_history: Vec<f64>,
    pub(crate) train_history: Vec<f64>,
}

impl GbdtModel {
    pub fn params(&self) -> &GbdtParams {
        &self.params
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn base_score(&self) -> &[f64] {
        &self.base_score
    }

    pub fn rounds(&self) -> &[Vec<Tree>] {
        &self.rounds
    }

    /// Number of boosting rounds kept; 0 means the class prior alone was best.
    pub fn best_round(&self) -> usize {
        self.best_round
    }

    /// Rounds evaluated before stopping, including the discarded tail.
    pub fn rounds_trained(&self) -> usize {
        self.rounds_trained
    }

    /// Validation cross-entropy after 0, 1, 2, … rounds.
    pub fn valid_history(&self) -> &[f64] {
        &self.valid_history
    }

    pub fn train_history(&self) -> &[f64] {
        &self.train_history
    }

    pub fn best_valid_loss(&self) -> f64 {
        self.valid_history[self.best_round]
    }

    /// A model consisting only of the given per-class base scores.
    pub fn from_base_score(base_score: Vec<f64>, n_features: usize) -> Self {
        GbdtModel {
            params: GbdtParams::default(),
            n_classes: base_score.len(),
            n_features,
            base_score,
            rounds: Vec::new(),
            best_round: 0,
            rounds_trained: 0,
            valid_history: vec![f64::NAN],
            train_history: vec![f64::NAN],
        }
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    row.iter_mut().for_each(|v| *v /= sum);
}

fn softmax_rows(scores: &FeatureMatrix) -> FeatureMatrix {
    let mut p = scores.clone();
    let c = p.cols();
    p.as_mut_slice().chunks_mut(c).for_each(softmax_in_place);
    p
}

fn add_tree_outputs(scores: &mut FeatureMatrix, x: &FeatureMatrix, trees: &[Tree]) {
    let c = scores.cols();
    scores
        .as_mut_slice()
        .par_chunks_mut(c)
        .enumerate()
        .for_each(|(i, row)| {
            for (s, t) in row.iter_mut().zip(trees) {
                *s += t.predict_row(x.row(i));
            }
        });
}

fn initial_scores(n: usize, base: &[f64]) -> FeatureMatrix {
    let mut s = FeatureMatrix::zeros(n, base.len());
    s.as_mut_slice()
        .chunks_mut(base.len())
        .for_each(|r| r.copy_from_slice(base));
    s
}

fn check_inputs(x: &FeatureMatrix, y: &[usize], what: &str) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::RowCount {
            what: format!("{what} labels"),
            expected: x.rows(),
            found: y.len(),
        });
    }
    if let Some((row, col)) = x.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    Ok(())
}

pub fn gbdt_train(
    x_train: &FeatureMatrix,
    y_train: &[usize],
    x_valid: &FeatureMatrix,
    y_valid: &[usize],
    params: &GbdtParams,
) -> Result<GbdtModel> {
    params.validate()?;
    check_inputs(x_train, y_train, "train")?;
    check_inputs(x_valid, y_valid, "valid")?;
    if x_valid.cols() != x_train.cols() {
        return Err(Error::DimensionMismatch {
            expected: x_train.cols(),
            found: x_valid.cols(),
        });
    }
    if y_valid.is_empty() {
        return Err(Error::InsufficientData("empty validation split".into()));
    }
    let n = x_train.rows();
    let n_classes = y_train.iter().chain(y_valid).copied().max().unwrap_or(0) + 1;
    if n_classes < 2 {
        return Err(Error::InsufficientData(
            "need at least two classes to train a classifier".into(),
        ));
    }
    let mut counts = vec![0usize; n_classes];
    for &y in y_train {
        counts[y] += 1;
    }
    if let Some(c) = counts.iter().position(|&k| k == 0) {
        return Err(Error::MissingClass(c));
    }
    let base_score: Vec<f64> = counts.iter().map(|&k| (k as f64 / n as f64).ln()).collect();

    let binned = bin_matrix(x_train, params.n_bins);
    let grow = GrowParams {
        max_depth: params.max_depth,
        lambda: params.lambda,
        min_child_hessian: params.min_child_hessian,
        learning_rate: params.learning_rate,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut train_scores = initial_scores(n, &base_score);
    let mut valid_scores = initial_scores(x_valid.rows(), &base_score);
    let mut train_history = vec![cross_entropy(&softmax_rows(&train_scores), y_train)?];
    let mut valid_history = vec![cross_entropy(&softmax_rows(&valid_scores), y_valid)?];
    let mut rounds: Vec<Vec<Tree>> = Vec::new();
    let mut best_round = 0;

    for round in 1..=params.n_rounds {
        let proba = softmax_rows(&train_scores);
        let mut rows: Vec<usize> = if params.subsample < 1.0 {
            (0..n)
                .filter(|_| rng.random::<f64>() < params.subsample)
                .collect()
        } else {
            (0..n).collect()
        };
        if rows.is_empty() {
            rows = (0..n).collect();
        }
        let trees: Vec<Tree> = (0..n_classes)
            .into_par_iter()
            .map(|c| {
                let mut grad = vec![0.0; n];
                let mut hess = vec![0.0; n];
                for i in 0..n {
                    let p = proba.get(i, c);
                    grad[i] = p - if y_train[i] == c { 1.0 } else { 0.0 };
                    hess[i] = (p * (1.0 - p)).max(MIN_HESSIAN);
                }
                grow_tree(&binned, rows.clone(), &grad, &hess, &grow)
            })
            .collect();
        add_tree_outputs(&mut train_scores, x_train, &trees);
        add_tree_outputs(&mut valid_scores, x_valid, &trees);
        rounds.push(trees);
        train_history.push(cross_entropy(&softmax_rows(&train_scores), y_train)?);
        let loss = cross_entropy(&softmax_rows(&valid_scores), y_valid)?;
        valid_history.push(loss);
        if loss < valid_history[best_round] {
            best_round = round;
        } else if round - best_round >= params.patience {
            break;
        }
    }
    let rounds_trained = rounds.len();
    rounds.truncate(best_round);
    Ok(GbdtModel {
        params: params.clone(),
        n_classes,
        n_features: x_train.cols(),
        base_score,
        rounds,
        best_round,
        rounds_trained,
        valid_history,
        train_history,
    })
}

/// Raw boosted scores `base + Σ trees` for every row.
pub fn gbdt_decision_function(m: &GbdtModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.cols() != m.n_features {
        return Err(Error::DimensionMismatch {
            expected: m.n_features,
            found: x.cols(),
        });
    }
    let mut scores = initial_scores(x.rows(), &m.base_score);
    for trees in &m.rounds {
        add_tree_outputs(&mut scores, x, trees);
    }
    Ok(scores)
}

pub fn gbdt_predict_proba(m: &GbdtModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    Ok(softmax_rows(&gbdt_decision_function(m, x)?))
}

/// Argmax class per row; ties go to the lowest class index.
pub fn gbdt_predict(m: &GbdtModel, x: &FeatureMatrix) -> Result<Vec<usize>> {
    let p = gbdt_predict_proba(m, x)?;
    Ok(p.iter_rows().map(argmax).collect())
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}
