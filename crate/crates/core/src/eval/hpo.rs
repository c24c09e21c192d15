//! Random search jointly over embedding and classifier hyperparameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::pearson_correlation;
use super::{fit_classifier, SplitMetrics};
use crate::aggregate::Aggregator;
use crate::datagen::Dataset;
use crate::embed::{embed, EmbedConfig, Method};
use crate::error::{Error, Result};
use crate::gbdt::GbdtParams;

/// Inclusive sampling ranges. Real ranges marked log are sampled
/// log-uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub method: Method,
    pub hops: (usize, usize),
    pub dim: (usize, usize),
    pub aggregators: Vec<Aggregator>,
    /// log
    pub learning_rate: (f64, f64),
    pub max_depth: (usize, usize),
    /// log
    pub lambda: (f64, f64),
    pub min_child_hessian: (f64, f64),
    pub subsample: (f64, f64),
    /// Fixed settings shared by every run (rounds, patience, bins).
    pub base: GbdtParams,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            method: Method::PcaPass,
            hops: (1, 16),
            dim: (4, 32),
            aggregators: vec![Aggregator::Mean, Aggregator::SymNorm],
            learning_rate: (0.03, 0.3),
            max_depth: (2, 8),
            lambda: (0.1, 10.0),
            min_child_hessian: (0.1, 5.0),
            subsample: (0.5, 1.0),
            base: GbdtParams::default(),
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        let ordered_u = |(a, b): (usize, usize)| a <= b;
        let ordered_f = |(a, b): (f64, f64)| a <= b && a.is_finite() && b.is_finite();
        let ok = ordered_u(self.hops)
            && ordered_u(self.dim)
            && self.dim.0 >= 1
            && ordered_u(self.max_depth)
            && self.max_depth.0 >= 1
            && ordered_f(self.learning_rate)
            && self.learning_rate.0 > 0.0
            && ordered_f(self.lambda)
            && self.lambda.0 > 0.0
            && ordered_f(self.min_child_hessian)
            && ordered_f(self.subsample)
            && !self.aggregators.is_empty();
        if !ok {
            return Err(Error::InvalidParameter("malformed search space".into()));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng, seed: u64) -> (EmbedConfig, GbdtParams) {
        let log_uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
            (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
        };
        let uniform =
            |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| lo + rng.random::<f64>() * (hi - lo);
        let embed = EmbedConfig {
            hops: rng.random_range(self.hops.0..=self.hops.1),
            dim: rng.random_range(self.dim.0..=self.dim.1),
            aggregator: self.aggregators[rng.random_range(0..self.aggregators.len())],
            method: self.method,
        };
        let gbdt = GbdtParams {
            learning_rate: log_uniform(rng, self.learning_rate),
            max_depth: rng.random_range(self.max_depth.0..=self.max_depth.1),
            lambda: log_uniform(rng, self.lambda),
            min_child_hessian: uniform(rng, self.min_child_hessian),
            subsample: uniform(rng, self.subsample).clamp(f64::MIN_POSITIVE, 1.0),
            seed,
            ..self.base.clone()
        };
        (embed, gbdt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpoRecord {
    pub run: usize,
    pub embed: EmbedConfig,
    pub gbdt: GbdtParams,
    /// Infinite when the run failed.
    pub valid_loss: f64,
    pub valid_accuracy: f64,
    pub test_accuracy: f64,
    pub best_round: usize,
    pub error: Option<String>,
}

fn run_one(ds: &Dataset, space: &SearchSpace, seed: u64, run: usize) -> HpoRecord {
    let run_seed = seed ^ run as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let (ecfg, gbdt) = space.sample(&mut rng, run_seed);
    let outcome: Result<SplitMetrics> = embed(&ds.graph, &ds.features, &ecfg)
        .and_then(|e| fit_classifier(ds, &e.embeddings, &gbdt).map(|(_, m)| m));
    match outcome {
        Ok(m) => HpoRecord {
            run,
            embed: ecfg,
            gbdt,
            valid_loss: m.valid_cross_entropy,
            valid_accuracy: m.valid_accuracy,
            test_accuracy: m.test_accuracy,
            best_round: m.best_round,
            error: None,
        },
        Err(e) => HpoRecord {
            run,
            embed: ecfg,
            gbdt,
            valid_loss: f64::INFINITY,
            valid_accuracy: 0.0,
            test_accuracy: 0.0,
            best_round: 0,
            error: Some(e.to_string()),
        },
    }
}

/// `n_runs` independent samples; run `i` draws from `seed ^ i`.
pub fn random_search(
    space: &SearchSpace,
    n_runs: usize,
    seed: u64,
    ds: &Dataset,
) -> Result<Vec<HpoRecord>> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be >= 1".into()));
    }
    space.validate()?;
    Ok((0..n_runs)
        .into_par_iter()
        .map(|run| run_one(ds, space, seed, run))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpoSummary {
    pub n_runs: usize,
    pub n_failed: usize,
    pub best_run: Option<usize>,
    pub best_valid_loss: f64,
    pub best_test_accuracy: f64,
    pub max_test_accuracy: f64,
    /// Pearson r between validation loss and test accuracy over
    /// successful runs; `None` when undefined.
    pub pearson_r: Option<f64>,
}

impl HpoSummary {
    pub fn from_records(records: &[HpoRecord]) -> Self {
        let ok: Vec<&HpoRecord> = records
            .iter()
            .filter(|r| r.valid_loss.is_finite())
            .collect();
        let best = ok.iter().copied().min_by(|a, b| {
            a.valid_loss
                .total_cmp(&b.valid_loss)
                .then(a.run.cmp(&b.run))
        });
        let losses: Vec<f64> = ok.iter().map(|r| r.valid_loss).collect();
        let accs: Vec<f64> = ok.iter().map(|r| r.test_accuracy).collect();
        HpoSummary {
            n_runs: records.len(),
            n_failed: records.len() - ok.len(),
            best_run: best.map(|r| r.run),
            best_valid_loss: best.map_or(f64::INFINITY, |r| r.valid_loss),
            best_test_accuracy: best.map_or(0.0, |r| r.test_accuracy),
            max_test_accuracy: accs.iter().copied().fold(0.0, f64::max),
            pearson_r: pearson_correlation(&losses, &accs).ok(),
        }
    }
}
