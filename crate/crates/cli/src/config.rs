//! Flat `key = value` run configuration.
//!
//! Values are layered: built-in defaults, then the config file, then
//! command-line overrides. Unknown keys are rejected at every layer.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pcapass::eval::{SearchSpace, SweepConfig};
use pcapass::{Aggregator, EmbedConfig, GbdtParams, Method, SbmParams};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// `(key, default, description)` for every recognized key.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "seed",
        "0",
        "global seed: SBM generation, GBDT row sampling, k-means, random search",
    ),
    (
        "threads",
        "0",
        "worker threads for parallel sections (0 = all cores)",
    ),
    ("out", ".", "output directory"),
    (
        "dataset",
        "",
        "dataset directory (empty = the output directory)",
    ),
    (
        "embeddings",
        "",
        "embedding CSV for train/eval (empty = <out>/embeddings.csv)",
    ),
    (
        "model",
        "",
        "model file for eval (empty = <out>/model.pgbm)",
    ),
    (
        "features",
        "embeddings",
        "classifier inputs for train/eval: embeddings | raw",
    ),
    ("n_nodes", "2000", "gen: number of nodes"),
    ("n_classes", "4", "gen: number of blocks / classes"),
    ("p_in", "0.05", "gen: within-block edge probability"),
    ("p_out", "0.005", "gen: cross-block edge probability"),
    ("n_features", "16", "gen: feature dimension (>= n_classes)"),
    (
        "feature_signal",
        "1.0",
        "gen: distance between class feature centroids",
    ),
    ("train_frac", "0.5", "gen: train fraction per class"),
    ("valid_frac", "0.25", "gen: validation fraction per class"),
    ("test_frac", "0.25", "gen: test fraction per class"),
    (
        "method",
        "pcapass",
        "embed: pcapass | message_passing | skip",
    ),
    ("hops", "8", "embed: aggregation steps"),
    ("dim", "16", "embed: PCAPass embedding width"),
    ("aggregator", "mean", "embed/sweep: mean | sym_norm"),
    ("learning_rate", "0.1", "train: shrinkage per tree"),
    ("max_depth", "6", "train: maximum tree depth"),
    ("n_rounds", "500", "train/hpo: maximum boosting rounds"),
    ("lambda", "1.0", "train: L2 leaf regularization"),
    (
        "min_child_hessian",
        "1.0",
        "train: minimum hessian sum per child",
    ),
    (
        "patience",
        "10",
        "train/hpo: early-stopping patience in rounds",
    ),
    (
        "n_bins",
        "256",
        "train/hpo: histogram bins per feature (2..=256)",
    ),
    ("subsample", "1.0", "train: row fraction sampled per round"),
    (
        "sweep_methods",
        "pcapass,message_passing,skip",
        "sweep: comma-separated methods",
    ),
    ("sweep_hops", "30", "sweep: largest hop count"),
    (
        "k_clusters",
        "0",
        "sweep: k-means clusters (0 = number of labels)",
    ),
    (
        "kmeans_restarts",
        "1",
        "sweep: k-means seeding restarts per cell",
    ),
    ("hpo_runs", "50", "hpo: number of random-search runs"),
    ("hpo_method", "pcapass", "hpo: embedding method"),
    ("hpo_hops", "1:16", "hpo: hop range, inclusive"),
    ("hpo_dim", "4:32", "hpo: embedding width range, inclusive"),
    (
        "hpo_aggregators",
        "mean,sym_norm",
        "hpo: aggregators to sample from",
    ),
    (
        "hpo_learning_rate",
        "0.03:0.3",
        "hpo: learning-rate range (log-uniform)",
    ),
    ("hpo_max_depth", "2:8", "hpo: depth range, inclusive"),
    ("hpo_lambda", "0.1:10", "hpo: lambda range (log-uniform)"),
    (
        "hpo_min_child_hessian",
        "0.1:5",
        "hpo: min child hessian range",
    ),
    ("hpo_subsample", "0.5:1", "hpo: subsample range"),
];

pub fn keys_help() -> String {
    let width = KEYS.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
    let mut s =
        String::from("Config keys (`key = value` in --config files, or --set key=value):\n");
    for (key, default, desc) in KEYS {
        let shown = if default.is_empty() { "\"\"" } else { default };
        s.push_str(&format!("  {key:<width$}  [default: {shown}]  {desc}\n"));
    }
    s
}

/// Parses the flat config text format. `#` starts a comment line.
pub fn parse_config_text(text: &str, origin: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!(
                "{}:{}: expected `key = value`, got {line:?}",
                origin.display(),
                i + 1
            ))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RawConfig(BTreeMap<String, String>);

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig(
            KEYS.iter()
                .map(|(k, d, _)| (k.to_string(), d.to_string()))
                .collect(),
        )
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match self.0.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(ConfigError(format!("unknown config key {key:?}"))),
        }
    }

    fn get(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).expect("known key")
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.get(key);
        v.parse()
            .map_err(|_| ConfigError(format!("invalid value {v:?} for {key}")))
    }

    fn range<T: FromStr + PartialOrd + Copy>(&self, key: &str) -> Result<(T, T), ConfigError> {
        let v = self.get(key);
        let bad = || ConfigError(format!("invalid range {v:?} for {key} (expected lo:hi)"));
        let (lo, hi) = v.split_once(':').ok_or_else(bad)?;
        let lo: T = lo.trim().parse().map_err(|_| bad())?;
        let hi: T = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok((lo, hi))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        let v = self.get(key);
        let items: Vec<T> = v
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| ConfigError(format!("invalid entry {s:?} in {key}")))
            })
            .collect::<Result<_, _>>()?;
        if items.is_empty() {
            return Err(ConfigError(format!("{key} must not be empty")));
        }
        Ok(items)
    }

    fn path_or(&self, key: &str, fallback: PathBuf) -> PathBuf {
        match self.get(key) {
            "" => fallback,
            p => PathBuf::from(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSource {
    Embeddings,
    Raw,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
    pub dataset: PathBuf,
    pub embeddings: PathBuf,
    pub model: PathBuf,
    pub features: FeatureSource,
    pub sbm: SbmParams,
    pub embed: EmbedConfig,
    pub gbdt: GbdtParams,
    pub sweep: SweepConfig,
    pub hpo_runs: usize,
    pub hpo: SearchSpace,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let seed: u64 = raw.parse("seed")?;
        let out = PathBuf::from(raw.get("out"));
        let features = match raw.get("features") {
            "embeddings" => FeatureSource::Embeddings,
            "raw" => FeatureSource::Raw,
            other => {
                return Err(ConfigError(format!(
                    "invalid value {other:?} for features (embeddings | raw)"
                )))
            }
        };
        let sbm = SbmParams {
            n_nodes: raw.parse("n_nodes")?,
            n_classes: raw.parse("n_classes")?,
            p_in: raw.parse("p_in")?,
            p_out: raw.parse("p_out")?,
            n_features: raw.parse("n_features")?,
            feature_signal: raw.parse("feature_signal")?,
            train_frac: raw.parse("train_frac")?,
            valid_frac: raw.parse("valid_frac")?,
            test_frac: raw.parse("test_frac")?,
            seed,
        };
        let embed = EmbedConfig {
            hops: raw.parse("hops")?,
            dim: raw.parse("dim")?,
            aggregator: raw.parse("aggregator")?,
            method: raw.parse("method")?,
        };
        let gbdt = GbdtParams {
            learning_rate: raw.parse("learning_rate")?,
            max_depth: raw.parse("max_depth")?,
            n_rounds: raw.parse("n_rounds")?,
            lambda: raw.parse("lambda")?,
            min_child_hessian: raw.parse("min_child_hessian")?,
            patience: raw.parse("patience")?,
            n_bins: raw.parse("n_bins")?,
            subsample: raw.parse("subsample")?,
            seed,
        };
        let k_clusters: usize = raw.parse("k_clusters")?;
        let sweep = SweepConfig {
            methods: raw.list("sweep_methods")?,
            max_hops: raw.parse("sweep_hops")?,
            k_clusters: (k_clusters > 0).then_some(k_clusters),
            restarts: raw.parse("kmeans_restarts")?,
            aggregator: raw.parse::<Aggregator>("aggregator")?,
            seed,
        };
        let hpo = SearchSpace {
            method: raw.parse::<Method>("hpo_method")?,
            hops: raw.range("hpo_hops")?,
            dim: raw.range("hpo_dim")?,
            aggregators: raw.list("hpo_aggregators")?,
            learning_rate: raw.range("hpo_learning_rate")?,
            max_depth: raw.range("hpo_max_depth")?,
            lambda: raw.range("hpo_lambda")?,
            min_child_hessian: raw.range("hpo_min_child_hessian")?,
            subsample: raw.range("hpo_subsample")?,
            base: gbdt.clone(),
        };
        gbdt.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(RunConfig {
            seed,
            threads: raw.parse("threads")?,
            dataset: raw.path_or("dataset", out.clone()),
            embeddings: raw.path_or("embeddings", out.join("embeddings.csv")),
            model: raw.path_or("model", out.join("model.pgbm")),
            out,
            features,
            sbm,
            embed,
            gbdt,
            sweep,
            hpo_runs: raw.parse("hpo_runs")?,
            hpo,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let cfg = RunConfig::from_raw(&RawConfig::default()).unwrap();
        assert_eq!(cfg.embed, EmbedConfig::default());
        assert_eq!(cfg.gbdt, GbdtParams::default());
        assert_eq!(cfg.sweep.methods.len(), 3);
        assert_eq!(cfg.hpo.hops, (1, 16));
        assert_eq!(cfg.embeddings, PathBuf::from("./embeddings.csv"));
    }

    #[test]
    fn layering_and_unknown_keys() {
        let mut raw = RawConfig::default();
        let pairs =
            parse_config_text("# c\nhops = 3\n\naggregator=sym_norm\n", Path::new("x")).unwrap();
        for (k, v) in pairs {
            raw.set(&k, &v).unwrap();
        }
        raw.set("hops", "5").unwrap();
        let cfg = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.embed.hops, 5);
        assert_eq!(cfg.embed.aggregator, Aggregator::SymNorm);
        assert!(raw.set("nope", "1").is_err());
        assert!(parse_config_text("hops 3", Path::new("x")).is_err());
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut raw = RawConfig::default();
        raw.set("hpo_hops", "9:2").unwrap();
        assert!(RunConfig::from_raw(&raw).is_err());
        let mut raw = RawConfig::default();
        raw.set("method", "gat").unwrap();
        assert!(RunConfig::from_raw(&raw).is_err());
        let mut raw = RawConfig::default();
        raw.set("n_bins", "1000").unwrap();
        assert!(RunConfig::from_raw(&raw).is_err());
    }

    #[test]
    fn every_key_in_help() {
        let help = keys_help();
        for (k, _, _) in KEYS {
            assert!(help.contains(k));
        }
    }
}
