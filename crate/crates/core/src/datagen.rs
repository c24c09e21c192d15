//! Stochastic-block-model datasets and the on-disk dataset layout.
//!
//! A dataset directory holds `edges.tsv` (tab-separated edge list),
//! `features.csv` (one headerless row of floats per node), `labels.csv`
//! (`node_id,label`) and `splits.csv` (`node_id,split` with split one of
//! `train`, `valid`, `test`).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{load_edge_list, prepare, write_edge_list, CsrGraph, EdgeList};
use crate::io::{matrix_to_csv, open_lines, read_matrix_csv, write_atomic};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: CsrGraph,
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
    pub split: Vec<Split>,
}

impl Dataset {
    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.split.len())
            .filter(|&i| self.split[i] == which)
            .collect()
    }

    pub fn labels_at(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| self.labels[i]).collect()
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let mut edges = Vec::new();
        write_edge_list(&mut edges, &self.graph.undirected_edges())
            .map_err(|e| Error::io(dir, e))?;
        write_atomic(dir.join("edges.tsv"), &edges)?;
        write_atomic(
            dir.join("features.csv"),
            matrix_to_csv(&self.features).as_bytes(),
        )?;
        let labels: String = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{i},{l}\n"))
            .collect();
        write_atomic(dir.join("labels.csv"), labels.as_bytes())?;
        let splits: String = self
            .split
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{i},{s}\n"))
            .collect();
        write_atomic(dir.join("splits.csv"), splits.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    pub n_nodes: usize,
    pub n_classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub n_features: usize,
    /// Pairwise distance between class feature centroids (unit noise).
    pub feature_signal: f64,
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SbmParams {
    fn default() -> Self {
        SbmParams {
            n_nodes: 2000,
            n_classes: 4,
            p_in: 0.05,
            p_out: 0.005,
            n_features: 16,
            feature_signal: 1.0,
            train_frac: 0.5,
            valid_frac: 0.25,
            test_frac: 0.25,
            seed: 7,
        }
    }
}

impl SbmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return bad(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            ));
        }
        let fr = [self.train_frac, self.valid_frac, self.test_frac];
        if fr.iter().any(|&f| f.is_nan() || f <= 0.0) || (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad("split fractions must be positive and sum to 1".into());
        }
        if self.n_classes < 2 {
            return bad("need at least 2 classes".into());
        }
        if self.n_features < self.n_classes {
            return bad(format!(
                "n_features ({}) must be >= n_classes ({}) to place equidistant centroids",
                self.n_features, self.n_classes
            ));
        }
        if !(self.feature_signal >= 0.0 && self.feature_signal.is_finite()) {
            return bad("feature_signal must be finite and >= 0".into());
        }
        Ok(())
    }
}

pub fn generate_sbm(p: &SbmParams) -> Result<Dataset> {
    p.validate()?;
    let n = p.n_nodes;
    let c = p.n_classes;
    let smallest_block = n / c;
    if (smallest_block as f64 * p.train_frac).round() < 1.0 {
        return Err(Error::InsufficientData(format!(
            "{n} nodes over {c} classes leaves no training node in some class"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    // near-equal contiguous blocks, then shuffled across node ids
    let mut labels: Vec<usize> = (0..n).map(|i| i * c / n).collect();
    labels.shuffle(&mut rng);

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let prob = if labels[u] == labels[v] {
                p.p_in
            } else {
                p.p_out
            };
            if rng.random::<f64>() < prob {
                edges.push((u, v));
            }
        }
    }
    let graph = prepare(&EdgeList::new(n, edges)?);

    // scaled basis vectors are pairwise `feature_signal` apart
    let scale = p.feature_signal / std::f64::consts::SQRT_2;
    let mut features = FeatureMatrix::zeros(n, p.n_features);
    for (i, &label) in labels.iter().enumerate() {
        let row = features.row_mut(i);
        for v in row.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        row[label] += scale;
    }

    let mut split = vec![Split::Test; n];
    for class in 0..c {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let m = members.len() as f64;
        let n_train = (m * p.train_frac).round() as usize;
        let n_valid = ((m * p.valid_frac).round() as usize).min(members.len() - n_train);
        for (k, &i) in members.iter().enumerate() {
            split[i] = if k < n_train {
                Split::Train
            } else if k < n_train + n_valid {
                Split::Valid
            } else {
                Split::Test
            };
        }
    }

    Ok(Dataset {
        graph,
        features,
        labels,
        split,
    })
}

struct NodeRow {
    line: usize,
    id: usize,
    value: String,
}

/// Reads `node_id,value` lines; an optional header line is skipped.
fn read_node_rows(path: &Path, header: &str) -> Result<Vec<NodeRow>> {
    let mut out = Vec::new();
    for (lineno, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || (lineno == 1 && line == header) {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let (id, value) = line
            .split_once(',')
            .ok_or_else(|| parse_err(format!("expected {header}, got {line:?}")))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad node id {id:?}")))?;
        out.push(NodeRow {
            line: lineno,
            id,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

/// Orders rows by node id, requiring each of `0..n` exactly once.
fn by_node<T>(
    path: &Path,
    rows: Vec<NodeRow>,
    n: usize,
    mut parse: impl FnMut(&str, usize) -> Result<T>,
) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for row in rows {
        if row.id >= n {
            return Err(Error::NodeOutOfRange {
                id: row.id,
                n_nodes: n,
                line: row.line,
            });
        }
        if out[row.id].is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: row.line,
                message: format!("node {} listed twice", row.id),
            });
        }
        out[row.id] = Some(parse(&row.value, row.line)?);
    }
    Ok(out
        .into_iter()
        .map(|v| v.expect("row count checked"))
        .collect())
}

pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let paths = ["features.csv", "edges.tsv", "labels.csv", "splits.csv"].map(|f| dir.join(f));
    if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
        return Err(Error::MissingFile(missing.clone()));
    }
    let [features_path, edges_path, labels_path, splits_path] = paths;

    let features = read_matrix_csv(&features_path)?;
    let label_rows = read_node_rows(&labels_path, "node_id,label")?;
    let split_rows = read_node_rows(&splits_path, "node_id,split")?;
    let n = label_rows.len();
    if features.rows() != n {
        return Err(Error::RowCount {
            what: "features.csv (one row per labeled node)".into(),
            expected: n,
            found: features.rows(),
        });
    }
    if split_rows.len() != n {
        return Err(Error::RowCount {
            what: "splits.csv (one row per labeled node)".into(),
            expected: n,
            found: split_rows.len(),
        });
    }

    let labels = by_node(&labels_path, label_rows, n, |v, line| {
        v.parse().map_err(|_| Error::Parse {
            path: labels_path.clone(),
            line,
            message: format!("bad label {v:?}"),
        })
    })?;
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_classes];
    labels.iter().for_each(|&l| seen[l] = true);
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::LabelGap { missing, n_classes });
    }

    let split = by_node(&splits_path, split_rows, n, |v, line| {
        v.parse().map_err(|_| Error::UnknownSplit {
            token: v.to_string(),
            line,
        })
    })?;
    let graph = prepare(&load_edge_list(&edges_path, n)?);

    Ok(Dataset {
        graph,
        features,
        labels,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SbmParams {
        SbmParams {
            n_nodes: 60,
            n_classes: 3,
            n_features: 4,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn extreme_probabilities_give_cliques() {
        let ds = generate_sbm(&SbmParams {
            n_nodes: 10,
            n_classes: 2,
            p_in: 1.0,
            p_out: 0.0,
            n_features: 2,
            ..Default::default()
        })
        .unwrap();
        for u in 0..10 {
            for v in 0..10 {
                assert_eq!(ds.graph.has_edge(u, v), ds.labels[u] == ds.labels[v]);
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(
            generate_sbm(&small()).unwrap(),
            generate_sbm(&small()).unwrap()
        );
        let other = SbmParams { seed: 4, ..small() };
        assert_ne!(
            generate_sbm(&small()).unwrap(),
            generate_sbm(&other).unwrap()
        );
    }

    #[test]
    fn stratified_splits() {
        let ds = generate_sbm(&small()).unwrap();
        for c in 0..3 {
            let members: Vec<usize> = (0..60).filter(|&i| ds.labels[i] == c).collect();
            let train = members
                .iter()
                .filter(|&&i| ds.split[i] == Split::Train)
                .count();
            assert!((train as f64 - members.len() as f64 * 0.5).abs() <= 1.0);
        }
    }

    #[test]
    fn tiny_graph_rejected() {
        let p = SbmParams {
            n_nodes: 3,
            n_classes: 4,
            n_features: 4,
            ..Default::default()
        };
        assert!(generate_sbm(&p).is_err());
        let p = SbmParams {
            p_in: 0.1,
            p_out: 0.2,
            ..small()
        };
        assert!(matches!(generate_sbm(&p), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = generate_sbm(&small()).unwrap();
        ds.save(dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back.graph, ds.graph);
        assert_eq!(back.labels, ds.labels);
        assert_eq!(back.split, ds.split);
        for (a, b) in ds.features.as_slice().iter().zip(back.features.as_slice()) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn load_errors_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let ds = generate_sbm(&small()).unwrap();
        ds.save(dir.path()).unwrap();
        let p = dir.path();

        let features = std::fs::read_to_string(p.join("features.csv")).unwrap();
        let short: Vec<&str> = features.lines().take(59).collect();
        std::fs::write(p.join("features.csv"), short.join("\n")).unwrap();
        assert!(matches!(load_dataset(p), Err(Error::RowCount { .. })));
        std::fs::write(p.join("features.csv"), &features).unwrap();

        let splits = std::fs::read_to_string(p.join("splits.csv")).unwrap();
        std::fs::write(
            p.join("splits.csv"),
            splits.replacen(",train", ",holdout", 1),
        )
        .unwrap();
        assert!(matches!(load_dataset(p), Err(Error::UnknownSplit { .. })));
        std::fs::write(p.join("splits.csv"), &splits).unwrap();

        let labels: String = (0..60)
            .map(|i| format!("{i},{}\n", if i == 0 { 2 } else { 0 }))
            .collect();
        std::fs::write(p.join("labels.csv"), labels).unwrap();
        assert!(matches!(
            load_dataset(p),
            Err(Error::LabelGap { missing: 1, .. })
        ));

        std::fs::remove_file(p.join("edges.tsv")).unwrap();
        assert!(matches!(load_dataset(p), Err(Error::MissingFile(_))));
    }
}
