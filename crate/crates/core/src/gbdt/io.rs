//! `PGBM` binary model format and a line-per-node text dump.
//!
//! Layout (little-endian): magic `PGBM`, u32 version, params echo
//! (f64 learning_rate, u32 max_depth, u32 n_rounds, f64 lambda,
//! f64 min_child_hessian, u32 patience, u32 n_bins, f64 subsample, u64 seed),
//! u32 n_classes, u32 n_features, f64 × n_classes base_score,
//! u32 best_round, u32 rounds_trained, u32 history length, f64 × len valid
//! history, f64 × len train history, u32 stored rounds, then per round and
//! class a tree: u32 node count followed by nodes tagged `0` (leaf, f64
//! weight) or `1` (split, u32 feature, f64 threshold, u32 left, u32 right).

use std::fmt::Write as _;

use super::{GbdtModel, GbdtParams, Node, Tree};
use crate::bytes::Reader;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PGBM";
const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("value exceeds u32 in model blob");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

impl GbdtModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(MAGIC.to_vec());
        w.u32(FORMAT_VERSION as usize);
        let p = &self.params;
        w.f64(p.learning_rate);
        w.u32(p.max_depth);
        w.u32(p.n_rounds);
        w.f64(p.lambda);
        w.f64(p.min_child_hessian);
        w.u32(p.patience);
        w.u32(p.n_bins);
        w.f64(p.subsample);
        w.u64(p.seed);
        w.u32(self.n_classes);
        w.u32(self.n_features);
        self.base_score.iter().for_each(|&v| w.f64(v));
        w.u32(self.best_round);
        w.u32(self.rounds_trained);
        w.u32(self.valid_history.len());
        self.valid_history.iter().for_each(|&v| w.f64(v));
        self.train_history.iter().for_each(|&v| w.f64(v));
        w.u32(self.rounds.len());
        for tree in self.rounds.iter().flatten() {
            w.u32(tree.nodes.len());
            for node in &tree.nodes {
                match *node {
                    Node::Leaf { weight } => {
                        w.0.push(0);
                        w.f64(weight);
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        w.0.push(1);
                        w.u32(feature);
                        w.f64(threshold);
                        w.u32(left);
                        w.u32(right);
                    }
                }
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad GBDT model magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported GBDT model version {version}"
            )));
        }
        let params = GbdtParams {
            learning_rate: r.f64()?,
            max_depth: r.u32()? as usize,
            n_rounds: r.u32()? as usize,
            lambda: r.f64()?,
            min_child_hessian: r.f64()?,
            patience: r.u32()? as usize,
            n_bins: r.u32()? as usize,
            subsample: r.f64()?,
            seed: r.u64()?,
        };
        let n_classes = r.u32()? as usize;
        let n_features = r.u32()? as usize;
        let base_score = r.f64_vec(n_classes)?;
        let best_round = r.u32()? as usize;
        let rounds_trained = r.u32()? as usize;
        let hist_len = r.u32()? as usize;
        let valid_history = r.f64_vec(hist_len)?;
        let train_history = r.f64_vec(hist_len)?;
        let n_stored = r.u32()? as usize;
        if best_round >= hist_len || n_stored != best_round {
            return Err(Error::Format("inconsistent round bookkeeping".into()));
        }
        let mut rounds = Vec::with_capacity(n_stored);
        for _ in 0..n_stored {
            let mut group = Vec::with_capacity(n_classes);
            for _ in 0..n_classes {
                group.push(read_tree(&mut r, n_features)?);
            }
            rounds.push(group);
        }
        r.finish()?;
        Ok(GbdtModel {
            params,
            n_classes,
            n_features,
            base_score,
            rounds,
            best_round,
            rounds_trained,
            valid_history,
            train_history,
        })
    }

    /// Human-readable dump, one node per line.
    pub fn text_dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "classes={} features={} best_round={} rounds_trained={}",
            self.n_classes, self.n_features, self.best_round, self.rounds_trained
        );
        let base: Vec<String> = self.base_score.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(s, "base_score=[{}]", base.join(", "));
        for (r, group) in self.rounds.iter().enumerate() {
            for (c, tree) in group.iter().enumerate() {
                let _ = writeln!(s, "round {r} class {c}");
                for (i, node) in tree.nodes.iter().enumerate() {
                    let _ = match *node {
                        Node::Leaf { weight } => writeln!(s, "  {i}: leaf {weight:.6}"),
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => writeln!(s, "  {i}: f{feature} <= {threshold:.6} ? {left} : {right}"),
                    };
                }
            }
        }
        s
    }
}

fn read_tree(r: &mut Reader<'_>, n_features: usize) -> Result<Tree> {
    let n = r.u32()? as usize;
    if n == 0 {
        return Err(Error::Format("empty tree".into()));
    }
    let mut nodes = Vec::with_capacity(n.min(1 << 16));
    for i in 0..n {
        let node = match r.u8()? {
            0 => Node::Leaf { weight: r.f64()? },
            1 => {
                let feature = r.u32()? as usize;
                let threshold = r.f64()?;
                let left = r.u32()? as usize;
                let right = r.u32()? as usize;
                // children always follow their parent in growth order
                if feature >= n_features || left <= i || right <= i || left >= n || right >= n {
                    return Err(Error::Format(format!("invalid split node {i}")));
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                }
            }
            t => return Err(Error::Format(format!("unknown node tag {t}"))),
        };
        nodes.push(node);
    }
    Ok(Tree { nodes })
}
