//! Neighborhood aggregation over a prepared graph.
//!
//! Each output row is reduced in `f64` over its neighbors in a canonical
//! order: neighbors are ranked by their input row (then degree), which does
//! not depend on node labels. Equal keys contribute equal terms, so the sum
//! is bitwise stable under relabeling as well as under any thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::matrix::{cmp_rows, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregator {
    /// `out[v] = mean of H[u] over u ∈ N(v)`.
    Mean,
    /// `out[v] = Σ H[u] / sqrt(deg(u)·deg(v))`, i.e. `D^-1/2 (A+I) D^-1/2 H`.
    SymNorm,
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Mean => "mean",
            Aggregator::SymNorm => "sym_norm",
        })
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregator::Mean),
            "sym_norm" | "symnorm" => Ok(Aggregator::SymNorm),
            other => Err(Error::InvalidParameter(format!(
                "unknown aggregator {other:?}"
            ))),
        }
    }
}

fn canonical_rank(g: &CsrGraph, h: &FeatureMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n_nodes()).collect();
    order.sort_by(|&a, &b| cmp_rows(h.row(a), h.row(b)).then(g.degree(a).cmp(&g.degree(b))));
    let mut rank = vec![0; order.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    rank
}

/// One aggregation step.
pub fn aggregate(g: &CsrGraph, h: &FeatureMatrix, agg: Aggregator) -> Result<FeatureMatrix> {
    if h.rows() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            found: h.rows(),
        });
    }
    let d = h.cols();
    let mut out = FeatureMatrix::zeros(h.rows(), d);
    if d == 0 || h.rows() == 0 {
        return Ok(out);
    }
    let rank = canonical_rank(g, h);
    out.as_mut_slice()
        .par_chunks_mut(d)
        .enumerate()
        .for_each_init(Vec::new, |nbrs: &mut Vec<usize>, (v, dst)| {
            nbrs.clear();
            nbrs.extend_from_slice(g.neighbors(v));
            nbrs.sort_unstable_by_key(|&u| rank[u]);
            let deg_v = g.degree(v);
            match agg {
                Aggregator::Mean => {
                    for &u in nbrs.iter() {
                        for (o, x) in dst.iter_mut().zip(h.row(u)) {
                            *o += x;
                        }
                    }
                    let inv = deg_v as f64;
                    dst.iter_mut().for_each(|o| *o /= inv);
                }
                Aggregator::SymNorm => {
                    for &u in nbrs.iter() {
                        let w = 1.0 / ((g.degree(u) * deg_v) as f64).sqrt();
                        for (o, x) in dst.iter_mut().zip(h.row(u)) {
                            *o += x * w;
                        }
                    }
                }
            }
        });
    Ok(out)
}

/// `k` repeated aggregation steps; plain message passing.
pub fn aggregate_k(
    g: &CsrGraph,
    h: &FeatureMatrix,
    agg: Aggregator,
    k: usize,
) -> Result<FeatureMatrix> {
    if h.rows() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: g.n_nodes(),
            found: h.rows(),
        });
    }
    let mut cur = h.clone();
    for _ in 0..k {
        cur = aggregate(g, &cur, agg)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{prepare, EdgeList};

    fn path3() -> CsrGraph {
        prepare(&EdgeList::new(3, vec![(0, 1), (1, 2)]).unwrap())
    }

    #[test]
    fn mean_of_pair() {
        let g = prepare(&EdgeList::new(2, vec![(0, 1)]).unwrap());
        let h = FeatureMatrix::from_rows(&[[0.0], [2.0]]).unwrap();
        let out = aggregate(&g, &h, Aggregator::Mean).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn mean_fixes_constant_columns() {
        let g = path3();
        let h = FeatureMatrix::from_rows(&[[3.0, -1.5], [3.0, -1.5], [3.0, -1.5]]).unwrap();
        assert_eq!(aggregate(&g, &h, Aggregator::Mean).unwrap(), h);
    }

    #[test]
    fn sym_norm_on_path() {
        let h = FeatureMatrix::from_rows(&[[1.0], [0.0], [0.0]]).unwrap();
        let out = aggregate(&path3(), &h, Aggregator::SymNorm).unwrap();
        assert!((out.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((out.get(1, 0) - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(out.get(2, 0), 0.0);
    }

    #[test]
    fn k_steps() {
        let g = path3();
        let h = FeatureMatrix::from_rows(&[[1.0], [4.0], [-2.0]]).unwrap();
        assert_eq!(aggregate_k(&g, &h, Aggregator::Mean, 0).unwrap(), h);
        let twice = aggregate(
            &g,
            &aggregate(&g, &h, Aggregator::Mean).unwrap(),
            Aggregator::Mean,
        )
        .unwrap();
        assert_eq!(aggregate_k(&g, &h, Aggregator::Mean, 2).unwrap(), twice);
    }

    #[test]
    fn row_mismatch() {
        let h = FeatureMatrix::zeros(2, 1);
        assert!(matches!(
            aggregate(&path3(), &h, Aggregator::Mean),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn aggregator_names() {
        for a in [Aggregator::Mean, Aggregator::SymNorm] {
            assert_eq!(a.to_string().parse::<Aggregator>().unwrap(), a);
        }
        assert!("max".parse::<Aggregator>().is_err());
    }
}
