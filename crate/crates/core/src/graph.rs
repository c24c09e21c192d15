//! Edge-list loading and the prepared CSR adjacency.
//!
//! Every graph that reaches aggregation goes through [`prepare`], which makes
//! the adjacency symmetric, adds a self-loop on every node and collapses
//! duplicate edges. Downstream operators rely on `degree[v] >= 1`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Raw directed edges over dense node ids `0..n_nodes`.
///
/// Duplicates and self-loops are kept as read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl EdgeList {
    pub fn new(n_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (i, &(u, v)) in edges.iter().enumerate() {
            let bad = u.max(v);
            if bad >= n_nodes {
                return Err(Error::NodeOutOfRange {
                    id: bad,
                    n_nodes,
                    line: i + 1,
                });
            }
        }
        Ok(EdgeList { n_nodes, edges })
    }
}

/// Compressed sparse row adjacency. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    n_nodes: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    degree: Vec<usize>,
}

impl CsrGraph {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_entries(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Sorted neighbors of `v`, including `v` itself on prepared graphs.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn degree_slice(&self) -> &[usize] {
        &self.degree
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected non-loop edge once, as `(u, v)` with `u < v`.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n_nodes {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Relabels nodes: old node `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> CsrGraph {
        assert_eq!(perm.len(), self.n_nodes);
        let mut edges = Vec::with_capacity(self.col_idx.len());
        for u in 0..self.n_nodes {
            for &v in self.neighbors(u) {
                edges.push((perm[u], perm[v]));
            }
        }
        build_csr(self.n_nodes, edges)
    }

    /// Symmetric, reflexive and free of duplicates.
    pub fn is_prepared(&self) -> bool {
        (0..self.n_nodes).all(|u| {
            let row = self.neighbors(u);
            row.windows(2).all(|w| w[0] < w[1])
                && row.binary_search(&u).is_ok()
                && row.iter().all(|&v| self.has_edge(v, u))
        })
    }
}

fn build_csr(n_nodes: usize, mut edges: Vec<(usize, usize)>) -> CsrGraph {
    edges.sort_unstable();
    edges.dedup();
    let mut row_ptr = vec![0usize; n_nodes + 1];
    for &(u, _) in &edges {
        row_ptr[u + 1] += 1;
    }
    for i in 0..n_nodes {
        row_ptr[i + 1] += row_ptr[i];
    }
    let col_idx: Vec<usize> = edges.into_iter().map(|(_, v)| v).collect();
    let degree = row_ptr.windows(2).map(|w| w[1] - w[0]).collect();
    CsrGraph {
        n_nodes,
        row_ptr,
        col_idx,
        degree,
    }
}

/// Symmetrizes, adds self-loops and deduplicates.
pub fn prepare(edges: &EdgeList) -> CsrGraph {
    let mut all = Vec::with_capacity(2 * edges.edges.len() + edges.n_nodes);
    for &(u, v) in &edges.edges {
        all.push((u, v));
        all.push((v, u));
    }
    all.extend((0..edges.n_nodes).map(|v| (v, v)));
    build_csr(edges.n_nodes, all)
}

/// `degree[v] = row_ptr[v+1] - row_ptr[v]`.
pub fn degrees(g: &CsrGraph) -> Vec<usize> {
    g.degree.clone()
}

/// Parses `src<TAB>dst` lines; `#` lines and blank lines are skipped.
pub fn parse_edge_list<R: BufRead>(reader: R, n_nodes: usize, origin: &Path) -> Result<EdgeList> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            message,
        };
        let mut fields = line.split('\t');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected src<TAB>dst, got {line:?}")));
        };
        let u: usize = a
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad node id {a:?}")))?;
        let v: usize = b
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad node id {b:?}")))?;
        let bad = u.max(v);
        if bad >= n_nodes {
            return Err(Error::NodeOutOfRange {
                id: bad,
                n_nodes,
                line: lineno,
            });
        }
        edges.push((u, v));
    }
    Ok(EdgeList { n_nodes, edges })
}

pub fn load_edge_list(path: impl AsRef<Path>, n_nodes: usize) -> Result<EdgeList> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), n_nodes, path)
}

pub fn write_edge_list<W: Write>(mut w: W, edges: &[(usize, usize)]) -> std::io::Result<()> {
    for &(u, v) in edges {
        writeln!(w, "{u}\t{v}")?;
    }
    Ok(())
}
