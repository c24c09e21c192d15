//! Dense, deliberately naive reference implementations.
//!
//! Nothing here shares code with `pcapass`: matrices are `Vec<Vec<f64>>`,
//! graphs are edge lists, and the eigensolver is cyclic Jacobi. Tests compare
//! the optimized library against these.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, f: usize) -> Dense {
    (0..n)
        .map(|_| (0..f).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// Directed edge list with independent inclusion probability `p` per
/// ordered pair, self-pairs included.
pub fn random_edges(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn transpose(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn hconcat(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().chain(y).copied().collect())
        .collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    assert_eq!(a.len(), b.len(), "row count");
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len(), "column count");
            x.iter().zip(y).map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max)
}

/// 0/1 adjacency of the undirected graph with a self-loop on every node.
pub fn prepared_adjacency(n: usize, edges: &[(usize, usize)]) -> Dense {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agg {
    Mean,
    SymNorm,
}

/// `D⁻¹A` or `D^-1/2 A D^-1/2` for a prepared adjacency.
pub fn propagation_matrix(a: &Dense, agg: Agg) -> Dense {
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &w)| match agg {
                    Agg::Mean => w / deg[i],
                    Agg::SymNorm => w / (deg[i] * deg[j]).sqrt(),
                })
                .collect()
        })
        .collect()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and matching unit eigenvectors
/// as rows, each signed so its largest-magnitude entry (first on ties) is
/// positive.
pub fn jacobi_eigen(sym: &Dense) -> (Vec<f64>, Dense) {
    let n = sym.len();
    let mut a = sym.clone();
    let mut v: Dense = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let akp = row[p];
                    let akq = row[q];
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (head, tail) = a.split_at_mut(q);
                for (apk, aqk) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (x, y) = (*apk, *aqk);
                    *apk = c * x - s * y;
                    *aqk = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = v.iter().map(|r| r[i]).collect();
            let mut best = 0;
            for (k, x) in col.iter().enumerate() {
                if x.abs() > col[best].abs() {
                    best = k;
                }
            }
            if col[best] < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    (values, vectors)
}

pub fn column_means(x: &Dense) -> Vec<f64> {
    let n = x.len() as f64;
    transpose(x)
        .iter()
        .map(|c| c.iter().sum::<f64>() / n)
        .collect()
}

/// Sample covariance with the `n - 1` denominator.
pub fn covariance(x: &Dense) -> Dense {
    let mu = column_means(x);
    let centered: Dense = x
        .iter()
        .map(|r| r.iter().zip(&mu).map(|(a, m)| a - m).collect())
        .collect();
    let ct = transpose(&centered);
    let denom = (x.len() - 1) as f64;
    matmul(&ct, &centered)
        .into_iter()
        .map(|r| r.into_iter().map(|v| v / denom).collect())
        .collect()
}

pub struct DensePca {
    pub mean: Vec<f64>,
    /// `d × f`, rows are components.
    pub components: Dense,
    pub eigenvalues: Vec<f64>,
}

pub fn pca_fit(x: &Dense, d: usize) -> DensePca {
    let f = x[0].len();
    let keep = d.min(f).min(x.len());
    let (values, vectors) = jacobi_eigen(&covariance(x));
    DensePca {
        mean: column_means(x),
        components: vectors.into_iter().take(keep).collect(),
        eigenvalues: values.into_iter().take(keep).collect(),
    }
}

pub fn pca_transform(m: &DensePca, x: &Dense) -> Dense {
    let centered: Dense = x
        .iter()
        .map(|r| r.iter().zip(&m.mean).map(|(a, b)| a - b).collect())
        .collect();
    matmul(&centered, &transpose(&m.components))
}

/// Per-hop outputs of the aggregate, concatenate, compress recurrence.
pub fn pcapass_hops(
    n: usize,
    edges: &[(usize, usize)],
    x: &Dense,
    hops: usize,
    d: usize,
    agg: Agg,
) -> Vec<Dense> {
    let p = propagation_matrix(&prepared_adjacency(n, edges), agg);
    let mut h = x.clone();
    let mut out = Vec::with_capacity(hops);
    for _ in 0..hops {
        let c = hconcat(&matmul(&p, &h), &h);
        let m = pca_fit(&c, d);
        h = pca_transform(&m, &c);
        out.push(h.clone());
    }
    out
}

/// `H ← P H` repeated `hops` times.
pub fn message_passing(
    n: usize,
    edges: &[(usize, usize)],
    x: &Dense,
    hops: usize,
    agg: Agg,
) -> Dense {
    let p = propagation_matrix(&prepared_adjacency(n, edges), agg);
    (0..hops).fold(x.clone(), |h, _| matmul(&p, &h))
}

fn entropy(counts: impl Iterator<Item = f64>, total: f64) -> f64 {
    counts
        .filter(|&c| c > 0.0)
        .map(|c| -(c / total) * (c / total).ln())
        .sum()
}

/// V-measure from the contingency table, computed with dense counts.
pub fn v_measure(labels: &[usize], clusters: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let nl = labels.iter().max().map_or(0, |m| m + 1);
    let nc = clusters.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0.0; nc]; nl];
    for (&l, &c) in labels.iter().zip(clusters) {
        table[l][c] += 1.0;
    }
    let row: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..nc).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let h_l = entropy(row.iter().copied(), n);
    let h_c = entropy(col.iter().copied(), n);
    let mut h_l_given_c = 0.0;
    let mut h_c_given_l = 0.0;
    for l in 0..nl {
        for c in 0..nc {
            let v = table[l][c];
            if v > 0.0 {
                h_l_given_c -= v / n * (v / col[c]).ln();
                h_c_given_l -= v / n * (v / row[l]).ln();
            }
        }
    }
    let hom = if h_l == 0.0 {
        1.0
    } else {
        1.0 - h_l_given_c / h_l
    };
    let com = if h_c == 0.0 {
        1.0
    } else {
        1.0 - h_c_given_l / h_c
    };
    if hom + com == 0.0 {
        0.0
    } else {
        2.0 * hom * com / (hom + com)
    }
}
