use rayon::prelude::*;

use super::binning::BinnedMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf {
        weight: f64,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { weight } => return weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn thresholds(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        })
    }
}

pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub min_child_hessian: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    bin: usize,
}

// parallel histogram scans only pay off on larger nodes
const PARALLEL_WORK: usize = 1 << 15;

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

fn best_for_feature(
    data: &BinnedMatrix,
    feature: usize,
    rows: &[usize],
    grad: &[f64],
    hess: &[f64],
    totals: (f64, f64),
    p: &GrowParams,
) -> Option<Candidate> {
    let nb = data.n_bins(feature);
    if nb < 2 {
        return None;
    }
    let col = data.column(feature);
    let mut hist = vec![(0.0f64, 0.0f64); nb];
    for &r in rows {
        let cell = &mut hist[col[r] as usize];
        cell.0 += grad[r];
        cell.1 += hess[r];
    }
    let (g, h) = totals;
    let parent = score(g, h, p.lambda);
    let (mut gl, mut hl) = (0.0, 0.0);
    let mut best: Option<Candidate> = None;
    for (bin, &(bg, bh)) in hist.iter().enumerate().take(nb - 1) {
        gl += bg;
        hl += bh;
        let (gr, hr) = (g - gl, h - hl);
        if hl < p.min_child_hessian || hr < p.min_child_hessian {
            continue;
        }
        let gain = 0.5 * (score(gl, hl, p.lambda) + score(gr, hr, p.lambda) - parent);
        if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
            best = Some(Candidate { gain, feature, bin });
        }
    }
    best
}

/// Greedy depth-first growth on the given rows.
pub(crate) fn grow_tree(
    data: &BinnedMatrix,
    rows: Vec<usize>,
    grad: &[f64],
    hess: &[f64],
    p: &GrowParams,
) -> Tree {
    let mut tree = Tree { nodes: Vec::new() };
    grow_node(&mut tree, data, rows, grad, hess, p, 0);
    tree
}

fn grow_node(
    tree: &mut Tree,
    data: &BinnedMatrix,
    rows: Vec<usize>,
    grad: &[f64],
    hess: &[f64],
    p: &GrowParams,
    depth: usize,
) -> usize {
    let id = tree.nodes.len();
    let g: f64 = rows.iter().map(|&r| grad[r]).sum();
    let h: f64 = rows.iter().map(|&r| hess[r]).sum();
    tree.nodes.push(Node::Leaf {
        weight: -g / (h + p.lambda) * p.learning_rate,
    });
    if depth >= p.max_depth || rows.len() < 2 {
        return id;
    }

    let n_features = data.edges.len();
    let scan = |f: usize| best_for_feature(data, f, &rows, grad, hess, (g, h), p);
    let per_feature: Vec<Option<Candidate>> = if rows.len() * n_features >= PARALLEL_WORK {
        (0..n_features).into_par_iter().map(scan).collect()
    } else {
        (0..n_features).map(scan).collect()
    };
    // strict improvement keeps the lowest (feature, bin) on ties
    let mut best: Option<Candidate> = None;
    for c in per_feature.into_iter().flatten() {
        if best.is_none_or(|b| c.gain > b.gain) {
            best = Some(c);
        }
    }
    let Some(split) = best else {
        return id;
    };

    let col = data.column(split.feature);
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&r| col[r] as usize <= split.bin);
    let left = grow_node(tree, data, left_rows, grad, hess, p, depth + 1);
    let right = grow_node(tree, data, right_rows, grad, hess, p, depth + 1);
    tree.nodes[id] = Node::Split {
        feature: split.feature,
        threshold: data.edges[split.feature][split.bin],
        left,
        right,
    };
    id
}
