//! Random instances and brute-force dense oracles shared by the integration
//! tests. Nothing here calls into the sparse kernels under test.
#![allow(dead_code)]

use glr::graph::{build_graph, SparseGraph};
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct GraphParams {
    pub n: usize,
    pub edge_prob: f64,
    pub n_features: usize,
    pub feature_density: f64,
    pub n_classes: usize,
    /// Allow negative feature values.
    pub signed: bool,
}

/// Erdos-Renyi style graph with random labels (every class present when
/// `n >= n_classes`) and random sparse features.
pub fn random_graph(r: &mut ChaCha8Rng, p: &GraphParams) -> SparseGraph {
    let mut edges = Vec::new();
    for u in 0..p.n {
        for v in (u + 1)..p.n {
            if r.gen_bool(p.edge_prob) {
                edges.push((u, v));
            }
        }
    }
    let mut feats = Vec::new();
    for u in 0..p.n {
        for j in 0..p.n_features {
            if r.gen_bool(p.feature_density) {
                let v: f64 = if p.signed {
                    r.gen_range(-2.0..2.0)
                } else {
                    r.gen_range(0.1..2.0)
                };
                feats.push((u, j, v));
            }
        }
    }
    let mut labels: Vec<i64> = (0..p.n).map(|i| (i % p.n_classes) as i64).collect();
    labels.shuffle(r);
    build_graph("random", &edges, &feats, &labels, p.n, p.n_features).unwrap()
}

/// Graph whose edges and features both carry class signal.
pub fn planted_graph(r: &mut ChaCha8Rng, n: usize, n_classes: usize, n_features: usize, avg_degree: f64) -> SparseGraph {
    let labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    let p_in = avg_degree * 0.8 / (n as f64 / n_classes as f64);
    let p_out = avg_degree * 0.2 / n as f64;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if r.gen_bool(p.min(1.0)) {
                edges.push((u, v));
            }
        }
    }
    let block = n_features / n_classes;
    let mut feats = Vec::new();
    for u in 0..n {
        for j in 0..n_features {
            let own = j / block.max(1) == labels[u];
            let p = if own { 0.15 } else { 0.03 };
            if r.gen_bool(p) {
                feats.push((u, j, 1.0));
            }
        }
    }
    let labels: Vec<i64> = labels.iter().map(|&c| c as i64).collect();
    build_graph("planted", &edges, &feats, &labels, n, n_features).unwrap()
}

/// Label homophily by scanning every ordered pair of the dense adjacency.
pub fn oracle_label_homophily(adj: ArrayView2<f64>, labels: &[usize]) -> Vec<Option<f64>> {
    let n = adj.nrows();
    (0..n)
        .map(|u| {
            let mut deg = 0usize;
            let mut same = 0usize;
            for v in 0..n {
                if adj[[u, v]] != 0.0 {
                    deg += 1;
                    if labels[u] == labels[v] {
                        same += 1;
                    }
                }
            }
            (deg > 0).then(|| same as f64 / deg as f64)
        })
        .collect()
}

pub fn oracle_cosine(x: ArrayView2<f64>, u: usize, v: usize) -> f64 {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for j in 0..x.ncols() {
        dot += x[[u, j]] * x[[v, j]];
        nu += x[[u, j]] * x[[u, j]];
        nv += x[[v, j]] * x[[v, j]];
    }
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu.sqrt() * nv.sqrt())
    }
}

pub fn oracle_feature_homophily(adj: ArrayView2<f64>, x: ArrayView2<f64>) -> Vec<Option<f64>> {
    let n = adj.nrows();
    (0..n)
        .map(|u| {
            let nbrs: Vec<usize> = (0..n).filter(|&v| adj[[u, v]] != 0.0).collect();
            if nbrs.is_empty() {
                return None;
            }
            let s: f64 = nbrs.iter().map(|&v| oracle_cosine(x, u, v)).sum();
            Some(s / nbrs.len() as f64)
        })
        .collect()
}

/// Dense row-normalization; rows summing to zero stay zero.
pub fn dense_row_normalize(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for mut row in out.rows_mut() {
        let s: f64 = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|v| v / s);
        } else {
            row.fill(0.0);
        }
    }
    out
}

pub fn dense_cosine_kernel(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows();
    Array2::from_shape_fn((n, n), |(u, v)| oracle_cosine(x, u, v))
}

/// `F <- alpha P F + (1 - alpha) F0`, training rows reset to their seeds.
pub fn oracle_diffusion(p: &Array2<f64>, seeds: &Array2<f64>, train: &[usize], alpha: f64, iters: usize) -> Array2<f64> {
    let mut f = seeds.clone();
    for _ in 0..iters {
        let mut next = p.dot(&f) * alpha + seeds * (1.0 - alpha);
        for &u in train {
            next.row_mut(u).assign(&seeds.row(u));
        }
        f = next;
    }
    f
}

/// Central finite-difference gradient.
pub fn finite_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + h;
            let up = f(&xp);
            xp[i] = orig - h;
            let down = f(&xp);
            xp[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error used for gradient checks: `|a - b| / max(1, |a|, |b|)`.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / 1f64.max(x.abs()).max(y.abs()))
        .fold(0.0, f64::max)
}

/// Random orthogonal matrix from the QR factor of a Gaussian-like matrix.
pub fn random_rotation(r: &mut ChaCha8Rng, d: usize) -> Array2<f64> {
    let m = nalgebra::DMatrix::from_fn(d, d, |_, _| r.gen_range(-1.0..1.0));
    let q = m.qr().q();
    Array2::from_shape_fn((d, d), |(i, j)| q[(i, j)])
}

/// Returns a copy of `g` with the labels of `nodes` replaced by other classes.
pub fn scramble_labels(g: &SparseGraph, nodes: &[usize], r: &mut ChaCha8Rng) -> SparseGraph {
    let mut labels = g.labels().to_vec();
    let c = g.class_count();
    for &u in nodes {
        labels[u] = (labels[u] + r.gen_range(1..c.max(2))) % c;
    }
    g.with_labels(labels).unwrap()
}
