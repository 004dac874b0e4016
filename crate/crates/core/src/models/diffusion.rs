//! Label diffusion with clamped seeds.
//!
//! `F <- alpha * P F + (1 - alpha) * F0`, then the rows of training nodes are
//! reset to their one-hot seeds. `P` is a row-stochastic propagation operator
//! (rows of zeros stay zero).

use ndarray::{Array2, ArrayView2, Axis, Zip};

use crate::error::Result;
use crate::graph::CsrMatrix;

#[derive(Clone, Debug)]
pub struct DiffusionConfig {
    pub alpha: f64,
    pub max_iter: usize,
    /// Early stop once `max |F_{t+1} - F_t| < tol`. Zero disables early stopping.
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub struct DiffusionOutcome {
    pub scores: Array2<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Row-normalized propagation operator.
pub trait Propagator {
    fn n_nodes(&self) -> usize;
    fn propagate(&self, f: ArrayView2<f64>) -> Result<Array2<f64>>;
}

/// `P = D^-1 A` for a sparse adjacency.
pub struct AdjacencyPropagator {
    normalized: CsrMatrix,
}

impl AdjacencyPropagator {
    pub fn new(adjacency: &CsrMatrix) -> Self {
        Self {
            normalized: adjacency.l1_row_normalized(),
        }
    }
}

impl Propagator for AdjacencyPropagator {
    fn n_nodes(&self) -> usize {
        self.normalized.n_rows()
    }

    fn propagate(&self, f: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.normalized.spmm_dense(f)
    }
}

/// Row-normalized cosine kernel `P = rownorm(Xn Xn^T)` with `Xn` the
/// L2-row-normalized features. Applied as two sparse products per step; the
/// `n x n` kernel is never formed.
pub struct FeatureKernelPropagator {
    xn: CsrMatrix,
    xn_t: CsrMatrix,
    inv_row_sums: Vec<f64>,
}

impl FeatureKernelPropagator {
    pub fn new(features: &CsrMatrix) -> Result<Self> {
        let xn = features.l2_row_normalized();
        let xn_t = xn.transpose();
        let ones = vec![1.0; xn.n_rows()];
        let column_totals = xn_t.spmv(&ones)?;
        let row_sums = xn.spmv(&column_totals)?;
        // Cosine sums can only be non-positive with signed features; such rows
        // are treated like isolated nodes.
        let inv_row_sums = row_sums
            .iter()
            .map(|&s| if s > 0.0 { 1.0 / s } else { 0.0 })
            .collect();
        Ok(Self {
            xn,
            xn_t,
            inv_row_sums,
        })
    }
}

impl Propagator for FeatureKernelPropagator {
    fn n_nodes(&self) -> usize {
        self.xn.n_rows()
    }

    fn propagate(&self, f: ArrayView2<f64>) -> Result<Array2<f64>> {
        let inner = self.xn_t.spmm_dense(f)?;
        let mut out = self.xn.spmm_dense(inner.view())?;
        for (mut row, &inv) in out.axis_iter_mut(Axis(0)).zip(&self.inv_row_sums) {
            row.mapv_inplace(|v| v * inv);
        }
        Ok(out)
    }
}

/// One-hot seed matrix: rows of `train_nodes` carry their label, others are zero.
pub fn seed_matrix(
    n: usize,
    n_classes: usize,
    train_nodes: &[usize],
    labels: &[usize],
) -> Array2<f64> {
    let mut f0 = Array2::zeros((n, n_classes));
    for &u in train_nodes {
        f0[[u, labels[u]]] = 1.0;
    }
    f0
}

pub fn diffuse(
    propagator: &dyn Propagator,
    seeds: &Array2<f64>,
    train_nodes: &[usize],
    cfg: &DiffusionConfig,
) -> Result<DiffusionOutcome> {
    let mut f = seeds.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let mut next = propagator.propagate(f.view())?;
        Zip::from(&mut next)
            .and(seeds)
            .for_each(|v, &s| *v = cfg.alpha * *v + (1.0 - cfg.alpha) * s);
        for &u in train_nodes {
            next.row_mut(u).assign(&seeds.row(u));
        }
        let delta = Zip::from(&next)
            .and(&f)
            .fold(0.0f64, |m, a, b| m.max((a - b).abs()));
        f = next;
        iterations += 1;
        if cfg.tol > 0.0 && delta < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged && cfg.tol > 0.0 {
        log::warn!(
            "diffusion stopped at {} iterations without reaching tolerance {:e}",
            iterations,
            cfg.tol
        );
    }
    Ok(DiffusionOutcome {
        scores: f,
        iterations,
        converged,
    })
}
