//! Multinomial logistic regression on sparse design matrices.
//!
//! The objective is the mean cross-entropy over training rows plus an L2 term
//! on the weights (bias unpenalized):
//!
//! ```text
//! f(W, b) = 1/N * sum_i CE(softmax(W x_i + b), y_i) + l2_penalty / (2N) * ||W||^2
//! ```
//!
//! Scaling the penalty by `1/N` makes `l2_penalty` the inverse of the usual
//! `C` regularization constant, so the default of 1.0 corresponds to `C = 1`.

pub mod lbfgs;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{GlrError, Result};
use crate::graph::CsrMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub l2_penalty: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            l2_penalty: 1.0,
            max_iter: 1000,
            grad_tol: 1e-5,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_penalty >= 0.0) || !self.l2_penalty.is_finite() {
            return Err(GlrError::InvalidArgument(format!(
                "l2_penalty must be a non-negative number, got {}",
                self.l2_penalty
            )));
        }
        if self.max_iter == 0 {
            return Err(GlrError::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(GlrError::InvalidArgument(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

/// Fitted softmax parameters: `weights` is `C x D`, `bias` has length `C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxParams {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl SoftmaxParams {
    pub fn zeros(n_classes: usize, n_features: usize) -> Self {
        Self {
            weights: Array2::zeros((n_classes, n_features)),
            bias: Array1::zeros(n_classes),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }
}

/// Diagnostics from one call to [`fit_softmax`].
#[derive(Clone, Debug)]
pub struct FitReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_loss: f64,
    pub grad_inf: f64,
    /// Objective at every accepted iterate, starting from the zero initialization.
    pub loss_trace: Vec<f64>,
    /// Set when the training targets contain a single class.
    pub degenerate: bool,
}

/// Loss and gradient of the regularized softmax cross-entropy.
///
/// Parameters are packed into one flat vector: the weights in feature-major
/// order (`theta[j * C + c]` is the weight of feature `j` for class `c`),
/// followed by the `C` biases.
pub struct SoftmaxObjective<'a> {
    design: &'a CsrMatrix,
    targets: &'a [usize],
    n_classes: usize,
    l2_penalty: f64,
}

impl<'a> SoftmaxObjective<'a> {
    pub fn new(
        design: &'a CsrMatrix,
        targets: &'a [usize],
        n_classes: usize,
        l2_penalty: f64,
    ) -> Result<Self> {
        if targets.len() != design.n_rows() {
            return Err(GlrError::DimensionMismatch(format!(
                "{} targets for {} design rows",
                targets.len(),
                design.n_rows()
            )));
        }
        if design.n_rows() == 0 {
            return Err(GlrError::InvalidArgument("empty training set".into()));
        }
        if let Some(&bad) = targets.iter().find(|&&y| y >= n_classes) {
            return Err(GlrError::IndexOutOfRange {
                what: "class",
                index: bad,
                bound: n_classes,
            });
        }
        Ok(Self {
            design,
            targets,
            n_classes,
            l2_penalty,
        })
    }

    pub fn n_params(&self) -> usize {
        (self.design.n_cols() + 1) * self.n_classes
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta, false).0
    }

    pub fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let (f, g) = self.evaluate(theta, true);
        (f, g.expect("gradient requested"))
    }

    fn evaluate(&self, theta: &[f64], with_grad: bool) -> (f64, Option<Vec<f64>>) {
        let c_count = self.n_classes;
        let d = self.design.n_cols();
        let n = self.design.n_rows() as f64;
        let (w, b) = theta.split_at(d * c_count);
        let mut grad = with_grad.then(|| vec![0.0; theta.len()]);
        let mut z = vec![0.0; c_count];
        let mut loss = 0.0;

        for (i, &y) in self.targets.iter().enumerate() {
            let (cols, vals) = self.design.row(i);
            z.copy_from_slice(b);
            for (&j, &x) in cols.iter().zip(vals) {
                let wj = &w[j * c_count..(j + 1) * c_count];
                for (zc, wc) in z.iter_mut().zip(wj) {
                    *zc += x * wc;
                }
            }
            let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = z.iter().map(|v| (v - zmax).exp()).sum();
            let lse = zmax + sum_exp.ln();
            loss += lse - z[y];

            if let Some(g) = grad.as_mut() {
                // residual = softmax(z) - onehot(y), scaled by 1/N
                for (c, zc) in z.iter_mut().enumerate() {
                    let p = (*zc - lse).exp();
                    *zc = (p - if c == y { 1.0 } else { 0.0 }) / n;
                }
                let (gw, gb) = g.split_at_mut(d * c_count);
                for (&j, &x) in cols.iter().zip(vals) {
                    let gj = &mut gw[j * c_count..(j + 1) * c_count];
                    for (gc, rc) in gj.iter_mut().zip(&z) {
                        *gc += x * rc;
                    }
                }
                for (gc, rc) in gb.iter_mut().zip(&z) {
                    *gc += rc;
                }
            }
        }

        let reg = self.l2_penalty / n;
        let sq: f64 = w.iter().map(|v| v * v).sum();
        let value = loss / n + 0.5 * reg * sq;
        if let Some(g) = grad.as_mut() {
            for (gi, wi) in g.iter_mut().zip(w) {
                *gi += reg * wi;
            }
        }
        (value, grad)
    }

    fn unpack(&self, theta: &[f64]) -> SoftmaxParams {
        let d = self.design.n_cols();
        let c_count = self.n_classes;
        let weights = Array2::from_shape_fn((c_count, d), |(c, j)| theta[j * c_count + c]);
        let bias = Array1::from_iter(theta[d * c_count..].iter().copied());
        SoftmaxParams { weights, bias }
    }
}

/// Fits softmax regression from an all-zero start with L-BFGS.
///
/// `n_classes` is the number of classes in the whole problem; classes absent
/// from `targets` simply get driven to low probability.
pub fn fit_softmax(
    design: &CsrMatrix,
    targets: &[usize],
    n_classes: usize,
    cfg: &FitConfig,
) -> Result<(SoftmaxParams, FitReport)> {
    cfg.validate()?;
    let objective = SoftmaxObjective::new(design, targets, n_classes, cfg.l2_penalty)?;

    let first = targets[0];
    if targets.iter().all(|&y| y == first) {
        log::warn!("single-class training set; fitting a constant predictor");
        let mut params = SoftmaxParams::zeros(n_classes, design.n_cols());
        params.bias.fill(CONSTANT_PREDICTOR_LOGIT);
        params.bias[first] = 0.0;
        let mut theta = vec![0.0; objective.n_params()];
        theta[design.n_cols() * n_classes..].copy_from_slice(params.bias.as_slice().unwrap());
        let loss = objective.value(&theta);
        return Ok((
            params,
            FitReport {
                iterations: 0,
                converged: true,
                final_loss: loss,
                grad_inf: 0.0,
                loss_trace: vec![loss],
                degenerate: true,
            },
        ));
    }

    let opts = lbfgs::LbfgsOptions {
        max_iter: cfg.max_iter,
        grad_tol: cfg.grad_tol,
        ..Default::default()
    };
    let outcome = lbfgs::minimize(
        |theta| objective.value_and_gradient(theta),
        vec![0.0; objective.n_params()],
        &opts,
    )?;
    if !outcome.value.is_finite() || outcome.x.iter().any(|v| !v.is_finite()) {
        return Err(GlrError::NonFiniteLoss);
    }
    if !outcome.converged {
        log::debug!(
            "softmax fit stopped after {} iterations with |grad|_inf = {:.3e}",
            outcome.iterations,
            outcome.grad_inf
        );
    }
    Ok((
        objective.unpack(&outcome.x),
        FitReport {
            iterations: outcome.iterations,
            converged: outcome.converged,
            final_loss: outcome.value,
            grad_inf: outcome.grad_inf,
            loss_trace: outcome.trace,
            degenerate: false,
        },
    ))
}

/// Logit given to absent classes by the single-class constant predictor.
const CONSTANT_PREDICTOR_LOGIT: f64 = -1e3;

/// Class probabilities and argmax predictions (ties go to the smallest class id).
pub fn predict_softmax(
    params: &SoftmaxParams,
    design: &CsrMatrix,
) -> Result<(Vec<usize>, Array2<f64>)> {
    if design.n_cols() != params.n_features() {
        return Err(GlrError::DimensionMismatch(format!(
            "model expects {} features, design has {}",
            params.n_features(),
            design.n_cols()
        )));
    }
    let c_count = params.n_classes();
    let mut probs = Array2::zeros((design.n_rows(), c_count));
    let mut classes = Vec::with_capacity(design.n_rows());
    for i in 0..design.n_rows() {
        let (cols, vals) = design.row(i);
        let mut z = params.bias.to_vec();
        for (&j, &x) in cols.iter().zip(vals) {
            for (c, zc) in z.iter_mut().enumerate() {
                *zc += x * params.weights[[c, j]];
            }
        }
        classes.push(argmax_first(&z));
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
        let total: f64 = exps.iter().sum();
        for (c, e) in exps.iter().enumerate() {
            probs[[i, c]] = e / total;
        }
    }
    Ok((classes, probs))
}

/// Index of the maximum, first occurrence on ties.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
