//! Limited-memory BFGS with a backtracking Armijo line search.
//!
//! Every accepted step strictly satisfies the sufficient-decrease condition, so
//! the recorded objective trace is non-increasing.

use std::collections::VecDeque;

use crate::error::{GlrError, Result};

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    /// Stop once the gradient's max-abs entry drops below this.
    pub grad_tol: f64,
    /// Number of correction pairs kept.
    pub history: usize,
    /// Armijo constant.
    pub c1: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            grad_tol: 1e-5,
            history: 10,
            c1: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the starting point and after every accepted step.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H g` for the current inverse-Hessian estimate.
fn descent_direction(grad: &[f64], hist: &VecDeque<Correction>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for c in hist.iter().rev() {
        let a = c.rho * dot(&c.s, &q);
        for (qi, yi) in q.iter_mut().zip(&c.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = hist.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for (c, a) in hist.iter().zip(alphas.iter().rev()) {
        let b = c.rho * dot(&c.y, &q);
        for (qi, si) in q.iter_mut().zip(&c.s) {
            *qi += (a - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

/// Minimizes `objective`, which returns the value and gradient at a point.
pub fn minimize<F>(mut objective: F, x0: Vec<f64>, opts: &LbfgsOptions) -> Result<LbfgsOutcome>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut f, mut g) = objective(&x);
    if !f.is_finite() {
        return Err(GlrError::NonFiniteLoss);
    }
    let mut trace = vec![f];
    let mut hist: VecDeque<Correction> = VecDeque::with_capacity(opts.history);
    let mut iterations = 0;
    let mut grad_inf = inf_norm(&g);

    while grad_inf >= opts.grad_tol && iterations < opts.max_iter {
        let mut dir = descent_direction(&g, &hist);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            // Curvature information went bad; fall back to steepest descent.
            hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if hist.is_empty() {
            (1.0 / inf_norm(&dir)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = objective(&trial);
            if ft.is_finite() && ft <= f + opts.c1 * step * slope && ft < f {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // No decrease representable in floating point: we are at the optimum
            // to machine precision.
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if hist.len() == opts.history {
                hist.pop_front();
            }
            hist.push_back(Correction { s, y, rho: 1.0 / sy });
        }

        x = x_new;
        f = f_new;
        g = g_new;
        grad_inf = inf_norm(&g);
        trace.push(f);
        iterations += 1;
    }

    Ok(LbfgsOutcome {
        converged: grad_inf < opts.grad_tol,
        x,
        value: f,
        grad_inf,
        iterations,
        trace,
    })
}
