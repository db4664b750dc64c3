//! Limited-memory BFGS with a backtracking (Armijo) line search.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbfgsOptions {
    /// Number of stored correction pairs.
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once the Euclidean gradient norm drops to this value.
    pub grad_tol: f64,
    /// Stop once an accepted step improves the loss by less than this
    /// fraction of its magnitude.
    pub rel_loss_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            max_iter: 500,
            grad_tol: 1e-6,
            rel_loss_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    LossStagnation,
    MaxIterations,
    /// No step along the steepest-descent direction decreased the loss.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub x: Vec<f64>,
    pub loss: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    /// Loss at the start point followed by the loss of every accepted iterate.
    pub loss_trace: Vec<f64>,
    pub stop: StopReason,
}

impl OptimizeOutcome {
    pub fn gradient_norm(&self) -> f64 {
        norm(&self.gradient)
    }
}

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn evaluate<F>(f: &mut F, x: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (v, g) = f(x);
    if !v.is_finite() {
        return Err(Error::NonFinite {
            what: "loss",
            point: x.to_vec(),
        });
    }
    if g.len() != x.len() {
        return Err(Error::InvalidParameter(format!(
            "gradient has {} components for {} variables",
            g.len(),
            x.len()
        )));
    }
    if g.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite {
            what: "gradient",
            point: x.to_vec(),
        });
    }
    Ok((v, g))
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H g`.
fn direction(g: &[f64], memory: &VecDeque<Correction>) -> Vec<f64> {
    let mut q = g.to_vec();
    let Some(last) = memory.back() else {
        let n = norm(g);
        return g.iter().map(|v| -v / n).collect();
    };
    let mut alphas = Vec::with_capacity(memory.len());
    for c in memory.iter().rev() {
        let a = c.rho * dot(&c.s, &q);
        q.iter_mut().zip(&c.y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
    q.iter_mut().for_each(|v| *v *= gamma);
    for (c, a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = c.rho * dot(&c.y, &q);
        q.iter_mut().zip(&c.s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Minimizes `f`, which returns the loss and its gradient at a point.
///
/// Every accepted step satisfies the sufficient-decrease condition, so the
/// returned point is the best one seen and `loss_trace` is nonincreasing.
pub fn optimize_lbfgs<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (mut loss, mut grad) = evaluate(&mut f, x0)?;
    let mut x = x0.to_vec();
    let mut trace = vec![loss];
    let mut memory: VecDeque<Correction> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;

    while iterations < opts.max_iter {
        if norm(&grad) <= opts.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        let mut d = direction(&grad, &memory);
        let mut slope = dot(&grad, &d);
        if slope >= 0.0 || slope.is_nan() {
            memory.clear();
            d = direction(&grad, &memory);
            slope = dot(&grad, &d);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (v, g) = evaluate(&mut f, &trial)?;
            if v <= loss + ARMIJO_C1 * step * slope {
                accepted = Some((trial, v, g));
                break;
            }
            step *= BACKTRACK;
        }
        let Some((x_new, loss_new, grad_new)) = accepted else {
            if memory.is_empty() {
                stop = StopReason::LineSearchFailed;
                break;
            }
            memory.clear();
            continue;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back(Correction { s, y, rho: 1.0 / sy });
        }

        let improvement = loss - loss_new;
        x = x_new;
        grad = grad_new;
        iterations += 1;
        let previous = loss;
        loss = loss_new;
        trace.push(loss);
        if improvement <= opts.rel_loss_tol * previous.abs() {
            stop = StopReason::LossStagnation;
            break;
        }
    }

    Ok(OptimizeOutcome {
        x,
        loss,
        gradient: grad,
        iterations,
        loss_trace: trace,
        stop,
    })
}
