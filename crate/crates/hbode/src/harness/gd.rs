//! Plain gradient-descent reference baseline (context curve only).

use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::Problem;

#[derive(Debug, Clone)]
pub struct GdRecord {
    pub step: usize,
    pub iterate: Vec<f64>,
    pub grad_norm: f64,
}

/// x_{k+1} = x_k - step_size * grad f(x_k), from the problem's start point.
/// The history includes the start (step 0) and every iterate after it.
pub fn run_gd_baseline(problem: &Problem, steps: usize, step_size: f64) -> Result<Vec<GdRecord>> {
    if step_size <= 0.0 {
        return Err(Error::NonPositiveInput {
            name: "step_size",
            value: step_size,
        });
    }
    let mut x = problem.x0().to_vec();
    let mut history = Vec::with_capacity(steps + 1);
    let mut grad = problem.eval_grad(&x)?;
    history.push(GdRecord {
        step: 0,
        iterate: x.clone(),
        grad_norm: linalg::norm(&grad),
    });
    for step in 1..=steps {
        linalg::axpy(&mut x, -step_size, &grad);
        if !x.iter().all(|a| a.is_finite()) {
            return Err(Error::Divergence { step });
        }
        grad = problem.eval_grad(&x)?;
        history.push(GdRecord {
            step,
            iterate: x.clone(),
            grad_norm: linalg::norm(&grad),
        });
    }
    Ok(history)
}
