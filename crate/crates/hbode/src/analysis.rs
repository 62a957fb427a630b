//! Bound evaluation and numerical verification of the identities behind the
//! averaged-trajectory convergence guarantee.
//!
//! Everything here is a pure function over immutable trajectories. All
//! quadratures are composite trapezoid on the checkpoint grid; the averaging
//! -error kernel additionally has a closed form for exponential weights.

use crate::error::{Error, Result};
use crate::linalg;
use crate::ode::{weight_at, Trajectory};
use crate::problems::Problem;
use crate::quad;
use crate::tolerances;

/// Horizon-level bound summary for one run.
///
/// `leading_bound` is the pure power law (7/6) (3 L2)^(1/7) (delta_f / T)^(4/7);
/// `finite_t_bound` is the exact pre-asymptotic form
/// (T - 3/(2 alpha))^-1 (sqrt(alpha T delta_f) + L2 delta_f / (2 alpha^3)).
/// For L2 = 0 the leading bound is undefined and stored as NaN; the finite-T
/// form remains valid for any explicit alpha.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub t_final: f64,
    pub alpha: f64,
    pub min_grad_norm_xbar: f64,
    pub t_star: f64,
    pub leading_bound: f64,
    pub finite_t_bound: f64,
    pub satisfied: bool,
}

/// Ordinary least squares in log-log space.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// The fitted (ln T, ln value) pairs.
    pub points: Vec<(f64, f64)>,
}

/// Leading bound (7/6) (3 L2)^(1/7) (delta_f / T)^(4/7).
pub fn leading_bound(l2: f64, delta_f: f64, t_final: f64) -> Result<f64> {
    for (name, value) in [("L2", l2), ("delta_f", delta_f), ("T", t_final)] {
        if value <= 0.0 {
            return Err(Error::NonPositiveInput { name, value });
        }
    }
    Ok(7.0 / 6.0 * (3.0 * l2).powf(1.0 / 7.0) * (delta_f / t_final).powf(4.0 / 7.0))
}

/// Exact finite-horizon bound; requires T > 3/(2 alpha), otherwise the
/// prefactor is nonpositive and the bound is vacuous.
pub fn finite_t_bound(l2: f64, delta_f: f64, t_final: f64, alpha: f64) -> Result<f64> {
    for (name, value) in [("delta_f", delta_f), ("T", t_final), ("alpha", alpha)] {
        if value <= 0.0 {
            return Err(Error::NonPositiveInput { name, value });
        }
    }
    if l2 < 0.0 {
        return Err(Error::NonPositiveInput {
            name: "L2",
            value: l2,
        });
    }
    let threshold = 3.0 / (2.0 * alpha);
    if t_final <= threshold {
        return Err(Error::HorizonTooShort { t_final, threshold });
    }
    let numerator = (alpha * t_final * delta_f).sqrt() + l2 * delta_f / (2.0 * alpha.powi(3));
    Ok(numerator / (t_final - threshold))
}

/// Minimum gradient norm at the averaged point over the checkpoint grid,
/// with its argmin time. Ties break toward the earliest time.
pub fn min_grad_norm(traj: &Trajectory) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for c in &traj.checkpoints {
        match best {
            Some((_, v)) if c.grad_norm_xbar >= v => {}
            _ => best = Some((c.t, c.grad_norm_xbar)),
        }
    }
    best.ok_or(Error::InsufficientCheckpoints {
        found: 0,
        needed: 1,
    })
}

/// Assemble the bound report for a finished run.
pub fn bound_report(problem: &Problem, traj: &Trajectory) -> Result<BoundReport> {
    let t_final = traj.t_final();
    let (t_star, min_grad) = min_grad_norm(traj)?;
    let leading = if problem.l2() > 0.0 {
        leading_bound(problem.l2(), traj.delta_f, t_final)?
    } else {
        f64::NAN
    };
    let finite = finite_t_bound(problem.l2(), traj.delta_f, t_final, traj.alpha)?;
    Ok(BoundReport {
        t_final,
        alpha: traj.alpha,
        min_grad_norm_xbar: min_grad,
        t_star,
        leading_bound: leading,
        finite_t_bound: finite,
        satisfied: min_grad <= finite,
    })
}

/// Residual of the averaged-gradient identity at checkpoint `idx`:
///
/// ```text
///   || quadrature of w_t(s) grad f(x(s)) over [0, t]  +  alpha/(1 - e^(-alpha t)) v(t) ||
/// ```
///
/// The quadrature side integrates the weighted gradients over the checkpoint
/// grid; the closed side is the boundary term the weight was designed to
/// produce. `alpha` is taken explicitly so a deliberately wrong value can be
/// used as a negative control.
pub fn grad_average_identity_residual(
    problem: &Problem,
    traj: &Trajectory,
    alpha: f64,
    idx: usize,
) -> Result<f64> {
    if idx + 1 < 3 || idx >= traj.checkpoints.len() {
        return Err(Error::InsufficientCheckpoints {
            found: idx + 1,
            needed: 3,
        });
    }
    let t = traj.checkpoints[idx].t;
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    let ts: Vec<f64> = traj.checkpoints[..=idx].iter().map(|c| c.t).collect();
    let tw = quad::trapezoid_weights(&ts);
    let dim = traj.dim;
    let mut quadrature = vec![0.0; dim];
    for (i, c) in traj.checkpoints[..=idx].iter().enumerate() {
        let w = weight_at(c.t, t, alpha)?;
        let grad = problem.eval_grad(&c.x)?;
        linalg::axpy(&mut quadrature, tw[i] * w, &grad);
    }
    let boundary_coeff = -alpha / -(-alpha * t).exp_m1();
    let v_t = &traj.checkpoints[idx].v;
    let closed: Vec<f64> = v_t.iter().map(|vi| boundary_coeff * vi).collect();
    Ok(linalg::norm(&linalg::sub(&quadrature, &closed)))
}

/// Largest violation of alpha * e_diss(t) <= delta_f over the checkpoints
/// (negative when the bound holds with margin).
pub fn dissipation_margin(traj: &Trajectory, delta_f: f64) -> f64 {
    traj.checkpoints
        .iter()
        .map(|c| traj.alpha * c.e_diss - delta_f)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Dissipation bound: alpha * integral of ||v||^2 stays below the initial
/// optimality gap (plus slack) at every checkpoint.
pub fn dissipation_check(traj: &Trajectory, delta_f: f64, slack: f64) -> bool {
    dissipation_margin(traj, delta_f) <= slack
}

/// Per-time bound on the gradient at the averaged point, evaluated at
/// checkpoint `idx`. Returns (lhs, rhs):
///
/// ```text
///   lhs = || grad f(x_bar(t)) ||
///   rhs = alpha/(1 - e^(-alpha t)) ||v(t)||
///         + (L2/2) (1 - e^(-alpha t))^-2 * quadrature of ||v(s)||^2 e^(-alpha (t-s)) (t-s)
/// ```
pub fn avg_grad_bound_at(problem: &Problem, traj: &Trajectory, idx: usize) -> Result<(f64, f64)> {
    if idx + 1 < 3 || idx >= traj.checkpoints.len() {
        return Err(Error::InsufficientCheckpoints {
            found: idx + 1,
            needed: 3,
        });
    }
    let alpha = traj.alpha;
    let t = traj.checkpoints[idx].t;
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    let denom = -(-alpha * t).exp_m1();
    let ts: Vec<f64> = traj.checkpoints[..=idx].iter().map(|c| c.t).collect();
    let integrand: Vec<f64> = traj.checkpoints[..=idx]
        .iter()
        .map(|c| linalg::norm_sq(&c.v) * (-alpha * (t - c.t)).exp() * (t - c.t))
        .collect();
    let tail = quad::trapezoid(&ts, &integrand);
    let lhs = traj.checkpoints[idx].grad_norm_xbar;
    let rhs = alpha / denom * linalg::norm(&traj.checkpoints[idx].v)
        + 0.5 * problem.l2() / (denom * denom) * tail;
    Ok((lhs, rhs))
}

/// Double time integral of ||v(s)||^2 e^(-alpha (t-s)) (t-s) over
/// 0 <= s <= t <= T on the checkpoint grid. The dissipation bound implies
/// this stays below delta_f / alpha^3.
pub fn dissipation_double_integral(traj: &Trajectory) -> f64 {
    let alpha = traj.alpha;
    let ts: Vec<f64> = traj.checkpoints.iter().map(|c| c.t).collect();
    let vsq: Vec<f64> = traj
        .checkpoints
        .iter()
        .map(|c| linalg::norm_sq(&c.v))
        .collect();
    let outer: Vec<f64> = (0..ts.len())
        .map(|j| {
            let t = ts[j];
            let inner: Vec<f64> = (0..=j)
                .map(|i| vsq[i] * (-alpha * (t - ts[i])).exp() * (t - ts[i]))
                .collect();
            quad::trapezoid(&ts[..=j], &inner)
        })
        .collect();
    quad::trapezoid(&ts, &outer)
}

/// A smooth path z(s) sampled on a grid together with its derivative.
#[derive(Debug, Clone)]
pub struct SampledPath {
    pub ts: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub dz: Vec<Vec<f64>>,
}

impl SampledPath {
    /// Sample a closure pair (z, dz) uniformly on [0, t].
    pub fn from_fn<F, G>(t: f64, nodes: usize, z: F, dz: G) -> Self
    where
        F: Fn(f64) -> Vec<f64>,
        G: Fn(f64) -> Vec<f64>,
    {
        assert!(nodes >= 2);
        // pin the endpoint: t * (n-1)/(n-1) can land one ulp past t
        let ts: Vec<f64> = (0..nodes)
            .map(|i| {
                if i == nodes - 1 {
                    t
                } else {
                    t * i as f64 / (nodes - 1) as f64
                }
            })
            .collect();
        let zs = ts.iter().map(|&s| z(s)).collect();
        let dzs = ts.iter().map(|&s| dz(s)).collect();
        SampledPath { ts, z: zs, dz: dzs }
    }
}

/// How to evaluate the averaging-error kernel
/// K(s) = int_0^s dsigma int_s^t dtau w(sigma) w(tau) (tau - sigma).
#[derive(Debug, Clone, Copy)]
pub enum KernelRule {
    /// Nested trapezoid quadrature of the weight samples, reorganized with
    /// prefix sums: K(s) = A(s) D(s) - B(s) C(s) where A, B are the running
    /// integrals of w and s*w and C, D the matching tail integrals.
    Quadrature,
    /// Closed form for the exponential weight with the given alpha.
    ExponentialClosedForm { alpha: f64 },
}

/// Kernel profile K(s_i) for every grid point, by the prefix-sum route.
pub fn averaging_kernel_profile(ts: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(ts.len(), w.len());
    let sw: Vec<f64> = ts.iter().zip(w).map(|(s, wi)| s * wi).collect();
    let a = quad::cumulative_trapezoid(ts, w);
    let b = quad::cumulative_trapezoid(ts, &sw);
    let total_w = *a.last().unwrap_or(&0.0);
    let total_sw = *b.last().unwrap_or(&0.0);
    (0..ts.len())
        .map(|i| a[i] * (total_sw - b[i]) - b[i] * (total_w - a[i]))
        .collect()
}

/// Closed-form kernel for the exponential weight, in overflow-safe form:
/// K(s) = [ e^(-a(t-s)) (t-s) - t e^(-a t) + s e^(-a (2t-s)) ] / (1 - e^(-a t))^2.
pub fn averaging_kernel_exponential(s: f64, t: f64, alpha: f64) -> f64 {
    let denom = -(-alpha * t).exp_m1();
    ((-alpha * (t - s)).exp() * (t - s) - t * (-alpha * t).exp()
        + s * (-alpha * (2.0 * t - s)).exp())
        / (denom * denom)
}

/// Averaging-error bound on a sampled path. Returns (lhs, rhs):
///
/// ```text
///   lhs = || grad f(z_bar) - quadrature of w(s) grad f(z(s)) ||
///   rhs = (L2/2) * quadrature of ||dz(s)||^2 K(s)
/// ```
///
/// Weight samples must be nonnegative and integrate to one on the grid.
pub fn averaging_error_bound(
    problem: &Problem,
    path: &SampledPath,
    weights: &[f64],
    kernel: KernelRule,
) -> Result<(f64, f64)> {
    let n = path.ts.len();
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::WeightNotNormalized { integral: f64::NAN });
    }
    let mass = quad::trapezoid(&path.ts, weights);
    if (mass - 1.0).abs() > tolerances::WEIGHT_INPUT_NORM {
        return Err(Error::WeightNotNormalized { integral: mass });
    }

    let tw = quad::trapezoid_weights(&path.ts);
    let dim = path.z[0].len();
    let mut z_bar = vec![0.0; dim];
    for i in 0..n {
        linalg::axpy(&mut z_bar, tw[i] * weights[i], &path.z[i]);
    }
    let mut grad_avg = vec![0.0; dim];
    for i in 0..n {
        let g = problem.eval_grad(&path.z[i])?;
        linalg::axpy(&mut grad_avg, tw[i] * weights[i], &g);
    }
    let lhs = linalg::norm(&linalg::sub(&problem.eval_grad(&z_bar)?, &grad_avg));

    let kernel_profile: Vec<f64> = match kernel {
        KernelRule::Quadrature => averaging_kernel_profile(&path.ts, weights),
        KernelRule::ExponentialClosedForm { alpha } => {
            let t = *path.ts.last().unwrap();
            path.ts
                .iter()
                .map(|&s| averaging_kernel_exponential(s, t, alpha))
                .collect()
        }
    };
    let integrand: Vec<f64> = (0..n)
        .map(|i| linalg::norm_sq(&path.dz[i]) * kernel_profile[i])
        .collect();
    let rhs = 0.5 * problem.l2() * quad::trapezoid(&path.ts, &integrand);
    Ok((lhs, rhs))
}

/// Least-squares power-law fit: regress ln(value) on ln(T).
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            found: points.len(),
            needed: 3,
        });
    }
    for &(t, v) in points {
        if t <= 0.0 {
            return Err(Error::NonPositiveInput {
                name: "T",
                value: t,
            });
        }
        if v <= 0.0 {
            return Err(Error::NonPositiveInput {
                name: "value",
                value: v,
            });
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("all T values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: logs,
    })
}
