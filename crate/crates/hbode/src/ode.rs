//! Fixed-step integration of the damped second-order flow
//!
//! ```text
//!   x'' = -alpha x' - grad f(x),   x(0) = x0,   x'(0) = 0,
//! ```
//!
//! as the augmented first-order system (x, v, m, e) with
//!
//! * `m' = x - alpha m` — rescaled averaging state. The exponentially
//!   weighted average point is `alpha m(t) / (1 - exp(-alpha t))`; storing m
//!   instead of the raw integral of `exp(alpha s) x(s)` avoids `exp(alpha T)`
//!   overflow on long horizons while remaining exact.
//! * `e' = ||v||^2` — dissipation accumulator, kept as ODE state so the
//!   energy identity can be checked at integrator accuracy instead of
//!   post-hoc quadrature accuracy.
//!
//! Checkpoints are emitted on a fixed stride plus the endpoints; state
//! updates use compensated (Kahan) accumulation so that order-of-accuracy
//! measurements stay truncation-dominated down to very small step sizes.

use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    SemiImplicitEuler,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "semi-implicit-euler" | "sie" => Ok(Method::SemiImplicitEuler),
            other => Err(Error::Config(format!("unknown integrator `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::SemiImplicitEuler => "semi-implicit-euler",
        }
    }
}

/// Friction schedule for a fixed horizon: alpha = (3 L2)^(2/7) (delta_f / T)^(1/7).
///
/// Refuses L2 = 0 or delta_f = 0: the schedule would return alpha = 0 (no
/// friction, nothing dissipates) and the caller must pick alpha explicitly.
pub fn alpha_for_horizon(l2: f64, delta_f: f64, t_final: f64) -> Result<f64> {
    if t_final <= 0.0 {
        return Err(Error::NonPositiveInput {
            name: "T",
            value: t_final,
        });
    }
    if l2 <= 0.0 || delta_f <= 0.0 {
        return Err(Error::DegenerateSchedule { l2, delta_f });
    }
    Ok((3.0 * l2).powf(2.0 / 7.0) * (delta_f / t_final).powf(1.0 / 7.0))
}

/// Normalized exponential weight w_t(s) = alpha e^(alpha s) / (e^(alpha t) - 1),
/// evaluated in the overflow-safe form alpha e^(-alpha (t-s)) / (1 - e^(-alpha t)).
pub fn weight_at(s: f64, t: f64, alpha: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    if !(0.0..=t).contains(&s) {
        return Err(Error::WeightOutOfRange { s, t });
    }
    Ok(alpha * (-alpha * (t - s)).exp() / -(-alpha * t).exp_m1())
}

/// Total mass of the weight on [0, t] by the closed form: the antiderivative
/// telescopes to (1 - e^(-alpha t)) / (1 - e^(-alpha t)), i.e. exactly one.
/// The quotient is kept so degenerate inputs (alpha = 0) surface as NaN.
pub fn weight_total_mass(t: f64, alpha: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    let denom = -(-alpha * t).exp_m1();
    #[allow(clippy::eq_op)]
    Ok(denom / denom)
}

/// Augmented state at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct HbState {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// m(t) = integral of e^(-alpha (t-s)) x(s) ds over [0, t]
    pub m: Vec<f64>,
    /// e(t) = integral of ||v(s)||^2 ds over [0, t]
    pub e_diss: f64,
}

impl HbState {
    pub fn initial(x0: &[f64]) -> Self {
        HbState {
            t: 0.0,
            x: x0.to_vec(),
            v: vec![0.0; x0.len()],
            m: vec![0.0; x0.len()],
            e_diss: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.e_diss.is_finite()
            && self.x.iter().all(|a| a.is_finite())
            && self.v.iter().all(|a| a.is_finite())
            && self.m.iter().all(|a| a.is_finite())
    }
}

/// Time derivative of the augmented state.
#[derive(Debug, Clone)]
pub struct StateDeriv {
    pub dx: Vec<f64>,
    pub dv: Vec<f64>,
    pub dm: Vec<f64>,
    pub de: f64,
}

impl StateDeriv {
    fn zeros(dim: usize) -> Self {
        StateDeriv {
            dx: vec![0.0; dim],
            dv: vec![0.0; dim],
            dm: vec![0.0; dim],
            de: 0.0,
        }
    }
}

/// Right-hand side: (dx, dv, dm, de) = (v, -alpha v - grad f(x), x - alpha m, ||v||^2).
pub fn rhs(problem: &Problem, alpha: f64, state: &HbState) -> Result<StateDeriv> {
    let mut out = StateDeriv::zeros(state.x.len());
    let mut grad = vec![0.0; state.x.len()];
    rhs_into(problem, alpha, state, &mut out, &mut grad)?;
    Ok(out)
}

fn rhs_into(
    problem: &Problem,
    alpha: f64,
    state: &HbState,
    out: &mut StateDeriv,
    grad: &mut [f64],
) -> Result<()> {
    problem.eval_grad_into(&state.x, grad)?;
    for (i, g) in grad.iter().enumerate() {
        out.dx[i] = state.v[i];
        out.dv[i] = -alpha * state.v[i] - g;
        out.dm[i] = state.x[i] - alpha * state.m[i];
    }
    out.de = linalg::norm_sq(&state.v);
    Ok(())
}

/// Weighted-average point at the state's time: alpha m / (1 - e^(-alpha t)).
/// At t = 0 the average is the initial point by definition; callers handle
/// that case, here t <= 0 is a domain error.
pub fn avg_point(state: &HbState, alpha: f64) -> Result<Vec<f64>> {
    if state.t <= 0.0 {
        return Err(Error::NonPositiveTime(state.t));
    }
    let denom = -(-alpha * state.t).exp_m1();
    Ok(state.m.iter().map(|mi| alpha * mi / denom).collect())
}

/// Sampled diagnostics along a trajectory.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Averaging state m(t) at the checkpoint (kept for closed-form oracles).
    pub m: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub grad_norm_x: f64,
    pub grad_norm_xbar: f64,
    /// Mechanical energy ||v||^2 / 2 + f(x).
    pub phi: f64,
    pub e_diss: f64,
}

/// Integration parameters. `h` must tile `t_final` exactly.
#[derive(Debug, Clone)]
pub struct OdeParams {
    pub alpha: f64,
    pub t_final: f64,
    pub h: f64,
    pub method: Method,
    pub checkpoint_stride: usize,
}

impl OdeParams {
    pub fn new(
        alpha: f64,
        t_final: f64,
        h: f64,
        method: Method,
        checkpoint_stride: usize,
    ) -> Result<Self> {
        let params = OdeParams {
            alpha,
            t_final,
            h,
            method,
            checkpoint_stride,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with the automatic step-size rule (see [`auto_step`]).
    pub fn auto(
        alpha: f64,
        l1: Option<f64>,
        t_final: f64,
        method: Method,
        checkpoint_stride: usize,
    ) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::NonPositiveInput {
                name: "alpha",
                value: alpha,
            });
        }
        if t_final <= 0.0 {
            return Err(Error::NonPositiveInput {
                name: "T",
                value: t_final,
            });
        }
        let h = auto_step(alpha, l1, t_final);
        Self::new(alpha, t_final, h, method, checkpoint_stride)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 0.0 {
            return Err(Error::NonPositiveInput {
                name: "alpha",
                value: self.alpha,
            });
        }
        if self.t_final <= 0.0 {
            return Err(Error::NonPositiveInput {
                name: "T",
                value: self.t_final,
            });
        }
        if self.h <= 0.0 {
            return Err(Error::NonPositiveInput {
                name: "h",
                value: self.h,
            });
        }
        if self.h > self.t_final * (1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "step h = {} exceeds horizon T = {}",
                self.h, self.t_final
            )));
        }
        let ratio = self.t_final / self.h;
        if ratio > 1e12 {
            return Err(Error::InvalidParams(format!(
                "T/h = {ratio} is too many steps"
            )));
        }
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::InvalidParams(format!(
                "T/h = {ratio} is not an integer step count"
            )));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::InvalidParams(
                "checkpoint_stride must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.t_final / self.h).round() as usize
    }
}

/// Automatic step size: h <= 0.01, alpha h <= 0.01, sqrt(L1) h <= 0.01 when
/// L1 is known, and at least 1e4 steps on short horizons. The stiffest linear
/// mode of the flow has rate max(alpha, sqrt(L1)). The result divides
/// `t_final` exactly.
pub fn auto_step(alpha: f64, l1: Option<f64>, t_final: f64) -> f64 {
    let mut h = 0.01f64.min(0.01 / alpha).min(t_final / 1e4);
    if let Some(l1) = l1 {
        if l1 > 0.0 {
            h = h.min(0.01 / l1.sqrt());
        }
    }
    let n = (t_final / h).ceil().max(1.0);
    t_final / n
}

/// A completed integration: run metadata plus the checkpoint sequence.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub problem: String,
    pub dim: usize,
    pub alpha: f64,
    pub h: f64,
    pub method: Method,
    pub checkpoint_stride: usize,
    pub step_count: usize,
    pub delta_f: f64,
    /// Phi(0) = f(x0).
    pub phi0: f64,
    pub checkpoints: Vec<Checkpoint>,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        self.checkpoints.last().map(|c| c.t).unwrap_or(0.0)
    }

    /// Energy-identity residual Phi(t) + alpha e(t) - Phi(0) at checkpoint i.
    pub fn energy_residual(&self, i: usize) -> f64 {
        let c = &self.checkpoints[i];
        c.phi + self.alpha * c.e_diss - self.phi0
    }

    /// Largest |energy residual| / (1 + |Phi(0)|) over all checkpoints.
    pub fn max_energy_residual(&self) -> f64 {
        (0..self.checkpoints.len())
            .map(|i| self.energy_residual(i).abs())
            .fold(0.0, f64::max)
            / (1.0 + self.phi0.abs())
    }

    /// Checkpoint whose time is nearest to `t`.
    pub fn checkpoint_nearest(&self, t: f64) -> usize {
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, c) in self.checkpoints.iter().enumerate() {
            let gap = (c.t - t).abs();
            if gap < best_gap {
                best_gap = gap;
                best = i;
            }
        }
        best
    }
}

// Compensated accumulation buffers, one compensation term per state component.
struct Compensation {
    x: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
    e: f64,
}

impl Compensation {
    fn zeros(dim: usize) -> Self {
        Compensation {
            x: vec![0.0; dim],
            v: vec![0.0; dim],
            m: vec![0.0; dim],
            e: 0.0,
        }
    }
}

#[inline]
fn kahan_add(value: &mut f64, comp: &mut f64, delta: f64) {
    let y = delta - *comp;
    let t = *value + y;
    *comp = (t - *value) - y;
    *value = t;
}

struct Rk4Scratch {
    k1: StateDeriv,
    k2: StateDeriv,
    k3: StateDeriv,
    k4: StateDeriv,
    stage: HbState,
    grad: Vec<f64>,
}

impl Rk4Scratch {
    fn new(dim: usize) -> Self {
        Rk4Scratch {
            k1: StateDeriv::zeros(dim),
            k2: StateDeriv::zeros(dim),
            k3: StateDeriv::zeros(dim),
            k4: StateDeriv::zeros(dim),
            stage: HbState::initial(&vec![0.0; dim]),
            grad: vec![0.0; dim],
        }
    }
}

fn set_stage(stage: &mut HbState, base: &HbState, c: f64, k: &StateDeriv) {
    for i in 0..base.x.len() {
        stage.x[i] = base.x[i] + c * k.dx[i];
        stage.v[i] = base.v[i] + c * k.dv[i];
        stage.m[i] = base.m[i] + c * k.dm[i];
    }
    stage.e_diss = base.e_diss + c * k.de;
}

fn rk4_step(
    problem: &Problem,
    alpha: f64,
    h: f64,
    state: &mut HbState,
    comp: &mut Compensation,
    scratch: &mut Rk4Scratch,
) -> Result<()> {
    rhs_into(problem, alpha, state, &mut scratch.k1, &mut scratch.grad)?;
    set_stage(&mut scratch.stage, state, 0.5 * h, &scratch.k1);
    rhs_into(
        problem,
        alpha,
        &scratch.stage,
        &mut scratch.k2,
        &mut scratch.grad,
    )?;
    set_stage(&mut scratch.stage, state, 0.5 * h, &scratch.k2);
    rhs_into(
        problem,
        alpha,
        &scratch.stage,
        &mut scratch.k3,
        &mut scratch.grad,
    )?;
    set_stage(&mut scratch.stage, state, h, &scratch.k3);
    rhs_into(
        problem,
        alpha,
        &scratch.stage,
        &mut scratch.k4,
        &mut scratch.grad,
    )?;

    let w = h / 6.0;
    for i in 0..state.x.len() {
        kahan_add(
            &mut state.x[i],
            &mut comp.x[i],
            w * (scratch.k1.dx[i]
                + 2.0 * scratch.k2.dx[i]
                + 2.0 * scratch.k3.dx[i]
                + scratch.k4.dx[i]),
        );
        kahan_add(
            &mut state.v[i],
            &mut comp.v[i],
            w * (scratch.k1.dv[i]
                + 2.0 * scratch.k2.dv[i]
                + 2.0 * scratch.k3.dv[i]
                + scratch.k4.dv[i]),
        );
        kahan_add(
            &mut state.m[i],
            &mut comp.m[i],
            w * (scratch.k1.dm[i]
                + 2.0 * scratch.k2.dm[i]
                + 2.0 * scratch.k3.dm[i]
                + scratch.k4.dm[i]),
        );
    }
    kahan_add(
        &mut state.e_diss,
        &mut comp.e,
        w * (scratch.k1.de + 2.0 * scratch.k2.de + 2.0 * scratch.k3.de + scratch.k4.de),
    );
    Ok(())
}

/// Symplectic-Euler-style cross-check integrator: velocity first with the
/// old position, then position with the fresh velocity. The averaging and
/// dissipation states advance explicitly (m with the old position, e with
/// the fresh velocity). First-order accurate.
fn semi_implicit_euler_step(
    problem: &Problem,
    alpha: f64,
    h: f64,
    state: &mut HbState,
    comp: &mut Compensation,
) -> Result<()> {
    let grad = problem.eval_grad(&state.x)?;
    for (i, g) in grad.iter().enumerate() {
        let dv = h * (-alpha * state.v[i] - g);
        kahan_add(&mut state.v[i], &mut comp.v[i], dv);
    }
    for i in 0..state.x.len() {
        let dm = h * (state.x[i] - alpha * state.m[i]);
        kahan_add(&mut state.m[i], &mut comp.m[i], dm);
        let dx = h * state.v[i];
        kahan_add(&mut state.x[i], &mut comp.x[i], dx);
    }
    kahan_add(
        &mut state.e_diss,
        &mut comp.e,
        h * linalg::norm_sq(&state.v),
    );
    Ok(())
}

fn make_checkpoint(problem: &Problem, alpha: f64, state: &HbState) -> Result<Checkpoint> {
    let x_bar = if state.t > 0.0 {
        avg_point(state, alpha)?
    } else {
        state.x.clone()
    };
    let grad_x = problem.eval_grad(&state.x)?;
    let grad_xbar = problem.eval_grad(&x_bar)?;
    let phi = 0.5 * linalg::norm_sq(&state.v) + problem.eval_f(&state.x)?;
    Ok(Checkpoint {
        t: state.t,
        x: state.x.clone(),
        v: state.v.clone(),
        m: state.m.clone(),
        x_bar,
        grad_norm_x: linalg::norm(&grad_x),
        grad_norm_xbar: linalg::norm(&grad_xbar),
        phi,
        e_diss: state.e_diss,
    })
}

/// Fixed-step integration from t = 0 to t = T with checkpoints every
/// `checkpoint_stride` steps plus both endpoints. Deterministic: identical
/// inputs give bit-identical checkpoint sequences.
pub fn integrate(problem: &Problem, params: &OdeParams) -> Result<Trajectory> {
    params.validate()?;
    let n_steps = params.step_count();
    let dim = problem.dim();
    let mut state = HbState::initial(problem.x0());
    let mut comp = Compensation::zeros(dim);
    let mut scratch = Rk4Scratch::new(dim);

    let mut checkpoints = Vec::with_capacity(2 + n_steps / params.checkpoint_stride.max(1));
    checkpoints.push(make_checkpoint(problem, params.alpha, &state)?);

    for step in 1..=n_steps {
        match params.method {
            Method::Rk4 => rk4_step(
                problem,
                params.alpha,
                params.h,
                &mut state,
                &mut comp,
                &mut scratch,
            )?,
            Method::SemiImplicitEuler => {
                semi_implicit_euler_step(problem, params.alpha, params.h, &mut state, &mut comp)?
            }
        }
        state.t = if step == n_steps {
            params.t_final
        } else {
            step as f64 * params.h
        };
        if !state.is_finite() {
            return Err(Error::Divergence { step });
        }
        if step % params.checkpoint_stride == 0 || step == n_steps {
            checkpoints.push(make_checkpoint(problem, params.alpha, &state)?);
        }
    }

    Ok(Trajectory {
        problem: problem.name().to_string(),
        dim,
        alpha: params.alpha,
        h: params.h,
        method: params.method,
        checkpoint_stride: params.checkpoint_stride,
        step_count: n_steps,
        delta_f: problem.delta_f(),
        phi0: checkpoints[0].phi,
        checkpoints,
    })
}
