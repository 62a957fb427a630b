//! Smooth test functions with exact gradients, Hessian-vector products and
//! certified smoothness metadata.
//!
//! Each problem carries the constants the friction schedule and the bound
//! evaluations consume: `l2` (Hessian Lipschitz), optionally `l1` (gradient
//! Lipschitz) and a certified lower bound `f_inf`. The suite spans three
//! regimes:
//!
//! * `quadratic` — f(x) = ||x||^2 / 2. L2 = 0 (degenerate schedule), closed
//!   -form trajectories; the reference oracle for integrator accuracy.
//! * `cos_sum` — f(x) = sum(1 - cos x_i). Genuinely nonconvex, globally
//!   L1 = L2 = 1, exact minimum 0.
//! * `rosenbrock` — the chained valley. Its gradient is not globally
//!   Lipschitz, so `l1` is absent; a Hessian Lipschitz constant is certified
//!   on a box that provably contains every trajectory started at `x0` (see
//!   `rosenbrock_l2_certificate`).

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Quadratic,
    CosSum,
    Rosenbrock,
}

/// An immutable objective with oracle access to f, grad f and Hessian-vector
/// products. Construction fixes the initial point and the certified constants;
/// all evaluation methods are pure.
#[derive(Debug, Clone)]
pub struct Problem {
    name: &'static str,
    family: Family,
    dim: usize,
    l1: Option<f64>,
    l2: f64,
    f_inf: f64,
    x0: Vec<f64>,
    /// Per-coordinate box on which the smoothness certificates are valid
    /// (and from which certificate sampling draws).
    cert_box: Vec<(f64, f64)>,
}

impl Problem {
    pub fn quadratic(dim: usize) -> Self {
        assert!(dim >= 1);
        let x0 = vec![1.0; dim];
        Self::quadratic_from(dim, x0)
    }

    fn quadratic_from(dim: usize, x0: Vec<f64>) -> Self {
        let reach = 1.0 + x0.iter().fold(10.0f64, |m, x| m.max(x.abs()));
        Problem {
            name: "quadratic",
            family: Family::Quadratic,
            dim,
            l1: Some(1.0),
            l2: 0.0,
            f_inf: 0.0,
            x0,
            cert_box: vec![(-reach, reach); dim],
        }
    }

    pub fn cos_sum(dim: usize) -> Self {
        assert!(dim >= 1);
        let x0 = vec![std::f64::consts::PI; dim];
        Self::cos_sum_from(dim, x0)
    }

    fn cos_sum_from(dim: usize, x0: Vec<f64>) -> Self {
        let reach =
            (2.0 * std::f64::consts::PI).max(x0.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0);
        Problem {
            name: "cos_sum",
            family: Family::CosSum,
            dim,
            // |d/dx sin| = |cos| <= 1 and |d/dx cos| = |sin| <= 1, globally.
            l1: Some(1.0),
            l2: 1.0,
            f_inf: 0.0,
            x0,
            cert_box: vec![(-reach, reach); dim],
        }
    }

    pub fn rosenbrock(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParams(
                "rosenbrock needs dim >= 2".to_string(),
            ));
        }
        let x0: Vec<f64> = (0..dim)
            .map(|i| if i % 2 == 0 { -1.2 } else { 1.0 })
            .collect();
        Ok(Self::rosenbrock_from(dim, x0))
    }

    fn rosenbrock_from(dim: usize, x0: Vec<f64>) -> Self {
        let delta = rosenbrock_value(&x0); // f_inf = 0
        let (l2, cert_box) = rosenbrock_l2_certificate(dim, delta);
        Problem {
            name: "rosenbrock",
            family: Family::Rosenbrock,
            dim,
            l1: None,
            l2,
            f_inf: 0.0,
            x0,
            cert_box,
        }
    }

    /// Look up a suite member by CLI/config name.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dim must be >= 1".to_string()));
        }
        match name {
            "quadratic" => Ok(Self::quadratic(dim)),
            "cos_sum" => Ok(Self::cos_sum(dim)),
            "rosenbrock" => Self::rosenbrock(dim),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    /// Same objective started from a different point. Certified constants are
    /// recomputed where they depend on the start (the Rosenbrock box grows
    /// with the initial optimality gap).
    pub fn with_x0(&self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x0.len(),
            });
        }
        Ok(match self.family {
            Family::Quadratic => Self::quadratic_from(self.dim, x0),
            Family::CosSum => Self::cos_sum_from(self.dim, x0),
            Family::Rosenbrock => Self::rosenbrock_from(self.dim, x0),
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l1(&self) -> Option<f64> {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn f_inf(&self) -> f64 {
        self.f_inf
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn cert_box(&self) -> &[(f64, f64)] {
        &self.cert_box
    }

    /// Initial optimality gap f(x0) - f_inf.
    pub fn delta_f(&self) -> f64 {
        self.eval_f(&self.x0).expect("x0 has the right dimension") - self.f_inf
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let v = match self.family {
            Family::Quadratic => 0.5 * linalg::norm_sq(x),
            Family::CosSum => x.iter().map(|xi| 1.0 - xi.cos()).sum(),
            Family::Rosenbrock => rosenbrock_value(x),
        };
        debug_assert!(
            v >= self.f_inf - 1e-12,
            "f dipped below its certified infimum"
        );
        Ok(v)
    }

    pub fn eval_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.eval_grad_into(x, &mut out)?;
        Ok(out)
    }

    /// Allocation-free gradient for the integrator hot loop.
    pub fn eval_grad_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        self.check_dim(out)?;
        match self.family {
            Family::Quadratic => out.copy_from_slice(x),
            Family::CosSum => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = xi.sin();
                }
            }
            Family::Rosenbrock => rosenbrock_grad_into(x, out),
        }
        Ok(())
    }

    /// Hessian-vector product hess f(x) * u.
    pub fn hess_vec(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.check_dim(u)?;
        Ok(match self.family {
            Family::Quadratic => u.to_vec(),
            Family::CosSum => x.iter().zip(u).map(|(xi, ui)| xi.cos() * ui).collect(),
            Family::Rosenbrock => rosenbrock_hess_vec(x, u),
        })
    }
}

fn rosenbrock_value(x: &[f64]) -> f64 {
    let mut f = 0.0;
    for i in 0..x.len() - 1 {
        let a = x[i + 1] - x[i] * x[i];
        let b = 1.0 - x[i];
        f += 100.0 * a * a + b * b;
    }
    f
}

fn rosenbrock_grad_into(x: &[f64], g: &mut [f64]) {
    let d = x.len();
    g.fill(0.0);
    for i in 0..d - 1 {
        let a = x[i + 1] - x[i] * x[i];
        g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
        g[i + 1] += 200.0 * a;
    }
}

/// Tridiagonal Hessian times u. Term i contributes
/// H[i,i]   += 1200 x_i^2 - 400 x_{i+1} + 2,
/// H[i,i+1] += -400 x_i (symmetric),
/// H[i+1,i+1] += 200.
fn rosenbrock_hess_vec(x: &[f64], u: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut out = vec![0.0; d];
    for i in 0..d - 1 {
        let h_ii = 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
        let h_ic = -400.0 * x[i];
        out[i] += h_ii * u[i] + h_ic * u[i + 1];
        out[i + 1] += h_ic * u[i] + 200.0 * u[i + 1];
    }
    out
}

/// Hessian Lipschitz constant for the chained Rosenbrock on the sublevel set
/// of the start point, plus the enclosing sampling box.
///
/// Derivation. The mechanical energy of the damped flow decreases, so every
/// trajectory point (and every average of trajectory points, since the box is
/// convex) stays in { f <= delta }. On that set, for i < d-1,
/// (1 - x_i)^2 <= delta gives |x_i| <= 1 + sqrt(delta) =: R, and
/// |x_{i+1} - x_i^2| <= sqrt(delta/100) bounds the last coordinate by
/// R^2 + sqrt(delta/100). The only nonzero third derivatives are
/// d^3 f / d x_i^3 = 2400 x_i (i < d-1) and the three permutations of
/// d^3 f / d x_i^2 d x_{i+1} = -400, so the Frobenius norm of the third
/// -derivative tensor — an upper bound on its operator norm — is at most
/// sqrt( (d-1) * ((2400 R)^2 + 3 * 400^2) ) on the box.
fn rosenbrock_l2_certificate(dim: usize, delta: f64) -> (f64, Vec<(f64, f64)>) {
    let r = 1.0 + delta.sqrt();
    let r_last = r * r + (delta / 100.0).sqrt();
    let l2 = ((dim - 1) as f64 * ((2400.0 * r).powi(2) + 3.0 * 400.0 * 400.0)).sqrt();
    let mut cert_box = vec![(-r, r); dim];
    cert_box[dim - 1] = (-r_last, r_last);
    (l2, cert_box)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    const FD_STEPS: [f64; 2] = [1e-3, 1e-4];

    fn suite() -> Vec<Problem> {
        vec![
            Problem::quadratic(3),
            Problem::cos_sum(4),
            Problem::rosenbrock(2).unwrap(),
            Problem::rosenbrock(5).unwrap(),
        ]
    }

    /// Third-derivative scale divided by 6 bounds the central-difference
    /// truncation constant; generous per-family values.
    fn fd_constant(family: Family) -> f64 {
        match family {
            Family::Quadratic => 1.0,
            Family::CosSum => 1.0,
            Family::Rosenbrock => 5e3,
        }
    }

    #[test]
    fn values_at_reference_points() {
        let q = Problem::quadratic(1);
        assert_eq!(q.eval_f(&[0.0]).unwrap(), 0.0);
        let c = Problem::cos_sum(2);
        assert_eq!(c.eval_f(&[0.0, 0.0]).unwrap(), 0.0);
        let r = Problem::rosenbrock(2).unwrap();
        assert_eq!(r.eval_f(&[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn gradients_at_reference_points() {
        let q = Problem::quadratic(1);
        assert_eq!(q.eval_grad(&[3.0]).unwrap(), vec![3.0]);
        let c = Problem::cos_sum(2);
        let g = c.eval_grad(&[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn hess_vec_at_reference_points() {
        let q = Problem::quadratic(1);
        assert_eq!(q.hess_vec(&[5.0], &[2.0]).unwrap(), vec![2.0]);
        let c = Problem::cos_sum(1);
        assert_eq!(c.hess_vec(&[0.0], &[1.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn delta_f_reference_values() {
        assert!((Problem::quadratic(1).delta_f() - 0.5).abs() < 1e-15);
        assert!((Problem::cos_sum(2).delta_f() - 4.0).abs() < 1e-12);
        // standard start (-1.2, 1): (1 + 1.2)^2 + 100 (1 - 1.44)^2 = 24.2
        assert!((Problem::rosenbrock(2).unwrap().delta_f() - 24.2).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = Problem::cos_sum(3);
        assert!(matches!(
            p.eval_f(&[0.0, 0.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
        assert!(p.eval_grad(&[0.0; 4]).is_err());
        assert!(p.hess_vec(&[0.0; 3], &[0.0; 2]).is_err());
    }

    #[test]
    fn by_name_round_trip() {
        for name in ["quadratic", "cos_sum", "rosenbrock"] {
            let p = Problem::by_name(name, 2).unwrap();
            assert_eq!(p.name(), name);
        }
        assert!(Problem::by_name("ackley", 2).is_err());
        assert!(Problem::by_name("rosenbrock", 1).is_err());
    }

    /// Directional derivative vs central difference of f: error = O(h^2).
    #[test]
    fn gradient_finite_difference_consistency() {
        let mut rng = SplitMix64::new(11);
        for p in suite() {
            let c = fd_constant(p.family());
            for _ in 0..20 {
                let x: Vec<f64> = p
                    .cert_box()
                    .iter()
                    .map(|&(lo, hi)| rng.uniform(lo * 0.3, hi * 0.3))
                    .collect();
                let u = rng.unit_vec(p.dim());
                let g = p.eval_grad(&x).unwrap();
                let directional = linalg::dot(&g, &u);
                for h in FD_STEPS {
                    let fp = p.eval_f(&linalg::add_scaled(&x, h, &u)).unwrap();
                    let fm = p.eval_f(&linalg::add_scaled(&x, -h, &u)).unwrap();
                    let fd = (fp - fm) / (2.0 * h);
                    assert!(
                        (fd - directional).abs() <= c * h * h + 1e-9,
                        "{}: fd {fd} vs grad {directional} at h = {h}",
                        p.name()
                    );
                }
            }
        }
    }

    /// Hessian-vector product vs central difference of the gradient.
    #[test]
    fn hess_vec_finite_difference_consistency() {
        let mut rng = SplitMix64::new(12);
        for p in suite() {
            let c = fd_constant(p.family());
            for _ in 0..20 {
                let x: Vec<f64> = p
                    .cert_box()
                    .iter()
                    .map(|&(lo, hi)| rng.uniform(lo * 0.3, hi * 0.3))
                    .collect();
                let u = rng.unit_vec(p.dim());
                let hv = p.hess_vec(&x, &u).unwrap();
                for h in FD_STEPS {
                    let gp = p.eval_grad(&linalg::add_scaled(&x, h, &u)).unwrap();
                    let gm = p.eval_grad(&linalg::add_scaled(&x, -h, &u)).unwrap();
                    let fd: Vec<f64> = gp
                        .iter()
                        .zip(&gm)
                        .map(|(a, b)| (a - b) / (2.0 * h))
                        .collect();
                    let err = linalg::max_abs_diff(&fd, &hv);
                    assert!(
                        err <= c * h * h + 1e-9,
                        "{}: hess_vec fd error {err} at h = {h}",
                        p.name()
                    );
                }
            }
        }
    }

    /// Sampled certificate for the gradient Lipschitz constant.
    #[test]
    fn sampled_l1_certificate() {
        let mut rng = SplitMix64::new(13);
        for p in suite() {
            let Some(l1) = p.l1() else { continue };
            for _ in 0..1000 {
                let x: Vec<f64> = p
                    .cert_box()
                    .iter()
                    .map(|&(lo, hi)| rng.uniform(lo, hi))
                    .collect();
                let y: Vec<f64> = p
                    .cert_box()
                    .iter()
                    .map(|&(lo, hi)| rng.uniform(lo, hi))
                    .collect();
                let dist = linalg::norm(&linalg::sub(&x, &y));
                if dist < 1e-12 {
                    continue;
                }
                let gd = linalg::norm(&linalg::sub(
                    &p.eval_grad(&x).unwrap(),
                    &p.eval_grad(&y).unwrap(),
                ));
                assert!(
                    gd <= l1 * dist * (1.0 + 1e-12),
                    "{}: grad ratio {} exceeds L1 = {l1}",
                    p.name(),
                    gd / dist
                );
            }
        }
    }

    /// Sampled certificate for the Hessian Lipschitz constant; the operator
    /// norm of H(x) - H(y) comes from matrix-free power iteration.
    #[test]
    fn sampled_l2_certificate() {
        let mut rng = SplitMix64::new(14);
        for p in suite() {
            for _ in 0..1000 {
                let x: Vec<f64> = p
                    .cert_box()
                    .iter()
                    .map(|&(lo, hi)| rng.uniform(lo, hi))
                    .collect();
                let y: Vec<f64> = p
                    .cert_box()
                    .iter()
                    .map(|&(lo, hi)| rng.uniform(lo, hi))
                    .collect();
                let dist = linalg::norm(&linalg::sub(&x, &y));
                if dist < 1e-12 {
                    continue;
                }
                let op = linalg::sym_op_norm(
                    p.dim(),
                    |u| linalg::sub(&p.hess_vec(&x, u).unwrap(), &p.hess_vec(&y, u).unwrap()),
                    80,
                );
                assert!(
                    op <= p.l2() * dist * (1.0 + 1e-9),
                    "{}: hessian ratio {} exceeds L2 = {}",
                    p.name(),
                    op / dist,
                    p.l2()
                );
            }
        }
    }

    #[test]
    fn rosenbrock_certificate_scales_with_start() {
        let near = Problem::rosenbrock(2)
            .unwrap()
            .with_x0(vec![0.9, 0.8])
            .unwrap();
        let far = Problem::rosenbrock(2).unwrap();
        assert!(near.l2() < far.l2());
        assert!(near.l2() > 0.0);
    }
}
