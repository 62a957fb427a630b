//! Numerical laboratory for damped second-order optimization dynamics with
//! exponentially weighted trajectory averaging.
//!
//! The crate integrates the flow `x'' = -alpha x' - grad f(x)` on a suite of
//! smooth test functions, tracks the weighted-average trajectory and the
//! friction work as additional ODE state, and verifies the identities and
//! horizon bounds that govern the gradient norm at the averaged point:
//!
//! * energy dissipation: Phi(t) + alpha * int ||x'||^2 = Phi(0);
//! * the averaged-gradient identity int w_t(s) grad f(x(s)) ds
//!   = -alpha/(1 - e^(-alpha t)) x'(t);
//! * the averaging-error bound driven by the Hessian Lipschitz constant;
//! * the finite-horizon bound on min_t ||grad f(x_bar(t))|| and its
//!   T^(-4/7) leading term under the friction schedule
//!   alpha = (3 L2)^(2/7) (delta_f / T)^(1/7).
//!
//! The `harness` module adds the reproducibility surface: config files,
//! CSV emission, horizon sweeps, the verification suite and SVG plots,
//! all driven by the `hbode` binary.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod ode;
pub mod problems;
pub mod quad;
pub mod rng;
pub mod tolerances;

pub use error::{Error, Result};
pub use ode::{alpha_for_horizon, integrate, Method, OdeParams, Trajectory};
pub use problems::Problem;
