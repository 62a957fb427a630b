//! Verification thresholds used by the identity and inequality checks.
//!
//! Identities (energy, gradient average, weight normalization) are compared
//! with relative tolerances sized to the integrator/quadrature order at the
//! default resolution. Inequalities (dissipation, averaged-gradient bounds)
//! get only a small additive slack: their right-hand sides are themselves
//! quadratures, so equality cases must survive discretization noise without
//! masking a genuine violation.

/// Energy identity |Phi(t) + alpha * e_diss - Phi(0)| / (1 + |Phi(0)|).
/// RK4 keeps this at O(h^4); 1e-6 leaves two orders of headroom at h = 0.01.
pub const ENERGY_IDENTITY_REL: f64 = 1e-6;

/// Gradient-average identity residual at default checkpoint density.
pub const GRAD_AVG_RESIDUAL: f64 = 1e-4;

/// Trapezoidal weight normalization |quadrature - 1| on a fine grid.
/// The composite-trapezoid error for the exponential weight is
/// alpha^2 * spacing^2 / 12, so the check grid must satisfy
/// alpha * spacing <= 3.4e-3.
pub const WEIGHT_NORM_QUAD: f64 = 1e-6;

/// Additive slack for the dissipation bound alpha * e_diss <= delta_f.
pub const DISSIPATION_SLACK: f64 = 1e-9;

/// Relative slack for per-time averaged-gradient bound checks:
/// lhs <= rhs + AVG_GRAD_BOUND_REL * (1 + rhs).
pub const AVG_GRAD_BOUND_REL: f64 = 1e-6;

/// Relative slack for the averaging-error bound on synthetic paths.
pub const PATH_BOUND_REL: f64 = 1e-6;

/// Max |quadrature(w) - 1| accepted before the averaging-error check
/// refuses its weight samples.
pub const WEIGHT_INPUT_NORM: f64 = 1e-10;

/// Closed-form quadratic trajectory vs RK4 at h = 1e-3 (max abs error over
/// x, v and the averaging state on [0, 10]).
pub const CLOSED_FORM_MAX_ERR: f64 = 1e-8;

/// Least-squares slope of the horizon power-law bound vs the exact -4/7.
pub const RATE_SLOPE_TOL: f64 = 1e-3;
