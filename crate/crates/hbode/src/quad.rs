//! Composite trapezoidal quadrature on (possibly non-uniform) grids.

/// Trapezoid weights for a strictly increasing grid: integral of y over the
/// grid is `sum(w_i * y_i)`.
pub fn trapezoid_weights(ts: &[f64]) -> Vec<f64> {
    let n = ts.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let half = 0.5 * (ts[i + 1] - ts[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

/// Composite trapezoid of scalar samples.
pub fn trapezoid(ts: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(ts.len(), ys.len());
    let mut acc = 0.0;
    for i in 0..ts.len().saturating_sub(1) {
        acc += 0.5 * (ts[i + 1] - ts[i]) * (ys[i] + ys[i + 1]);
    }
    acc
}

/// Running trapezoid integral; entry i holds the integral over [ts[0], ts[i]].
pub fn cumulative_trapezoid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    assert_eq!(ts.len(), ys.len());
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..ts.len().saturating_sub(1) {
        acc += 0.5 * (ts[i + 1] - ts[i]) * (ys[i] + ys[i + 1]);
        out.push(acc);
    }
    out
}
