//! Small dense-vector helpers on `f64` slices.

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Squared Euclidean norm.
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// a + c * b, element-wise, into a fresh vector.
pub fn add_scaled(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

/// a += c * b in place.
pub fn axpy(a: &mut [f64], c: f64, b: &[f64]) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += c * y;
    }
}

/// Element-wise difference a - b.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Max absolute component difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest singular value of a symmetric matrix given as a matrix-vector
/// closure, estimated by power iteration on a fixed deterministic start.
///
/// Symmetric input means the operator norm equals the spectral radius, so
/// plain power iteration on the matrix itself converges to |lambda_max|.
pub fn sym_op_norm<F>(dim: usize, mat_vec: F, iters: usize) -> f64
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    // Deterministic, mildly irrational start so it is unlikely to be
    // orthogonal to the dominant eigenvector.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.618_033_988_749_894_9 * (i as f64 + 1.0).sin())
        .collect();
    let n = norm(&v);
    for x in v.iter_mut() {
        *x /= n;
    }
    let mut estimate = 0.0;
    for _ in 0..iters {
        let w = mat_vec(&v);
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        estimate = wn;
        v = w.into_iter().map(|x| x / wn).collect();
    }
    estimate
}
