//! Tiny deterministic RNG (SplitMix64).
//!
//! Certificate sampling and seeded initial points must reproduce bit-exactly
//! across platforms and dependency upgrades, so we keep the generator in-tree
//! instead of depending on an external crate whose stream may change.

/// Default seed for certificate sampling; overridable via the `HBODE_SEED`
/// environment variable (see the harness module).
pub const DEFAULT_SEED: u64 = 0x5eed_2024_0601_cafe;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Vector with i.i.d. uniform components in [-scale, scale).
    pub fn uniform_vec(&mut self, dim: usize, scale: f64) -> Vec<f64> {
        (0..dim).map(|_| self.uniform(-scale, scale)).collect()
    }

    /// Unit vector (uniform components, normalized).
    pub fn unit_vec(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v = self.uniform_vec(dim, 1.0);
            let n = crate::linalg::norm(&v);
            if n > 1e-3 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_stream() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_in_range() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..1000 {
            let x = rng.uniform(-2.0, 3.0);
            assert!((-2.0..3.0).contains(&x));
        }
    }
}
