//! Counter-based random numbers for reproducible sampling.
//!
//! Each sample index owns an independent stream derived purely from
//! (seed, index), so a parallel sweep and a serial sweep draw identical
//! values. The generator is SplitMix64 seeded through an extra finalizer
//! to decorrelate consecutive indices.

#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

impl CounterRng {
    /// Stream for sample `index` under `seed`.
    pub fn for_sample(seed: u64, index: u64) -> Self {
        let s = seed ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03).rotate_left(17);
        CounterRng {
            state: mix(s.wrapping_add(0x9E37_79B9_7F4A_7C15)),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.state)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Log-uniform in [lo, hi); both bounds must be positive.
    #[inline]
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo > 0.0 && hi >= lo);
        (self.uniform(lo.ln(), hi.ln())).exp()
    }
}
