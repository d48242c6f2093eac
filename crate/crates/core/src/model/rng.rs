//! Deterministic random streams.
//!
//! Every sampler in the crate draws from a [`GaussianStream`] built from a
//! single `u64` seed. The byte-level contract is:
//!
//! * the generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`;
//! * uniforms take the top 53 bits of `next_u64`;
//! * standard normals come from the Marsaglia polar method, which produces
//!   pairs; the second value of a pair is returned by the next call.
//!
//! Replica `r` of an experiment with master seed `m` uses
//! [`child_seed`]`(m, r)`, so a replica's stream depends only on `(m, r)` and
//! never on scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser applied to `z + golden_gamma`.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` derived from `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

#[derive(Clone, Debug)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        self.rng.next_u32() & 1 == 1
    }

    /// Standard normal by the polar method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * scale);
                return u * scale;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = GaussianStream::new(42);
        let mut b = GaussianStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
        let mut c = GaussianStream::new(43);
        assert_ne!(GaussianStream::new(42).normal(), c.normal());
    }

    #[test]
    fn child_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|r| child_seed(7, r)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(child_seed(1, 0), child_seed(2, 0));
    }

    #[test]
    fn normal_moments() {
        let mut g = GaussianStream::new(1);
        let m = 200_000;
        let xs: Vec<f64> = (0..m).map(|_| g.normal()).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let kurt = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m as f64 / (var * var);
        assert!(mean.abs() < 4.0 / (m as f64).sqrt());
        assert!((var - 1.0).abs() < 0.02);
        assert!((kurt - 3.0).abs() < 0.1);
    }
}
