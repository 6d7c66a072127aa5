//! Deterministic random streams.
//!
//! Every sampler draws from an [`RngStream`], a counter-based ChaCha8 stream
//! addressed by `(seed, stream)`. The same pair yields the same variate
//! sequence on every platform, which is what makes batch sampling
//! parallelizable: worker `i` simply owns stream `i`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

use crate::numerics::special::ln_gamma;

/// Mean at which Poisson sampling switches from inversion to rejection.
const POISSON_INVERSION_LIMIT: f64 = 10.0;

/// Seedable, stream-addressed PRNG with the variate generators the samplers
/// need.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` without modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            let low = m as u64;
            if low >= n || low >= n.wrapping_neg() % n {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal via the polar transform of two uniforms.
    pub fn normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    /// Poisson variate: multiplicative inversion below mean 10, transformed
    /// rejection (PTRS) above.
    pub fn poisson(&mut self, mean: f64) -> u32 {
        assert!(mean >= 0.0 && mean.is_finite(), "poisson mean {mean}");
        if mean == 0.0 {
            return 0;
        }
        if mean < POISSON_INVERSION_LIMIT {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_inversion(&mut self, mean: f64) -> u32 {
        let limit = (-mean).exp();
        let mut k = 0_u32;
        let mut p = 1.0;
        loop {
            p *= self.uniform();
            if p <= limit {
                return k;
            }
            k += 1;
        }
    }

    fn poisson_ptrs(&mut self, mean: f64) -> u32 {
        let slam = mean.sqrt();
        let loglam = mean.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let invalpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u32;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            if v.ln() + invalpha.ln() - (a / (us * us) + b).ln()
                <= k * loglam - mean - ln_gamma(k + 1.0)
            {
                return k as u32;
            }
        }
    }

    /// `count` distinct indices drawn uniformly from `0..n`, ascending.
    pub fn distinct_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        assert!(count <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picked = pool[..count].to_vec();
        picked.sort_unstable();
        picked
    }

    /// Index drawn from unnormalized non-negative weights.
    ///
    /// Returns `None` when all weights are zero.
    pub fn weighted_index(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let mut r = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            r -= w;
            if r < 0.0 {
                return Some(i);
            }
        }
        Some(weights.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_streams_agree() {
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        for _ in 0..50 {
            assert_eq!(a.normal(), b.normal());
            assert_eq!(a.poisson(3.7), b.poisson(3.7));
            assert_eq!(a.poisson(42.0), b.poisson(42.0));
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let same = (0..32).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngStream::new(7, 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let x = rng.normal();
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn poisson_moments_small_and_large() {
        for lam in [0.5, 3.0, 12.0, 50.0] {
            let mut rng = RngStream::new(11, 0);
            let n = 100_000;
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for _ in 0..n {
                let k = rng.poisson(lam) as f64;
                sum += k;
                sum2 += k * k;
            }
            let mean = sum / n as f64;
            let var = sum2 / n as f64 - mean * mean;
            let se = (lam / n as f64).sqrt();
            assert!((mean - lam).abs() < 4.0 * se, "lam={lam} mean {mean}");
            assert!((var - lam).abs() < 0.05 * lam.max(1.0), "lam={lam} var {var}");
        }
    }

    #[test]
    fn poisson_pmf_matches_closed_form() {
        // spot-check a few bins at a mean served by the rejection path
        let lam = 12.0;
        let mut rng = RngStream::new(23, 5);
        let n = 100_000_usize;
        let mut counts = [0_usize; 40];
        for _ in 0..n {
            let k = rng.poisson(lam) as usize;
            if k < counts.len() {
                counts[k] += 1;
            }
        }
        for k in [6_usize, 10, 12, 15, 20] {
            let logp = -lam + (k as f64) * lam.ln() - ln_gamma(k as f64 + 1.0);
            let p = logp.exp();
            let freq = counts[k] as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * se, "k={k} freq={freq} p={p}");
        }
    }

    #[test]
    fn below_is_unbiased_over_range() {
        let mut rng = RngStream::new(3, 0);
        let mut counts = [0_usize; 7];
        for _ in 0..70_000 {
            counts[rng.below(7) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 500.0, "count {c}");
        }
    }

    #[test]
    fn distinct_indices_are_distinct_and_sorted() {
        let mut rng = RngStream::new(5, 9);
        for _ in 0..100 {
            let v = rng.distinct_indices(10, 4);
            assert_eq!(v.len(), 4);
            assert!(v.windows(2).all(|w| w[0] < w[1]));
            assert!(v.iter().all(|&i| i < 10));
        }
    }
}
