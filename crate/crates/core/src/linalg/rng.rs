//! Counter-based SplitMix64 generator with Box–Muller Gaussians.
//!
//! Output `i` is `mix(seed + (i + 1) * γ)`, so a stream is a pure function of
//! `(seed, i)`. Transcendentals go through `libm` to keep Gaussian draws
//! bit-identical across platforms.

use crate::linalg::vector::Vector;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic random stream. Single owner; clone to fork an identical copy.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    counter: u64,
    spare: Option<f64>,
}

impl SeededRng {
    pub const ALGORITHM: &'static str = "splitmix64-counter/box-muller";

    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0, spare: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream derived from this generator's seed and a label.
    pub fn child(&self, label: u64) -> Self {
        Self::new(mix(self.seed ^ mix(label.wrapping_add(GOLDEN))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform01() * n as f64) as usize).min(n - 1)
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(angle));
        r * libm::cos(angle)
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vector {
        (0..n).map(|_| self.gaussian()).collect()
    }

    pub fn uniform_vec(&mut self, lo: f64, hi: f64, n: usize) -> Vector {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }

    /// Uniformly random unit vector.
    pub fn unit_vec(&mut self, n: usize) -> Vector {
        let v = self.gaussian_vec(n);
        let nv = v.norm();
        v.scaled(1.0 / nv)
    }

    /// `k` distinct indices from `0..n`, in draw order (partial Fisher–Yates).
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// `n` standard Gaussian draws.
pub fn rng_gaussian(rng: &mut SeededRng, n: usize) -> Vector {
    rng.gaussian_vec(n)
}

/// `n` uniform draws on `[lo, hi)`.
pub fn rng_uniform(rng: &mut SeededRng, lo: f64, hi: f64, n: usize) -> Vector {
    rng.uniform_vec(lo, hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = rng_gaussian(&mut SeededRng::new(42), 64);
        let b = rng_gaussian(&mut SeededRng::new(42), 64);
        assert_eq!(a, b);
        let c = rng_gaussian(&mut SeededRng::new(43), 64);
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_uniform_is_constant() {
        let v = rng_uniform(&mut SeededRng::new(1), 2.5, 2.5, 10);
        assert!(v.iter().all(|x| *x == 2.5));
    }

    #[test]
    fn gaussian_moments() {
        let n = 100_000;
        let v = rng_gaussian(&mut SeededRng::new(9), n);
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((0.97..=1.03).contains(&var), "variance {var}");
    }

    #[test]
    fn sampled_indices_are_distinct() {
        let mut idx = SeededRng::new(5).sample_indices(30, 12);
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 12);
        assert!(idx.iter().all(|&i| i < 30));
    }

    #[test]
    fn children_differ() {
        let root = SeededRng::new(7);
        let mut a = root.child(1);
        let mut b = root.child(2);
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
