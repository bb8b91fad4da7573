use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::scalar::Scalar;

/// Explicitly seeded random source.
///
/// Backed by ChaCha8 seeded through `seed_from_u64`, whose output stream is
/// fixed across platforms and releases. Every derived draw (uniform reals,
/// bounded integers, shuffles) is implemented here on top of raw `u64`
/// words so that the sequences do not depend on any distribution code
/// outside this crate.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for a named sub-stream of this seed.
    pub fn derive(&self, stream: u64) -> Rng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        Rng {
            seed: self.seed,
            inner,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[0, n)` by rejection, so there is no modulo bias.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "Rng::below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Inverted dropout mask: each entry is `0` or `1 / keep_prob`.
pub fn dropout_mask<T: Scalar>(rng: &mut Rng, len: usize, keep_prob: f64) -> Result<Vector<T>> {
    let mut out = Vector::zeros(len);
    fill_dropout_mask(rng, out.as_mut_slice(), keep_prob)?;
    Ok(out)
}

pub(crate) fn fill_dropout_mask<T: Scalar>(rng: &mut Rng, out: &mut [T], keep_prob: f64) -> Result<()> {
    if !(keep_prob > 0.0 && keep_prob <= 1.0) {
        return Err(Error::Parameter(format!(
            "keep_prob must lie in (0, 1], got {keep_prob}"
        )));
    }
    let scale = T::of(1.0 / keep_prob);
    for x in out.iter_mut() {
        *x = if rng.uniform() < keep_prob { scale } else { T::zero() };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_ne!(Rng::new(1).next_u64(), Rng::new(2).next_u64());
    }

    #[test]
    fn derived_streams_differ() {
        let base = Rng::new(9);
        assert_ne!(base.derive(1).next_u64(), base.derive(2).next_u64());
        assert_eq!(base.derive(1).next_u64(), base.derive(1).next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut rng = Rng::new(0);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn below_covers_range() {
        let mut rng = Rng::new(7);
        let mut seen = [false; 5];
        for _ in 0..1000 {
            seen[rng.below(5)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut rng = Rng::new(4);
        let mut v: Vec<u32> = (0..100).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }

    #[test]
    fn keep_all_mask_is_ones() {
        let mut rng = Rng::new(1);
        let m: Vector<f64> = dropout_mask(&mut rng, 64, 1.0).unwrap();
        assert!(m.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn half_mask_concentrates() {
        let mut rng = Rng::new(2024);
        let m: Vector<f64> = dropout_mask(&mut rng, 1_000_000, 0.5).unwrap();
        let zeros = m.iter().filter(|&&x| x == 0.0).count() as f64 / 1e6;
        assert!((0.497..=0.503).contains(&zeros), "{zeros}");
        let mean = m.iter().sum::<f64>() / 1e6;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        assert!(m.iter().all(|&x| x == 0.0 || x == 2.0));
    }

    #[test]
    fn mask_is_deterministic() {
        let a: Vector<f32> = dropout_mask(&mut Rng::new(8), 500, 0.5).unwrap();
        let b: Vector<f32> = dropout_mask(&mut Rng::new(8), 500, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keep_prob_out_of_range() {
        let mut rng = Rng::new(0);
        assert!(dropout_mask::<f64>(&mut rng, 3, 0.0).is_err());
        assert!(dropout_mask::<f64>(&mut rng, 3, 1.5).is_err());
        assert!(dropout_mask::<f64>(&mut rng, 3, f64::NAN).is_err());
    }
}
