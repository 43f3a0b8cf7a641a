use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of uniform reals in `[0, 1)`.
pub trait RandomSource {
    fn draw_unit(&mut self) -> f64;
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    fn draw_unit(&mut self) -> f64 {
        (**self).draw_unit()
    }
}

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

/// The reference generator: ChaCha8 seeded from a `u64`.
#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.draw_unit() * n as f64) as usize).min(n - 1)
    }

    pub fn gen_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.draw_unit()
    }
}

impl RandomSource for SeededRng {
    fn draw_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * UNIT
    }
}

/// Wraps another source and counts how many draws pass through it.
#[derive(Debug)]
pub struct CountingSource<R> {
    inner: R,
    pub draws: u64,
}

impl<R: RandomSource> CountingSource<R> {
    pub fn new(inner: R) -> Self {
        CountingSource { inner, draws: 0 }
    }

    pub fn into_inner(self) -> R {
        self.inner
    }
}

impl<R: RandomSource> RandomSource for CountingSource<R> {
    fn draw_unit(&mut self) -> f64 {
        self.draws += 1;
        self.inner.draw_unit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = SeededRng::new(7);
        let mut b = SeededRng::new(7);
        for _ in 0..100 {
            assert_eq!(a.draw_unit().to_bits(), b.draw_unit().to_bits());
        }
    }

    #[test]
    fn draws_in_unit_interval() {
        let mut r = SeededRng::new(1);
        for _ in 0..10_000 {
            let u = r.draw_unit();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn counting_counts() {
        let mut c = CountingSource::new(SeededRng::new(3));
        for _ in 0..17 {
            c.draw_unit();
        }
        assert_eq!(c.draws, 17);
    }
}
