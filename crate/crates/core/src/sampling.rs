//! Seeded sampling of spectral points from a box in the complex plane.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::C64;

/// Draws per accepted sample before the sampler gives up on a region.
pub const MAX_RESAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub count: usize,
    pub seed: u64,
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl SamplingSpec {
    /// `count` points from the default box `[-2, 2] × [-2, 2]`.
    pub fn new(count: usize, seed: u64) -> Self {
        SamplingSpec { count, seed, re: (-2.0, 2.0), im: (-2.0, 2.0) }
    }

    pub fn with_box(mut self, re: (f64, f64), im: (f64, f64)) -> Self {
        self.re = re;
        self.im = im;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sampler(&self) -> Sampler {
        Sampler { spec: self.clone(), rng: ChaCha8Rng::seed_from_u64(self.seed) }
    }
}

pub struct Sampler {
    spec: SamplingSpec,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn point(&mut self) -> C64 {
        let (r0, r1) = self.spec.re;
        let (i0, i1) = self.spec.im;
        let re = if r1 > r0 { self.rng.random_range(r0..r1) } else { r0 };
        let im = if i1 > i0 { self.rng.random_range(i0..i1) } else { i0 };
        C64::new(re, im)
    }

    pub fn points<const N: usize>(&mut self) -> [C64; N] {
        std::array::from_fn(|_| self.point())
    }

    /// Redraws until `accept` succeeds, giving up after [`MAX_RESAMPLES`] draws.
    pub fn draw_until<const N: usize, T, E>(
        &mut self,
        mut accept: impl FnMut(&[C64; N]) -> Result<T, E>,
    ) -> Result<([C64; N], T), E> {
        let mut last = None;
        for _ in 0..MAX_RESAMPLES {
            let pts = self.points::<N>();
            match accept(&pts) {
                Ok(v) => return Ok((pts, v)),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("MAX_RESAMPLES > 0"))
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn spec(&self) -> &SamplingSpec {
        &self.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_points() {
        let spec = SamplingSpec::new(5, 99);
        let a: Vec<_> = (0..5).map({
            let mut s = spec.sampler();
            move |_| s.point()
        }).collect();
        let mut s = spec.sampler();
        let b: Vec<_> = (0..5).map(|_| s.point()).collect();
        assert_eq!(a, b);
        for z in a {
            assert!(z.re >= -2.0 && z.re < 2.0 && z.im >= -2.0 && z.im < 2.0);
        }
    }

    #[test]
    fn degenerate_box_pins_coordinate() {
        let mut s = SamplingSpec::new(1, 1).with_box((-1.0, 1.0), (0.0, 0.0)).sampler();
        for _ in 0..10 {
            assert_eq!(s.point().im, 0.0);
        }
    }
}
