//! Gaussian tail numerics and replicate-indexed random streams.
//!
//! The upper tail is evaluated through `erfc` from `libm` (a rational
//! approximation with sub-ulp relative error), split at zero so that the
//! lower half of the line never subtracts two nearly equal numbers of size
//! two. The quantile has no closed form here: it is a bracketed bisection
//! that runs until the bracket stops shrinking in floating point.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// `P(Z > x)` for a standard normal `Z`.
pub fn upper_tail(x: f64) -> f64 {
    if x >= 0.0 {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    }
}

/// `P(Z <= x)` for a standard normal `Z`.
pub fn lower_tail(x: f64) -> f64 {
    upper_tail(-x)
}

/// Standard normal density.
pub fn density(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Inverse of [`upper_tail`]: the `x` with `P(Z > x) = p`.
pub fn upper_tail_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("tail probability must lie strictly between 0 and 1"));
    }
    if p > 0.5 {
        // 1 - p is exact for p in [0.5, 1].
        return Ok(-positive_quantile(1.0 - p));
    }
    Ok(positive_quantile(p))
}

// Root of upper_tail(x) = p on [0, 40] for p <= 0.5.
fn positive_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if upper_tail(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick whichever endpoint lands closer in probability.
    if (upper_tail(lo) - p).abs() <= (upper_tail(hi) - p).abs() {
        lo
    } else {
        hi
    }
}

/// Law of a single piece of evidence: `N(mean, sd^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    mean: f64,
    sd: f64,
}

impl GaussianModel {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidInput("model mean must be finite"));
        }
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::InvalidInput("model standard deviation must be positive"));
        }
        Ok(Self { mean, sd })
    }

    /// Unit-variance location model `N(mean, 1)`.
    pub fn unit(mean: f64) -> Result<Self> {
        Self::new(mean, 1.0)
    }

    /// Law of the mean of `n` unit-variance observations.
    pub fn sample_mean(mean: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be at least one"));
        }
        Self::new(mean, 1.0 / libm::sqrt(f64::from(n)))
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    /// `P(Z > x)` under this model.
    pub fn prob_above(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return 1.0;
        }
        if x == f64::INFINITY {
            return 0.0;
        }
        upper_tail((x - self.mean) / self.sd)
    }

    /// The `x` with `P(Z > x) = p` under this model.
    pub fn threshold_for(&self, p: f64) -> Result<f64> {
        Ok(self.mean + self.sd * upper_tail_inverse(p)?)
    }
}

/// One replicate's random stream. Streams are addressed by `(seed,
/// stream_index)` through the ChaCha stream counter, so replicate `i`
/// draws the same numbers no matter which worker runs it or in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// Stream `index` under the same seed.
    pub fn with_index(&self, index: u64) -> Self {
        Self::new(self.seed, index)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Draw one value from `model` using `rng`.
pub fn draw<R: Rng + ?Sized>(model: &GaussianModel, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    model.mean + model.sd * z
}

/// `n` independent draws from `model`, deterministic in `stream`.
pub fn sample_normal(model: &GaussianModel, stream: RandomStream, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n).map(|_| draw(model, &mut rng)).collect()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
            libm::sqrt(ss / (n - 1) as f64 / n as f64)
        } else {
            0.0
        };
        Self { mean, se, n }
    }

    /// `mean <= bound + k * se`.
    pub fn at_most(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.se
    }

    /// `|mean - target| <= k * se`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson on [x, x + 40] of the standard normal density,
    // independent of erfc.
    fn tail_by_quadrature(x: f64) -> f64 {
        let n = 400_000;
        let h = 40.0 / n as f64;
        let mut acc = density(x) + density(x + 40.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * density(x + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn tail_at_zero_is_half() {
        assert_eq!(upper_tail(0.0), 0.5);
    }

    #[test]
    fn tail_at_one_point_six_four() {
        assert!((upper_tail(1.64) - 0.0505).abs() < 5e-5);
        assert!((upper_tail(1.6449) - 0.05).abs() < 5e-5);
    }

    #[test]
    fn tail_matches_quadrature() {
        for &x in &[3.0, 0.5, 1.6449, 5.0, -1.0] {
            let q = tail_by_quadrature(x);
            assert!((upper_tail(x) - q).abs() <= 1e-12, "x={x}: {} vs {q}", upper_tail(x));
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(upper_tail_inverse(0.5).unwrap(), 0.0);
        assert!((upper_tail_inverse(0.05).unwrap() - 1.644_853_626_951_472_2).abs() < 1e-9);
        assert!((upper_tail_inverse(0.000_625).unwrap() - 3.227_218_1).abs() < 1e-4);
        assert!((upper_tail(upper_tail_inverse(0.000_625).unwrap()) - 0.000_625).abs() < 1e-10);
    }

    #[test]
    fn quantile_rejects_endpoints() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(upper_tail_inverse(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn empty_sample() {
        let m = GaussianModel::unit(0.0).unwrap();
        assert!(sample_normal(&m, RandomStream::new(1, 0), 0).is_empty());
    }

    #[test]
    fn sample_is_reproducible_and_streams_differ() {
        let m = GaussianModel::unit(0.3).unwrap();
        let a = sample_normal(&m, RandomStream::new(7, 3), 50);
        let b = sample_normal(&m, RandomStream::new(7, 3), 50);
        let c = sample_normal(&m, RandomStream::new(7, 4), 50);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_within_clt_bound() {
        let m = GaussianModel::unit(0.0).unwrap();
        let xs = sample_normal(&m, RandomStream::new(20_240_101, 0), 1_000_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 4e-3, "mean {mean}");
    }

    #[test]
    fn model_validation() {
        assert!(GaussianModel::new(0.0, 0.0).is_err());
        assert!(GaussianModel::new(f64::NAN, 1.0).is_err());
        assert!(GaussianModel::sample_mean(0.0, 0).is_err());
        let m = GaussianModel::sample_mean(1.0, 4).unwrap();
        assert_eq!(m.sd(), 0.5);
    }
}
