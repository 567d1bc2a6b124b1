//! Scalar Gaussian primitives: the standard normal CDF and its inverse, the
//! message-point map and seeded sample streams.

use core::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain("probability", value))
        }
    }

    /// Only accepts the open interval `(0, 1)`, as needed for message points.
    pub fn open(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(Error::domain("open-interval probability", value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `Q(x) = 1 - Phi(x)`, accurate in the upper tail.
#[inline]
pub(crate) fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `Phi(x)` without domain checks. Both halves go through `erfc` of a
/// non-negative argument, so neither tail suffers cancellation.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    if x < 0.0 {
        upper_tail(-x)
    } else {
        1.0 - upper_tail(x)
    }
}

#[inline]
fn ln_density(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * libm::log(2.0 * PI)
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::domain("cdf argument", x));
    }
    Ok(Probability(phi(x)))
}

// Rational approximation of P. J. Acklam (relative error 1.15e-9 before
// refinement).
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

/// Inverse CDF for `0 < p <= 0.5`; the result is non-positive.
fn inv_cdf_lower(p: f64) -> f64 {
    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // One Halley step on Phi(x) - p. For x <= 0 the CDF is an erfc of a
    // positive argument, so the residual keeps full relative precision.
    let e = upper_tail(-x) - p;
    let u = e * libm::exp(-ln_density(x));
    x - u / (1.0 + 0.5 * x * u)
}

/// Inverse of the standard normal CDF on the open interval `(0, 1)`.
pub fn std_normal_inv_cdf(p: Probability) -> Result<f64> {
    let p = p.value();
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::domain("inverse-cdf argument", p));
    }
    if p > 0.5 {
        // 1 - p is exact for p in [0.5, 1).
        Ok(-inv_cdf_lower(1.0 - p))
    } else {
        Ok(inv_cdf_lower(p))
    }
}

/// Maps a message point `theta` to the first channel input
/// `F_X^{-1}(theta)` with `X ~ N(0, p1)`.
pub fn message_to_signal(theta: Probability, p1: f64) -> Result<f64> {
    if !(p1 > 0.0 && p1.is_finite()) {
        return Err(Error::domain("first-step power", p1));
    }
    let z = std_normal_inv_cdf(theta)?;
    Ok(libm::sqrt(p1) * z)
}

/// `log2(Phi(center + half) - Phi(center - half))` for `half > 0`.
///
/// Decoded intervals shrink geometrically, far below the spacing of `f64`
/// values near `theta`, so the mass is never formed as a difference of two
/// CDF values once the interval is narrow.
pub fn log2_normal_mass(center: f64, half: f64) -> f64 {
    let m = libm::fabs(center);
    let ln_mass = if half * (1.0 + m) < 1e-3 {
        // Integrate phi(m + t) = phi(m) exp(-m t - t^2 / 2) over |t| < half.
        let c2 = m * m;
        let d2 = half * half;
        let series = 1.0 + (c2 - 1.0) * d2 / 6.0 + (c2 * c2 - 6.0 * c2 + 3.0) * d2 * d2 / 120.0;
        ln_density(m) + libm::log(2.0 * half) + libm::log(series)
    } else {
        libm::log(upper_tail(m - half) - upper_tail(m + half))
    };
    ln_mass / LN_2
}

/// Seeded, independently owned stream of uniform and Gaussian samples.
///
/// Streams are ChaCha8 keyed by `seed` with `stream_id` selecting the
/// ChaCha stream, so distinct ids never overlap and equal `(seed, stream_id)`
/// pairs reproduce bit-identical sequences.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform sample on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> Probability {
        Probability(self.rng.sample(Open01))
    }

    /// Sample from `N(0, sigma^2)`.
    pub fn gaussian(&mut self, sigma: f64) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        sigma * z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    /// Bisection on `phi`, used as an independent inverse.
    fn bisect_inverse(p: f64) -> f64 {
        // Compare in whichever tail keeps relative precision.
        let below = |x: f64| if p > 0.5 { upper_tail(x) > 1.0 - p } else { phi(x) < p };
        let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0).unwrap().value(), 0.5);
        assert!((std_normal_cdf(40.0).unwrap().value() - 1.0).abs() <= 1e-15);
        // 1.959964 -> 0.975 to 1e-6; reference value from a 50-digit erf.
        let v = std_normal_cdf(1.959964).unwrap().value();
        assert!((v - 0.975_000_000_903_557_6).abs() < 1e-12, "{v}");
        assert!((v - 0.975).abs() < 1e-6);
    }

    #[test]
    fn cdf_matches_high_precision_values() {
        // Phi(x) from a 50-digit erf evaluation.
        let table = [
            (-8.0, 6.220960574271784e-16),
            (-3.0, 1.3498980316300946e-3),
            (-1.0, 0.15865525393145707),
            (0.5, 0.6914624612740131),
            (2.5, 0.9937903346742238),
        ];
        for (x, want) in table {
            let got = std_normal_cdf(x).unwrap().value();
            assert!((got - want).abs() <= 1e-12 * want.max(1e-4), "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn cdf_rejects_non_finite() {
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn inv_cdf_examples() {
        assert_eq!(std_normal_inv_cdf(Probability::new(0.5).unwrap()).unwrap(), 0.0);
        let x = std_normal_inv_cdf(Probability::new(0.975).unwrap()).unwrap();
        assert!((x - bisect_inverse(0.975)).abs() < 1e-12);
        assert!((x - 1.959964).abs() < 1e-5);
        let lo = std_normal_inv_cdf(Probability::new(0.3).unwrap()).unwrap();
        let hi = std_normal_inv_cdf(Probability::new(0.7).unwrap()).unwrap();
        assert!((lo + hi).abs() < 1e-12);
    }

    #[test]
    fn inv_cdf_domain() {
        for p in [0.0, 1.0] {
            assert!(std_normal_inv_cdf(Probability::new(p).unwrap()).is_err());
        }
        assert!(Probability::new(1.5).is_err());
        assert!(Probability::new(-0.1).is_err());
    }

    #[test]
    fn inv_cdf_against_bisection() {
        for p in [1e-12, 1e-9, 1e-5, 0.01, 0.02425, 0.1, 0.25, 0.49, 0.51, 0.9, 0.99, 1.0 - 1e-9] {
            let x = std_normal_inv_cdf(Probability::new(p).unwrap()).unwrap();
            let reference = bisect_inverse(p);
            assert!((x - reference).abs() < 1e-9 * reference.abs().max(1.0), "p={p}");
            assert!((phi(x) - p).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn message_map_examples() {
        let half = Probability::new(0.5).unwrap();
        assert_eq!(message_to_signal(half, 7.0).unwrap(), 0.0);
        let x = message_to_signal(Probability::new(0.975).unwrap(), 4.0).unwrap();
        assert!((x - 2.0 * bisect_inverse(0.975)).abs() < 1e-10);
        assert!((x - 3.919928).abs() < 1e-4);
        let theta = 0.123;
        let p1 = 2.5;
        let x = message_to_signal(Probability::new(theta).unwrap(), p1).unwrap();
        assert!((phi(x / libm::sqrt(p1)) - theta).abs() < 1e-10);
        assert!(message_to_signal(Probability::new(0.0).unwrap(), 1.0).is_err());
        assert!(message_to_signal(Probability::new(1.0).unwrap(), 1.0).is_err());
        assert!(message_to_signal(half, 0.0).is_err());
    }

    #[test]
    fn normal_mass_narrow_and_wide_agree() {
        for &c in &[-3.0, -0.4, 0.0, 1.2, 5.0] {
            // Wide enough for the direct difference to be accurate.
            let wide = log2_normal_mass(c, 0.25);
            let m = libm::fabs(c);
            let direct = libm::log2(upper_tail(m - 0.25) - upper_tail(m + 0.25));
            assert!((wide - direct).abs() < 1e-12);
            // Near the switch point, both branches must agree.
            let d = 0.99e-3 / (1.0 + libm::fabs(c));
            let series = log2_normal_mass(c, d);
            let diff = upper_tail(libm::fabs(c) - d) - upper_tail(libm::fabs(c) + d);
            assert!((series - libm::log2(diff)).abs() < 1e-8, "c={c}");
        }
        // Far below f64 resolution the series still gives the exact leading term.
        let tiny = log2_normal_mass(0.0, 1e-40);
        let want = (ln_density(0.0) + libm::log(2e-40)) / LN_2;
        assert!((tiny - want).abs() < 1e-12);
    }

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let draw = |seed, id| {
            let mut s = RngStream::new(seed, id);
            (0..16).map(|_| s.gaussian(1.0)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn gaussian_moments() {
        let sigma = 1.7;
        let n = 1_000_000;
        let mut s = RngStream::new(2024, 0);
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let z = s.gaussian(sigma);
            sum += z;
            sum2 += z * z;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = sum2 / nf - mean * mean;
        let s2 = sigma * sigma;
        assert!(mean.abs() < 5.0 * sigma / libm::sqrt(nf), "mean {mean}");
        assert!((var - s2).abs() < 5.0 * s2 * libm::sqrt(2.0 / nf), "var {var}");
    }

    #[test]
    fn uniform_is_open() {
        let mut s = RngStream::new(1, 1);
        for _ in 0..10_000 {
            let u = s.uniform_open().value();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
