//! Scalar Gaussian machinery: the standard-normal upper-tail function and
//! seeded sampling.
//!
//! Random streams are ChaCha8 (`rand_chacha::ChaCha8Rng`) keyed by a 64-bit
//! seed, with the stream index selecting one of the 2^64 independent ChaCha
//! streams. A stream can be opened directly at any index, so trial `t` of a
//! Monte Carlo run never depends on how many trials ran before it.
//!
//! Gaussian variates use the Box–Muller cosine branch, one normal draw per
//! two uniforms, with uniforms built from the top 53 bits of `next_u64`.
//! This is frozen: changing it changes every seeded output.

mod erfc;

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on the sum of a categorical weight vector.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Parameter(format!(
                "probability {value} is outside [0, 1]"
            )))
        }
    }

    /// Clamps rounding excursions (e.g. `-1e-17`) back into `[0, 1]`.
    pub(crate) fn saturating(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        Probability(value.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Upper-tail probability of the standard normal, `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Q-function argument {x} is not finite")));
    }
    Ok(Probability::saturating(q_unchecked(x)))
}

#[inline]
pub(crate) fn q_unchecked(x: f64) -> f64 {
    0.5 * erfc::erfc(x * FRAC_1_SQRT_2)
}

/// A deterministic random stream identified by `(seed, stream_index)`.
///
/// Not `Sync`-shared: one owner advances it. Distinct streams can be used on
/// different threads freely.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RngStream {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub(crate) fn next_standard_normal(&mut self) -> f64 {
        // u1 in (0, 1] keeps ln finite
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    /// Inverse-CDF draw from pre-validated weights.
    #[inline]
    pub(crate) fn pick_index(&mut self, weights: &[f64]) -> usize {
        let u = self.next_uniform();
        let mut cumulative = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            cumulative += w;
            if u < cumulative {
                return i;
            }
        }
        // u landed in the rounding gap above the total; last positive weight wins
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

/// One draw from `N(mean, sigma^2)`.
pub fn sample_gaussian(mean: f64, sigma: f64, rng: &mut RngStream) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Parameter(format!(
            "standard deviation must be positive and finite, got {sigma}"
        )));
    }
    if !mean.is_finite() {
        return Err(Error::Parameter(format!("mean {mean} is not finite")));
    }
    Ok(mean + sigma * rng.next_standard_normal())
}

pub(crate) fn check_weights(weights: &[f64], what: &str) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Parameter(format!("{what}: empty weight vector")));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
    {
        return Err(Error::Parameter(format!(
            "{what}: weight {i} is {w}, expected a finite non-negative value"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::Parameter(format!(
            "{what}: weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Returns index `i` with probability `weights[i]`.
pub fn sample_categorical(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    check_weights(weights, "categorical")?;
    Ok(rng.pick_index(weights))
}
