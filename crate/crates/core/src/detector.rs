//! Three-hypothesis Gaussian maximum-likelihood detector.
//!
//! A measurement `z` drawn from `N(m_i, sigma^2)` under state `i` is mapped
//! to a symbol by two prior-adjusted thresholds. The region rule is
//!
//! ```text
//!   -1  if z <  lower
//!    0  if lower <= z < upper
//!   +1  if z >= upper
//! ```
//!
//! so a measurement sitting exactly on a threshold goes to the region on its
//! right.

use std::fmt;

use crate::error::{Error, Result};
use crate::gaussian::{check_weights, q_unchecked, Probability};

/// Ternary deviation label. Ordered `Neg < Zero < Pos`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateSymbol {
    Neg,
    Zero,
    Pos,
}

impl StateSymbol {
    /// All symbols in ascending order.
    pub const ALL: [StateSymbol; 3] = [StateSymbol::Neg, StateSymbol::Zero, StateSymbol::Pos];

    /// Position in `ALL`, used for matrix indexing.
    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub const fn label(self) -> i8 {
        self as i8 - 1
    }

    pub fn from_label(label: i64) -> Option<Self> {
        match label {
            -1 => Some(StateSymbol::Neg),
            0 => Some(StateSymbol::Zero),
            1 => Some(StateSymbol::Pos),
            _ => None,
        }
    }
}

impl fmt::Display for StateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Means, noise level and priors of the measurement model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    means: [f64; 3],
    sigma: f64,
    priors: [f64; 3],
}

impl DetectorParams {
    /// `means` and `priors` are in state order (-1, 0, +1).
    pub fn new(means: [f64; 3], sigma: f64, priors: [f64; 3]) -> Result<Self> {
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::Parameter(format!("means {means:?} must be finite")));
        }
        if !(means[0] < means[1] && means[1] < means[2]) {
            return Err(Error::Parameter(format!(
                "means must be strictly increasing, got {means:?}"
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Parameter(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        check_weights(&priors, "priors")?;
        if let Some(i) = priors.iter().position(|&p| p <= 0.0) {
            return Err(Error::Parameter(format!(
                "prior {i} is zero; detector priors must be strictly positive"
            )));
        }
        Ok(DetectorParams {
            means,
            sigma,
            priors,
        })
    }

    /// Builds means `(f0 - below, f0, f0 + above)` from a nominal frequency and
    /// the extreme deviations below and above it.
    pub fn from_deviations(
        f0: f64,
        delta_below: f64,
        delta_above: f64,
        sigma: f64,
        priors: [f64; 3],
    ) -> Result<Self> {
        Self::new([f0 - delta_below, f0, f0 + delta_above], sigma, priors)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.means, sigma, self.priors)
    }

    pub fn means(&self) -> [f64; 3] {
        self.means
    }

    pub fn mean(&self, state: StateSymbol) -> f64 {
        self.means[state.index()]
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn priors(&self) -> [f64; 3] {
        self.priors
    }

    /// Same as [`compute_thresholds`].
    pub fn thresholds(&self) -> Result<Thresholds> {
        compute_thresholds(self)
    }
}

/// Decision boundaries on the measurement axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    lower: f64,
    upper: f64,
}

impl Thresholds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::Domain(format!(
                "thresholds ({lower}, {upper}) must be finite"
            )));
        }
        if !(lower < upper) {
            return Err(Error::DegenerateThresholds { lower, upper });
        }
        Ok(Thresholds { lower, upper })
    }

    /// Boundary between -1 and 0.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Boundary between 0 and +1.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    #[inline]
    pub(crate) fn classify_finite(&self, z: f64) -> StateSymbol {
        if z < self.lower {
            StateSymbol::Neg
        } else if z < self.upper {
            StateSymbol::Zero
        } else {
            StateSymbol::Pos
        }
    }
}

/// Midpoints shifted by `ln(prior ratio) * sigma^2 / spacing`.
pub fn compute_thresholds(params: &DetectorParams) -> Result<Thresholds> {
    let [m_neg, m_zero, m_pos] = params.means;
    let [p_neg, p_zero, p_pos] = params.priors;
    let var = params.sigma * params.sigma;
    let lower = 0.5 * (m_neg + m_zero) + (p_neg / p_zero).ln() * var / (m_zero - m_neg);
    let upper = 0.5 * (m_zero + m_pos) + (p_zero / p_pos).ln() * var / (m_pos - m_zero);
    Thresholds::new(lower, upper)
}

pub fn classify(z: f64, thresholds: &Thresholds) -> Result<StateSymbol> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("measurement {z} is not finite")));
    }
    Ok(thresholds.classify_finite(z))
}

/// `P(a < Z <= b)` for standard normal `Z`, evaluated on whichever tail keeps
/// the subtraction small.
pub(crate) fn normal_band(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    let p = if a >= 0.0 {
        q_unchecked(a) - q_unchecked(b)
    } else if b <= 0.0 {
        q_unchecked(-b) - q_unchecked(-a)
    } else {
        1.0 - q_unchecked(-a) - q_unchecked(b)
    };
    p.max(0.0)
}

/// Probability that each state is misclassified, in state order.
pub fn error_probabilities(params: &DetectorParams, thresholds: &Thresholds) -> [Probability; 3] {
    let [m_neg, m_zero, m_pos] = params.means;
    let s = params.sigma;
    let lo = thresholds.lower;
    let hi = thresholds.upper;
    let e_neg = q_unchecked((lo - m_neg) / s);
    let e_zero = 1.0 - normal_band((lo - m_zero) / s, (hi - m_zero) / s);
    // 1 - Q(t) == Q(-t)
    let e_pos = q_unchecked((m_pos - hi) / s);
    [
        Probability::saturating(e_neg),
        Probability::saturating(e_zero),
        Probability::saturating(e_pos),
    ]
}

/// Probability of a correct decision for each state, in state order.
pub fn detection_probabilities(
    params: &DetectorParams,
    thresholds: &Thresholds,
) -> [Probability; 3] {
    error_probabilities(params, thresholds).map(Probability::complement)
}
