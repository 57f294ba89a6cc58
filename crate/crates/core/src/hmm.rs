//! HMM parameter objects for the three-state deviation chain.
//!
//! Orientation is fixed and checked on construction:
//! - `TransitionMatrix` rows are the from-state, so every row sums to one.
//! - `EmissionMatrix` rows are the emitted symbol and columns the true state,
//!   so every column sums to one.

use std::fmt;

use thiserror::Error;

use crate::detector::{compute_thresholds, normal_band, DetectorParams, StateSymbol};
use crate::error::{Error, Result};
use crate::gaussian::q_unchecked;

/// Stochasticity tolerance for user-supplied matrices and vectors.
pub const USER_TOLERANCE: f64 = 1e-9;
/// Stochasticity tolerance for matrices built in closed form.
pub const INTERNAL_TOLERANCE: f64 = 1e-12;

const POWER_ITERATION_TOLERANCE: f64 = 1e-12;
const POWER_ITERATION_CAP: usize = 1_000_000;

pub type Matrix3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Transition,
    Emission,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixKind::Transition => f.write_str("transition"),
            MatrixKind::Emission => f.write_str("emission"),
        }
    }
}

/// First invariant found broken by [`validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("{matrix} entry ({row}, {col}) = {value} is outside [0, 1]")]
    EntryOutOfRange {
        matrix: MatrixKind,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("transition row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },
    #[error("emission column {col} sums to {sum}, expected 1")]
    ColumnSum { col: usize, sum: f64 },
    #[error("initial distribution entry {index} = {value} is negative or not finite")]
    InitialEntry { index: usize, value: f64 },
    #[error("initial distribution sums to {sum}, expected 1")]
    InitialSum { sum: f64 },
}

fn check_entries(m: &Matrix3, matrix: MatrixKind) -> std::result::Result<(), Violation> {
    for (row, values) in m.iter().enumerate() {
        for (col, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Violation::EntryOutOfRange {
                    matrix,
                    row,
                    col,
                    value,
                });
            }
        }
    }
    Ok(())
}

fn check_transitions(p: &Matrix3, tol: f64) -> std::result::Result<(), Violation> {
    check_entries(p, MatrixKind::Transition)?;
    for (row, values) in p.iter().enumerate() {
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Violation::RowSum { row, sum });
        }
    }
    Ok(())
}

fn check_emissions(r: &Matrix3, tol: f64) -> std::result::Result<(), Violation> {
    check_entries(r, MatrixKind::Emission)?;
    for col in 0..3 {
        let sum: f64 = r.iter().map(|row| row[col]).sum();
        if (sum - 1.0).abs() > tol {
            return Err(Violation::ColumnSum { col, sum });
        }
    }
    Ok(())
}

fn check_initial(initial: &[f64; 3], tol: f64) -> std::result::Result<(), Violation> {
    if let Some((index, &value)) = initial
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(Violation::InitialEntry { index, value });
    }
    let sum: f64 = initial.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Violation::InitialSum { sum });
    }
    Ok(())
}

/// Checks raw model parts against the user tolerance, reporting the first
/// violation (transition entries and rows, then emission entries and
/// columns, then the initial distribution).
pub fn validate(
    transitions: &Matrix3,
    emissions: &Matrix3,
    initial: &[f64; 3],
) -> std::result::Result<(), Violation> {
    check_transitions(transitions, USER_TOLERANCE)?;
    check_emissions(emissions, USER_TOLERANCE)?;
    check_initial(initial, USER_TOLERANCE)
}

/// Row-stochastic `p[from][to]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix(Matrix3);

impl TransitionMatrix {
    pub fn new(p: Matrix3) -> Result<Self> {
        check_transitions(&p, USER_TOLERANCE)?;
        Ok(TransitionMatrix(p))
    }

    pub fn identity() -> Self {
        TransitionMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn rows(&self) -> &Matrix3 {
        &self.0
    }

    #[inline]
    pub fn get(&self, from: StateSymbol, to: StateSymbol) -> f64 {
        self.0[from.index()][to.index()]
    }

    /// `dist * P` in the row-vector convention.
    pub fn step(&self, dist: &[f64; 3]) -> [f64; 3] {
        let p = &self.0;
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = dist[0] * p[0][j] + dist[1] * p[1][j] + dist[2] * p[2][j];
        }
        out
    }
}

/// Column-stochastic `r[emitted][true]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionMatrix(Matrix3);

impl EmissionMatrix {
    pub fn new(r: Matrix3) -> Result<Self> {
        check_emissions(&r, USER_TOLERANCE)?;
        Ok(EmissionMatrix(r))
    }

    pub fn identity() -> Self {
        EmissionMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn rows(&self) -> &Matrix3 {
        &self.0
    }

    #[inline]
    pub fn get(&self, emitted: StateSymbol, state: StateSymbol) -> f64 {
        self.0[emitted.index()][state.index()]
    }

    /// Distribution of the emitted symbol given the true state.
    pub fn column(&self, state: StateSymbol) -> [f64; 3] {
        let j = state.index();
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }
}

/// Emission matrix of the threshold detector, entry by entry:
///
/// ```text
/// r(-1, j) = 1 - Q((lower - m_j) / sigma)
/// r( 0, j) = Q((lower - m_j) / sigma) - Q((upper - m_j) / sigma)
/// r(+1, j) = Q((upper - m_j) / sigma)
/// ```
pub fn build_emission_matrix(params: &DetectorParams) -> Result<EmissionMatrix> {
    let thresholds = compute_thresholds(params)?;
    let sigma = params.sigma();
    let mut r = [[0.0; 3]; 3];
    for (j, m) in params.means().into_iter().enumerate() {
        let a = (thresholds.lower() - m) / sigma;
        let b = (thresholds.upper() - m) / sigma;
        r[0][j] = q_unchecked(-a);
        r[1][j] = normal_band(a, b);
        r[2][j] = q_unchecked(b);
    }
    check_emissions(&r, INTERNAL_TOLERANCE)?;
    Ok(EmissionMatrix(r))
}

/// The triple `(P, R, initial)` a decoder needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmmModel {
    transitions: TransitionMatrix,
    emissions: EmissionMatrix,
    initial: [f64; 3],
}

impl HmmModel {
    pub fn new(
        transitions: TransitionMatrix,
        emissions: EmissionMatrix,
        initial: [f64; 3],
    ) -> Result<Self> {
        check_initial(&initial, USER_TOLERANCE)?;
        Ok(HmmModel {
            transitions,
            emissions,
            initial,
        })
    }

    /// Model whose emissions come from the detector and whose initial
    /// distribution is the detector prior.
    pub fn from_detector(transitions: TransitionMatrix, params: &DetectorParams) -> Result<Self> {
        let emissions = build_emission_matrix(params)?;
        Self::new(transitions, emissions, params.priors())
    }

    pub fn transitions(&self) -> &TransitionMatrix {
        &self.transitions
    }

    pub fn emissions(&self) -> &EmissionMatrix {
        &self.emissions
    }

    pub fn initial(&self) -> [f64; 3] {
        self.initial
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        validate(self.transitions.rows(), self.emissions.rows(), &self.initial)
    }
}

/// True when some power of `p` is strictly positive (irreducible and aperiodic).
fn is_primitive(p: &Matrix3) -> bool {
    let pattern: [[bool; 3]; 3] = p.map(|row| row.map(|v| v > 0.0));
    let mut power = pattern;
    // Wielandt bound for n = 3: (n - 1)^2 + 1 = 5
    for _ in 1..5 {
        if power.iter().flatten().all(|&b| b) {
            return true;
        }
        let mut next = [[false; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                next[i][j] = (0..3).any(|k| power[i][k] && pattern[k][j]);
            }
        }
        power = next;
    }
    power.iter().flatten().all(|&b| b)
}

/// Long-run occupancy `pi` with `pi * P = pi`, by power iteration from the
/// uniform vector.
pub fn stationary_distribution(transitions: &TransitionMatrix) -> Result<[f64; 3]> {
    if !is_primitive(transitions.rows()) {
        return Err(Error::Structural(
            "transition matrix is reducible or periodic; stationary law is not unique".into(),
        ));
    }
    let mut pi = [1.0 / 3.0; 3];
    for _ in 0..POWER_ITERATION_CAP {
        let mut next = transitions.step(&pi);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let delta = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if delta <= POWER_ITERATION_TOLERANCE {
            return Ok(pi);
        }
    }
    Err(Error::Structural(format!(
        "power iteration did not converge within {POWER_ITERATION_CAP} steps"
    )))
}
