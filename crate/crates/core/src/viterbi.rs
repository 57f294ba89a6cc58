//! Maximum-likelihood sequence estimation over the three-state trellis.
//!
//! The joint probability of emitted symbols `x` and a state path `s` is
//!
//! ```text
//! P(x, s) = initial(s_1) * prod_{k=1..K} r(x_k, s_k) * prod_{k=2..K} p(s_{k-1}, s_k)
//! ```
//!
//! Everything is computed in the log domain, with `-inf` standing for a zero
//! factor.
//!
//! Ties between optimal paths are broken towards the lexicographically
//! smallest sequence under `-1 < 0 < +1`. Scores within [`TIE_TOLERANCE`] of
//! each other count as tied, so paths that differ only by floating-point
//! summation order are treated as equal by both the decoder and the
//! exhaustive oracle.

use std::ops::Deref;

use crate::detector::StateSymbol;
use crate::error::{Error, Result};
use crate::hmm::HmmModel;

/// Absolute tolerance on log-probabilities under which two scores are tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Longest sequence [`brute_force_mlse`] will enumerate.
pub const BRUTE_FORCE_MAX_LEN: usize = 12;

/// Non-empty sequence of symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSequence(Vec<StateSymbol>);

impl SymbolSequence {
    pub fn new(symbols: Vec<StateSymbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Parameter("symbol sequence must not be empty".into()));
        }
        Ok(SymbolSequence(symbols))
    }

    /// Parses labels in `{-1, 0, 1}`.
    pub fn from_labels(labels: &[i64]) -> Result<Self> {
        let symbols = labels
            .iter()
            .map(|&l| {
                StateSymbol::from_label(l)
                    .ok_or_else(|| Error::Parameter(format!("{l} is not a state label")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    pub fn labels(&self) -> Vec<i8> {
        self.0.iter().map(|s| s.label()).collect()
    }

    pub fn into_inner(self) -> Vec<StateSymbol> {
        self.0
    }
}

impl Deref for SymbolSequence {
    type Target = [StateSymbol];

    fn deref(&self) -> &[StateSymbol] {
        &self.0
    }
}

/// Precomputed natural logs of the model parameters.
#[derive(Debug, Clone, Copy)]
struct LogModel {
    initial: [f64; 3],
    transitions: [[f64; 3]; 3],
    emissions: [[f64; 3]; 3],
}

impl LogModel {
    fn new(model: &HmmModel) -> Self {
        LogModel {
            initial: model.initial().map(f64::ln),
            transitions: model.transitions().rows().map(|row| row.map(f64::ln)),
            emissions: model.emissions().rows().map(|row| row.map(f64::ln)),
        }
    }
}

/// Log joint probability of `(x, s)`; `-inf` if any factor is zero.
pub fn joint_log_prob(x: &[StateSymbol], s: &[StateSymbol], model: &HmmModel) -> Result<f64> {
    if x.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: s.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::Parameter("sequences must not be empty".into()));
    }
    Ok(joint_log_prob_unchecked(x, s, &LogModel::new(model)))
}

fn joint_log_prob_unchecked(x: &[StateSymbol], s: &[StateSymbol], lm: &LogModel) -> f64 {
    let mut total = lm.initial[s[0].index()] + lm.emissions[x[0].index()][s[0].index()];
    for k in 1..x.len() {
        total += lm.transitions[s[k - 1].index()][s[k].index()]
            + lm.emissions[x[k].index()][s[k].index()];
    }
    total
}

/// Forward dynamic-programming lattice.
///
/// `log_scores[k][j]` is the best log joint probability of a path of length
/// `k + 1` ending in state `j`. `backpointers[k][j]` is the smallest
/// predecessor achieving it (`None` at the first step or when `j` is
/// unreachable).
#[derive(Debug, Clone, PartialEq)]
pub struct Trellis {
    pub log_scores: Vec<[f64; 3]>,
    pub backpointers: Vec<[Option<StateSymbol>; 3]>,
    // bit i set: predecessor i ties for the best score into this state
    tie_masks: Vec<[u8; 3]>,
}

impl Trellis {
    pub fn len(&self) -> usize {
        self.log_scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_scores.is_empty()
    }

    /// Best final score.
    pub fn best_score(&self) -> f64 {
        self.log_scores
            .last()
            .map(|last| last.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Recovers the lexicographically smallest optimal path.
    fn backtrack(&self) -> Vec<StateSymbol> {
        let len = self.len();
        let best = self.best_score();

        // on_path[k]: states at step k lying on some optimal path
        let mut on_path = vec![0u8; len];
        on_path[len - 1] = (0..3).fold(0, |acc, j| {
            if self.log_scores[len - 1][j] >= best - TIE_TOLERANCE {
                acc | 1 << j
            } else {
                acc
            }
        });
        for k in (1..len).rev() {
            on_path[k - 1] = (0..3)
                .filter(|j| on_path[k] & (1 << j) != 0)
                .fold(0, |acc, j| acc | self.tie_masks[k][j]);
        }

        let mut path = Vec::with_capacity(len);
        let mut prev = on_path[0].trailing_zeros() as usize;
        path.push(StateSymbol::ALL[prev]);
        for k in 1..len {
            let next = (0..3)
                .find(|&j| on_path[k] & (1 << j) != 0 && self.tie_masks[k][j] & (1 << prev) != 0)
                .expect("every on-path state has an on-path predecessor");
            path.push(StateSymbol::ALL[next]);
            prev = next;
        }
        path
    }
}

/// Fills the forward trellis for `x`.
///
/// Fails with [`Error::InfeasibleObservation`] at the first step where every
/// state has probability zero.
pub fn build_trellis(x: &[StateSymbol], model: &HmmModel) -> Result<Trellis> {
    if x.is_empty() {
        return Err(Error::Parameter("cannot decode an empty sequence".into()));
    }
    let lm = LogModel::new(model);
    let len = x.len();
    let mut log_scores = Vec::with_capacity(len);
    let mut backpointers = Vec::with_capacity(len);
    let mut tie_masks = Vec::with_capacity(len);

    let first = x[0].index();
    let start: [f64; 3] = std::array::from_fn(|s| lm.initial[s] + lm.emissions[first][s]);
    if start.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::InfeasibleObservation { step: 1 });
    }
    log_scores.push(start);
    backpointers.push([None; 3]);
    tie_masks.push([0; 3]);

    for (k, symbol) in x.iter().enumerate().skip(1) {
        let prev = log_scores[k - 1];
        let mut scores = [f64::NEG_INFINITY; 3];
        let mut pointers = [None; 3];
        let mut masks = [0u8; 3];
        for j in 0..3 {
            let candidates: [f64; 3] = std::array::from_fn(|i| prev[i] + lm.transitions[i][j]);
            let best = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if best == f64::NEG_INFINITY {
                continue;
            }
            for (i, c) in candidates.iter().enumerate() {
                if *c >= best - TIE_TOLERANCE {
                    masks[j] |= 1 << i;
                }
            }
            pointers[j] = Some(StateSymbol::ALL[masks[j].trailing_zeros() as usize]);
            scores[j] = best + lm.emissions[symbol.index()][j];
        }
        if scores.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(Error::InfeasibleObservation { step: k + 1 });
        }
        // a state made impossible by its emission cannot sit on an optimal path
        for j in 0..3 {
            if scores[j] == f64::NEG_INFINITY {
                masks[j] = 0;
            }
        }
        log_scores.push(scores);
        backpointers.push(pointers);
        tie_masks.push(masks);
    }

    Ok(Trellis {
        log_scores,
        backpointers,
        tie_masks,
    })
}

/// Most likely hidden state sequence for the emitted symbols `x`.
pub fn viterbi_decode(x: &[StateSymbol], model: &HmmModel) -> Result<SymbolSequence> {
    let trellis = build_trellis(x, model)?;
    Ok(SymbolSequence(trellis.backtrack()))
}

/// Exhaustive `3^K` search with the same objective and tie rule as
/// [`viterbi_decode`]. Only for `K <= 12`.
pub fn brute_force_mlse(x: &[StateSymbol], model: &HmmModel) -> Result<SymbolSequence> {
    let len = x.len();
    if len == 0 {
        return Err(Error::Parameter("cannot decode an empty sequence".into()));
    }
    if len > BRUTE_FORCE_MAX_LEN {
        return Err(Error::SizeGuard {
            len,
            max: BRUTE_FORCE_MAX_LEN,
        });
    }
    let lm = LogModel::new(model);
    let count = 3usize.pow(len as u32);

    // candidate n, read as base-3 digits with the first position most
    // significant, enumerates sequences in lexicographic order
    let decode = |mut n: usize| {
        let mut s = vec![StateSymbol::Neg; len];
        for slot in s.iter_mut().rev() {
            *slot = StateSymbol::ALL[n % 3];
            n /= 3;
        }
        s
    };

    let scores: Vec<f64> = (0..count)
        .map(|n| joint_log_prob_unchecked(x, &decode(n), &lm))
        .collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        let step = first_infeasible_step(x, &lm);
        return Err(Error::InfeasibleObservation { step });
    }
    let winner = scores
        .iter()
        .position(|&v| v >= best - TIE_TOLERANCE)
        .expect("maximum is attained");
    Ok(SymbolSequence(decode(winner)))
}

/// 1-based step at which every prefix path has probability zero.
fn first_infeasible_step(x: &[StateSymbol], lm: &LogModel) -> usize {
    let mut alive: [bool; 3] =
        std::array::from_fn(|s| (lm.initial[s] + lm.emissions[x[0].index()][s]).is_finite());
    if !alive.iter().any(|&a| a) {
        return 1;
    }
    for (k, symbol) in x.iter().enumerate().skip(1) {
        alive = std::array::from_fn(|j| {
            lm.emissions[symbol.index()][j].is_finite()
                && (0..3).any(|i| alive[i] && lm.transitions[i][j].is_finite())
        });
        if !alive.iter().any(|&a| a) {
            return k + 1;
        }
    }
    x.len()
}
