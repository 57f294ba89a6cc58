//! Synthetic experiments: chain simulation, the two symbol-generation paths,
//! detection sweeps, Monte Carlo accuracy comparison and m-step prediction.
//!
//! Accuracy is the fraction of positions where an estimate matches the
//! hidden sequence.
//!
//! Trial `t` of a Monte Carlo run draws everything from
//! `RngStream::new(base_seed, t)`, so results do not depend on scheduling.
//! With the `parallel` feature (on by default) trials run on the rayon pool
//! of the caller.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::detector::{
    compute_thresholds, detection_probabilities, DetectorParams, StateSymbol,
};
use crate::error::{Error, Result};
use crate::gaussian::{check_weights, RngStream};
use crate::hmm::{EmissionMatrix, HmmModel, TransitionMatrix};
use crate::viterbi::{viterbi_decode, SymbolSequence};

/// Number of 1-percentage-point histogram bins over `[0, 100]`.
pub const HISTOGRAM_BINS: usize = 100;

/// Draws a length-`len` path of the hidden chain.
pub fn simulate_states(
    model: &HmmModel,
    len: usize,
    rng: &mut RngStream,
) -> Result<SymbolSequence> {
    if len == 0 {
        return Err(Error::Parameter("sequence length must be at least 1".into()));
    }
    let p = model.transitions().rows();
    let mut states = Vec::with_capacity(len);
    let mut current = StateSymbol::ALL[rng.pick_index(&model.initial())];
    states.push(current);
    for _ in 1..len {
        current = StateSymbol::ALL[rng.pick_index(&p[current.index()])];
        states.push(current);
    }
    SymbolSequence::new(states)
}

/// Emits one symbol per hidden state from the matching column of `R`.
pub fn emit_symbols(
    hidden: &[StateSymbol],
    emissions: &EmissionMatrix,
    rng: &mut RngStream,
) -> Result<SymbolSequence> {
    let columns = StateSymbol::ALL.map(|s| emissions.column(s));
    let symbols = hidden
        .iter()
        .map(|s| StateSymbol::ALL[rng.pick_index(&columns[s.index()])])
        .collect();
    SymbolSequence::new(symbols)
}

/// Noisy measurements `z_k ~ N(m_{s_k}, sigma^2)`.
pub fn synthesize_measurements(
    hidden: &[StateSymbol],
    params: &DetectorParams,
    rng: &mut RngStream,
) -> Vec<f64> {
    let sigma = params.sigma();
    hidden
        .iter()
        .map(|&s| params.mean(s) + sigma * rng.next_standard_normal())
        .collect()
}

/// Fraction of positions where `estimate` equals `truth`.
pub fn accuracy(estimate: &[StateSymbol], truth: &[StateSymbol]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: estimate.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Parameter("cannot score empty sequences".into()));
    }
    Ok(matches(estimate, truth) as f64 / truth.len() as f64)
}

fn matches(a: &[StateSymbol], b: &[StateSymbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

/// Outcome of one simulate / emit / decode round.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub hidden: SymbolSequence,
    pub emitted: SymbolSequence,
    pub decoded: SymbolSequence,
    pub ht_accuracy: f64,
    pub va_accuracy: f64,
}

/// Runs trial `trial` of a Monte Carlo experiment.
pub fn run_trial(model: &HmmModel, len: usize, base_seed: u64, trial: u64) -> Result<TrialResult> {
    let mut rng = RngStream::new(base_seed, trial);
    let hidden = simulate_states(model, len, &mut rng)?;
    let emitted = emit_symbols(&hidden, model.emissions(), &mut rng)?;
    let decoded = viterbi_decode(&emitted, model)?;
    let ht_accuracy = accuracy(&emitted, &hidden)?;
    let va_accuracy = accuracy(&decoded, &hidden)?;
    Ok(TrialResult {
        hidden,
        emitted,
        decoded,
        ht_accuracy,
        va_accuracy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    /// Sequence length per trial.
    pub len: usize,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            len: 100,
            trials: 10_000,
            base_seed: 0,
        }
    }
}

/// Aggregate accuracy statistics, in percent.
///
/// Standard deviations are population (method-of-moments) estimates.
/// Histogram bin `b` counts accuracies in `[b, b + 1)` percent, with 100%
/// folded into the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub len: usize,
    pub ht_mean: f64,
    pub ht_std: f64,
    pub va_mean: f64,
    pub va_std: f64,
    pub histogram_ht: Vec<u64>,
    pub histogram_va: Vec<u64>,
}

impl MonteCarloSummary {
    /// `va_mean - ht_mean`, in percentage points.
    pub fn gap(&self) -> f64 {
        self.va_mean - self.ht_mean
    }

    fn from_counts(len: usize, counts: &[(u32, u32)]) -> Self {
        let trials = counts.len();
        let to_pct = |m: u32| 100.0 * m as f64 / len as f64;
        let stats = |values: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = values.collect();
            let mean = v.iter().sum::<f64>() / trials as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / trials as f64;
            (mean, var.sqrt())
        };
        let (ht_mean, ht_std) = stats(&mut counts.iter().map(|c| to_pct(c.0)));
        let (va_mean, va_std) = stats(&mut counts.iter().map(|c| to_pct(c.1)));

        let bin = |m: u32| ((100 * m as usize) / len).min(HISTOGRAM_BINS - 1);
        let mut histogram_ht = vec![0u64; HISTOGRAM_BINS];
        let mut histogram_va = vec![0u64; HISTOGRAM_BINS];
        for &(ht, va) in counts {
            histogram_ht[bin(ht)] += 1;
            histogram_va[bin(va)] += 1;
        }
        MonteCarloSummary {
            trials,
            len,
            ht_mean,
            ht_std,
            va_mean,
            va_std,
            histogram_ht,
            histogram_va,
        }
    }
}

fn trial_counts(model: &HmmModel, len: usize, base_seed: u64, trial: u64) -> Result<(u32, u32)> {
    let mut rng = RngStream::new(base_seed, trial);
    let hidden = simulate_states(model, len, &mut rng)?;
    let emitted = emit_symbols(&hidden, model.emissions(), &mut rng)?;
    let decoded = viterbi_decode(&emitted, model)?;
    Ok((
        matches(&emitted, &hidden) as u32,
        matches(&decoded, &hidden) as u32,
    ))
}

fn check_config(config: &MonteCarloConfig) -> Result<()> {
    if config.trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    if config.len == 0 {
        return Err(Error::Parameter("sequence length must be at least 1".into()));
    }
    Ok(())
}

/// Monte Carlo comparison of hypothesis-test and Viterbi accuracy, one trial
/// after another on the calling thread.
pub fn run_monte_carlo_sequential(
    model: &HmmModel,
    config: &MonteCarloConfig,
) -> Result<MonteCarloSummary> {
    check_config(config)?;
    let counts = (0..config.trials as u64)
        .map(|t| trial_counts(model, config.len, config.base_seed, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloSummary::from_counts(config.len, &counts))
}

/// Monte Carlo comparison of hypothesis-test and Viterbi accuracy.
///
/// Output is identical to [`run_monte_carlo_sequential`] for any thread count.
#[cfg(feature = "parallel")]
pub fn run_monte_carlo(model: &HmmModel, config: &MonteCarloConfig) -> Result<MonteCarloSummary> {
    check_config(config)?;
    let counts = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| trial_counts(model, config.len, config.base_seed, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloSummary::from_counts(config.len, &counts))
}

#[cfg(not(feature = "parallel"))]
pub fn run_monte_carlo(model: &HmmModel, config: &MonteCarloConfig) -> Result<MonteCarloSummary> {
    run_monte_carlo_sequential(model, config)
}

/// Expected hypothesis-test accuracy (fraction) over a length-`len` run:
/// `sum_j w_j r(j, j)` where `w` is the state occupancy averaged over the
/// `len` marginals `initial * P^(k-1)`.
pub fn expected_ht_accuracy(model: &HmmModel, len: usize) -> Result<f64> {
    if len == 0 {
        return Err(Error::Parameter("sequence length must be at least 1".into()));
    }
    let mut marginal = model.initial();
    let mut occupancy = [0.0; 3];
    for _ in 0..len {
        occupancy.iter_mut().zip(&marginal).for_each(|(o, m)| *o += m);
        marginal = model.transitions().step(&marginal);
    }
    Ok(StateSymbol::ALL
        .iter()
        .map(|&s| occupancy[s.index()] / len as f64 * model.emissions().get(s, s))
        .sum())
}

/// Converts a sweep point in dB to the noise level, `sigma = 10^(-dB / 10)`.
pub fn sigma_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn snr_db_from_sigma(sigma: f64) -> f64 {
    10.0 * (1.0 / sigma).log10()
}

/// One row of a detection sweep. A degenerate configuration at this noise
/// level is kept as the row's error rather than aborting the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub sigma: f64,
    pub detection: Result<[f64; 3]>,
}

fn sweep_point(template: &DetectorParams, sigma: f64) -> Result<[f64; 3]> {
    let params = template.with_sigma(sigma)?;
    let thresholds = compute_thresholds(&params)?;
    Ok(detection_probabilities(&params, &thresholds).map(f64::from))
}

/// Detection probabilities over a grid of SNR values in dB. Only the means
/// and priors of `template` are used.
pub fn detection_sweep(template: &DetectorParams, snr_db: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some(bad) = snr_db.iter().find(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("SNR grid value {bad} is not finite")));
    }
    Ok(snr_db
        .iter()
        .map(|&db| {
            let sigma = sigma_from_snr_db(db);
            SweepRow {
                snr_db: db,
                sigma,
                detection: sweep_point(template, sigma),
            }
        })
        .collect())
}

/// Detection probabilities over a grid of raw noise levels.
pub fn detection_sweep_sigma(template: &DetectorParams, sigmas: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some(bad) = sigmas.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Parameter(format!(
            "sigma grid value {bad} must be positive and finite"
        )));
    }
    Ok(sigmas
        .iter()
        .map(|&sigma| SweepRow {
            snr_db: snr_db_from_sigma(sigma),
            sigma,
            detection: sweep_point(template, sigma),
        })
        .collect())
}

/// State distribution `m` steps ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionVector {
    pub probs: [f64; 3],
    pub horizon: usize,
}

/// `initial * P^horizon` (row-vector convention).
pub fn predict(
    transitions: &TransitionMatrix,
    initial: [f64; 3],
    horizon: usize,
) -> Result<PredictionVector> {
    check_weights(&initial, "initial distribution")?;
    let mut probs = initial;
    for _ in 0..horizon {
        probs = transitions.step(&probs);
    }
    Ok(PredictionVector { probs, horizon })
}

/// Predictions for every horizon `0..=max_horizon`.
pub fn predict_path(
    transitions: &TransitionMatrix,
    initial: [f64; 3],
    max_horizon: usize,
) -> Result<Vec<PredictionVector>> {
    check_weights(&initial, "initial distribution")?;
    let mut out = Vec::with_capacity(max_horizon + 1);
    let mut probs = initial;
    for horizon in 0..=max_horizon {
        out.push(PredictionVector { probs, horizon });
        probs = transitions.step(&probs);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::classify;
    use crate::detector::StateSymbol::{Neg, Pos, Zero};
    use crate::hmm::{build_emission_matrix, stationary_distribution};
    use approx::assert_abs_diff_eq;

    const REFERENCE_P: [[f64; 3]; 3] = [[0.2, 0.7, 0.1], [0.1, 0.8, 0.1], [0.1, 0.7, 0.2]];
    // four-digit table with the middle column nudged so it sums to one
    const PRINTED_R: [[f64; 3]; 3] = [
        [0.9814, 0.0018, 0.0000],
        [0.0186, 0.9964, 0.0186],
        [0.0000, 0.0018, 0.9814],
    ];

    fn reference_p() -> TransitionMatrix {
        TransitionMatrix::new(REFERENCE_P).unwrap()
    }

    fn model_with(r: EmissionMatrix, initial: [f64; 3]) -> HmmModel {
        HmmModel::new(reference_p(), r, initial).unwrap()
    }

    #[test]
    fn absorbing_start_gives_constant_path() {
        let model =
            HmmModel::new(TransitionMatrix::identity(), EmissionMatrix::identity(), [0.0, 1.0, 0.0])
                .unwrap();
        let s = simulate_states(&model, 500, &mut RngStream::new(1, 0)).unwrap();
        assert!(s.iter().all(|&x| x == Zero));
    }

    #[test]
    fn zero_length_rejected() {
        let model = model_with(EmissionMatrix::identity(), [0.1, 0.8, 0.1]);
        assert!(simulate_states(&model, 0, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn long_chain_statistics() {
        let n = 1_000_000;
        let model = model_with(EmissionMatrix::identity(), [0.1, 0.8, 0.1]);
        let s = simulate_states(&model, n, &mut RngStream::new(2, 0)).unwrap();
        let mut pairs = [[0usize; 3]; 3];
        for w in s.windows(2) {
            pairs[w[0].index()][w[1].index()] += 1;
        }
        for i in 0..3 {
            let row: usize = pairs[i].iter().sum();
            for j in 0..3 {
                let f = pairs[i][j] as f64 / row as f64;
                assert!((f - REFERENCE_P[i][j]).abs() <= 0.005, "p[{i}][{j}] ~ {f}");
            }
        }
        let pi = stationary_distribution(&reference_p()).unwrap();
        for st in StateSymbol::ALL {
            let f = s.iter().filter(|&&x| x == st).count() as f64 / n as f64;
            assert!((f - pi[st.index()]).abs() <= 0.005);
        }
    }

    #[test]
    fn identity_emissions_copy_states() {
        let model = model_with(EmissionMatrix::identity(), [0.25, 0.6, 0.15]);
        let mut rng = RngStream::new(3, 0);
        let s = simulate_states(&model, 1000, &mut rng).unwrap();
        let x = emit_symbols(&s, &EmissionMatrix::identity(), &mut rng).unwrap();
        assert_eq!(x, s);
    }

    #[test]
    fn printed_emission_column_frequencies() {
        let n = 1_000_000;
        let r = EmissionMatrix::new(PRINTED_R).unwrap();
        let x = emit_symbols(&vec![Zero; n], &r, &mut RngStream::new(4, 0)).unwrap();
        let expected = [0.0018, 0.9964, 0.0018];
        for s in StateSymbol::ALL {
            let f = x.iter().filter(|&&v| v == s).count() as f64 / n as f64;
            assert!((f - expected[s.index()]).abs() <= 0.0005);
        }
    }

    #[test]
    fn emissions_are_reproducible() {
        let r = EmissionMatrix::new(PRINTED_R).unwrap();
        let hidden = vec![Neg, Zero, Pos, Zero, Zero, Neg];
        let a = emit_symbols(&hidden, &r, &mut RngStream::new(9, 9)).unwrap();
        let b = emit_symbols(&hidden, &r, &mut RngStream::new(9, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_noise_measurements_sit_on_means() {
        let params = DetectorParams::new([49.0, 50.0, 51.0], 1e-9, [0.1, 0.8, 0.1]).unwrap();
        let z = synthesize_measurements(&[Neg, Zero, Pos], &params, &mut RngStream::new(1, 1));
        for (v, m) in z.iter().zip([49.0, 50.0, 51.0]) {
            assert!((v - m).abs() <= 1e-6);
        }
        let again = synthesize_measurements(&[Neg, Zero, Pos], &params, &mut RngStream::new(1, 1));
        assert_eq!(z, again);
    }

    #[test]
    fn classified_measurements_reproduce_emission_columns() {
        let n = 1_000_000;
        let params = DetectorParams::new([49.4, 50.0, 50.7], 0.4, [0.25, 0.6, 0.15]).unwrap();
        let r = build_emission_matrix(&params).unwrap();
        let t = compute_thresholds(&params).unwrap();
        for (k, s) in StateSymbol::ALL.into_iter().enumerate() {
            let z = synthesize_measurements(&vec![s; n], &params, &mut RngStream::new(6, k as u64));
            let mut counts = [0usize; 3];
            for v in z {
                counts[classify(v, &t).unwrap().index()] += 1;
            }
            for i in 0..3 {
                let f = counts[i] as f64 / n as f64;
                assert!((f - r.rows()[i][s.index()]).abs() <= 0.002);
            }
        }
    }

    #[test]
    fn accuracy_examples() {
        let a = [Neg, Zero, Zero, Pos];
        let b = [Neg, Zero, Pos, Pos];
        assert_eq!(accuracy(&a, &a).unwrap(), 1.0);
        assert_eq!(accuracy(&a, &b).unwrap(), 0.75);
        assert_eq!(accuracy(&[Neg, Neg], &[Pos, Zero]).unwrap(), 0.0);
        assert!(accuracy(&a, &b[..3]).is_err());
    }

    #[test]
    fn sweep_detection_at_threshold_snr() {
        let template = DetectorParams::new([49.6, 50.0, 50.4], 1.0, [1.0 / 3.0; 3]).unwrap();
        let rows = detection_sweep(&template, &[12.6]).unwrap();
        assert_abs_diff_eq!(rows[0].sigma, 10f64.powf(-1.26), epsilon = 1e-15);
        for p in rows[0].detection.as_ref().unwrap() {
            assert!(*p >= 0.99);
        }
    }

    #[test]
    fn sweep_monotone_and_saturating() {
        let template = DetectorParams::new([49.6, 50.0, 50.4], 1.0, [1.0 / 3.0; 3]).unwrap();
        let grid: Vec<f64> = (0..=80).map(|i| -10.0 + 0.5 * i as f64).collect();
        let rows = detection_sweep(&template, &grid).unwrap();
        for w in rows.windows(2) {
            let (a, b) = (w[0].detection.as_ref().unwrap(), w[1].detection.as_ref().unwrap());
            for i in 0..3 {
                assert!(b[i] >= a[i]);
            }
        }
        let top = detection_sweep(&template, &[60.0]).unwrap();
        for p in top[0].detection.as_ref().unwrap() {
            assert!((1.0 - p).abs() <= 1e-6);
        }
    }

    #[test]
    fn sweep_reports_degenerate_rows() {
        let template = DetectorParams::new([49.9, 50.0, 50.1], 1.0, [0.45, 0.1, 0.45]).unwrap();
        let rows = detection_sweep(&template, &[-3.0, 20.0]).unwrap();
        assert!(matches!(rows[0].detection, Err(Error::DegenerateThresholds { .. })));
        assert!(rows[1].detection.is_ok());
        assert!(detection_sweep(&template, &[f64::NAN]).is_err());
        assert!(detection_sweep_sigma(&template, &[0.0]).is_err());
    }

    #[test]
    fn sigma_and_db_round_trip() {
        for sigma in [0.01, 0.055, 0.4, 2.0] {
            assert_abs_diff_eq!(sigma_from_snr_db(snr_db_from_sigma(sigma)), sigma, epsilon = 1e-14);
        }
    }

    #[test]
    fn noiseless_monte_carlo_is_perfect() {
        let model = model_with(EmissionMatrix::identity(), [0.25, 0.6, 0.15]);
        let cfg = MonteCarloConfig {
            len: 100,
            trials: 200,
            base_seed: 5,
        };
        let summary = run_monte_carlo(&model, &cfg).unwrap();
        assert_eq!(summary.ht_mean, 100.0);
        assert_eq!(summary.va_mean, 100.0);
        assert_eq!(summary.ht_std, 0.0);
        assert_eq!(summary.histogram_ht[99], 200);
    }

    #[test]
    fn parallel_matches_sequential() {
        let params = DetectorParams::new([49.4, 50.0, 50.7], 0.4, [0.25, 0.6, 0.15]).unwrap();
        let model = HmmModel::from_detector(reference_p(), &params).unwrap();
        let cfg = MonteCarloConfig {
            len: 100,
            trials: 500,
            base_seed: 77,
        };
        let a = run_monte_carlo(&model, &cfg).unwrap();
        let b = run_monte_carlo_sequential(&model, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.histogram_ht.iter().sum::<u64>(), 500);
        assert_eq!(a.histogram_va.iter().sum::<u64>(), 500);
        assert!((0.0..=100.0).contains(&a.ht_mean) && (0.0..=100.0).contains(&a.va_mean));
    }

    #[test]
    fn trial_matches_summary_counts() {
        let params = DetectorParams::new([49.4, 50.0, 50.7], 0.8, [0.25, 0.6, 0.15]).unwrap();
        let model = HmmModel::from_detector(reference_p(), &params).unwrap();
        let cfg = MonteCarloConfig {
            len: 40,
            trials: 1,
            base_seed: 10,
        };
        let summary = run_monte_carlo_sequential(&model, &cfg).unwrap();
        let trial = run_trial(&model, 40, 10, 0).unwrap();
        assert_abs_diff_eq!(summary.ht_mean, 100.0 * trial.ht_accuracy, epsilon = 1e-12);
        assert_abs_diff_eq!(summary.va_mean, 100.0 * trial.va_accuracy, epsilon = 1e-12);
        assert_eq!(trial.hidden.len(), 40);
        assert_eq!(trial.emitted.len(), 40);
        assert_eq!(trial.decoded.len(), 40);
    }

    #[test]
    fn monte_carlo_rejects_zero_trials() {
        let model = model_with(EmissionMatrix::identity(), [0.25, 0.6, 0.15]);
        let cfg = MonteCarloConfig {
            len: 10,
            trials: 0,
            base_seed: 0,
        };
        assert!(run_monte_carlo(&model, &cfg).is_err());
    }

    #[test]
    fn expected_accuracy_of_noiseless_model() {
        let model = model_with(EmissionMatrix::identity(), [0.25, 0.6, 0.15]);
        assert_abs_diff_eq!(expected_ht_accuracy(&model, 100).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prediction_examples() {
        let p = reference_p();
        let start = [0.3, 0.3, 0.4];
        assert_eq!(predict(&p, start, 0).unwrap().probs, start);
        assert_eq!(predict(&p, [0.0, 1.0, 0.0], 1).unwrap().probs, [0.1, 0.8, 0.1]);
        let far = predict(&p, start, 64).unwrap();
        for (v, e) in far.probs.iter().zip([1.0 / 9.0, 7.0 / 9.0, 1.0 / 9.0]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-6);
        }
        assert!(predict(&p, [0.5, 0.5, 0.5], 3).is_err());
    }

    #[test]
    fn prediction_semigroup() {
        let p = reference_p();
        let start = [0.6, 0.1, 0.3];
        for a in 0..10 {
            for b in 0..10 {
                let direct = predict(&p, start, a + b).unwrap().probs;
                let mid = predict(&p, start, a).unwrap().probs;
                let composed = predict(&p, mid, b).unwrap().probs;
                for i in 0..3 {
                    assert!((direct[i] - composed[i]).abs() <= 1e-12);
                }
            }
        }
        let path = predict_path(&p, start, 12).unwrap();
        assert_eq!(path.len(), 13);
        assert_eq!(path[7], predict(&p, start, 7).unwrap());
    }
}
