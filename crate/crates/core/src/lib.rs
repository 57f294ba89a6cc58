//! Estimation of grid-frequency deviation states from noisy measurements.
//!
//! A measurement `z` of the grid frequency is modelled as Gaussian around one
//! of three means (negative deviation, nominal, positive deviation). The
//! [`detector`] turns each measurement into a symbol with a prior-adjusted
//! threshold test. Those symbols are the emissions of a three-state hidden
//! Markov chain ([`hmm`]), and the [`viterbi`] decoder recovers the most
//! likely hidden path. [`simulation`] generates synthetic data and compares
//! the two estimators.
//!
//! ```
//! use freqhmm::{DetectorParams, HmmModel, TransitionMatrix, viterbi_decode, classify};
//!
//! let params = DetectorParams::new([49.0, 50.0, 51.0], 0.2, [0.1, 0.8, 0.1]).unwrap();
//! let p = TransitionMatrix::new([[0.2, 0.7, 0.1], [0.1, 0.8, 0.1], [0.1, 0.7, 0.2]]).unwrap();
//! let model = HmmModel::from_detector(p, &params).unwrap();
//!
//! let thresholds = params.thresholds().unwrap();
//! let x: Vec<_> = [50.01, 49.3, 50.1, 50.02]
//!     .iter()
//!     .map(|&z| classify(z, &thresholds).unwrap())
//!     .collect();
//! let s = viterbi_decode(&x, &model).unwrap();
//! assert_eq!(s.len(), 4);
//! ```

pub mod detector;
pub mod error;
pub mod gaussian;
pub mod hmm;
pub mod simulation;
pub mod viterbi;

pub use detector::{
    classify, compute_thresholds, detection_probabilities, error_probabilities, DetectorParams,
    StateSymbol, Thresholds,
};
pub use error::{Error, Result};
pub use gaussian::{q_function, sample_categorical, sample_gaussian, Probability, RngStream};
pub use hmm::{
    build_emission_matrix, stationary_distribution, EmissionMatrix, HmmModel, TransitionMatrix,
    Violation,
};
pub use simulation::{
    accuracy, detection_sweep, detection_sweep_sigma, emit_symbols, expected_ht_accuracy,
    predict, predict_path, run_monte_carlo, run_monte_carlo_sequential, run_trial,
    simulate_states, synthesize_measurements, MonteCarloConfig, MonteCarloSummary,
    PredictionVector, SweepRow, TrialResult,
};
pub use viterbi::{brute_force_mlse, build_trellis, joint_log_prob, viterbi_decode, SymbolSequence, Trellis};
