//! Subcommand implementations. Each writes a CSV table to `out` and returns
//! the `key=value` summary line printed to stderr on completion.

use std::io::Write;

use freqhmm::simulation::HISTOGRAM_BINS;
use freqhmm::{
    classify, detection_sweep, detection_sweep_sigma, expected_ht_accuracy, predict_path,
    run_monte_carlo, simulate_states, synthesize_measurements, viterbi_decode, MonteCarloConfig,
    RngStream, StateSymbol, SweepRow,
};

use crate::config::{RunConfig, SweepGrid};
use crate::error::CliError;
use crate::format::fmt_f64;
use crate::measurements::MeasurementSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Emission,
    Detect,
    Decode,
    Simulate,
    MonteCarlo,
    Sweep,
    Predict,
}

impl Command {
    pub fn needs_input(self) -> bool {
        matches!(self, Command::Detect | Command::Decode)
    }
}

type Out<'a> = &'a mut dyn Write;

fn io_err(e: std::io::Error) -> CliError {
    CliError::io("output", e)
}

pub fn execute(
    command: Command,
    cfg: &RunConfig,
    input: Option<&MeasurementSeries>,
    out: Out<'_>,
) -> Result<String, CliError> {
    let need_input = || {
        input.ok_or_else(|| CliError::Validation("this command needs --input <csv>".into()))
    };
    match command {
        Command::Emission => emission(cfg, out),
        Command::Detect => detect(cfg, need_input()?, out),
        Command::Decode => decode(cfg, need_input()?, out),
        Command::Simulate => simulate(cfg, out),
        Command::MonteCarlo => monte_carlo(cfg, out),
        Command::Sweep => sweep(cfg, out),
        Command::Predict => predict(cfg, out),
    }
}

fn emission(cfg: &RunConfig, out: Out<'_>) -> Result<String, CliError> {
    let r = cfg.emissions()?;
    let t = cfg.detector.thresholds()?;
    writeln!(out, "emitted,true_neg,true_zero,true_pos").map_err(io_err)?;
    for (row, emitted) in r.rows().iter().zip(StateSymbol::ALL) {
        writeln!(
            out,
            "{},{},{},{}",
            emitted.label(),
            fmt_f64(row[0]),
            fmt_f64(row[1]),
            fmt_f64(row[2])
        )
        .map_err(io_err)?;
    }
    Ok(format!(
        "command=emission lower={} upper={} explicit={}",
        fmt_f64(t.lower()),
        fmt_f64(t.upper()),
        cfg.emissions.is_some()
    ))
}

fn classify_all(cfg: &RunConfig, series: &MeasurementSeries) -> Result<Vec<StateSymbol>, CliError> {
    let t = cfg.detector.thresholds()?;
    series
        .records
        .iter()
        .map(|m| classify(m.z_hz, &t).map_err(CliError::from))
        .collect()
}

fn detect(cfg: &RunConfig, series: &MeasurementSeries, out: Out<'_>) -> Result<String, CliError> {
    let x = classify_all(cfg, series)?;
    writeln!(out, "{},z_hz,x", series.key_kind.column()).map_err(io_err)?;
    for (m, s) in series.records.iter().zip(&x) {
        writeln!(out, "{},{},{}", m.key, fmt_f64(m.z_hz), s.label()).map_err(io_err)?;
    }
    Ok(format!("command=detect rows={}", x.len()))
}

fn decode(cfg: &RunConfig, series: &MeasurementSeries, out: Out<'_>) -> Result<String, CliError> {
    let model = cfg.model()?;
    let x = classify_all(cfg, series)?;
    let s_star = viterbi_decode(&x, &model)?;
    writeln!(out, "{},z_hz,x,s_star", series.key_kind.column()).map_err(io_err)?;
    for ((m, xi), si) in series.records.iter().zip(&x).zip(s_star.iter()) {
        writeln!(out, "{},{},{},{}", m.key, fmt_f64(m.z_hz), xi.label(), si.label())
            .map_err(io_err)?;
    }
    let changed = x.iter().zip(s_star.iter()).filter(|(a, b)| a != b).count();
    Ok(format!("command=decode rows={} changed={changed}", x.len()))
}

fn simulate(cfg: &RunConfig, out: Out<'_>) -> Result<String, CliError> {
    let model = cfg.model()?;
    let t = cfg.detector.thresholds()?;
    let mut rng = RngStream::new(cfg.seed, 0);
    let hidden = simulate_states(&model, cfg.len, &mut rng)?;
    let z = synthesize_measurements(&hidden, &cfg.detector, &mut rng);
    writeln!(out, "k,s,z_hz,x").map_err(io_err)?;
    let mut correct = 0;
    for (k, (s, zk)) in hidden.iter().zip(&z).enumerate() {
        let x = classify(*zk, &t)?;
        correct += usize::from(x == *s);
        writeln!(out, "{},{},{},{}", k + 1, s.label(), fmt_f64(*zk), x.label())
            .map_err(io_err)?;
    }
    Ok(format!(
        "command=simulate k={} seed={} ht_correct={correct}",
        cfg.len, cfg.seed
    ))
}

fn monte_carlo(cfg: &RunConfig, out: Out<'_>) -> Result<String, CliError> {
    let model = cfg.model()?;
    let mc = MonteCarloConfig {
        len: cfg.len,
        trials: cfg.trials,
        base_seed: cfg.seed,
    };
    let summary = run_monte_carlo(&model, &mc)?;
    writeln!(out, "bin_lo_pct,bin_hi_pct,ht_count,va_count").map_err(io_err)?;
    for bin in 0..HISTOGRAM_BINS {
        writeln!(
            out,
            "{},{},{},{}",
            bin,
            bin + 1,
            summary.histogram_ht[bin],
            summary.histogram_va[bin]
        )
        .map_err(io_err)?;
    }
    let expected = 100.0 * expected_ht_accuracy(&model, cfg.len)?;
    Ok(format!(
        "command=montecarlo trials={} k={} seed={} ht_mean={} ht_std={} va_mean={} va_std={} gap={} ht_expected={}",
        summary.trials,
        summary.len,
        cfg.seed,
        fmt_f64(summary.ht_mean),
        fmt_f64(summary.ht_std),
        fmt_f64(summary.va_mean),
        fmt_f64(summary.va_std),
        fmt_f64(summary.gap()),
        fmt_f64(expected),
    ))
}

fn sweep(cfg: &RunConfig, out: Out<'_>) -> Result<String, CliError> {
    let rows: Vec<SweepRow> = match &cfg.sweep {
        SweepGrid::SnrDb(grid) => detection_sweep(&cfg.detector, grid)?,
        SweepGrid::Sigma(grid) => detection_sweep_sigma(&cfg.detector, grid)?,
    };
    writeln!(out, "snr_db,sigma,pd_neg,pd_zero,pd_pos,status").map_err(io_err)?;
    let mut degenerate = 0;
    for row in &rows {
        match &row.detection {
            Ok(pd) => writeln!(
                out,
                "{},{},{},{},{},ok",
                fmt_f64(row.snr_db),
                fmt_f64(row.sigma),
                fmt_f64(pd[0]),
                fmt_f64(pd[1]),
                fmt_f64(pd[2])
            ),
            Err(e) => {
                degenerate += 1;
                log::warn!("sweep point sigma={}: {e}", row.sigma);
                writeln!(
                    out,
                    "{},{},,,,degenerate",
                    fmt_f64(row.snr_db),
                    fmt_f64(row.sigma)
                )
            }
        }
        .map_err(io_err)?;
    }
    Ok(format!(
        "command=sweep rows={} degenerate={degenerate}",
        rows.len()
    ))
}

fn predict(cfg: &RunConfig, out: Out<'_>) -> Result<String, CliError> {
    let p = cfg.transitions()?;
    let path = predict_path(p, cfg.detector.priors(), cfg.horizon)?;
    writeln!(out, "m,p_neg,p_zero,p_pos").map_err(io_err)?;
    for v in &path {
        writeln!(
            out,
            "{},{},{},{}",
            v.horizon,
            fmt_f64(v.probs[0]),
            fmt_f64(v.probs[1]),
            fmt_f64(v.probs[2])
        )
        .map_err(io_err)?;
    }
    Ok(format!("command=predict horizon={}", cfg.horizon))
}
