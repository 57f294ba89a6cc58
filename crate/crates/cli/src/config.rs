//! Run configuration file.
//!
//! Flat `key = value` lines plus two optional matrix sections, each followed
//! by three rows of three numbers. `#` starts a comment.
//!
//! ```text
//! # detector: either `means` or all of f0 / delta_f_min / delta_f_max
//! means = 49, 50, 51
//! sigma = 0.2
//! priors = 0.1, 0.8, 0.1
//!
//! k = 100            # sequence length
//! trials = 10000
//! seed = 42
//! horizon = 10
//! snr_db = 0:0.5:30  # or a list; alternatively sigma_grid = ...
//!
//! [transitions]      # rows: from-state -1, 0, +1
//! 0.2 0.7 0.1
//! 0.1 0.8 0.1
//! 0.1 0.7 0.2
//!
//! [emissions]        # optional; rows: emitted symbol, columns: true state
//! 0.9814 0.0018 0.0000
//! 0.0186 0.9965 0.0186
//! 0.0000 0.0018 0.9814
//! ```
//!
//! Validation is exhaustive: every problem in the file is reported at once.

use std::collections::HashMap;
use std::path::Path;

use freqhmm::hmm::Matrix3;
use freqhmm::{
    compute_thresholds, DetectorParams, EmissionMatrix, HmmModel, TransitionMatrix,
};

use crate::error::{CliError, Issue, IssueList};

pub const DEFAULT_LEN: usize = 100;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_HORIZON: usize = 10;

const KNOWN_KEYS: &[&str] = &[
    "means",
    "f0",
    "delta_f_min",
    "delta_f_max",
    "sigma",
    "priors",
    "k",
    "trials",
    "seed",
    "horizon",
    "snr_db",
    "sigma_grid",
];

/// Grid for the `sweep` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    SnrDb(Vec<f64>),
    Sigma(Vec<f64>),
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid::SnrDb((0..=60).map(|i| 0.5 * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub detector: DetectorParams,
    /// Set when `priors` was absent and equal priors were substituted.
    pub priors_defaulted: bool,
    pub transitions: Option<TransitionMatrix>,
    /// Explicit emission matrix; the detector's closed form is used otherwise.
    pub emissions: Option<EmissionMatrix>,
    pub len: usize,
    pub trials: usize,
    pub seed: u64,
    pub horizon: usize,
    pub sweep: SweepGrid,
}

impl RunConfig {
    pub fn transitions(&self) -> Result<&TransitionMatrix, CliError> {
        self.transitions.as_ref().ok_or_else(|| {
            CliError::Validation("this command needs a [transitions] section in the config".into())
        })
    }

    pub fn emissions(&self) -> Result<EmissionMatrix, CliError> {
        match self.emissions {
            Some(r) => Ok(r),
            None => Ok(freqhmm::build_emission_matrix(&self.detector)?),
        }
    }

    pub fn model(&self) -> Result<HmmModel, CliError> {
        Ok(HmmModel::new(
            *self.transitions()?,
            self.emissions()?,
            self.detector.priors(),
        )?)
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(parse_config_str(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Transitions,
    Emissions,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Transitions => "transitions",
            Section::Emissions => "emissions",
        }
    }
}

#[derive(Default)]
struct RawConfig {
    values: HashMap<&'static str, (usize, String)>,
    matrices: HashMap<&'static str, (usize, Vec<[f64; 3]>)>,
}

fn split_numbers(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn parse_number(token: &str) -> Result<f64, String> {
    let v: f64 = token
        .parse()
        .map_err(|_| format!("`{token}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{token}` is not a finite number"))
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    if let Some(range) = parse_range(text) {
        return range;
    }
    let values = split_numbers(text)
        .map(parse_number)
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("expected at least one number".into());
    }
    Ok(values)
}

/// `start:step:stop`, inclusive of `stop` up to rounding.
fn parse_range(text: &str) -> Option<Result<Vec<f64>, String>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return None;
    }
    let parsed = (|| {
        let start = parse_number(parts[0])?;
        let step = parse_number(parts[1])?;
        let stop = parse_number(parts[2])?;
        if !(step > 0.0) || stop < start {
            return Err(format!(
                "range {text} needs a positive step and stop >= start"
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(format!("range {text} has too many points"));
        }
        // snap to a 1e-10 grid so 0:0.2:30 yields 12.6 rather than 12.600000000000001
        let snap = |v: f64| if step >= 1e-6 { (v * 1e10).round() / 1e10 } else { v };
        Ok((0..count).map(|i| snap(start + step * i as f64)).collect())
    })();
    Some(parsed)
}

fn parse_triple(text: &str) -> Result<[f64; 3], String> {
    let values = parse_list(text)?;
    <[f64; 3]>::try_from(values.as_slice())
        .map_err(|_| format!("expected 3 numbers, found {}", values.len()))
}

/// Section being read: which one, its header line, rows so far.
type OpenSection = Option<(Section, usize, Vec<[f64; 3]>)>;

fn lex(text: &str, issues: &mut Vec<Issue>) -> RawConfig {
    let mut raw = RawConfig::default();
    let mut section: OpenSection = None;

    let close = |section: &mut OpenSection,
                 raw: &mut RawConfig,
                 issues: &mut Vec<Issue>| {
        if let Some((s, line, rows)) = section.take() {
            if rows.len() != 3 {
                issues.push(Issue::at(
                    line,
                    s.name(),
                    format!("section needs 3 rows, found {}", rows.len()),
                ));
            } else if raw.matrices.contains_key(s.name()) {
                issues.push(Issue::at(line, s.name(), "section given more than once"));
            } else {
                raw.matrices.insert(s.name(), (line, rows));
            }
        }
    };

    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = full_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_prefix('[') {
            close(&mut section, &mut raw, issues);
            let Some(name) = name.strip_suffix(']') else {
                issues.push(Issue::at(line_no, "", format!("malformed section header `{line}`")));
                continue;
            };
            match name.trim() {
                "transitions" => section = Some((Section::Transitions, line_no, Vec::new())),
                "emissions" => section = Some((Section::Emissions, line_no, Vec::new())),
                other => issues.push(Issue::at(line_no, other, "unknown section")),
            }
            continue;
        }

        if let Some((key, value)) = line.split_once('=') {
            close(&mut section, &mut raw, issues);
            let key = key.trim();
            let Some(&known) = KNOWN_KEYS.iter().find(|k| **k == key) else {
                issues.push(Issue::at(line_no, key, "unknown key"));
                continue;
            };
            if raw.values.contains_key(known) {
                issues.push(Issue::at(line_no, known, "key given more than once"));
                continue;
            }
            raw.values.insert(known, (line_no, value.trim().to_string()));
            continue;
        }

        match section.as_mut() {
            Some((s, _, rows)) => {
                if rows.len() == 3 {
                    issues.push(Issue::at(line_no, s.name(), "more than 3 rows"));
                    continue;
                }
                match parse_triple(line) {
                    Ok(row) => rows.push(row),
                    Err(msg) => {
                        issues.push(Issue::at(line_no, s.name(), msg));
                        // keep the row count honest so the section is not also
                        // reported as short
                        rows.push([f64::NAN; 3]);
                    }
                }
            }
            None => issues.push(Issue::at(
                line_no,
                "",
                format!("expected `key = value` or a section header, found `{line}`"),
            )),
        }
    }
    close(&mut section, &mut raw, issues);
    raw
}

/// Parses and validates config text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, IssueList> {
    let mut issues = Vec::new();
    let raw = lex(text, &mut issues);

    let mut number = |key: &str| -> Option<f64> {
        let (line, value) = raw.values.get(key)?;
        match parse_number(value) {
            Ok(v) => Some(v),
            Err(msg) => {
                issues.push(Issue::at(*line, key, msg));
                None
            }
        }
    };
    let f0 = number("f0");
    let delta_min = number("delta_f_min");
    let delta_max = number("delta_f_max");
    let sigma = number("sigma");

    let triple = |key: &str, issues: &mut Vec<Issue>| -> Option<[f64; 3]> {
        let (line, value) = raw.values.get(key)?;
        match parse_triple(value) {
            Ok(v) => Some(v),
            Err(msg) => {
                issues.push(Issue::at(*line, key, msg));
                None
            }
        }
    };
    let explicit_means = triple("means", &mut issues);
    let priors_given = triple("priors", &mut issues);

    let integer = |key: &str, issues: &mut Vec<Issue>| -> Option<u64> {
        let (line, value) = raw.values.get(key)?;
        match value.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                issues.push(Issue::at(
                    *line,
                    key,
                    format!("`{value}` is not a non-negative integer"),
                ));
                None
            }
        }
    };
    let len = integer("k", &mut issues);
    let trials = integer("trials", &mut issues);
    let seed = integer("seed", &mut issues);
    let horizon = integer("horizon", &mut issues);

    // mean conventions
    let has_deviation_keys = ["f0", "delta_f_min", "delta_f_max"]
        .iter()
        .any(|k| raw.values.contains_key(k));
    let means = match (raw.values.contains_key("means"), has_deviation_keys) {
        (true, true) => {
            issues.push(Issue::field(
                "means",
                "both `means` and f0/delta_f_min/delta_f_max given; use one convention",
            ));
            None
        }
        (true, false) => explicit_means,
        (false, true) => {
            for key in ["f0", "delta_f_min", "delta_f_max"] {
                if !raw.values.contains_key(key) {
                    issues.push(Issue::field(key, "missing (needed with f0 convention)"));
                }
            }
            match (f0, delta_min, delta_max) {
                (Some(f0), Some(lo), Some(hi)) => {
                    if lo <= 0.0 || hi <= 0.0 {
                        issues.push(Issue::field(
                            "delta_f_min",
                            "deviations below and above f0 must both be positive",
                        ));
                        None
                    } else {
                        Some([f0 - lo, f0, f0 + hi])
                    }
                }
                _ => None,
            }
        }
        (false, false) => {
            issues.push(Issue::field(
                "means",
                "missing; give `means` or f0/delta_f_min/delta_f_max",
            ));
            None
        }
    };
    if let Some(m) = explicit_means {
        if !(m[0] < m[1] && m[1] < m[2]) {
            issues.push(Issue::field("means", "must be strictly increasing"));
        }
    }

    if !raw.values.contains_key("sigma") {
        issues.push(Issue::field("sigma", "missing"));
    }
    if let Some(s) = sigma {
        if s <= 0.0 {
            issues.push(Issue::field("sigma", format!("must be positive, got {s}")));
        }
    }

    let priors_defaulted = !raw.values.contains_key("priors");
    let priors = if priors_defaulted {
        Some([1.0 / 3.0; 3])
    } else {
        priors_given
    };
    if let Some(p) = priors_given {
        if p.iter().any(|v| *v <= 0.0) {
            issues.push(Issue::field("priors", "entries must be strictly positive"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > freqhmm::hmm::USER_TOLERANCE {
            issues.push(Issue::field(
                "priors",
                format!("must sum to 1 (normalization), got {total}"),
            ));
        }
    }

    let matrix = |name: &str| raw.matrices.get(name).map(|(line, rows)| (*line, rows));
    let transitions = matrix("transitions").and_then(|(line, rows)| {
        let m: Matrix3 = [rows[0], rows[1], rows[2]];
        if m.iter().flatten().any(|v| v.is_nan()) {
            return None;
        }
        TransitionMatrix::new(m)
            .map_err(|e| issues.push(Issue::at(line, "transitions", e.to_string())))
            .ok()
    });
    let emissions = matrix("emissions").and_then(|(line, rows)| {
        let m: Matrix3 = [rows[0], rows[1], rows[2]];
        if m.iter().flatten().any(|v| v.is_nan()) {
            return None;
        }
        EmissionMatrix::new(m)
            .map_err(|e| issues.push(Issue::at(line, "emissions", e.to_string())))
            .ok()
    });

    let sweep = match (raw.values.get("snr_db"), raw.values.get("sigma_grid")) {
        (Some(_), Some((line, _))) => {
            issues.push(Issue::at(*line, "sigma_grid", "give either snr_db or sigma_grid"));
            None
        }
        (Some((line, v)), None) => parse_list(v)
            .map(SweepGrid::SnrDb)
            .map_err(|m| issues.push(Issue::at(*line, "snr_db", m)))
            .ok(),
        (None, Some((line, v))) => match parse_list(v) {
            Ok(g) if g.iter().all(|s| *s > 0.0) => Some(SweepGrid::Sigma(g)),
            Ok(_) => {
                issues.push(Issue::at(*line, "sigma_grid", "values must be positive"));
                None
            }
            Err(m) => {
                issues.push(Issue::at(*line, "sigma_grid", m));
                None
            }
        },
        (None, None) => Some(SweepGrid::default()),
    };

    if len == Some(0) {
        issues.push(Issue::field("k", "sequence length must be at least 1"));
    }
    if trials == Some(0) {
        issues.push(Issue::field("trials", "must be at least 1"));
    }

    let detector = if issues.is_empty() {
        match (means, sigma, priors) {
            (Some(m), Some(s), Some(p)) => match DetectorParams::new(m, s, p) {
                Ok(d) => {
                    if emissions.is_none() {
                        if let Err(e) = compute_thresholds(&d) {
                            issues.push(Issue::field("priors", e.to_string()));
                        }
                    }
                    Some(d)
                }
                Err(e) => {
                    issues.push(Issue::field("detector", e.to_string()));
                    None
                }
            },
            _ => None,
        }
    } else {
        None
    };

    if !issues.is_empty() {
        issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        return Err(IssueList(issues));
    }
    if priors_defaulted {
        log::warn!("no priors in config; using equal priors (1/3, 1/3, 1/3)");
    }

    Ok(RunConfig {
        detector: detector.expect("validated above"),
        priors_defaulted,
        transitions,
        emissions,
        len: len.map_or(DEFAULT_LEN, |v| v as usize),
        trials: trials.map_or(DEFAULT_TRIALS, |v| v as usize),
        seed: seed.unwrap_or(0),
        horizon: horizon.map_or(DEFAULT_HORIZON, |v| v as usize),
        sweep: sweep.expect("validated above"),
    })
}
