//! Measurement CSV ingestion.
//!
//! The header must start with `k` (integer index) or `timestamp` (real
//! seconds) and contain a `z_hz` column. Other columns are ignored, so our
//! own `detect`/`decode`/`simulate` output can be read back.

use std::io::Read;
use std::path::Path;

use crate::error::{CliError, Issue, IssueList};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Index,
    Timestamp,
}

impl KeyKind {
    pub fn column(self) -> &'static str {
        match self {
            KeyKind::Index => "k",
            KeyKind::Timestamp => "timestamp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// The key exactly as written in the file, echoed back in output.
    pub key: String,
    pub z_hz: f64,
    /// 1-based line in the source file.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSeries {
    pub key_kind: KeyKind,
    pub records: Vec<Measurement>,
}

impl MeasurementSeries {
    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|m| m.z_hz).collect()
    }
}

pub fn load_measurements(path: &Path) -> Result<MeasurementSeries, CliError> {
    let file =
        std::fs::File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let mut text = String::new();
    std::io::BufReader::new(file)
        .read_to_string(&mut text)
        .map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(parse_measurements(&text)?)
}

#[derive(PartialEq, PartialOrd)]
enum Key {
    Index(i64),
    Time(f64),
}

pub fn parse_measurements(text: &str) -> Result<MeasurementSeries, IssueList> {
    let fail = |issue: Issue| IssueList(vec![issue]);
    if text.trim().is_empty() {
        return Err(fail(Issue::field("", "measurement file is empty")));
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| fail(Issue::at(1, "", format!("unreadable header: {e}"))))?
        .clone();

    let key_kind = match headers.get(0) {
        Some("k") => KeyKind::Index,
        Some("timestamp") => KeyKind::Timestamp,
        other => {
            return Err(fail(Issue::at(
                1,
                other.unwrap_or(""),
                "first column must be `k` or `timestamp`",
            )))
        }
    };
    let Some(z_col) = headers.iter().position(|h| h == "z_hz") else {
        return Err(fail(Issue::at(1, "z_hz", "missing column")));
    };

    let mut issues = Vec::new();
    let mut records = Vec::new();
    let mut previous: Option<Key> = None;
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                issues.push(Issue::at(line, "", e.to_string()));
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        let raw_key = row.get(0).unwrap_or("");
        let key = match key_kind {
            KeyKind::Index => raw_key.parse::<i64>().ok().map(Key::Index),
            KeyKind::Timestamp => raw_key
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .map(Key::Time),
        };
        let z = row
            .get(z_col)
            .unwrap_or("")
            .parse::<f64>()
            .ok()
            .filter(|z| z.is_finite());

        let Some(key) = key else {
            issues.push(Issue::at(
                line,
                key_kind.column(),
                format!("`{raw_key}` is not a valid {}", key_kind.column()),
            ));
            continue;
        };
        if let Some(prev) = &previous {
            if key <= *prev {
                issues.push(Issue::at(
                    line,
                    key_kind.column(),
                    format!("`{raw_key}` is not strictly greater than the previous row"),
                ));
            }
        }
        previous = Some(key);
        match z {
            Some(z_hz) => records.push(Measurement {
                key: raw_key.to_string(),
                z_hz,
                line,
            }),
            None => issues.push(Issue::at(
                line,
                "z_hz",
                format!("`{}` is not a finite number", row.get(z_col).unwrap_or("")),
            )),
        }
    }

    if !issues.is_empty() {
        return Err(IssueList(issues));
    }
    if records.is_empty() {
        return Err(fail(Issue::field("", "measurement file has no data rows")));
    }
    Ok(MeasurementSeries { key_kind, records })
}
