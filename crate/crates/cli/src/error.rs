use std::fmt;

use thiserror::Error;

/// One problem found while reading a config or measurement file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// 1-based line number, when the problem is tied to a line.
    pub line: Option<usize>,
    /// Config key or CSV column concerned.
    pub field: String,
    pub message: String,
}

impl Issue {
    pub fn at(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            line: Some(line),
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            line: None,
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "`{}`: {}", self.field, self.message)
        }
    }
}

/// Every issue found in one file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct IssueList(pub Vec<Issue>);

impl fmt::Display for IssueList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<freqhmm::Error> for CliError {
    fn from(e: freqhmm::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<IssueList> for CliError {
    fn from(e: IssueList) -> Self {
        CliError::Validation(e.to_string())
    }
}
