use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("{path}:{line}: {message}", path = .path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("store record {key}: {message}")]
    Corruption { key: String, message: String },

    /// A statistic needed data that is neither computed nor imported.
    #[error("incomplete data for {what}; missing indices: {}", format_indices(.missing))]
    Incomplete { what: String, missing: Vec<u64> },

    /// Like `Incomplete`, but the blocking pieces ran out of wall-clock budget.
    #[error("time budget exhausted for {what}; unfinished indices: {}", format_indices(.missing))]
    Budget { what: String, missing: Vec<u64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn with_path(self, p: &std::path::Path) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(p.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }
}

fn format_indices(v: &[u64]) -> String {
    const SHOWN: usize = 40;
    let mut s = v
        .iter()
        .take(SHOWN)
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    if v.len() > SHOWN {
        s.push_str(&format!(",... ({} total)", v.len()));
    }
    s
}
