use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("no edges")]
    NoEdges,

    #[error("node index {index} out of range (graph has {count} nodes)")]
    NodeOutOfRange { index: u32, count: u32 },

    #[error("ranking covers {ranking} nodes but the graph has {graph}")]
    RankingSizeMismatch { ranking: usize, graph: usize },

    #[error("invalid ranking: {0}")]
    InvalidRanking(RankingIssues),

    #[error("edge ({u}, {v}) is not backward under the current ranking")]
    NotBackward { u: u32, v: u32 },

    #[error("component of size {size} exceeds the exhaustive-search limit {limit}")]
    SccTooLarge { size: usize, limit: usize },

    #[error("empty rank interval")]
    EmptyInterval,

    #[error("invalid partition config: {0}")]
    InvalidPartition(String),

    #[error("graph has {count} nodes, above the exact-search limit {limit}")]
    TooLargeForExact { count: usize, limit: usize },

    #[error("checkpoint does not match the input graph: {0}")]
    CheckpointMismatch(String),

    #[error("unknown stage `{0}`")]
    UnknownStage(String),

    #[error("{message}")]
    InvalidInput { message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn invalid_input(message: impl Into<String>) -> Self {
        Error::InvalidInput {
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// Offending IDs found while validating an external ranking. Each list is
/// sorted and deduplicated; display truncates after [`LIST_CAP`] entries.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RankingIssues {
    pub duplicates: Vec<String>,
    pub unknown: Vec<String>,
    pub missing: Vec<String>,
}

pub const LIST_CAP: usize = 20;

impl RankingIssues {
    pub fn is_empty(&self) -> bool {
        self.duplicates.is_empty() && self.unknown.is_empty() && self.missing.is_empty()
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, label: &str, ids: &[String]) -> fmt::Result {
    if ids.is_empty() {
        return Ok(());
    }
    write!(f, " {} [", label)?;
    for (i, id) in ids.iter().take(LIST_CAP).enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{id}")?;
    }
    if ids.len() > LIST_CAP {
        write!(f, ", … {} more", ids.len() - LIST_CAP)?;
    }
    write!(f, "]")
}

impl fmt::Display for RankingIssues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} duplicate, {} unknown, {} missing",
            self.duplicates.len(),
            self.unknown.len(),
            self.missing.len()
        )?;
        write_list(f, "duplicates:", &self.duplicates)?;
        write_list(f, "unknown:", &self.unknown)?;
        write_list(f, "missing:", &self.missing)
    }
}
