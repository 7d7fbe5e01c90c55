use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },

    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },

    #[error("line {line}: duplicate output {tx_id}:{output_index}")]
    DuplicateOutput {
        line: u64,
        tx_id: String,
        output_index: u32,
    },

    #[error("line {line}: spent_at {spent_at} precedes created_at {created_at}")]
    SpentBeforeCreated {
        line: u64,
        created_at: i64,
        spent_at: i64,
    },

    #[error("line {line}: coinbase transaction {tx_id} has inputs")]
    CoinbaseWithInputs { line: u64, tx_id: String },

    #[error("line {line}: duplicate date {date}")]
    DuplicateDate { line: u64, date: NaiveDate },

    #[error("line {line}: dates must be strictly increasing ({date} after {previous})")]
    UnorderedDate {
        line: u64,
        date: NaiveDate,
        previous: NaiveDate,
    },

    #[error("line {line}: close price must be positive, got {value}")]
    NonPositivePrice { line: u64, value: f64 },

    #[error("transaction {tx_id} spends unknown output {source_tx}:{source_index}")]
    DanglingInput {
        tx_id: String,
        source_tx: String,
        source_index: u32,
    },

    #[error("transaction {tx_id} double-spends {source_tx}:{source_index}")]
    DoubleSpend {
        tx_id: String,
        source_tx: String,
        source_index: u32,
    },

    #[error("transaction {tx_id} appears more than once")]
    DuplicateTransaction { tx_id: String },

    #[error("no price for signal date {0}")]
    MissingPrice(NaiveDate),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn malformed(line: u64, reason: impl Into<String>) -> Self {
        Error::Malformed {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
