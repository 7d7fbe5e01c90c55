//! Flat-file ingestion: pre-joined output records, raw transactions and
//! daily close prices.
//!
//! Readers are streaming iterators that validate row-local invariants as
//! they go. The `load_*` functions collect, check dataset-wide invariants
//! (uniqueness, ordering) and return the canonical in-memory form.

mod outputs;
mod prices;
mod transactions;

pub use outputs::{load_output_records, write_output_records, OutputRecordReader};
pub use prices::{load_price_series, write_price_series};
pub use transactions::{load_transactions, write_transactions, TransactionReader};

use chrono::NaiveDate;

use crate::error::{Error, Result};

pub const OUTPUT_HEADER: [&str; 6] = [
    "tx_id",
    "output_index",
    "value",
    "created_at",
    "spent_at",
    "is_coinbase",
];
pub const TRANSACTION_HEADER: [&str; 5] =
    ["tx_id", "timestamp", "is_coinbase", "inputs", "outputs"];
pub const PRICE_HEADER: [&str; 2] = ["date", "close_usd"];

/// One transaction output with its creation and (optional) spend time.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutputRecord {
    pub tx_id: String,
    pub output_index: u32,
    /// Base units (10^8 per coin).
    pub value: u64,
    pub created_at: i64,
    pub spent_at: Option<i64>,
    pub is_coinbase: bool,
}

impl OutputRecord {
    /// Canonical ordering key: creation time, then outpoint.
    pub fn sort_key(&self) -> (i64, &str, u32) {
        (self.created_at, &self.tx_id, self.output_index)
    }

    pub fn lifespan_seconds(&self) -> Option<i64> {
        self.spent_at.map(|s| s - self.created_at)
    }
}

pub(crate) fn sort_records(records: &mut [OutputRecord]) {
    records.sort_unstable_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Reference to output `index` of transaction `tx_id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutPoint {
    pub tx_id: String,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionRecord {
    pub tx_id: String,
    pub timestamp: i64,
    pub inputs: Vec<OutPoint>,
    /// Output values in base units, in output-index order.
    pub outputs: Vec<u64>,
    pub is_coinbase: bool,
}

/// Daily close prices in USD, strictly increasing in date.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarketSeries {
    points: Vec<(NaiveDate, f64)>,
}

impl MarketSeries {
    pub fn new(points: Vec<(NaiveDate, f64)>) -> Result<Self> {
        for (i, &(date, close)) in points.iter().enumerate() {
            let line = i as u64 + 1;
            if !(close > 0.0 && close.is_finite()) {
                return Err(Error::NonPositivePrice { line, value: close });
            }
            if i > 0 {
                let previous = points[i - 1].0;
                if date == previous {
                    return Err(Error::DuplicateDate { line, date });
                }
                if date < previous {
                    return Err(Error::UnorderedDate {
                        line,
                        date,
                        previous,
                    });
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(NaiveDate, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.points.binary_search_by_key(&date, |p| p.0).ok()
    }

    pub fn close(&self, date: NaiveDate) -> Option<f64> {
        self.index_of(date).map(|i| self.points[i].1)
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.points.first().map(|p| p.0)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.points.last().map(|p| p.0)
    }
}

pub(crate) fn parse_bool(field: &str) -> Option<bool> {
    match field.trim() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}
