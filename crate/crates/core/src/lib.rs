//! On-chain store-of-value analytics for UTXO ledgers.
//!
//! Pipeline: ingest output records (or raw transactions resolved with
//! [`ledger::match_spends`]), replay them day by day, derive age cohorts,
//! WAL and CDD, value the token with the Price-to-Utility ratio, and
//! backtest a quantile strategy on the PU series.

pub mod backtest;
pub mod cli;
pub mod cohort;
pub mod error;
pub mod ingest;
pub mod ledger;
pub mod series;
pub mod synth;
pub mod time;
pub mod valuation;

pub use error::{Error, Result};
