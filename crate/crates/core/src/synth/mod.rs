//! Deterministic synthetic chains and a brute-force metric oracle.

mod chain;
mod oracle;

pub use chain::{generate_chain, generate_prices, HoldingTime, SyntheticChainConfig};
pub use oracle::{oracle_metrics, OracleDay};
