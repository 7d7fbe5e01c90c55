//! PU-ratio quantile strategy and baselines.
//!
//! Signals fire on PU observations: Buy when today's PU is at or below the
//! `buy_quantile` of all strictly earlier observations, Sell when at or above
//! the `sell_quantile`. Orders fill at the signal day's close, sized to the
//! per-trade cap or whatever cash/holdings allow.

mod baselines;
mod engine;
mod signals;

pub use baselines::{
    buy_and_hold, ma_crossover, moving_average, DEFAULT_LONG_WINDOW, DEFAULT_SHORT_WINDOW,
};
pub use engine::{
    read_equity_csv, read_trades_csv, roi, run_backtest, sharpe_annualized, write_equity_csv,
    write_trades_csv, BacktestResult, Summary, Trade, DUST_UNITS, TRADES_HEADER,
};
pub use signals::{generate_signals, interpolated_quantile};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::time::DayRange;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        })
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "buy" => Ok(Side::Buy),
            "sell" => Ok(Side::Sell),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Buy,
    Sell,
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestConfig {
    pub initial_capital_usd: f64,
    pub fee_rate: f64,
    /// Coins per trade, applied to buys and sells alike.
    pub trade_cap_units: f64,
    pub buy_quantile: f64,
    pub sell_quantile: f64,
    /// PU observations required before the first signal.
    pub warmup_days: usize,
    #[serde(serialize_with = "ser_range")]
    pub range: Option<DayRange>,
}

fn ser_range<S: serde::Serializer>(range: &Option<DayRange>, s: S) -> Result<S::Ok, S::Error> {
    match range {
        Some(r) => s.collect_seq([r.first.to_string(), r.last.to_string()]),
        None => s.serialize_none(),
    }
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            initial_capital_usd: 100_000.0,
            fee_rate: 0.001,
            trade_cap_units: 100.0,
            buy_quantile: 0.1,
            sell_quantile: 0.9,
            warmup_days: 30,
            range: None,
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if !(0.0 <= self.buy_quantile
            && self.buy_quantile < self.sell_quantile
            && self.sell_quantile <= 1.0)
        {
            return fail("quantiles must satisfy 0 <= buy < sell <= 1");
        }
        if !(0.0..1.0).contains(&self.fee_rate) {
            return fail("fee rate must lie in [0, 1)");
        }
        if !(self.initial_capital_usd > 0.0 && self.initial_capital_usd.is_finite()) {
            return fail("initial capital must be positive");
        }
        if !(self.trade_cap_units > 0.0 && self.trade_cap_units.is_finite()) {
            return fail("trade cap must be positive");
        }
        Ok(())
    }
}
