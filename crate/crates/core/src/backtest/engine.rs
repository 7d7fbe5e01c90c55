use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use super::{BacktestConfig, Side, Signal};
use crate::error::{Error, Result};
use crate::ingest::MarketSeries;
use crate::series::{expect_header, fmt_f64, line_of, MetricSeries};
use crate::time::{parse_date, DayRange};

/// Orders below this many coins are not placed.
pub const DUST_UNITS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trade {
    pub date: NaiveDate,
    pub side: Side,
    pub units: f64,
    pub price_usd: f64,
    pub fee_usd: f64,
    pub cash_after: f64,
    pub holdings_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub initial_capital_usd: f64,
    pub trades: Vec<Trade>,
    /// Cash plus holdings marked at each day's close, after that day's fill.
    pub equity: MetricSeries,
    pub roi_percent: f64,
    pub sharpe_annualized: Option<f64>,
}

/// Executes `signals` against `market` closes over the configured range
/// (default: the span of the signals, or the whole market when there are
/// none). Signals outside the range are ignored.
pub fn run_backtest(
    signals: &[(NaiveDate, Signal)],
    market: &MarketSeries,
    config: &BacktestConfig,
) -> Result<BacktestResult> {
    config.validate()?;
    let range = config
        .range
        .or_else(|| match (signals.first(), signals.last()) {
            (Some(a), Some(b)) => DayRange::new(a.0, b.0),
            _ => DayRange::new(market.first_date()?, market.last_date()?),
        });

    let mut todays: HashMap<NaiveDate, Signal> = HashMap::new();
    if let Some(range) = range {
        for &(date, signal) in signals.iter().filter(|(d, _)| range.contains(*d)) {
            if market.close(date).is_none() {
                return Err(Error::MissingPrice(date));
            }
            todays.insert(date, signal);
        }
    }

    let mut cash = config.initial_capital_usd;
    let mut holdings = 0.0f64;
    let mut trades = Vec::new();
    let mut equity = MetricSeries::new("equity_usd");
    let fee = config.fee_rate;

    let days = market
        .points()
        .iter()
        .filter(|(d, _)| range.is_some_and(|r| r.contains(*d)));
    for &(date, price) in days {
        match todays.get(&date).copied().unwrap_or(Signal::Hold) {
            Signal::Buy => {
                let units = config.trade_cap_units.min(cash / (price * (1.0 + fee)));
                if units > DUST_UNITS {
                    let notional = units * price;
                    cash = (cash - notional * (1.0 + fee)).max(0.0);
                    holdings += units;
                    trades.push(Trade {
                        date,
                        side: Side::Buy,
                        units,
                        price_usd: price,
                        fee_usd: notional * fee,
                        cash_after: cash,
                        holdings_after: holdings,
                    });
                }
            }
            Signal::Sell => {
                let units = config.trade_cap_units.min(holdings);
                if units > DUST_UNITS {
                    let notional = units * price;
                    cash += notional * (1.0 - fee);
                    holdings = (holdings - units).max(0.0);
                    trades.push(Trade {
                        date,
                        side: Side::Sell,
                        units,
                        price_usd: price,
                        fee_usd: notional * fee,
                        cash_after: cash,
                        holdings_after: holdings,
                    });
                }
            }
            Signal::Hold => {}
        }
        equity.push(date, Some(cash + holdings * price));
    }

    let mut result = BacktestResult {
        initial_capital_usd: config.initial_capital_usd,
        trades,
        sharpe_annualized: sharpe_annualized(&equity),
        equity,
        roi_percent: 0.0,
    };
    result.roi_percent = roi(&result);
    Ok(result)
}

/// Final equity over initial capital, in percent.
pub fn roi(result: &BacktestResult) -> f64 {
    let last = result.equity.values().flatten().last();
    match last {
        Some(last) => (last - result.initial_capital_usd) / result.initial_capital_usd * 100.0,
        None => 0.0,
    }
}

/// mean / sample-std of daily simple returns, scaled by √365. `None` with
/// fewer than two returns or zero dispersion.
pub fn sharpe_annualized(equity: &MetricSeries) -> Option<f64> {
    let values: Vec<f64> = equity.values().flatten().collect();
    let returns: Vec<f64> = values.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    if returns.len() < 2 {
        return None;
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    (std > 0.0).then(|| mean / std * 365f64.sqrt())
}

pub const TRADES_HEADER: [&str; 7] = [
    "date",
    "side",
    "units",
    "price_usd",
    "fee_usd",
    "cash_after",
    "holdings_after",
];

pub fn write_trades_csv<W: Write>(trades: &[Trade], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRADES_HEADER)?;
    for t in trades {
        w.write_record([
            t.date.to_string(),
            t.side.to_string(),
            fmt_f64(t.units),
            fmt_f64(t.price_usd),
            fmt_f64(t.fee_usd),
            fmt_f64(t.cash_after),
            fmt_f64(t.holdings_after),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_trades_csv<R: Read>(input: R) -> Result<Vec<Trade>> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(r.headers()?, &TRADES_HEADER)?;
    let mut trades = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = line_of(&row);
        let bad =
            |i: usize| Error::malformed(line, format!("bad {} `{}`", TRADES_HEADER[i], &row[i]));
        let num = |i: usize| row[i].parse::<f64>().map_err(|_| bad(i));
        trades.push(Trade {
            date: parse_date(&row[0]).ok_or_else(|| bad(0))?,
            side: row[1].parse().map_err(|_| bad(1))?,
            units: num(2)?,
            price_usd: num(3)?,
            fee_usd: num(4)?,
            cash_after: num(5)?,
            holdings_after: num(6)?,
        });
    }
    Ok(trades)
}

pub fn write_equity_csv<W: Write>(equity: &MetricSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "equity_usd"])?;
    for (date, v) in &equity.points {
        w.write_record([date.to_string(), v.map(fmt_f64).unwrap_or_default()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_equity_csv<R: Read>(input: R) -> Result<MetricSeries> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(r.headers()?, &["date", "equity_usd"])?;
    let mut equity = MetricSeries::new("equity_usd");
    for row in r.records() {
        let row = row?;
        let line = line_of(&row);
        let date = parse_date(&row[0])
            .ok_or_else(|| Error::malformed(line, format!("bad date `{}`", &row[0])))?;
        let value = match &row[1] {
            "" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::malformed(line, format!("bad equity `{v}`")))?,
            ),
        };
        equity.push(date, value);
    }
    Ok(equity)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub strategy: &'a str,
    pub roi_percent: f64,
    pub sharpe_annualized: Option<f64>,
    pub trade_count: usize,
    pub final_equity_usd: Option<f64>,
    pub config: &'a BacktestConfig,
}

impl<'a> Summary<'a> {
    pub fn new(strategy: &'a str, result: &BacktestResult, config: &'a BacktestConfig) -> Self {
        Self {
            strategy,
            roi_percent: result.roi_percent,
            sharpe_annualized: result.sharpe_annualized,
            trade_count: result.trades.len(),
            final_equity_usd: result.equity.values().flatten().last(),
            config,
        }
    }
}
