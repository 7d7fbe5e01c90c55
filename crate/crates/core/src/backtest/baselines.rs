use chrono::NaiveDate;

use super::{run_backtest, BacktestConfig, BacktestResult, Signal};
use crate::error::Result;
use crate::ingest::MarketSeries;

pub const DEFAULT_SHORT_WINDOW: usize = 20;
pub const DEFAULT_LONG_WINDOW: usize = 50;

fn in_range<'a>(market: &'a MarketSeries, config: &BacktestConfig) -> Vec<&'a (NaiveDate, f64)> {
    market
        .points()
        .iter()
        .filter(|(d, _)| config.range.is_none_or(|r| r.contains(*d)))
        .collect()
}

/// One capped buy on the first day of the range, held to the end.
pub fn buy_and_hold(market: &MarketSeries, config: &BacktestConfig) -> Result<BacktestResult> {
    let days = in_range(market, config);
    let signals: Vec<_> = days
        .iter()
        .enumerate()
        .map(|(i, (d, _))| (*d, if i == 0 { Signal::Buy } else { Signal::Hold }))
        .collect();
    run_backtest(&signals, market, config)
}

/// Trailing simple moving average; `None` until `window` closes are seen.
pub fn moving_average(closes: &[f64], window: usize) -> Vec<Option<f64>> {
    (0..closes.len())
        .map(|i| {
            (window > 0 && i + 1 >= window)
                .then(|| closes[i + 1 - window..=i].iter().sum::<f64>() / window as f64)
        })
        .collect()
}

/// Buys when the short MA crosses above the long MA, sells when it crosses
/// below. A crossing needs the spread to change sign strictly; MA
/// differences within a relative 1e-12 of price count as zero.
pub fn ma_crossover(
    market: &MarketSeries,
    config: &BacktestConfig,
    short_window: usize,
    long_window: usize,
) -> Result<BacktestResult> {
    let days = in_range(market, config);
    let closes: Vec<f64> = days.iter().map(|p| p.1).collect();
    let short = moving_average(&closes, short_window);
    let long = moving_average(&closes, long_window);

    let spread: Vec<Option<f64>> = short
        .iter()
        .zip(&long)
        .zip(&closes)
        .map(|((s, l), price)| {
            let diff = s.zip(*l).map(|(s, l)| s - l)?;
            Some(if diff.abs() <= 1e-12 * price {
                0.0
            } else {
                diff
            })
        })
        .collect();

    let signals: Vec<_> = days
        .iter()
        .enumerate()
        .map(|(i, (date, _))| {
            let signal = match (i.checked_sub(1).and_then(|j| spread[j]), spread[i]) {
                (Some(prev), Some(now)) if prev <= 0.0 && now > 0.0 => Signal::Buy,
                (Some(prev), Some(now)) if prev >= 0.0 && now < 0.0 => Signal::Sell,
                _ => Signal::Hold,
            };
            (*date, signal)
        })
        .collect();
    run_backtest(&signals, market, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::Side;
    use crate::time::{add_days, parse_date};

    fn market(closes: &[f64]) -> MarketSeries {
        let start = parse_date("2020-01-01").unwrap();
        MarketSeries::new(
            closes
                .iter()
                .enumerate()
                .map(|(i, &c)| (add_days(start, i as u64), c))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn buy_and_hold_flat_loses_the_fee() {
        let c = BacktestConfig::default();
        let r = buy_and_hold(&market(&[20_000.0; 10]), &c).unwrap();
        assert_eq!(r.trades.len(), 1);
        let units = c.initial_capital_usd / (20_000.0 * (1.0 + c.fee_rate));
        let expected = -(units * 20_000.0 * c.fee_rate) / c.initial_capital_usd * 100.0;
        assert!(
            (r.roi_percent - expected).abs() < 1e-9,
            "{} vs {}",
            r.roi_percent,
            expected
        );
        assert!(r.roi_percent < 0.0);
    }

    #[test]
    fn buy_and_hold_doubling() {
        let c = BacktestConfig::default();
        let r = buy_and_hold(&market(&[20_000.0, 30_000.0, 40_000.0]), &c).unwrap();
        let units = c.initial_capital_usd / (20_000.0 * (1.0 + c.fee_rate));
        let expected = (units * 40_000.0 - c.initial_capital_usd) / c.initial_capital_usd * 100.0;
        assert!((r.roi_percent - expected).abs() < 1e-9);
        assert!(r.roi_percent < 100.0 && r.roi_percent > 99.0);
    }

    #[test]
    fn buy_and_hold_respects_cap() {
        let c = BacktestConfig::default();
        let r = buy_and_hold(&market(&[10.0, 10.0]), &c).unwrap();
        assert_eq!(r.trades[0].units, 100.0);
    }

    #[test]
    fn buy_and_hold_single_day() {
        let c = BacktestConfig::default();
        let r = buy_and_hold(&market(&[500.0]), &c).unwrap();
        let units = 100.0f64.min(c.initial_capital_usd / (500.0 * 1.001));
        let expected = -(units * 500.0 * 0.001) / c.initial_capital_usd * 100.0;
        assert!((r.roi_percent - expected).abs() < 1e-9);
    }

    #[test]
    fn monotone_prices_never_sell() {
        let closes: Vec<f64> = (0..200).map(|i| 100.0 + i as f64).collect();
        let r = ma_crossover(&market(&closes), &BacktestConfig::default(), 20, 50).unwrap();
        assert!(r.trades.iter().filter(|t| t.side == Side::Buy).count() <= 1);
        assert!(r.trades.iter().all(|t| t.side == Side::Buy));
    }

    #[test]
    fn flat_prices_never_trade() {
        for p in [100.0, 0.1, 33.3] {
            let r = ma_crossover(&market(&[p; 120]), &BacktestConfig::default(), 20, 50).unwrap();
            assert!(r.trades.is_empty());
        }
    }

    #[test]
    fn short_range_never_trades() {
        let closes: Vec<f64> = (0..50).map(|i| 100.0 + (i % 7) as f64).collect();
        let r = ma_crossover(&market(&closes), &BacktestConfig::default(), 20, 50).unwrap();
        assert!(r.trades.is_empty());
    }

    #[test]
    fn v_shape_crossings_match_brute_force() {
        // down 60 days, up 60 days, down 60 days
        let mut closes = Vec::new();
        for i in 0..60 {
            closes.push(300.0 - 2.0 * i as f64);
        }
        for i in 0..60 {
            closes.push(180.0 + 3.0 * i as f64);
        }
        for i in 0..60 {
            closes.push(360.0 - 2.5 * i as f64);
        }
        let m = market(&closes);
        let r = ma_crossover(&m, &BacktestConfig::default(), 20, 50).unwrap();

        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let mut expected = Vec::new();
        for t in 50..closes.len() {
            let prev = mean(&closes[t - 20..t]) - mean(&closes[t - 50..t]);
            let now = mean(&closes[t - 19..=t]) - mean(&closes[t - 49..=t]);
            if prev <= 0.0 && now > 0.0 {
                expected.push((m.points()[t].0, Side::Buy));
            } else if prev >= 0.0 && now < 0.0 {
                expected.push((m.points()[t].0, Side::Sell));
            }
        }
        let got: Vec<_> = r.trades.iter().map(|t| (t.date, t.side)).collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), 2);
    }
}
