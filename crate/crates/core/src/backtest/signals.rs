use chrono::NaiveDate;

use super::{BacktestConfig, Signal};
use crate::valuation::PuPoint;

/// Empirical quantile of ascending `sorted` with linear interpolation
/// between order statistics at position `(n − 1)·q`.
pub fn interpolated_quantile(sorted: &[f64], q: f64) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Expanding-window quantile signals over strictly prior PU observations.
pub fn generate_signals(pu: &[PuPoint], config: &BacktestConfig) -> Vec<(NaiveDate, Signal)> {
    let mut history: Vec<f64> = Vec::with_capacity(pu.len());
    let mut out = Vec::with_capacity(pu.len());
    for point in pu {
        let signal = if history.is_empty() || history.len() < config.warmup_days {
            Signal::Hold
        } else {
            let buy_at = interpolated_quantile(&history, config.buy_quantile).expect("non-empty");
            let sell_at = interpolated_quantile(&history, config.sell_quantile).expect("non-empty");
            if point.pu <= buy_at {
                Signal::Buy
            } else if point.pu >= sell_at {
                Signal::Sell
            } else {
                Signal::Hold
            }
        };
        out.push((point.date, signal));
        let at = history.partition_point(|v| *v < point.pu);
        history.insert(at, point.pu);
    }
    out
}
