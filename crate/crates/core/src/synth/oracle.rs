//! Naive reference metrics: every day rescans every record.
//!
//! Nothing here touches the replay engine or the cohort code; only the
//! record type is shared. Day boundaries, bins, weights and unit
//! conversions are recomputed from first principles.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::ingest::OutputRecord;
use crate::time::DayRange;

const BIN_EDGES_DAYS: [f64; 6] = [1.0, 30.0, 365.0, 730.0, 1825.0, 3650.0];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDay {
    pub date: NaiveDate,
    pub utxo_total_value: u64,
    pub utxo_count: u64,
    pub cumulative_issuance: u64,
    pub created_today_value: u64,
    pub spent_today_value: u64,
    pub spend_count: usize,
    pub utxo_age_shares: [f64; 7],
    pub stxo_lifespan_shares: [f64; 7],
    pub wal_years: Option<f64>,
    pub cdd_coin_days: f64,
    pub velocity: Option<f64>,
    pub staking_ratio: Option<f64>,
}

fn midnight(date: NaiveDate) -> i64 {
    date.and_hms_opt(0, 0, 0)
        .expect("valid time")
        .and_utc()
        .timestamp()
}

fn bin(age_days: f64) -> usize {
    BIN_EDGES_DAYS
        .iter()
        .filter(|&&edge| age_days >= edge)
        .count()
}

fn shares(weights: [f64; 7]) -> [f64; 7] {
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        [0.0; 7]
    } else {
        weights.map(|w| w / total)
    }
}

fn scan_day(records: &[OutputRecord], date: NaiveDate) -> OracleDay {
    let open = midnight(date);
    let close = midnight(date.succ_opt().expect("date in range"));

    let mut day = OracleDay {
        date,
        utxo_total_value: 0,
        utxo_count: 0,
        cumulative_issuance: 0,
        created_today_value: 0,
        spent_today_value: 0,
        spend_count: 0,
        utxo_age_shares: [0.0; 7],
        stxo_lifespan_shares: [0.0; 7],
        wal_years: None,
        cdd_coin_days: 0.0,
        velocity: None,
        staking_ratio: None,
    };
    let mut age_weights = [0.0; 7];
    let mut life_weights = [0.0; 7];
    let mut old_value = 0.0;
    let mut live_value = 0.0;
    let mut coin_years = 0.0;
    let mut spent_coins = 0.0;

    for r in records {
        let coins = r.value as f64 / 1e8;
        if r.created_at < close {
            if r.is_coinbase {
                day.cumulative_issuance += r.value;
            }
            if r.created_at >= open {
                day.created_today_value += r.value;
            }
            let live = match r.spent_at {
                None => true,
                Some(s) => s >= close,
            };
            if live {
                day.utxo_total_value += r.value;
                day.utxo_count += 1;
                let age_days = (close - r.created_at) as f64 / 86_400.0;
                age_weights[bin(age_days)] += coins;
                live_value += coins;
                if age_days > 365.0 {
                    old_value += coins;
                }
            }
        }
        if let Some(s) = r.spent_at {
            if open <= s && s < close {
                let life_secs = (s - r.created_at) as f64;
                day.spent_today_value += r.value;
                day.spend_count += 1;
                life_weights[bin(life_secs / 86_400.0)] += coins;
                coin_years += coins * life_secs / (365.0 * 86_400.0);
                spent_coins += coins;
                day.cdd_coin_days += coins * life_secs / 86_400.0;
            }
        }
    }

    day.utxo_age_shares = shares(age_weights);
    day.stxo_lifespan_shares = shares(life_weights);
    if spent_coins > 0.0 {
        day.wal_years = Some(coin_years / spent_coins);
    }
    let supply = day.cumulative_issuance as f64 / 1e8;
    if supply > 0.0 {
        day.velocity = Some(spent_coins / supply);
    }
    if live_value > 0.0 {
        day.staking_ratio = Some(old_value / live_value);
    }
    day
}

/// O(records × days) recomputation of the replay and cohort metrics.
pub fn oracle_metrics(records: &[OutputRecord], range: DayRange) -> Vec<OracleDay> {
    let dates: Vec<NaiveDate> = range.days().collect();
    dates
        .into_par_iter()
        .map(|d| scan_day(records, d))
        .collect()
}
