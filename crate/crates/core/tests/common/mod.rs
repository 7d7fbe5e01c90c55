#![allow(dead_code)]

use chrono::NaiveDate;
use coinlens::backtest::{BacktestConfig, Signal};
use coinlens::cohort::{
    cdd_series, stxo_lifespan_distribution, utxo_age_distribution, wal_series, AgeBinning,
};
use coinlens::ingest::{MarketSeries, OutputRecord};
use coinlens::ledger::{activity_range, daily_snapshots, match_spends};
use coinlens::synth::{generate_chain, oracle_metrics, HoldingTime, SyntheticChainConfig};
use coinlens::time::{
    add_days, day_start, parse_date, DayRange, COIN, SECONDS_PER_DAY, SECONDS_PER_YEAR,
};
use coinlens::valuation::{staking_ratio_series, velocity_series};

pub const DAY: i64 = SECONDS_PER_DAY;
pub const YEAR: i64 = SECONDS_PER_YEAR;

pub fn d(s: &str) -> NaiveDate {
    parse_date(s).unwrap()
}

pub fn noon(s: &str) -> i64 {
    day_start(d(s)) + DAY / 2
}

pub fn rec(
    tx: &str,
    idx: u32,
    value: u64,
    created: i64,
    spent: Option<i64>,
    coinbase: bool,
) -> OutputRecord {
    OutputRecord {
        tx_id: tx.to_owned(),
        output_index: idx,
        value,
        created_at: created,
        spent_at: spent,
        is_coinbase: coinbase,
    }
}

/// One coin held nine years and two coins held six years, all spent at
/// noon on 2022-05-31.
pub fn wal_example() -> Vec<OutputRecord> {
    let t = noon("2022-05-31");
    vec![
        rec("a", 0, COIN, t - 9 * YEAR, Some(t), true),
        rec("b", 0, COIN, t - 6 * YEAR, Some(t), true),
        rec("b", 1, COIN, t - 6 * YEAR, Some(t), true),
    ]
}

/// Ten coins spent half a day after creation.
pub fn cdd_example() -> Vec<OutputRecord> {
    let t = noon("2021-03-01");
    vec![rec("c", 0, 10 * COIN, t - DAY / 2, Some(t), true)]
}

/// Seven coins created 2020-07-02T12:00Z, spent 2021-01-01T12:00Z.
pub fn half_year_example() -> Vec<OutputRecord> {
    vec![rec(
        "f",
        0,
        7 * COIN,
        noon("2020-07-02"),
        Some(noon("2021-01-01")),
        true,
    )]
}

/// Chain parameters for the oracle comparison: 100 to 500 days, roughly
/// ten thousand outputs, cycling through the three holding-time shapes.
pub fn oracle_chain_config(seed: u64) -> SyntheticChainConfig {
    let days = 100 + (seed * 83 % 401) as u32;
    let spender_fraction = 0.65;
    // Spends per circulating lineage per day.
    let (holding, rate) = match seed % 3 {
        0 => (HoldingTime::Exponential { mean_days: 20.0 }, 1.0 / 20.0),
        1 => (HoldingTime::Fixed { days: 45.0 }, 1.0 / 45.0),
        _ => (
            HoldingTime::Bimodal {
                short_mean_days: 3.0,
                long_mean_days: 400.0,
                long_mix: 0.5,
            },
            0.5 / 3.0 + 0.5 / 400.0,
        ),
    };
    // A lineage born on an average day sees days / 2 of circulation.
    let per_output = 1.0 + spender_fraction * rate * days as f64 / 2.0;
    SyntheticChainConfig {
        seed,
        start: d("2016-01-01"),
        days,
        coinbase_per_day: 25.0,
        coinbase_outputs: ((10_000.0 / (days as f64 * per_output)).round() as u32).max(1),
        spender_fraction,
        holding,
    }
}

pub fn synthetic_records(config: &SyntheticChainConfig) -> Vec<OutputRecord> {
    match_spends(&generate_chain(config).unwrap()).unwrap()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn check(
    what: &str,
    date: NaiveDate,
    engine: Option<f64>,
    oracle: Option<f64>,
) -> Result<(), String> {
    match (engine, oracle) {
        (None, None) => Ok(()),
        (Some(a), Some(b)) if close(a, b, 1e-9) => Ok(()),
        _ => Err(format!(
            "{what} on {date}: engine {engine:?} vs oracle {oracle:?}"
        )),
    }
}

/// Compares every engine metric with the brute-force oracle over the
/// activity range. Returns the number of values compared.
pub fn compare_with_oracle(records: &[OutputRecord]) -> Result<usize, String> {
    let Some(range) = activity_range(records) else {
        return Ok(0);
    };
    let series = daily_snapshots(records, range);
    let binning = AgeBinning::default();
    let ages = utxo_age_distribution(&series, &binning);
    let lives = stxo_lifespan_distribution(&series, &binning);
    let wal = wal_series(&series);
    let cdd = cdd_series(&series);
    let velocity = velocity_series(&series);
    let staking = staking_ratio_series(&series);
    let oracle = oracle_metrics(records, range);

    let mut compared = 0;
    for (i, o) in oracle.iter().enumerate() {
        let s = &series.days()[i];
        let date = o.date;
        if s.date != date || ages[i].date != date || lives[i].date != date {
            return Err(format!("day misalignment at {date}"));
        }
        let ints = [
            ("utxo_total_value", s.utxo_total_value, o.utxo_total_value),
            ("utxo_count", s.utxo_count, o.utxo_count),
            (
                "cumulative_issuance",
                s.cumulative_issuance,
                o.cumulative_issuance,
            ),
            (
                "created_today_value",
                s.created_today_value,
                o.created_today_value,
            ),
            (
                "spent_today_value",
                s.spent_today_value(),
                o.spent_today_value,
            ),
            (
                "spend_count",
                s.spent_today.len() as u64,
                o.spend_count as u64,
            ),
        ];
        for (what, a, b) in ints {
            if a != b {
                return Err(format!("{what} on {date}: engine {a} vs oracle {b}"));
            }
        }
        for (k, (a, b)) in ages[i].shares.iter().zip(o.utxo_age_shares).enumerate() {
            check(&format!("utxo age share {k}"), date, Some(*a), Some(b))?;
        }
        for (k, (a, b)) in lives[i]
            .shares
            .iter()
            .zip(o.stxo_lifespan_shares)
            .enumerate()
        {
            check(&format!("stxo lifespan share {k}"), date, Some(*a), Some(b))?;
        }
        check("wal", date, wal.get(date), o.wal_years)?;
        check("cdd", date, cdd.get(date), Some(o.cdd_coin_days))?;
        check("velocity", date, velocity.get(date), o.velocity)?;
        check("staking", date, staking.get(date), o.staking_ratio)?;
        compared += ints.len() + 14 + 4;
    }
    if oracle.len() != series.days().len() {
        return Err("day count mismatch".into());
    }
    Ok(compared)
}

/// UTXO value against issuance minus net spent value on every day.
/// Net spent is value consumed minus value re-created by ordinary
/// transactions, so fees (none here) would be the only gap.
pub fn check_conservation(records: &[OutputRecord]) -> Result<usize, String> {
    let Some(range) = activity_range(records) else {
        return Ok(0);
    };
    let series = daily_snapshots(records, range);
    for s in series.days() {
        let recreated = s.cumulative_created - s.cumulative_issuance;
        let net_spent = s.cumulative_spent as i128 - recreated as i128;
        if s.utxo_total_value as i128 != s.cumulative_issuance as i128 - net_spent {
            return Err(format!(
                "{}: utxo {} != issuance {} - net spent {}",
                s.date, s.utxo_total_value, s.cumulative_issuance, net_spent
            ));
        }
        let live: u64 = records
            .iter()
            .filter(|r| r.created_at < day_start(add_days(s.date, 1)))
            .filter(|r| {
                r.spent_at
                    .is_none_or(|t| t >= day_start(add_days(s.date, 1)))
            })
            .map(|r| r.value)
            .sum();
        if live != s.utxo_total_value {
            return Err(format!(
                "{}: live scan {} != snapshot {}",
                s.date, live, s.utxo_total_value
            ));
        }
    }
    Ok(series.days().len())
}

/// Five trading days: prices 10, 10, 20, 20, 20 and signals Buy, Hold,
/// Sell, Hold, Hold, with a 1% fee.
pub fn backtest_fixture() -> (Vec<(NaiveDate, Signal)>, MarketSeries, BacktestConfig) {
    let start = d("2021-01-01");
    let prices = [10.0, 10.0, 20.0, 20.0, 20.0];
    let sigs = [
        Signal::Buy,
        Signal::Hold,
        Signal::Sell,
        Signal::Hold,
        Signal::Hold,
    ];
    let market = MarketSeries::new(
        prices
            .iter()
            .enumerate()
            .map(|(i, &p)| (add_days(start, i as u64), p))
            .collect(),
    )
    .unwrap();
    let signals = sigs
        .iter()
        .enumerate()
        .map(|(i, &s)| (add_days(start, i as u64), s))
        .collect();
    let config = BacktestConfig {
        fee_rate: 0.01,
        ..BacktestConfig::default()
    };
    (signals, market, config)
}

pub fn full_range(records: &[OutputRecord]) -> DayRange {
    activity_range(records).unwrap()
}
