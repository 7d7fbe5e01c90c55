//! Token Utility and the Price-to-Utility ratio.
//!
//! ```text
//! TU = (velocity × staking_ratio) / (max(volatility, ε) × max(dilution, ε))
//! PU = price / TU
//! ```
//!
//! velocity: coins spent that day / supply. staking ratio: live value older
//! than 365 days / live value. dilution: trailing 365-day supply growth.
//! volatility: sample std of daily log returns over a rolling window.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;

use crate::cohort::{live_age_profiles, AgeBinning};
use crate::error::{Error, Result};
use crate::ingest::MarketSeries;
use crate::ledger::{supply_series, SnapshotSeries};
use crate::series::{expect_header, fmt_f64, line_of, MetricSeries};
use crate::time::{coins, parse_date, sub_days, DAYS_PER_YEAR};

pub const VOLATILITY_FLOOR: f64 = 1e-6;
pub const DILUTION_FLOOR: f64 = 1e-6;
pub const DEFAULT_VOL_WINDOW: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Zone {
    Undervalued,
    Normal,
    Overvalued,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Zone::Undervalued => "undervalued",
            Zone::Normal => "normal",
            Zone::Overvalued => "overvalued",
        })
    }
}

impl FromStr for Zone {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "undervalued" => Ok(Zone::Undervalued),
            "normal" => Ok(Zone::Normal),
            "overvalued" => Ok(Zone::Overvalued),
            other => Err(format!("unknown zone `{other}`")),
        }
    }
}

/// PU thresholds; both boundaries belong to the normal zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZoneThresholds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for ZoneThresholds {
    fn default() -> Self {
        Self {
            lower: 60.0,
            upper: 100.0,
        }
    }
}

pub fn valuation_zone(pu: f64, thresholds: &ZoneThresholds) -> Zone {
    if pu > thresholds.upper {
        Zone::Overvalued
    } else if pu < thresholds.lower {
        Zone::Undervalued
    } else {
        Zone::Normal
    }
}

/// Coins spent on `date` over the supply at `date`.
pub fn token_velocity(
    series: &SnapshotSeries,
    supply: &MetricSeries,
    date: NaiveDate,
) -> Option<f64> {
    let supply = supply.get(date).filter(|s| *s > 0.0)?;
    let spent = series.get(date)?.spent_today_value();
    Some(coins(spent) / supply)
}

pub fn velocity_series(series: &SnapshotSeries) -> MetricSeries {
    MetricSeries::from_points(
        "velocity",
        series
            .days()
            .iter()
            .map(|s| {
                let v = (s.cumulative_issuance > 0)
                    .then(|| coins(s.spent_today_value()) / coins(s.cumulative_issuance));
                (s.date, v)
            })
            .collect(),
    )
}

/// Live value older than one year over total live value, per day.
pub fn staking_ratio_series(series: &SnapshotSeries) -> MetricSeries {
    MetricSeries::from_points(
        "staking_ratio",
        live_age_profiles(series, &AgeBinning::default())
            .into_iter()
            .map(|p| {
                let v =
                    (p.total_value > 0).then(|| p.older_than_year as f64 / p.total_value as f64);
                (p.date, v)
            })
            .collect(),
    )
}

pub fn staking_ratio(
    series: &SnapshotSeries,
    binning: &AgeBinning,
    date: NaiveDate,
) -> Option<f64> {
    live_age_profiles(series, binning)
        .into_iter()
        .find(|p| p.date == date)
        .filter(|p| p.total_value > 0)
        .map(|p| p.older_than_year as f64 / p.total_value as f64)
}

/// supply(date) / supply(date − 365d) − 1.
pub fn dilution_rate(supply: &MetricSeries, date: NaiveDate) -> Option<f64> {
    let base_date = sub_days(date, DAYS_PER_YEAR as u64)?;
    let base = supply.get(base_date).filter(|b| *b > 0.0)?;
    let now = supply.get(date)?;
    Some(now / base - 1.0)
}

/// Sample standard deviation of the `window` daily log returns ending at
/// `date`, taken over consecutive entries of the series.
pub fn price_volatility(market: &MarketSeries, date: NaiveDate, window: usize) -> Option<f64> {
    if window < 2 {
        return None;
    }
    let end = market.index_of(date)?;
    if end < window {
        return None;
    }
    let prices = &market.points()[end - window..=end];
    let returns: Vec<f64> = prices.windows(2).map(|w| (w[1].1 / w[0].1).ln()).collect();
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UtilityInputs {
    pub date: Option<NaiveDate>,
    pub velocity: Option<f64>,
    pub staking_ratio: Option<f64>,
    pub volatility: Option<f64>,
    pub dilution: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Floors {
    pub volatility: bool,
    pub dilution: bool,
}

impl Floors {
    pub fn any(&self) -> bool {
        self.volatility || self.dilution
    }
}

impl fmt::Display for Floors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.volatility, self.dilution) {
            (false, false) => "none",
            (true, false) => "volatility",
            (false, true) => "dilution",
            (true, true) => "both",
        })
    }
}

impl FromStr for Floors {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (volatility, dilution) = match s {
            "none" => (false, false),
            "volatility" => (true, false),
            "dilution" => (false, true),
            "both" => (true, true),
            other => return Err(format!("unknown floor flag `{other}`")),
        };
        Ok(Self {
            volatility,
            dilution,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenUtility {
    pub value: f64,
    pub floors: Floors,
}

/// `None` unless all four inputs are present.
pub fn token_utility(inputs: &UtilityInputs) -> Option<TokenUtility> {
    let velocity = inputs.velocity?;
    let staking = inputs.staking_ratio?;
    let volatility = inputs.volatility?;
    let dilution = inputs.dilution?;
    let floors = Floors {
        volatility: volatility < VOLATILITY_FLOOR,
        dilution: dilution < DILUTION_FLOOR,
    };
    let value =
        (velocity * staking) / (volatility.max(VOLATILITY_FLOOR) * dilution.max(DILUTION_FLOOR));
    Some(TokenUtility { value, floors })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PuPoint {
    pub date: NaiveDate,
    pub price_usd: f64,
    pub token_utility: f64,
    pub pu: f64,
    pub zone: Zone,
}

/// One PU point per date where both a price and a positive utility exist.
pub fn pu_series(
    market: &MarketSeries,
    utility: &MetricSeries,
    thresholds: &ZoneThresholds,
) -> Vec<PuPoint> {
    utility
        .points
        .iter()
        .filter_map(|&(date, tu)| {
            let tu = tu.filter(|u| *u > 0.0)?;
            let price = market.close(date)?;
            let pu = price / tu;
            Some(PuPoint {
                date,
                price_usd: price,
                token_utility: tu,
                pu,
                zone: valuation_zone(pu, thresholds),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValuationConfig {
    pub vol_window: usize,
    pub zones: ZoneThresholds,
}

impl Default for ValuationConfig {
    fn default() -> Self {
        Self {
            vol_window: DEFAULT_VOL_WINDOW,
            zones: ZoneThresholds::default(),
        }
    }
}

/// A fully populated day: every input defined and utility positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationRow {
    pub inputs: UtilityInputs,
    pub utility: TokenUtility,
    pub point: PuPoint,
}

/// Computes every utility input per replayed day and keeps the days that
/// yield a PU point.
pub fn valuation_table(
    series: &SnapshotSeries,
    market: &MarketSeries,
    config: &ValuationConfig,
) -> Vec<ValuationRow> {
    let supply = supply_series(series);
    let velocity = velocity_series(series);
    let staking = staking_ratio_series(series);

    let mut utility = MetricSeries::new("token_utility");
    let mut rows = Vec::new();
    for snap in series.days() {
        let date = snap.date;
        let inputs = UtilityInputs {
            date: Some(date),
            velocity: velocity.get(date),
            staking_ratio: staking.get(date),
            volatility: price_volatility(market, date, config.vol_window),
            dilution: dilution_rate(&supply, date),
        };
        let tu = token_utility(&inputs);
        utility.push(date, tu.map(|t| t.value));
        if let Some(tu) = tu {
            rows.push((inputs, tu));
        }
    }

    let points = pu_series(market, &utility, &config.zones);
    let mut points = points.into_iter().peekable();
    rows.into_iter()
        .filter_map(|(inputs, utility)| {
            let point = points.next_if(|p| Some(p.date) == inputs.date)?;
            Some(ValuationRow {
                inputs,
                utility,
                point,
            })
        })
        .collect()
}

pub const VALUATION_HEADER: [&str; 10] = [
    "date",
    "price_usd",
    "velocity",
    "staking_ratio",
    "volatility",
    "dilution",
    "token_utility",
    "pu",
    "zone",
    "floored",
];

pub fn write_valuation_csv<W: Write>(rows: &[ValuationRow], out: W) -> Result<()> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VALUATION_HEADER)?;
    for row in rows {
        w.write_record([
            row.point.date.to_string(),
            fmt_f64(row.point.price_usd),
            opt(row.inputs.velocity),
            opt(row.inputs.staking_ratio),
            opt(row.inputs.volatility),
            opt(row.inputs.dilution),
            fmt_f64(row.point.token_utility),
            fmt_f64(row.point.pu),
            row.point.zone.to_string(),
            row.utility.floors.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Reads the PU points back out of a valuation export.
pub fn read_pu_csv<R: Read>(input: R) -> Result<Vec<PuPoint>> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(r.headers()?, &VALUATION_HEADER)?;
    let mut points: Vec<PuPoint> = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = line_of(&row);
        let num = |i: usize| {
            row[i].parse::<f64>().map_err(|_| {
                Error::malformed(line, format!("bad {} `{}`", VALUATION_HEADER[i], &row[i]))
            })
        };
        let date = parse_date(&row[0])
            .ok_or_else(|| Error::malformed(line, format!("bad date `{}`", &row[0])))?;
        if points.last().is_some_and(|p| p.date >= date) {
            return Err(Error::malformed(line, "dates must be strictly increasing"));
        }
        points.push(PuPoint {
            date,
            price_usd: num(1)?,
            token_utility: num(6)?,
            pu: num(7)?,
            zone: row[8]
                .parse()
                .map_err(|e: String| Error::malformed(line, e))?,
        });
    }
    Ok(points)
}
