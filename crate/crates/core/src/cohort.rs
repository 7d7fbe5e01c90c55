//! Age and lifespan cohorts, Weighted Average Lifespan and CoinDaysDestroyed.
//!
//! Weights are token amounts. Month and year are fixed at 30 and 365 days.
//! Per-day weighted sums are accumulated exactly in `u128` base-unit-seconds
//! and divided once, so WAL is invariant under integer rescaling of values.

use std::io::{Read, Write};

use chrono::NaiveDate;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::ingest::OutputRecord;
use crate::ledger::{SnapshotSeries, SpendEvent};
use crate::series::{expect_header, fmt_f64, line_of, MetricSeries};
use crate::time::{day_end, parse_date, COIN, SECONDS_PER_DAY, SECONDS_PER_YEAR};

/// Age-bin boundaries in days. `n` boundaries delimit `n + 1` bins, each
/// closed below and open above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgeBinning {
    boundaries_days: Vec<i64>,
}

impl Default for AgeBinning {
    /// <1d, 1d-1mo, 1mo-1y, 1y-2y, 2y-5y, 5y-10y, >10y
    fn default() -> Self {
        Self {
            boundaries_days: vec![1, 30, 365, 730, 1825, 3650],
        }
    }
}

const DEFAULT_LABELS: [&str; 7] = [
    "bin_lt1d",
    "bin_1d_1mo",
    "bin_1mo_1y",
    "bin_1y_2y",
    "bin_2y_5y",
    "bin_5y_10y",
    "bin_gt10y",
];

impl AgeBinning {
    pub fn new(boundaries_days: Vec<i64>) -> Result<Self> {
        if boundaries_days.first().is_some_and(|b| *b <= 0)
            || boundaries_days.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config(format!(
                "age boundaries must be positive and strictly increasing: {boundaries_days:?}"
            )));
        }
        Ok(Self { boundaries_days })
    }

    pub fn boundaries_days(&self) -> &[i64] {
        &self.boundaries_days
    }

    pub fn bin_count(&self) -> usize {
        self.boundaries_days.len() + 1
    }

    pub fn bin_of(&self, age_seconds: i64) -> usize {
        self.boundaries_days
            .partition_point(|b| b * SECONDS_PER_DAY <= age_seconds)
    }

    pub fn labels(&self) -> Vec<String> {
        if *self == Self::default() {
            return DEFAULT_LABELS.iter().map(|s| s.to_string()).collect();
        }
        let mut labels = Vec::with_capacity(self.bin_count());
        let mut lo = 0;
        for &b in &self.boundaries_days {
            labels.push(format!("bin_{lo}d_{b}d"));
            lo = b;
        }
        labels.push(format!("bin_ge{lo}d"));
        labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    UtxoAge,
    StxoLifespan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyAgeDistribution {
    pub date: NaiveDate,
    pub kind: DistributionKind,
    pub shares: Vec<f64>,
    pub total_value: u64,
}

impl DailyAgeDistribution {
    fn from_bins(date: NaiveDate, kind: DistributionKind, bins: &[u64]) -> Self {
        let total_value: u64 = bins.iter().sum();
        let shares = if total_value == 0 {
            vec![0.0; bins.len()]
        } else {
            bins.iter()
                .map(|&v| v as f64 / total_value as f64)
                .collect()
        };
        Self {
            date,
            kind,
            shares,
            total_value,
        }
    }
}

/// Fenwick tree of live value keyed by creation timestamp.
struct LiveAgeIndex {
    stamps: Vec<i64>,
    tree: Vec<i64>,
}

impl LiveAgeIndex {
    fn new(mut stamps: Vec<i64>) -> Self {
        stamps.sort_unstable();
        stamps.dedup();
        let tree = vec![0; stamps.len() + 1];
        Self { stamps, tree }
    }

    fn add(&mut self, created_at: i64, delta: i64) {
        let mut i = self
            .stamps
            .binary_search(&created_at)
            .expect("timestamp registered at construction")
            + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Live value created at or before `t`.
    fn created_by(&self, t: i64) -> u64 {
        let mut i = self.stamps.partition_point(|&s| s <= t);
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum as u64
    }
}

/// Value-weighted age breakdown of the live UTXO set at the end of a day.
#[derive(Debug, Clone, PartialEq)]
pub struct LiveAgeProfile {
    pub date: NaiveDate,
    pub total_value: u64,
    pub bins: Vec<u64>,
    /// Live value strictly older than 365 days.
    pub older_than_year: u64,
}

/// Replays the live set through a creation-time index and reads each day's
/// age profile with O(bins · log n) prefix queries.
pub fn live_age_profiles(series: &SnapshotSeries, binning: &AgeBinning) -> Vec<LiveAgeProfile> {
    let stamps = series
        .opening()
        .iter()
        .copied()
        .chain(
            series
                .days()
                .iter()
                .flat_map(|s| s.created_today.iter().copied()),
        )
        .map(|r: &OutputRecord| r.created_at)
        .collect();
    let mut index = LiveAgeIndex::new(stamps);
    for r in series.opening() {
        index.add(r.created_at, r.value as i64);
    }

    let mut profiles = Vec::with_capacity(series.days().len());
    for snap in series.days() {
        for r in &snap.created_today {
            index.add(r.created_at, r.value as i64);
        }
        for e in &snap.spent_today {
            index.add(e.record.created_at, -(e.record.value as i64));
        }
        let end = day_end(snap.date);
        let total = index.created_by(i64::MAX);
        debug_assert_eq!(total, snap.utxo_total_value);

        // aged[k] = live value with age >= boundary k
        let aged: Vec<u64> = binning
            .boundaries_days()
            .iter()
            .map(|b| index.created_by(end - b * SECONDS_PER_DAY))
            .collect();
        let mut bins = Vec::with_capacity(binning.bin_count());
        let mut upper = total;
        for &a in &aged {
            bins.push(upper - a);
            upper = a;
        }
        bins.push(upper);

        profiles.push(LiveAgeProfile {
            date: snap.date,
            total_value: total,
            bins,
            older_than_year: index.created_by(end - SECONDS_PER_YEAR - 1),
        });
    }
    profiles
}

/// Share of live UTXO value per age bin, evaluated at each day's end.
pub fn utxo_age_distribution(
    series: &SnapshotSeries,
    binning: &AgeBinning,
) -> Vec<DailyAgeDistribution> {
    live_age_profiles(series, binning)
        .iter()
        .map(|p| DailyAgeDistribution::from_bins(p.date, DistributionKind::UtxoAge, &p.bins))
        .collect()
}

/// Share of each day's spent value per lifespan bin.
pub fn stxo_lifespan_distribution(
    series: &SnapshotSeries,
    binning: &AgeBinning,
) -> Vec<DailyAgeDistribution> {
    series
        .days()
        .iter()
        .map(|snap| {
            let mut bins = vec![0u64; binning.bin_count()];
            for e in &snap.spent_today {
                bins[binning.bin_of(e.lifespan_seconds)] += e.value();
            }
            DailyAgeDistribution::from_bins(snap.date, DistributionKind::StxoLifespan, &bins)
        })
        .collect()
}

/// Σ value × lifespan in base-unit-seconds, and Σ value in base units.
fn weighted_lifespan(events: &[SpendEvent]) -> (u128, u128) {
    events.iter().fold((0, 0), |(num, den), e| {
        (
            num + e.value() as u128 * e.lifespan_seconds as u128,
            den + e.value() as u128,
        )
    })
}

fn reduced_ratio(num: u128, den: u128) -> f64 {
    let g = num.gcd(&den).max(1);
    (num / g) as f64 / (den / g) as f64
}

/// Token-weighted mean lifespan in years; `None` when nothing was spent.
pub fn wal(events: &[SpendEvent]) -> Option<f64> {
    let (num, den) = weighted_lifespan(events);
    (den > 0).then(|| reduced_ratio(num, den * SECONDS_PER_YEAR as u128))
}

/// Coin-days destroyed by `events`.
pub fn cdd(events: &[SpendEvent]) -> f64 {
    let (num, _) = weighted_lifespan(events);
    reduced_ratio(num, COIN as u128 * SECONDS_PER_DAY as u128)
}

pub fn wal_series(series: &SnapshotSeries) -> MetricSeries {
    MetricSeries::from_points(
        "wal_years",
        series
            .days()
            .iter()
            .map(|s| (s.date, wal(&s.spent_today)))
            .collect(),
    )
}

pub fn cdd_series(series: &SnapshotSeries) -> MetricSeries {
    MetricSeries::from_points(
        "cdd_coin_days",
        series
            .days()
            .iter()
            .map(|s| (s.date, Some(cdd(&s.spent_today))))
            .collect(),
    )
}

/// One row per day: bin shares, then the day's total value in base units.
pub fn write_distribution_csv<W: Write>(
    rows: &[DailyAgeDistribution],
    binning: &AgeBinning,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(distribution_header(binning))?;
    for row in rows {
        let mut rec = vec![row.date.to_string()];
        rec.extend(row.shares.iter().map(|s| fmt_f64(*s)));
        rec.push(row.total_value.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn distribution_header(binning: &AgeBinning) -> Vec<String> {
    let mut header = vec!["date".to_string()];
    header.extend(binning.labels());
    header.push("total_value".to_string());
    header
}

pub fn read_distribution_csv<R: Read>(
    input: R,
    binning: &AgeBinning,
    kind: DistributionKind,
) -> Result<Vec<DailyAgeDistribution>> {
    let header = distribution_header(binning);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut r = csv::Reader::from_reader(input);
    expect_header(r.headers()?, &header)?;
    let n = binning.bin_count();
    let mut rows = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = line_of(&row);
        let bad = |i: usize| Error::malformed(line, format!("bad {} `{}`", header[i], &row[i]));
        let date = parse_date(&row[0]).ok_or_else(|| bad(0))?;
        let shares = (1..=n)
            .map(|i| row[i].parse::<f64>().map_err(|_| bad(i)))
            .collect::<Result<Vec<_>>>()?;
        let total_value = row[n + 1].parse::<u64>().map_err(|_| bad(n + 1))?;
        rows.push(DailyAgeDistribution {
            date,
            kind,
            shares,
            total_value,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::daily_snapshots;
    use crate::time::{day_start, parse_date, DayRange};
    use proptest::prelude::*;

    const DAY: i64 = SECONDS_PER_DAY;
    const YEAR: i64 = SECONDS_PER_YEAR;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn rec(id: &str, value: u64, created: i64, spent: Option<i64>) -> OutputRecord {
        OutputRecord {
            tx_id: id.into(),
            output_index: 0,
            value,
            created_at: created,
            spent_at: spent,
            is_coinbase: true,
        }
    }

    fn single_day(date: &str) -> DayRange {
        DayRange::new(d(date), d(date)).unwrap()
    }

    /// Records all spent at noon on `date` with the given (coins, lifespan).
    fn spends_on(date: &str, spends: &[(u64, i64)]) -> Vec<OutputRecord> {
        let noon = day_start(d(date)) + DAY / 2;
        spends
            .iter()
            .enumerate()
            .map(|(i, &(c, life))| rec(&format!("s{i}"), c, noon - life, Some(noon)))
            .collect()
    }

    #[test]
    fn binning_edges() {
        let b = AgeBinning::default();
        assert_eq!(b.bin_count(), 7);
        assert_eq!(b.bin_of(0), 0);
        assert_eq!(b.bin_of(DAY - 1), 0);
        assert_eq!(b.bin_of(DAY), 1);
        assert_eq!(b.bin_of(30 * DAY), 2);
        assert_eq!(b.bin_of(YEAR), 3);
        assert_eq!(b.bin_of(3650 * DAY), 6);
        assert_eq!(b.labels()[6], "bin_gt10y");
        assert!(AgeBinning::new(vec![5, 5]).is_err());
        assert!(AgeBinning::new(vec![0, 5]).is_err());
        assert_eq!(
            AgeBinning::new(vec![7]).unwrap().labels(),
            ["bin_0d_7d", "bin_ge7d"]
        );
    }

    #[test]
    fn wal_worked_example() {
        let recs = spends_on(
            "2022-05-31",
            &[(COIN, 9 * YEAR), (COIN, 6 * YEAR), (COIN, 6 * YEAR)],
        );
        let s = daily_snapshots(&recs, single_day("2022-05-31"));
        assert_eq!(wal_series(&s).get(d("2022-05-31")), Some(7.0));
        let recs = spends_on("2022-05-31", &[(COIN, 9 * YEAR), (2 * COIN, 6 * YEAR)]);
        let s = daily_snapshots(&recs, single_day("2022-05-31"));
        assert_eq!(wal_series(&s).get(d("2022-05-31")), Some(7.0));
    }

    #[test]
    fn wal_single_spend_is_identity() {
        let life = 123_456_789;
        let recs = spends_on("2022-05-31", &[(17, life)]);
        let s = daily_snapshots(&recs, single_day("2022-05-31"));
        assert_eq!(
            wal(&s.days()[0].spent_today),
            Some(life as f64 / YEAR as f64)
        );
    }

    #[test]
    fn wal_absent_on_idle_day() {
        let recs = vec![rec("a", COIN, 0, None)];
        let s = daily_snapshots(&recs, single_day("1970-01-02"));
        assert_eq!(wal_series(&s).points, vec![(d("1970-01-02"), None)]);
        assert_eq!(cdd_series(&s).get(d("1970-01-02")), Some(0.0));
    }

    #[test]
    fn cdd_worked_example() {
        let recs = spends_on("2021-03-01", &[(10 * COIN, DAY / 2)]);
        let s = daily_snapshots(&recs, single_day("2021-03-01"));
        assert_eq!(cdd_series(&s).get(d("2021-03-01")), Some(5.0));
    }

    #[test]
    fn cdd_zero_lifespan() {
        let recs = spends_on("2021-03-01", &[(10 * COIN, 0)]);
        let s = daily_snapshots(&recs, single_day("2021-03-01"));
        assert_eq!(cdd(&s.days()[0].spent_today), 0.0);
    }

    #[test]
    fn cdd_mixed_day_matches_direct_sum() {
        let spends = [
            (3 * COIN, 2 * DAY),
            (COIN / 2, DAY / 4),
            (7 * COIN, 400 * DAY + 3_600),
        ];
        let recs = spends_on("2021-03-01", &spends);
        let s = daily_snapshots(&recs, single_day("2021-03-01"));
        let direct: f64 = spends
            .iter()
            .map(|&(v, l)| v as f64 / COIN as f64 * (l as f64 / DAY as f64))
            .sum();
        let got = cdd(&s.days()[0].spent_today);
        assert!((got - direct).abs() <= 1e-12 * direct, "{got} vs {direct}");
    }

    #[test]
    fn utxo_single_cohort() {
        let created = day_start(d("2020-01-01")) + 3_600;
        let recs = vec![rec("a", 50 * COIN, created, None)];
        let query = crate::time::add_days(d("2020-01-01"), 400);
        let s = daily_snapshots(&recs, DayRange::new(query, query).unwrap());
        let dist = utxo_age_distribution(&s, &AgeBinning::default());
        assert_eq!(dist[0].shares, [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(dist[0].total_value, 50 * COIN);
    }

    #[test]
    fn utxo_two_cohorts() {
        let query = d("2021-06-01");
        let end = day_end(query);
        let recs = vec![
            rec("young", 10 * COIN, end - 2 * DAY, None),
            rec("old", 30 * COIN, end - 500 * DAY, None),
        ];
        let s = daily_snapshots(&recs, DayRange::new(query, query).unwrap());
        let dist = utxo_age_distribution(&s, &AgeBinning::default());
        assert_eq!(dist[0].shares, [0.0, 0.25, 0.0, 0.75, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_sets_give_zero_shares() {
        let s = daily_snapshots(&[], single_day("2021-06-01"));
        let b = AgeBinning::default();
        assert_eq!(utxo_age_distribution(&s, &b)[0].shares, vec![0.0; 7]);
        assert_eq!(stxo_lifespan_distribution(&s, &b)[0].shares, vec![0.0; 7]);
    }

    #[test]
    fn stxo_half_year_lands_in_month_to_year() {
        let recs = spends_on("2021-01-01", &[(7 * COIN, 183 * DAY)]);
        let s = daily_snapshots(&recs, single_day("2021-01-01"));
        let dist = stxo_lifespan_distribution(&s, &AgeBinning::default());
        assert_eq!(dist[0].shares, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn stxo_two_bins() {
        let recs = spends_on("2021-01-01", &[(8 * COIN, DAY / 5), (2 * COIN, 5 * DAY)]);
        let s = daily_snapshots(&recs, single_day("2021-01-01"));
        let dist = stxo_lifespan_distribution(&s, &AgeBinning::default());
        assert_eq!(dist[0].shares, [0.8, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn distribution_csv_header() {
        let s = daily_snapshots(&[], single_day("2021-06-01"));
        let b = AgeBinning::default();
        let mut buf = Vec::new();
        write_distribution_csv(&utxo_age_distribution(&s, &b), &b, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "date,bin_lt1d,bin_1d_1mo,bin_1mo_1y,bin_1y_2y,bin_2y_5y,bin_5y_10y,bin_gt10y,total_value\n\
             2021-06-01,0,0,0,0,0,0,0,0\n"
        );
    }

    fn arb_spends() -> impl Strategy<Value = Vec<(u64, i64)>> {
        proptest::collection::vec((1u64..1_000 * COIN, 0i64..15 * YEAR), 1..30)
    }

    proptest! {
        #[test]
        fn wal_scale_invariant(spends in arb_spends(), k in 1u64..1_000) {
            let recs = spends_on("2040-01-01", &spends);
            let scaled: Vec<_> = spends.iter().map(|&(v, l)| (v * k, l)).collect();
            let recs_k = spends_on("2040-01-01", &scaled);
            let a = daily_snapshots(&recs, single_day("2040-01-01"));
            let b = daily_snapshots(&recs_k, single_day("2040-01-01"));
            prop_assert_eq!(wal(&a.days()[0].spent_today), wal(&b.days()[0].spent_today));
        }

        #[test]
        fn wal_within_lifespan_bounds(spends in arb_spends()) {
            let recs = spends_on("2040-01-01", &spends);
            let s = daily_snapshots(&recs, single_day("2040-01-01"));
            let w = wal(&s.days()[0].spent_today).unwrap();
            let lo = spends.iter().map(|s| s.1).min().unwrap() as f64 / YEAR as f64;
            let hi = spends.iter().map(|s| s.1).max().unwrap() as f64 / YEAR as f64;
            prop_assert!(lo <= w && w <= hi, "{} not in [{}, {}]", w, lo, hi);
        }

        #[test]
        fn cdd_is_additive(a in arb_spends(), b in arb_spends()) {
            let all: Vec<_> = a.iter().chain(b.iter()).copied().collect();
            let cdd_of = |sp: &[(u64, i64)]| {
                let recs = spends_on("2040-01-01", sp);
                let s = daily_snapshots(&recs, single_day("2040-01-01"));
                cdd(&s.days()[0].spent_today)
            };
            let (x, y, z) = (cdd_of(&a), cdd_of(&b), cdd_of(&all));
            prop_assert!((x + y - z).abs() <= 1e-12 * z.max(1.0));
        }

        #[test]
        fn shares_normalised(spends in arb_spends()) {
            let recs = spends_on("2040-01-01", &spends);
            let s = daily_snapshots(&recs, single_day("2040-01-01"));
            for row in stxo_lifespan_distribution(&s, &AgeBinning::default()) {
                let total: f64 = row.shares.iter().sum();
                prop_assert!((total - 1.0).abs() <= 1e-9);
                prop_assert!(row.shares.iter().all(|s| (0.0..=1.0).contains(s)));
            }
        }
    }
}
