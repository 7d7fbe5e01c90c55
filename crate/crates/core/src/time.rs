//! UTC day arithmetic and timestamp parsing.
//!
//! Timestamps are UNIX seconds. A calendar day is the UTC day containing a
//! timestamp; lifespans stay in seconds until they are reported.

use chrono::{DateTime, Datelike, Days, NaiveDate, NaiveDateTime, SecondsFormat};

pub const SECONDS_PER_DAY: i64 = 86_400;
pub const DAYS_PER_MONTH: i64 = 30;
pub const DAYS_PER_YEAR: i64 = 365;
pub const SECONDS_PER_YEAR: i64 = DAYS_PER_YEAR * SECONDS_PER_DAY;

/// Base units per coin.
pub const COIN: u64 = 100_000_000;

pub fn coins(base_units: u64) -> f64 {
    base_units as f64 / COIN as f64
}

pub fn day_of(ts: i64) -> NaiveDate {
    let days = ts.div_euclid(SECONDS_PER_DAY);
    NaiveDate::from_num_days_from_ce_opt(EPOCH_DAYS_FROM_CE + days as i32)
        .expect("timestamp outside the representable calendar")
}

/// First second of `date`.
pub fn day_start(date: NaiveDate) -> i64 {
    (date.num_days_from_ce() - EPOCH_DAYS_FROM_CE) as i64 * SECONDS_PER_DAY
}

/// First second after `date`.
pub fn day_end(date: NaiveDate) -> i64 {
    day_start(date) + SECONDS_PER_DAY
}

// 1970-01-01 counted from 0001-01-01 (day 1).
const EPOCH_DAYS_FROM_CE: i32 = 719_163;

/// Accepts `YYYY-MM-DDThh:mm:ssZ` or integer UNIX seconds.
pub fn parse_timestamp(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(secs) = field.parse::<i64>() {
        return Some(secs);
    }
    let body = field.strip_suffix('Z')?;
    NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M:%S")
        .ok()
        .map(|dt| dt.and_utc().timestamp())
}

pub fn format_timestamp(ts: i64) -> String {
    DateTime::from_timestamp(ts, 0)
        .expect("timestamp outside the representable calendar")
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_date(field: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(field.trim(), "%Y-%m-%d").ok()
}

/// Inclusive interval of UTC days.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayRange {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl DayRange {
    pub fn new(first: NaiveDate, last: NaiveDate) -> Option<Self> {
        (first <= last).then_some(Self { first, last })
    }

    pub fn len(&self) -> usize {
        (self.last - self.first).num_days() as usize + 1
    }

    /// Ranges are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.first <= date && date <= self.last
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.first.iter_days().take(self.len())
    }

    pub fn intersect(&self, other: &DayRange) -> Option<DayRange> {
        DayRange::new(self.first.max(other.first), self.last.min(other.last))
    }
}

pub fn add_days(date: NaiveDate, n: u64) -> NaiveDate {
    date.checked_add_days(Days::new(n)).expect("date overflow")
}

pub fn sub_days(date: NaiveDate, n: u64) -> Option<NaiveDate> {
    date.checked_sub_days(Days::new(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_and_unix_agree() {
        let iso = parse_timestamp("2020-07-02T12:00:00Z").unwrap();
        assert_eq!(iso, 1_593_691_200);
        assert_eq!(parse_timestamp("1593691200"), Some(iso));
        assert_eq!(format_timestamp(iso), "2020-07-02T12:00:00Z");
    }

    #[test]
    fn rejects_offsets_and_garbage() {
        assert_eq!(parse_timestamp("2020-07-02T12:00:00+01:00"), None);
        assert_eq!(parse_timestamp("yesterday"), None);
        assert_eq!(parse_timestamp(""), None);
    }

    #[test]
    fn day_boundaries() {
        let d = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        assert_eq!(day_of(day_start(d)), d);
        assert_eq!(day_of(day_end(d) - 1), d);
        assert_eq!(day_of(day_end(d)), d.succ_opt().unwrap());
        // pre-epoch timestamps floor toward the earlier day
        assert_eq!(day_of(-1), NaiveDate::from_ymd_opt(1969, 12, 31).unwrap());
    }

    #[test]
    fn range_iteration() {
        let r = DayRange::new(
            NaiveDate::from_ymd_opt(2020, 2, 27).unwrap(),
            NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.days().count(), 4);
        assert!(DayRange::new(r.last, r.first).is_none());
    }
}
