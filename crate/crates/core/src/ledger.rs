//! Spend resolution and chronological ledger replay.
//!
//! Replay is a single pass that buckets creations and spends by UTC day and
//! carries running totals forward. Snapshots hold aggregates plus the day's
//! spend list; the live set itself is never materialised per day.

use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingest::{sort_records, OutputRecord, TransactionRecord};
use crate::series::{expect_header, line_of, MetricSeries};
use crate::time::{coins, day_end, day_of, day_start, parse_date, DayRange};

/// Resolves every input against earlier outputs and emits one record per
/// transaction output, in canonical order.
///
/// `transactions` must be sorted by timestamp; an input that references an
/// output not yet created at the spender's position is reported as dangling.
pub fn match_spends(transactions: &[TransactionRecord]) -> Result<Vec<OutputRecord>> {
    let mut first_output: HashMap<&str, (usize, usize)> =
        HashMap::with_capacity(transactions.len());
    let mut records: Vec<OutputRecord> =
        Vec::with_capacity(transactions.iter().map(|t| t.outputs.len()).sum());

    for tx in transactions {
        for input in &tx.inputs {
            let dangling = || Error::DanglingInput {
                tx_id: tx.tx_id.clone(),
                source_tx: input.tx_id.clone(),
                source_index: input.index,
            };
            let &(offset, count) = first_output
                .get(input.tx_id.as_str())
                .ok_or_else(dangling)?;
            if input.index as usize >= count {
                return Err(dangling());
            }
            let spent = &mut records[offset + input.index as usize];
            if spent.created_at > tx.timestamp {
                return Err(dangling());
            }
            if spent.spent_at.is_some() {
                return Err(Error::DoubleSpend {
                    tx_id: tx.tx_id.clone(),
                    source_tx: input.tx_id.clone(),
                    source_index: input.index,
                });
            }
            spent.spent_at = Some(tx.timestamp);
        }

        if first_output
            .insert(&tx.tx_id, (records.len(), tx.outputs.len()))
            .is_some()
        {
            return Err(Error::DuplicateTransaction {
                tx_id: tx.tx_id.clone(),
            });
        }
        records.extend(
            tx.outputs
                .iter()
                .enumerate()
                .map(|(i, &value)| OutputRecord {
                    tx_id: tx.tx_id.clone(),
                    output_index: i as u32,
                    value,
                    created_at: tx.timestamp,
                    spent_at: None,
                    is_coinbase: tx.is_coinbase,
                }),
        );
    }

    sort_records(&mut records);
    Ok(records)
}

/// An output consumed on `death_day`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpendEvent<'a> {
    pub record: &'a OutputRecord,
    pub death_day: NaiveDate,
    pub lifespan_seconds: i64,
}

impl SpendEvent<'_> {
    pub fn value(&self) -> u64 {
        self.record.value
    }
}

/// End-of-day ledger state.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySnapshot<'a> {
    pub date: NaiveDate,
    pub utxo_total_value: u64,
    pub utxo_count: u64,
    /// Coinbase value created up to the end of the day.
    pub cumulative_issuance: u64,
    /// All output value created up to the end of the day.
    pub cumulative_created: u64,
    /// All output value spent up to the end of the day.
    pub cumulative_spent: u64,
    pub spent_today: Vec<SpendEvent<'a>>,
    pub created_today: Vec<&'a OutputRecord>,
    pub created_today_value: u64,
}

impl DailySnapshot<'_> {
    pub fn spent_today_value(&self) -> u64 {
        self.spent_today.iter().map(SpendEvent::value).sum()
    }
}

/// Contiguous run of daily snapshots plus the outputs already live when the
/// range opens.
#[derive(Debug, Clone)]
pub struct SnapshotSeries<'a> {
    range: DayRange,
    opening: Vec<&'a OutputRecord>,
    days: Vec<DailySnapshot<'a>>,
}

impl<'a> SnapshotSeries<'a> {
    pub fn range(&self) -> DayRange {
        self.range
    }

    /// Outputs created before the first day and still unspent at its start.
    pub fn opening(&self) -> &[&'a OutputRecord] {
        &self.opening
    }

    pub fn days(&self) -> &[DailySnapshot<'a>] {
        &self.days
    }

    pub fn get(&self, date: NaiveDate) -> Option<&DailySnapshot<'a>> {
        if !self.range.contains(date) {
            return None;
        }
        self.days.get((date - self.range.first).num_days() as usize)
    }
}

/// Replays `records` over every day of `range`.
pub fn daily_snapshots(records: &[OutputRecord], range: DayRange) -> SnapshotSeries<'_> {
    let open_ts = day_start(range.first);
    let close_ts = day_end(range.last);
    let n_days = range.len();
    let bucket = |ts: i64| (day_of(ts) - range.first).num_days() as usize;

    let mut created: Vec<Vec<&OutputRecord>> = vec![Vec::new(); n_days];
    let mut spent: Vec<Vec<&OutputRecord>> = vec![Vec::new(); n_days];
    let mut opening = Vec::new();

    let mut utxo_total_value = 0u64;
    let mut utxo_count = 0u64;
    let mut cumulative_issuance = 0u64;
    let mut cumulative_created = 0u64;
    let mut cumulative_spent = 0u64;

    for r in records {
        if r.created_at >= close_ts {
            continue;
        }
        if r.created_at < open_ts {
            cumulative_created += r.value;
            if r.is_coinbase {
                cumulative_issuance += r.value;
            }
            match r.spent_at {
                Some(s) if s < open_ts => cumulative_spent += r.value,
                _ => {
                    opening.push(r);
                    utxo_total_value += r.value;
                    utxo_count += 1;
                }
            }
        } else {
            created[bucket(r.created_at)].push(r);
        }
        if let Some(s) = r.spent_at {
            if (open_ts..close_ts).contains(&s) {
                spent[bucket(s)].push(r);
            }
        }
    }

    let mut days = Vec::with_capacity(n_days);
    for ((date, created_today), mut spent_recs) in range.days().zip(created).zip(spent) {
        spent_recs
            .sort_unstable_by(|a, b| (a.spent_at, a.sort_key()).cmp(&(b.spent_at, b.sort_key())));

        let created_today_value: u64 = created_today.iter().map(|r| r.value).sum();
        let issued: u64 = created_today
            .iter()
            .filter(|r| r.is_coinbase)
            .map(|r| r.value)
            .sum();
        let spent_today: Vec<SpendEvent> = spent_recs
            .into_iter()
            .map(|record| {
                let spent_at = record.spent_at.expect("bucketed by spent_at");
                SpendEvent {
                    record,
                    death_day: date,
                    lifespan_seconds: spent_at - record.created_at,
                }
            })
            .collect();
        let spent_value: u64 = spent_today.iter().map(SpendEvent::value).sum();

        cumulative_created += created_today_value;
        cumulative_issuance += issued;
        cumulative_spent += spent_value;
        utxo_total_value = utxo_total_value + created_today_value - spent_value;
        utxo_count = utxo_count + created_today.len() as u64 - spent_today.len() as u64;

        days.push(DailySnapshot {
            date,
            utxo_total_value,
            utxo_count,
            cumulative_issuance,
            cumulative_created,
            cumulative_spent,
            spent_today,
            created_today,
            created_today_value,
        });
    }

    SnapshotSeries {
        range,
        opening,
        days,
    }
}

/// Smallest day range covering every creation and spend in `records`.
pub fn activity_range(records: &[OutputRecord]) -> Option<DayRange> {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for r in records {
        lo = lo.min(r.created_at);
        hi = hi.max(r.spent_at.unwrap_or(r.created_at));
    }
    (lo <= hi).then(|| DayRange::new(day_of(lo), day_of(hi)).expect("lo <= hi"))
}

/// Cumulative issuance in coins at the end of each day.
pub fn supply_series(snapshots: &SnapshotSeries) -> MetricSeries {
    MetricSeries::from_points(
        "supply",
        snapshots
            .days()
            .iter()
            .map(|s| (s.date, Some(coins(s.cumulative_issuance))))
            .collect(),
    )
}

/// Flat per-day totals, the exportable part of a [`DailySnapshot`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotRow {
    pub date: NaiveDate,
    pub utxo_total_value: u64,
    pub utxo_count: u64,
    pub cumulative_issuance: u64,
    pub created_today_value: u64,
    pub spent_today_value: u64,
}

impl From<&DailySnapshot<'_>> for SnapshotRow {
    fn from(s: &DailySnapshot<'_>) -> Self {
        Self {
            date: s.date,
            utxo_total_value: s.utxo_total_value,
            utxo_count: s.utxo_count,
            cumulative_issuance: s.cumulative_issuance,
            created_today_value: s.created_today_value,
            spent_today_value: s.spent_today_value(),
        }
    }
}

pub const SNAPSHOT_HEADER: [&str; 6] = [
    "date",
    "utxo_total_value",
    "utxo_count",
    "cumulative_issuance",
    "created_today_value",
    "spent_today_value",
];

pub fn write_snapshots_csv<W: Write>(rows: &[SnapshotRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for r in rows {
        w.write_record([
            r.date.to_string(),
            r.utxo_total_value.to_string(),
            r.utxo_count.to_string(),
            r.cumulative_issuance.to_string(),
            r.created_today_value.to_string(),
            r.spent_today_value.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_snapshots_csv<R: Read>(input: R) -> Result<Vec<SnapshotRow>> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(r.headers()?, &SNAPSHOT_HEADER)?;
    let mut rows = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = line_of(&row);
        let bad =
            |i: usize| Error::malformed(line, format!("bad {} `{}`", SNAPSHOT_HEADER[i], &row[i]));
        let int = |i: usize| row[i].parse::<u64>().map_err(|_| bad(i));
        rows.push(SnapshotRow {
            date: parse_date(&row[0]).ok_or_else(|| bad(0))?,
            utxo_total_value: int(1)?,
            utxo_count: int(2)?,
            cumulative_issuance: int(3)?,
            created_today_value: int(4)?,
            spent_today_value: int(5)?,
        });
    }
    Ok(rows)
}
