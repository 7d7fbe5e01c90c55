use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::time::parse_date;

/// A named daily scalar series. `None` marks a day on which the metric is
/// undefined; it is exported as an empty cell, never as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub name: String,
    pub points: Vec<(NaiveDate, Option<f64>)>,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            points: Vec::new(),
        }
    }

    pub fn from_points(name: impl Into<String>, points: Vec<(NaiveDate, Option<f64>)>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }

    pub fn push(&mut self, date: NaiveDate, value: Option<f64>) {
        debug_assert!(self.points.last().is_none_or(|(d, _)| *d < date));
        self.points.push((date, value));
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Value on `date`; `None` when the date is absent or the value undefined.
    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.points
            .binary_search_by_key(&date, |(d, _)| *d)
            .ok()
            .and_then(|i| self.points[i].1)
    }

    pub fn values(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.points.iter().map(|(_, v)| *v)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "value"])?;
        for (date, value) in &self.points {
            w.write_record([date.to_string(), value.map(fmt_f64).unwrap_or_default()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(name: impl Into<String>, input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        expect_header(r.headers()?, &["date", "value"])?;
        let mut series = Self::new(name);
        for row in r.records() {
            let row = row?;
            let line = line_of(&row);
            let date = parse_date(&row[0])
                .ok_or_else(|| Error::malformed(line, format!("bad date `{}`", &row[0])))?;
            let value = match &row[1] {
                "" => None,
                v => Some(
                    v.parse::<f64>()
                        .map_err(|_| Error::malformed(line, format!("bad value `{v}`")))?,
                ),
            };
            series.points.push((date, value));
        }
        Ok(series)
    }
}

/// Shortest round-trip decimal form, so CSV exports are deterministic and
/// re-load to identical bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map_or(0, |p| p.line())
}

pub(crate) fn expect_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(Error::Header {
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    #[test]
    fn absent_values_export_as_empty_cells() {
        let s = MetricSeries::from_points(
            "wal",
            vec![(d("2021-01-01"), Some(0.5)), (d("2021-01-02"), None)],
        );
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "date,value\n2021-01-01,0.5\n2021-01-02,\n"
        );
        assert_eq!(MetricSeries::read_csv("wal", &buf[..]).unwrap(), s);
    }

    #[test]
    fn lookup() {
        let s = MetricSeries::from_points(
            "x",
            vec![(d("2021-01-01"), Some(1.0)), (d("2021-01-03"), None)],
        );
        assert_eq!(s.get(d("2021-01-01")), Some(1.0));
        assert_eq!(s.get(d("2021-01-02")), None);
        assert_eq!(s.get(d("2021-01-03")), None);
    }

    #[test]
    fn float_text_round_trips() {
        for v in [0.1 + 0.2, 1e-300, 7016.06, -3.5, 1.0 / 3.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
