use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{MarketSeries, PRICE_HEADER};
use crate::error::{Error, Result};
use crate::series::{expect_header, fmt_f64, line_of};
use crate::time::parse_date;

/// Loads a `date,close_usd` file. Calendar gaps are kept as-is.
pub fn load_price_series(path: &Path) -> Result<MarketSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_price_series(file)
}

pub(crate) fn read_price_series<R: Read>(input: R) -> Result<MarketSeries> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    expect_header(reader.headers()?, &PRICE_HEADER)?;
    let mut points: Vec<(chrono::NaiveDate, f64)> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = line_of(&row);
        if row.len() != 2 {
            return Err(Error::malformed(
                line,
                format!("expected 2 fields, found {}", row.len()),
            ));
        }
        let date = parse_date(&row[0])
            .ok_or_else(|| Error::malformed(line, format!("bad date `{}`", &row[0])))?;
        let close = row[1]
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::malformed(line, format!("bad close `{}`", &row[1])))?;
        if !(close > 0.0 && close.is_finite()) {
            return Err(Error::NonPositivePrice { line, value: close });
        }
        if let Some(&(previous, _)) = points.last() {
            if date == previous {
                return Err(Error::DuplicateDate { line, date });
            }
            if date < previous {
                return Err(Error::UnorderedDate {
                    line,
                    date,
                    previous,
                });
            }
        }
        points.push((date, close));
    }
    MarketSeries::new(points)
}

pub fn write_price_series<W: Write>(series: &MarketSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRICE_HEADER)?;
    for (date, close) in series.points() {
        w.write_record([date.to_string(), fmt_f64(*close)])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
