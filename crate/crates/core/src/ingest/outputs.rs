use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{parse_bool, sort_records, OutputRecord, OUTPUT_HEADER};
use crate::error::{Error, Result};
use crate::series::{expect_header, line_of};
use crate::time::{format_timestamp, parse_timestamp};

/// Streaming reader over the pre-joined output CSV. Yields one validated
/// record per row together with its line number.
pub struct OutputRecordReader<R: Read> {
    rows: csv::StringRecordsIntoIter<R>,
}

impl<R: Read> OutputRecordReader<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        expect_header(reader.headers()?, &OUTPUT_HEADER)?;
        Ok(Self {
            rows: reader.into_records(),
        })
    }
}

impl<R: Read> Iterator for OutputRecordReader<R> {
    type Item = Result<(u64, OutputRecord)>;

    fn next(&mut self) -> Option<Self::Item> {
        let row = match self.rows.next()? {
            Ok(row) => row,
            Err(e) => return Some(Err(e.into())),
        };
        let line = line_of(&row);
        Some(
            parse_row(&row)
                .map(|r| (line, r))
                .map_err(|reason| match reason {
                    RowError::Malformed(reason) => Error::malformed(line, reason),
                    RowError::SpentBeforeCreated {
                        created_at,
                        spent_at,
                    } => Error::SpentBeforeCreated {
                        line,
                        created_at,
                        spent_at,
                    },
                }),
        )
    }
}

enum RowError {
    Malformed(String),
    SpentBeforeCreated { created_at: i64, spent_at: i64 },
}

fn parse_row(row: &csv::StringRecord) -> Result<OutputRecord, RowError> {
    use RowError::Malformed;
    if row.len() != OUTPUT_HEADER.len() {
        return Err(Malformed(format!(
            "expected {} fields, found {}",
            OUTPUT_HEADER.len(),
            row.len()
        )));
    }
    let tx_id = row[0].trim();
    if tx_id.is_empty() {
        return Err(Malformed("empty tx_id".into()));
    }
    let output_index = row[1]
        .trim()
        .parse::<u32>()
        .map_err(|_| Malformed(format!("bad output_index `{}`", &row[1])))?;
    let value = row[2]
        .trim()
        .parse::<u64>()
        .ok()
        .filter(|v| *v > 0)
        .ok_or_else(|| {
            Malformed(format!(
                "value must be a positive integer, got `{}`",
                &row[2]
            ))
        })?;
    let created_at = parse_timestamp(&row[3])
        .ok_or_else(|| Malformed(format!("bad created_at `{}`", &row[3])))?;
    let spent_at = match row[4].trim() {
        "" => None,
        s => Some(parse_timestamp(s).ok_or_else(|| Malformed(format!("bad spent_at `{s}`")))?),
    };
    if let Some(spent_at) = spent_at {
        if spent_at < created_at {
            return Err(RowError::SpentBeforeCreated {
                created_at,
                spent_at,
            });
        }
    }
    let is_coinbase =
        parse_bool(&row[5]).ok_or_else(|| Malformed(format!("bad is_coinbase `{}`", &row[5])))?;
    Ok(OutputRecord {
        tx_id: tx_id.to_owned(),
        output_index,
        value,
        created_at,
        spent_at,
        is_coinbase,
    })
}

/// Loads a pre-joined output file, sorted by `created_at` then outpoint.
pub fn load_output_records(path: &Path) -> Result<Vec<OutputRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_output_records(file)
}

pub(crate) fn read_output_records<R: Read>(input: R) -> Result<Vec<OutputRecord>> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for item in OutputRecordReader::new(input)? {
        let (line, record) = item?;
        if !seen.insert((record.tx_id.clone(), record.output_index)) {
            return Err(Error::DuplicateOutput {
                line,
                tx_id: record.tx_id,
                output_index: record.output_index,
            });
        }
        records.push(record);
    }
    sort_records(&mut records);
    Ok(records)
}

/// Canonical export: ISO-8601 UTC timestamps, empty `spent_at` when unspent.
pub fn write_output_records<W: Write>(records: &[OutputRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OUTPUT_HEADER)?;
    for r in records {
        w.write_record([
            r.tx_id.as_str(),
            &r.output_index.to_string(),
            &r.value.to_string(),
            &format_timestamp(r.created_at),
            &r.spent_at.map(format_timestamp).unwrap_or_default(),
            if r.is_coinbase { "true" } else { "false" },
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
