use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{parse_bool, OutPoint, TransactionRecord, TRANSACTION_HEADER};
use crate::error::{Error, Result};
use crate::series::{expect_header, line_of};
use crate::time::parse_timestamp;

pub struct TransactionReader<R: Read> {
    rows: csv::StringRecordsIntoIter<R>,
}

impl<R: Read> TransactionReader<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        expect_header(reader.headers()?, &TRANSACTION_HEADER)?;
        Ok(Self {
            rows: reader.into_records(),
        })
    }
}

impl<R: Read> Iterator for TransactionReader<R> {
    type Item = Result<(u64, TransactionRecord)>;

    fn next(&mut self) -> Option<Self::Item> {
        let row = match self.rows.next()? {
            Ok(row) => row,
            Err(e) => return Some(Err(e.into())),
        };
        let line = line_of(&row);
        Some(parse_row(line, &row).map(|tx| (line, tx)))
    }
}

fn parse_row(line: u64, row: &csv::StringRecord) -> Result<TransactionRecord> {
    let bad = |reason: String| Error::malformed(line, reason);
    if row.len() != TRANSACTION_HEADER.len() {
        return Err(bad(format!(
            "expected {} fields, found {}",
            TRANSACTION_HEADER.len(),
            row.len()
        )));
    }
    let tx_id = row[0].trim();
    if tx_id.is_empty() {
        return Err(bad("empty tx_id".into()));
    }
    let timestamp =
        parse_timestamp(&row[1]).ok_or_else(|| bad(format!("bad timestamp `{}`", &row[1])))?;
    let is_coinbase =
        parse_bool(&row[2]).ok_or_else(|| bad(format!("bad is_coinbase `{}`", &row[2])))?;

    let inputs = split_list(&row[3])
        .map(|item| {
            let (src, idx) = item
                .rsplit_once(':')
                .ok_or_else(|| bad(format!("input `{item}` is not src_tx:idx")))?;
            let index = idx
                .parse::<i64>()
                .map_err(|_| bad(format!("bad input index in `{item}`")))?;
            if index < 0 {
                return Err(bad(format!("negative output index in `{item}`")));
            }
            let index = u32::try_from(index)
                .map_err(|_| bad(format!("output index out of range in `{item}`")))?;
            if src.is_empty() {
                return Err(bad(format!("empty source tx in `{item}`")));
            }
            Ok(OutPoint {
                tx_id: src.to_owned(),
                index,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let outputs = split_list(&row[4])
        .map(|v| {
            v.parse::<u64>().ok().filter(|v| *v > 0).ok_or_else(|| {
                bad(format!(
                    "output value must be a positive integer, got `{v}`"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if is_coinbase && !inputs.is_empty() {
        return Err(Error::CoinbaseWithInputs {
            line,
            tx_id: tx_id.to_owned(),
        });
    }
    Ok(TransactionRecord {
        tx_id: tx_id.to_owned(),
        timestamp,
        inputs,
        outputs,
        is_coinbase,
    })
}

fn split_list(field: &str) -> impl Iterator<Item = &str> {
    field.split(';').map(str::trim).filter(|s| !s.is_empty())
}

/// Loads raw transactions sorted by timestamp. Ties keep file order, so a
/// spend recorded after its funding transaction in the same second stays
/// after it.
pub fn load_transactions(path: &Path) -> Result<Vec<TransactionRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_transactions(file)
}

pub(crate) fn read_transactions<R: Read>(input: R) -> Result<Vec<TransactionRecord>> {
    let mut txs = TransactionReader::new(input)?
        .map(|item| item.map(|(_, tx)| tx))
        .collect::<Result<Vec<_>>>()?;
    txs.sort_by_key(|tx| tx.timestamp);
    Ok(txs)
}

pub fn write_transactions<W: Write>(txs: &[TransactionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRANSACTION_HEADER)?;
    for tx in txs {
        let inputs = tx
            .inputs
            .iter()
            .map(|i| format!("{}:{}", i.tx_id, i.index))
            .collect::<Vec<_>>()
            .join(";");
        let outputs = tx
            .outputs
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            tx.tx_id.as_str(),
            &tx.timestamp.to_string(),
            if tx.is_coinbase { "true" } else { "false" },
            &inputs,
            &outputs,
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::COIN;

    const HEADER: &str = "tx_id,timestamp,is_coinbase,inputs,outputs\n";

    fn load(body: &str) -> Result<Vec<TransactionRecord>> {
        read_transactions(format!("{HEADER}{body}").as_bytes())
    }

    #[test]
    fn genesis_like_coinbase() {
        let txs = load("g,2009-01-03T18:15:05Z,true,,5000000000\n").unwrap();
        assert_eq!(txs.len(), 1);
        assert!(txs[0].inputs.is_empty());
        assert_eq!(txs[0].outputs, [50 * COIN]);
    }

    #[test]
    fn second_spends_first() {
        let txs = load(
            "t2,200,false,t1:0,300000000;400000000\n\
             t1,100,true,,700000000\n",
        )
        .unwrap();
        assert_eq!(txs[0].tx_id, "t1");
        assert_eq!(
            txs[1].inputs,
            [OutPoint {
                tx_id: "t1".into(),
                index: 0
            }]
        );
        assert_eq!(txs[1].outputs, [3 * COIN, 4 * COIN]);
    }

    #[test]
    fn negative_index_rejected() {
        let err = load("t2,200,false,t1:-1,5\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn coinbase_with_inputs_rejected() {
        let err = load("t2,200,true,t1:0,5\n").unwrap_err();
        assert!(matches!(err, Error::CoinbaseWithInputs { line: 2, .. }));
    }

    #[test]
    fn equal_timestamps_keep_file_order() {
        let txs = load("b,5,true,,1\na,5,true,,1\nc,1,true,,1\n").unwrap();
        let ids: Vec<_> = txs.iter().map(|t| t.tx_id.as_str()).collect();
        assert_eq!(ids, ["c", "b", "a"]);
    }

    #[test]
    fn write_then_read() {
        let txs = load("t1,100,true,,700000000\nt2,200,false,t1:0,300000000;400000000\n").unwrap();
        let mut buf = Vec::new();
        write_transactions(&txs, &mut buf).unwrap();
        assert_eq!(read_transactions(&buf[..]).unwrap(), txs);
    }
}
