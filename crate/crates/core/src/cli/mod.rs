//! Command-line front end: `ingest`, `metrics`, `valuation`, `backtest`,
//! `synth`. Every run writes `manifest_<command>.json` next to its outputs.

mod manifest;

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::backtest::{
    buy_and_hold, generate_signals, ma_crossover, run_backtest, write_equity_csv, write_trades_csv,
    BacktestConfig, BacktestResult, Summary, DEFAULT_LONG_WINDOW, DEFAULT_SHORT_WINDOW,
};
use crate::cohort::{
    cdd_series, stxo_lifespan_distribution, utxo_age_distribution, wal_series,
    write_distribution_csv, AgeBinning,
};
use crate::error::Error;
use crate::ingest::{
    load_output_records, load_price_series, sort_records, write_output_records, write_price_series,
    write_transactions, OutputRecord, OutputRecordReader, TransactionReader, OUTPUT_HEADER,
    TRANSACTION_HEADER,
};
use crate::ledger::{
    activity_range, daily_snapshots, match_spends, supply_series, write_snapshots_csv, SnapshotRow,
    SnapshotSeries,
};
use crate::series::MetricSeries;
use crate::synth::{generate_chain, generate_prices, HoldingTime, SyntheticChainConfig};
use crate::time::{format_timestamp, parse_date, DayRange};
use crate::valuation::{
    read_pu_csv, staking_ratio_series, valuation_table, velocity_series, write_valuation_csv,
    ValuationConfig, ZoneThresholds, DEFAULT_VOL_WINDOW,
};

pub use manifest::{digest_file, FileDigest, RunManifest};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "coinlens",
    version,
    about = "UTXO ledger analytics and PU-ratio backtesting"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Primary input file (raw transactions, output records or pu.csv).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Daily close prices, `date,close_usd`.
    #[arg(long, global = true)]
    pub prices: Option<PathBuf>,
    #[arg(long, global = true, env = "COINLENS_OUT", default_value = ".")]
    pub out_dir: PathBuf,
    /// First day (YYYY-MM-DD, inclusive).
    #[arg(long, global = true)]
    pub from: Option<String>,
    /// Last day (YYYY-MM-DD, inclusive).
    #[arg(long, global = true)]
    pub to: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Trailing log-return window for price volatility.
    #[arg(long, global = true, default_value_t = DEFAULT_VOL_WINDOW)]
    pub vol_window: usize,
    /// PU observations required before the first signal.
    #[arg(long, global = true, default_value_t = 30)]
    pub warmup: usize,
    #[arg(long = "buy-q", global = true, default_value_t = 0.1)]
    pub buy_q: f64,
    #[arg(long = "sell-q", global = true, default_value_t = 0.9)]
    pub sell_q: f64,
    /// Coins per trade.
    #[arg(long, global = true, default_value_t = 100.0)]
    pub cap: f64,
    #[arg(long, global = true, default_value_t = 0.001)]
    pub fee: f64,
    /// Initial capital in USD.
    #[arg(long, global = true, default_value_t = 100_000.0)]
    pub capital: f64,
    #[arg(long, global = true, value_enum, default_value_t = Baseline::None)]
    pub baseline: Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    None,
    BuyAndHold,
    MaCrossover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestMode {
    /// Detect from the header row.
    Auto,
    /// Transaction list with `src_tx:idx` inputs.
    Raw,
    /// Output records with `created_at`/`spent_at` already joined.
    Prejoined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Snapshots,
    UtxoAge,
    StxoLifespan,
    Wal,
    Cdd,
    Supply,
    Velocity,
    Staking,
}

const ALL_METRICS: [Metric; 8] = [
    Metric::Snapshots,
    Metric::UtxoAge,
    Metric::StxoLifespan,
    Metric::Wal,
    Metric::Cdd,
    Metric::Supply,
    Metric::Velocity,
    Metric::Staking,
];

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an input file and write canonical `outputs.csv`.
    Ingest {
        #[arg(long, value_enum, default_value_t = IngestMode::Auto)]
        mode: IngestMode,
        /// Drop invalid rows instead of failing; they are listed in the report.
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Replay output records and write per-day metric CSVs.
    Metrics {
        /// Restrict to these metrics (repeatable). Default: all.
        #[arg(long = "metric", value_enum)]
        metrics: Vec<Metric>,
    },
    /// Token utility and PU ratio per day, written to `pu.csv`.
    Valuation {
        #[arg(long, default_value_t = 60.0)]
        zone_lower: f64,
        #[arg(long, default_value_t = 100.0)]
        zone_upper: f64,
    },
    /// Quantile strategy on a PU series, or a price-only baseline.
    Backtest {
        #[arg(long, default_value_t = DEFAULT_SHORT_WINDOW)]
        ma_short: usize,
        #[arg(long, default_value_t = DEFAULT_LONG_WINDOW)]
        ma_long: usize,
    },
    /// Deterministic synthetic chain and price path.
    Synth {
        #[arg(long, default_value = "2015-01-01")]
        start: String,
        #[arg(long, default_value_t = 365)]
        days: u32,
        /// Coins issued per day.
        #[arg(long, default_value_t = 50.0)]
        coinbase: f64,
        #[arg(long, default_value_t = 4)]
        coinbase_outputs: u32,
        #[arg(long, default_value_t = 0.6)]
        spender_fraction: f64,
        /// `exp:MEAN`, `fixed:DAYS` or `bimodal:SHORT,LONG,MIX` (days).
        #[arg(long, default_value = "exp:20")]
        holding: HoldingTime,
        #[arg(long, default_value_t = 100.0)]
        price_start: f64,
        #[arg(long, default_value_t = 0.04)]
        price_vol: f64,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input data or arguments.
    Input(anyhow::Error),
    /// An internal consistency check failed.
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Input(e.into())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parses `std::env::args`, runs the command and reports errors on stderr.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Input(err) | CliError::Internal(err)) = &e;
            eprintln!("error: {}", render(err));
            ExitCode::from(e.exit_code())
        }
    }
}

/// Joins the cause chain, skipping causes already quoted by their parent.
fn render(err: &anyhow::Error) -> String {
    let mut msg = err.to_string();
    for cause in err.chain().skip(1) {
        let text = cause.to_string();
        if !msg.contains(&text) {
            msg = format!("{msg}: {text}");
        }
    }
    msg
}

pub fn run(cli: &Cli) -> CliResult {
    let g = &cli.global;
    fs::create_dir_all(&g.out_dir)
        .with_context(|| format!("creating output directory {}", g.out_dir.display()))?;
    match &cli.command {
        Command::Ingest { mode, skip_invalid } => ingest(g, *mode, *skip_invalid),
        Command::Metrics { metrics } => metrics_cmd(g, metrics),
        Command::Valuation {
            zone_lower,
            zone_upper,
        } => valuation(
            g,
            ZoneThresholds {
                lower: *zone_lower,
                upper: *zone_upper,
            },
        ),
        Command::Backtest { ma_short, ma_long } => backtest(g, *ma_short, *ma_long),
        Command::Synth {
            start,
            days,
            coinbase,
            coinbase_outputs,
            spender_fraction,
            holding,
            price_start,
            price_vol,
        } => {
            let config = SyntheticChainConfig {
                seed: g.seed,
                start: date_arg("--start", start)?,
                days: *days,
                coinbase_per_day: *coinbase,
                coinbase_outputs: *coinbase_outputs,
                spender_fraction: *spender_fraction,
                holding: *holding,
            };
            synth(g, &config, *price_start, *price_vol)
        }
    }
}

fn date_arg(flag: &str, s: &str) -> CliResult<NaiveDate> {
    parse_date(s).ok_or_else(|| CliError::Input(anyhow!("{flag}: `{s}` is not a YYYY-MM-DD date")))
}

fn requested_range(g: &GlobalArgs) -> CliResult<(Option<NaiveDate>, Option<NaiveDate>)> {
    let from = g
        .from
        .as_deref()
        .map(|s| date_arg("--from", s))
        .transpose()?;
    let to = g.to.as_deref().map(|s| date_arg("--to", s)).transpose()?;
    if let (Some(a), Some(b)) = (from, to) {
        if a > b {
            return Err(CliError::Input(anyhow!("--from {a} is after --to {b}")));
        }
    }
    Ok((from, to))
}

/// Clips `span` to the requested bounds; `None` when nothing is left.
fn clip(span: DayRange, bounds: (Option<NaiveDate>, Option<NaiveDate>)) -> Option<DayRange> {
    DayRange::new(
        bounds.0.map_or(span.first, |f| f.max(span.first)),
        bounds.1.map_or(span.last, |t| t.min(span.last)),
    )
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    path.as_deref()
        .ok_or_else(|| CliError::Input(anyhow!("{flag} is required for this command")))
}

fn create(out_dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = out_dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_series(out_dir: &Path, name: &str, series: &MetricSeries) -> CliResult {
    series.write_csv(create(out_dir, name)?)?;
    Ok(())
}

fn finish(manifest: &mut RunManifest, out_dir: &Path, outputs: &[&str]) -> CliResult {
    for name in outputs {
        manifest
            .add_output(out_dir, name)
            .with_context(|| format!("hashing {name}"))?;
    }
    manifest.write(out_dir).context("writing manifest")?;
    Ok(())
}

fn sniff_mode(path: &Path) -> CliResult<IngestMode> {
    let mut head = String::new();
    File::open(path)
        .map_err(|e| Error::io(path, e))?
        .take(4096)
        .read_to_string(&mut head)
        .with_context(|| format!("reading {}", path.display()))?;
    let first = head.lines().next().unwrap_or("").trim();
    let cols: Vec<&str> = first.split(',').map(str::trim).collect();
    if cols == OUTPUT_HEADER {
        Ok(IngestMode::Prejoined)
    } else if cols == TRANSACTION_HEADER {
        Ok(IngestMode::Raw)
    } else {
        Err(CliError::Input(anyhow!(
            "{}: header `{first}` matches neither the output nor the transaction schema",
            path.display()
        )))
    }
}

#[derive(Debug, Serialize)]
struct RejectedRow {
    line: Option<u64>,
    reason: String,
}

#[derive(Debug, Serialize)]
struct IngestReport {
    mode: IngestMode,
    rows_accepted: usize,
    rows_rejected: usize,
    records: usize,
    spent: usize,
    unspent: usize,
    coinbase_outputs: usize,
    first_created_at: Option<String>,
    last_event_at: Option<String>,
    first_day: Option<NaiveDate>,
    last_day: Option<NaiveDate>,
    rejected: Vec<RejectedRow>,
}

fn reject_or_fail(err: Error, skip: bool, rejected: &mut Vec<RejectedRow>) -> CliResult {
    let line = match &err {
        Error::Malformed { line, .. }
        | Error::SpentBeforeCreated { line, .. }
        | Error::DuplicateOutput { line, .. }
        | Error::CoinbaseWithInputs { line, .. } => Some(*line),
        _ => None,
    };
    match line {
        Some(line) if skip => {
            rejected.push(RejectedRow {
                line: Some(line),
                reason: err.to_string(),
            });
            Ok(())
        }
        _ => Err(CliError::Input(err.into())),
    }
}

fn ingest(g: &GlobalArgs, mode: IngestMode, skip: bool) -> CliResult {
    let input = required(&g.input, "--input")?;
    let mode = match mode {
        IngestMode::Auto => sniff_mode(input)?,
        m => m,
    };
    let file = BufReader::new(File::open(input).map_err(|e| Error::io(input, e))?);
    let mut rejected = Vec::new();
    let accepted;

    let mut records = match mode {
        IngestMode::Raw => {
            let mut txs = Vec::new();
            for item in TransactionReader::new(file)? {
                match item {
                    Ok((_, tx)) => txs.push(tx),
                    Err(e) => reject_or_fail(e, skip, &mut rejected)?,
                }
            }
            accepted = txs.len();
            txs.sort_by_key(|tx| tx.timestamp);
            match_spends(&txs)?
        }
        _ => {
            let mut seen = HashSet::new();
            let mut records: Vec<OutputRecord> = Vec::new();
            for item in OutputRecordReader::new(file)? {
                match item {
                    Ok((line, r)) => {
                        if seen.insert((r.tx_id.clone(), r.output_index)) {
                            records.push(r);
                        } else {
                            let e = Error::DuplicateOutput {
                                line,
                                tx_id: r.tx_id,
                                output_index: r.output_index,
                            };
                            reject_or_fail(e, skip, &mut rejected)?;
                        }
                    }
                    Err(e) => reject_or_fail(e, skip, &mut rejected)?,
                }
            }
            accepted = records.len();
            records
        }
    };
    sort_records(&mut records);

    write_output_records(&records, create(&g.out_dir, "outputs.csv")?)?;

    let span = activity_range(&records);
    let last_event = records
        .iter()
        .map(|r| r.spent_at.unwrap_or(r.created_at))
        .max();
    let spent = records.iter().filter(|r| r.spent_at.is_some()).count();
    let report = IngestReport {
        mode,
        rows_accepted: accepted,
        rows_rejected: rejected.len(),
        records: records.len(),
        spent,
        unspent: records.len() - spent,
        coinbase_outputs: records.iter().filter(|r| r.is_coinbase).count(),
        first_created_at: records.first().map(|r| format_timestamp(r.created_at)),
        last_event_at: last_event.map(format_timestamp),
        first_day: span.map(|s| s.first),
        last_day: span.map(|s| s.last),
        rejected,
    };
    write_json(&g.out_dir, "ingest_report.json", &report)?;

    let mut manifest = RunManifest::new("ingest", json!({ "mode": mode, "skip_invalid": skip }));
    manifest.add_input(input).context("hashing input")?;
    finish(
        &mut manifest,
        &g.out_dir,
        &["outputs.csv", "ingest_report.json"],
    )
}

fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> CliResult {
    let mut w = create(out_dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Replays `records` from their first active day through `last`, so
/// cumulative quantities are complete even when output is clipped.
fn replay<'a>(records: &'a [OutputRecord], span: DayRange, last: NaiveDate) -> SnapshotSeries<'a> {
    let range = DayRange::new(span.first, last).unwrap_or(span);
    daily_snapshots(records, range)
}

/// Conservation check on every replayed day.
fn check_conservation(series: &SnapshotSeries) -> CliResult {
    for s in series.days() {
        if s.cumulative_created.checked_sub(s.cumulative_spent) != Some(s.utxo_total_value) {
            return Err(CliError::Internal(anyhow!(
                "conservation violated on {}: created {} - spent {} != live {}",
                s.date,
                s.cumulative_created,
                s.cumulative_spent,
                s.utxo_total_value
            )));
        }
    }
    Ok(())
}

fn metric_file(m: Metric) -> &'static str {
    match m {
        Metric::Snapshots => "snapshots.csv",
        Metric::UtxoAge => "utxo_age.csv",
        Metric::StxoLifespan => "stxo_lifespan.csv",
        Metric::Wal => "wal.csv",
        Metric::Cdd => "cdd.csv",
        Metric::Supply => "supply.csv",
        Metric::Velocity => "velocity.csv",
        Metric::Staking => "staking_ratio.csv",
    }
}

fn metrics_cmd(g: &GlobalArgs, selected: &[Metric]) -> CliResult {
    let input = required(&g.input, "--input")?;
    let bounds = requested_range(g)?;
    let records = load_output_records(input)?;
    let binning = AgeBinning::default();

    let span = activity_range(&records);
    let out = span.and_then(|s| clip(s, bounds));
    let series = match (span, out) {
        (Some(span), Some(out)) => Some(replay(&records, span, out.last)),
        _ => None,
    };
    if let Some(series) = &series {
        check_conservation(series)?;
    }

    let selected: Vec<Metric> = if selected.is_empty() {
        ALL_METRICS.to_vec()
    } else {
        ALL_METRICS
            .iter()
            .copied()
            .filter(|m| selected.contains(m))
            .collect()
    };
    let keep = |s: MetricSeries| {
        let name = s.name.clone();
        let points = s
            .points
            .into_iter()
            .filter(|(d, _)| out.is_some_and(|r| r.contains(*d)))
            .collect();
        MetricSeries::from_points(name, points)
    };

    for &m in &selected {
        let name = metric_file(m);
        match m {
            Metric::Snapshots => {
                let rows: Vec<SnapshotRow> = series
                    .iter()
                    .flat_map(|s| s.days())
                    .filter(|s| out.is_some_and(|o| o.contains(s.date)))
                    .map(SnapshotRow::from)
                    .collect();
                write_snapshots_csv(&rows, create(&g.out_dir, name)?)?;
            }
            Metric::UtxoAge | Metric::StxoLifespan => {
                let rows = match &series {
                    None => Vec::new(),
                    Some(s) if m == Metric::UtxoAge => utxo_age_distribution(s, &binning),
                    Some(s) => stxo_lifespan_distribution(s, &binning),
                };
                let rows: Vec<_> = rows
                    .into_iter()
                    .filter(|r| out.is_some_and(|o| o.contains(r.date)))
                    .collect();
                write_distribution_csv(&rows, &binning, create(&g.out_dir, name)?)?;
            }
            _ => {
                let full = match (&series, m) {
                    (None, _) => MetricSeries::new(name.trim_end_matches(".csv")),
                    (Some(s), Metric::Wal) => wal_series(s),
                    (Some(s), Metric::Cdd) => cdd_series(s),
                    (Some(s), Metric::Supply) => supply_series(s),
                    (Some(s), Metric::Velocity) => velocity_series(s),
                    (Some(s), _) => staking_ratio_series(s),
                };
                write_series(&g.out_dir, name, &keep(full))?;
            }
        }
    }

    let mut manifest = RunManifest::new(
        "metrics",
        json!({
            "metrics": selected,
            "from": bounds.0,
            "to": bounds.1,
            "bins_days": binning.boundaries_days(),
        }),
    );
    manifest.add_input(input).context("hashing input")?;
    let names: Vec<&str> = selected.iter().map(|&m| metric_file(m)).collect();
    finish(&mut manifest, &g.out_dir, &names)
}

fn valuation(g: &GlobalArgs, zones: ZoneThresholds) -> CliResult {
    let input = required(&g.input, "--input")?;
    let prices_path = required(&g.prices, "--prices")?;
    let bounds = requested_range(g)?;
    if zones.lower.is_nan() || zones.upper.is_nan() || zones.lower > zones.upper {
        return Err(CliError::Input(anyhow!(
            "--zone-lower must not exceed --zone-upper"
        )));
    }
    if g.vol_window < 2 {
        return Err(CliError::Input(anyhow!("--vol-window must be at least 2")));
    }
    let records = load_output_records(input)?;
    let market = load_price_series(prices_path)?;

    let span = activity_range(&records)
        .ok_or_else(|| CliError::Input(anyhow!("{} holds no output records", input.display())))?;
    let price_span = market
        .first_date()
        .zip(market.last_date())
        .and_then(|(a, b)| DayRange::new(a, b))
        .ok_or_else(|| CliError::Input(anyhow!("{} holds no prices", prices_path.display())))?;
    let overlap = span.intersect(&price_span).ok_or_else(|| {
        CliError::Input(anyhow!(
            "price span {}..{} does not overlap record span {}..{}",
            price_span.first,
            price_span.last,
            span.first,
            span.last
        ))
    })?;

    let config = ValuationConfig {
        vol_window: g.vol_window,
        zones,
    };
    let rows = match clip(overlap, bounds) {
        Some(out) => {
            let series = replay(&records, span, out.last);
            check_conservation(&series)?;
            valuation_table(&series, &market, &config)
                .into_iter()
                .filter(|r| out.contains(r.point.date))
                .collect()
        }
        None => Vec::new(),
    };
    write_valuation_csv(&rows, create(&g.out_dir, "pu.csv")?)?;

    let mut manifest = RunManifest::new(
        "valuation",
        json!({ "valuation": config, "from": bounds.0, "to": bounds.1 }),
    );
    manifest.add_input(input).context("hashing input")?;
    manifest.add_input(prices_path).context("hashing prices")?;
    finish(&mut manifest, &g.out_dir, &["pu.csv"])
}

fn backtest(g: &GlobalArgs, ma_short: usize, ma_long: usize) -> CliResult {
    let prices_path = required(&g.prices, "--prices")?;
    let bounds = requested_range(g)?;
    let market = load_price_series(prices_path)?;

    let pu = match (&g.input, g.baseline) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            Some(read_pu_csv(BufReader::new(file))?)
        }
        (None, Baseline::None) => {
            return Err(CliError::Input(anyhow!(
                "--input pu.csv is required unless --baseline is set"
            )))
        }
        (None, _) => None,
    };

    // Default window: the PU span when a PU file is given, else all prices.
    let default_span = match &pu {
        Some(p) => p
            .first()
            .zip(p.last())
            .and_then(|(a, b)| DayRange::new(a.date, b.date)),
        None => market
            .first_date()
            .zip(market.last_date())
            .and_then(|(a, b)| DayRange::new(a, b)),
    };
    let range = match (bounds, default_span) {
        ((None, None), span) => span,
        (_, Some(span)) => clip(span, bounds),
        ((from, to), None) => from.zip(to).and_then(|(a, b)| DayRange::new(a, b)),
    };
    let range = range.ok_or_else(|| CliError::Input(anyhow!("backtest window is empty")))?;

    let config = BacktestConfig {
        initial_capital_usd: g.capital,
        fee_rate: g.fee,
        trade_cap_units: g.cap,
        buy_quantile: g.buy_q,
        sell_quantile: g.sell_q,
        warmup_days: g.warmup,
        range: Some(range),
    };
    config.validate()?;

    let (strategy, result): (&str, BacktestResult) = match g.baseline {
        Baseline::None => {
            let signals = generate_signals(pu.as_deref().unwrap_or_default(), &config);
            ("pu-quantile", run_backtest(&signals, &market, &config)?)
        }
        Baseline::BuyAndHold => ("buy-and-hold", buy_and_hold(&market, &config)?),
        Baseline::MaCrossover => {
            if ma_short == 0 || ma_short >= ma_long {
                return Err(CliError::Input(anyhow!("need 0 < --ma-short < --ma-long")));
            }
            (
                "ma-crossover",
                ma_crossover(&market, &config, ma_short, ma_long)?,
            )
        }
    };

    write_trades_csv(&result.trades, create(&g.out_dir, "trades.csv")?)?;
    write_equity_csv(&result.equity, create(&g.out_dir, "equity.csv")?)?;
    write_json(
        &g.out_dir,
        "summary.json",
        &Summary::new(strategy, &result, &config),
    )?;

    let mut manifest = RunManifest::new(
        "backtest",
        json!({
            "strategy": strategy,
            "backtest": config,
            "ma_short": ma_short,
            "ma_long": ma_long,
        }),
    );
    if let Some(path) = &g.input {
        manifest.add_input(path).context("hashing input")?;
    }
    manifest.add_input(prices_path).context("hashing prices")?;
    finish(
        &mut manifest,
        &g.out_dir,
        &["trades.csv", "equity.csv", "summary.json"],
    )
}

fn synth(
    g: &GlobalArgs,
    config: &SyntheticChainConfig,
    price_start: f64,
    price_vol: f64,
) -> CliResult {
    if !(price_start > 0.0 && price_start.is_finite())
        || !(price_vol >= 0.0 && price_vol.is_finite())
    {
        return Err(CliError::Input(anyhow!(
            "--price-start must be positive and --price-vol non-negative"
        )));
    }
    let txs = generate_chain(config)?;
    write_transactions(&txs, create(&g.out_dir, "transactions.csv")?)?;
    let market = generate_prices(
        config.seed,
        config.start,
        config.days,
        price_start,
        price_vol,
    );
    write_price_series(&market, create(&g.out_dir, "prices.csv")?)?;

    let mut manifest = RunManifest::new(
        "synth",
        json!({
            "chain": config,
            "holding": config.holding.to_string(),
            "price_start": price_start,
            "price_vol": price_vol,
            "transactions": txs.len(),
        }),
    );
    finish(
        &mut manifest,
        &g.out_dir,
        &["transactions.csv", "prices.csv"],
    )
}
