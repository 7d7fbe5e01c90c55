use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{MarketSeries, OutPoint, TransactionRecord};
use crate::time::{add_days, day_start, COIN, SECONDS_PER_DAY};

/// How long a spendable output waits before it is spent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HoldingTime {
    Exponential {
        mean_days: f64,
    },
    Fixed {
        days: f64,
    },
    /// Mixture of a short and a long exponential; `long_mix` is the weight
    /// of the long component.
    Bimodal {
        short_mean_days: f64,
        long_mean_days: f64,
        long_mix: f64,
    },
}

impl HoldingTime {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            HoldingTime::Exponential { mean_days } => mean_days > 0.0,
            HoldingTime::Fixed { days } => days > 0.0,
            HoldingTime::Bimodal {
                short_mean_days,
                long_mean_days,
                long_mix,
            } => short_mean_days > 0.0 && long_mean_days > 0.0 && (0.0..=1.0).contains(&long_mix),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid holding time {self}")))
        }
    }

    /// Holder class of a new lineage: 1 for the long component of a
    /// bimodal mixture, else 0.
    fn draw_class<R: Rng>(&self, rng: &mut R) -> usize {
        match *self {
            HoldingTime::Bimodal { long_mix, .. } => usize::from(rng.random_bool(long_mix)),
            _ => 0,
        }
    }

    /// At least one second, so every spend moves time forward.
    fn sample_seconds<R: Rng>(&self, class: usize, rng: &mut R) -> i64 {
        let days = match *self {
            HoldingTime::Exponential { mean_days } => exp(mean_days, rng),
            HoldingTime::Fixed { days } => days,
            HoldingTime::Bimodal {
                short_mean_days,
                long_mean_days,
                ..
            } => exp(
                if class == 1 {
                    long_mean_days
                } else {
                    short_mean_days
                },
                rng,
            ),
        };
        ((days * SECONDS_PER_DAY as f64).round() as i64).max(1)
    }
}

fn exp<R: Rng>(mean: f64, rng: &mut R) -> f64 {
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

impl fmt::Display for HoldingTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoldingTime::Exponential { mean_days } => write!(f, "exp:{mean_days}"),
            HoldingTime::Fixed { days } => write!(f, "fixed:{days}"),
            HoldingTime::Bimodal {
                short_mean_days,
                long_mean_days,
                long_mix,
            } => write!(f, "bimodal:{short_mean_days},{long_mean_days},{long_mix}"),
        }
    }
}

/// Parses `exp:MEAN`, `fixed:DAYS` or `bimodal:SHORT,LONG,MIX`.
impl FromStr for HoldingTime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| format!("expected KIND:ARGS, got `{s}`"))?;
        let nums = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad number `{a}`"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let ht = match (kind, nums.as_slice()) {
            ("exp", [m]) => HoldingTime::Exponential { mean_days: *m },
            ("fixed", [d]) => HoldingTime::Fixed { days: *d },
            ("bimodal", [s, l, mix]) => HoldingTime::Bimodal {
                short_mean_days: *s,
                long_mean_days: *l,
                long_mix: *mix,
            },
            _ => return Err(format!("unrecognised holding time `{s}`")),
        };
        ht.validate().map_err(|e| e.to_string())?;
        Ok(ht)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticChainConfig {
    pub seed: u64,
    pub start: NaiveDate,
    pub days: u32,
    pub coinbase_per_day: f64,
    /// Outputs per daily coinbase.
    pub coinbase_outputs: u32,
    /// Probability that a coinbase output's lineage ever circulates.
    pub spender_fraction: f64,
    pub holding: HoldingTime,
}

impl Default for SyntheticChainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            start: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            days: 365,
            coinbase_per_day: 50.0,
            coinbase_outputs: 4,
            spender_fraction: 0.6,
            holding: HoldingTime::Exponential { mean_days: 20.0 },
        }
    }
}

impl SyntheticChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::Config("days must be at least 1".into()));
        }
        if self.coinbase_per_day.is_nan()
            || self.coinbase_per_day <= 0.0
            || self.coinbase_outputs == 0
        {
            return Err(Error::Config("coinbase must be positive".into()));
        }
        if (self.coinbase_per_day * COIN as f64).round() < self.coinbase_outputs as f64 {
            return Err(Error::Config("coinbase too small to split".into()));
        }
        if !(0.0..=1.0).contains(&self.spender_fraction) {
            return Err(Error::Config("spender_fraction must lie in [0, 1]".into()));
        }
        self.holding.validate()
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Due {
    at: i64,
    seq: u64,
    tx_id: String,
    index: u32,
    value: u64,
}

struct Builder<'a> {
    config: &'a SyntheticChainConfig,
    rng: ChaCha8Rng,
    /// Circulating outputs per holder class, earliest due first.
    queues: [BinaryHeap<Reverse<Due>>; 2],
    txs: Vec<TransactionRecord>,
    seq: u64,
}

impl Builder<'_> {
    fn next_id(&mut self) -> String {
        format!("{:08x}{:08x}", self.config.seed as u32, self.txs.len())
    }

    fn schedule(&mut self, class: usize, timestamp: i64, tx_id: &str, index: usize, value: u64) {
        let at = timestamp + self.config.holding.sample_seconds(class, &mut self.rng);
        self.queues[class].push(Reverse(Due {
            at,
            seq: self.seq,
            tx_id: tx_id.to_owned(),
            index: index as u32,
            value,
        }));
        self.seq += 1;
    }

    fn push(&mut self, timestamp: i64, inputs: Vec<OutPoint>, outputs: Vec<u64>) -> String {
        let tx_id = self.next_id();
        self.txs.push(TransactionRecord {
            is_coinbase: inputs.is_empty(),
            tx_id: tx_id.clone(),
            timestamp,
            inputs,
            outputs,
        });
        tx_id
    }

    /// Class of the circulating output due next, if due before `until`.
    fn next_due(&self, until: i64) -> Option<usize> {
        let at = |c: usize| self.queues[c].peek().map(|Reverse(d)| (d.at, d.seq));
        let class = match (at(0), at(1)) {
            (Some(a), Some(b)) => usize::from(b < a),
            (Some(_), None) => 0,
            (None, Some(_)) => 1,
            (None, None) => return None,
        };
        (at(class)?.0 < until).then_some(class)
    }
}

/// Builds a fee-free chain with one coinbase per day.
///
/// Each coinbase output starts a lineage that circulates with probability
/// `spender_fraction` and is otherwise never spent. Bimodal holding assigns
/// each lineage a short or long holder class for life. A circulating output
/// is spent after a sampled holding time by a transaction that passes its
/// value on (1 output), splits it (2 outputs) or merges it with the next
/// output of the same class due to be spent (2 inputs, 1 output). Splits
/// and merges are equally likely, so the circulating population stays
/// bounded and circulating value never leaks into untouched outputs.
pub fn generate_chain(config: &SyntheticChainConfig) -> Result<Vec<TransactionRecord>> {
    config.validate()?;
    let mut b = Builder {
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        queues: [BinaryHeap::new(), BinaryHeap::new()],
        txs: Vec::new(),
        seq: 0,
    };
    let chain_end = day_start(add_days(config.start, config.days as u64));
    let reward = (config.coinbase_per_day * COIN as f64).round() as u64;
    let n_out = config.coinbase_outputs as u64;

    for day in 0..config.days {
        let coinbase_at =
            day_start(add_days(config.start, day as u64)) + b.rng.random_range(0..3_600);
        drain_until(&mut b, coinbase_at);
        let mut outputs = vec![reward / n_out; n_out as usize];
        outputs[0] += reward % n_out;
        let tx_id = b.push(coinbase_at, Vec::new(), outputs.clone());
        for (index, value) in outputs.into_iter().enumerate() {
            if b.rng.random_bool(config.spender_fraction) {
                let class = config.holding.draw_class(&mut b.rng);
                b.schedule(class, coinbase_at, &tx_id, index, value);
            }
        }
    }
    drain_until(&mut b, chain_end);
    Ok(b.txs)
}

/// Spends every circulating output due strictly before `until`.
fn drain_until(b: &mut Builder, until: i64) {
    while let Some(class) = b.next_due(until) {
        let Reverse(due) = b.queues[class].pop().expect("peeked");
        let mut inputs = vec![OutPoint {
            tx_id: due.tx_id,
            index: due.index,
        }];
        let roll: f64 = b.rng.random();
        let outputs = if roll < 0.25 && due.value >= 2 {
            let left = b.rng.random_range(1..due.value);
            vec![left, due.value - left]
        } else if roll >= 0.75 && !b.queues[class].is_empty() {
            let Reverse(partner) = b.queues[class].pop().expect("non-empty");
            inputs.push(OutPoint {
                tx_id: partner.tx_id,
                index: partner.index,
            });
            vec![due.value + partner.value]
        } else {
            vec![due.value]
        };
        let tx_id = b.push(due.at, inputs, outputs.clone());
        for (index, value) in outputs.into_iter().enumerate() {
            b.schedule(class, due.at, &tx_id, index, value);
        }
    }
}

/// Geometric random walk of daily closes over `days` days from `start`.
pub fn generate_prices(
    seed: u64,
    start: NaiveDate,
    days: u32,
    initial: f64,
    daily_vol: f64,
) -> MarketSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_9ace);
    let shock = Normal::new(0.0, daily_vol).expect("finite volatility");
    let mut price = initial;
    let points = (0..days)
        .map(|i| {
            if i > 0 {
                price *= shock.sample(&mut rng).exp();
            }
            (add_days(start, i as u64), price)
        })
        .collect();
    MarketSeries::new(points).expect("positive, increasing by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{daily_snapshots, match_spends};
    use crate::time::DayRange;

    #[test]
    fn single_day_is_one_coinbase() {
        let c = SyntheticChainConfig {
            days: 1,
            holding: HoldingTime::Fixed { days: 3.0 },
            ..Default::default()
        };
        let txs = generate_chain(&c).unwrap();
        assert_eq!(txs.len(), 1);
        assert!(txs[0].is_coinbase);
        assert_eq!(txs[0].outputs.iter().sum::<u64>(), 50 * COIN);
    }

    #[test]
    fn hoarders_never_spend() {
        let c = SyntheticChainConfig {
            spender_fraction: 0.0,
            days: 30,
            ..Default::default()
        };
        let txs = generate_chain(&c).unwrap();
        assert_eq!(txs.len(), 30);
        assert!(txs.iter().all(|t| t.is_coinbase));
        let recs = match_spends(&txs).unwrap();
        assert!(recs.iter().all(|r| r.spent_at.is_none()));
    }

    #[test]
    fn seeded_determinism() {
        let c = SyntheticChainConfig {
            seed: 42,
            days: 60,
            ..Default::default()
        };
        assert_eq!(generate_chain(&c).unwrap(), generate_chain(&c).unwrap());
        let other = SyntheticChainConfig {
            seed: 43,
            ..c.clone()
        };
        assert_ne!(generate_chain(&c).unwrap(), generate_chain(&other).unwrap());
    }

    #[test]
    fn chains_are_valid_and_conserve_value() {
        for seed in 0..5 {
            let c = SyntheticChainConfig {
                seed,
                days: 120,
                holding: HoldingTime::Bimodal {
                    short_mean_days: 0.5,
                    long_mean_days: 60.0,
                    long_mix: 0.3,
                },
                ..Default::default()
            };
            let txs = generate_chain(&c).unwrap();
            assert!(txs.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
            let recs = match_spends(&txs).unwrap();
            let range = DayRange::new(c.start, add_days(c.start, 119)).unwrap();
            for snap in daily_snapshots(&recs, range).days() {
                assert_eq!(snap.utxo_total_value, snap.cumulative_issuance);
            }
        }
    }

    #[test]
    fn holding_time_parsing() {
        assert_eq!(
            "exp:10".parse(),
            Ok(HoldingTime::Exponential { mean_days: 10.0 })
        );
        assert_eq!("fixed:0.5".parse(), Ok(HoldingTime::Fixed { days: 0.5 }));
        assert_eq!(
            "bimodal:2,400,0.3".parse(),
            Ok(HoldingTime::Bimodal {
                short_mean_days: 2.0,
                long_mean_days: 400.0,
                long_mix: 0.3
            })
        );
        for bad in [
            "exp",
            "exp:-1",
            "fixed:0",
            "bimodal:1,2",
            "bimodal:1,2,3",
            "gauss:1",
        ] {
            assert!(bad.parse::<HoldingTime>().is_err(), "{bad}");
        }
        let h: HoldingTime = "bimodal:2,400,0.3".parse().unwrap();
        assert_eq!(h.to_string().parse::<HoldingTime>().unwrap(), h);
    }

    #[test]
    fn prices_are_deterministic_and_positive() {
        let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let a = generate_prices(7, start, 400, 250.0, 0.04);
        assert_eq!(a, generate_prices(7, start, 400, 250.0, 0.04));
        assert_eq!(a.len(), 400);
        assert!(a.points().iter().all(|p| p.1 > 0.0));
    }
}
