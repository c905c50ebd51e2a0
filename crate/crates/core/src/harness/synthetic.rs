//! Seeded stand-in for the price, Reddit and GitHub archives.
//!
//! Price follows a geometric random walk whose drift switches between bull,
//! bear and calm regimes. GitHub activity is Poisson with rates that rise
//! with log-price; comment volume rises with the day's absolute return, and
//! bodies draw sentiment words whose polarity follows the day's move.

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::CoinData;
use crate::error::{Error, Result};
use crate::ingest::{CommentRecord, EventKind, EventRecord, PriceSeries};

pub const SYNTHETIC_COIN: &str = "synthcoin";
pub const SYNTHETIC_SUBREDDIT: &str = "synthcoin";
pub const SYNTHETIC_REPO: &str = "synthcoin/synthcoin";
pub const SYNTHETIC_START: &str = "2015-11-01";

const START_PRICE: f64 = 300.0;

// (drift, volatility) per regime
const REGIMES: [(f64, f64); 3] = [(0.006, 0.035), (-0.004, 0.035), (0.0005, 0.02)];
const STAY: f64 = 0.97;

// (kind, base rate, log-price elasticity)
const EVENT_RATES: [(EventKind, f64, f64); 8] = [
    (EventKind::Watch, 8.0, 1.0),
    (EventKind::Fork, 1.0, 0.7),
    (EventKind::Issues, 1.5, 0.3),
    (EventKind::IssueComment, 4.0, 0.3),
    (EventKind::Push, 3.0, 0.0),
    (EventKind::CommitComment, 0.3, 0.0),
    (EventKind::PullRequest, 2.0, 0.2),
    (EventKind::PullRequestReviewComment, 1.0, 0.1),
];
const MAX_RATE: f64 = 500.0;

const POSITIVE: [&str; 8] = ["moon", "bullish", "great", "gain", "love", "good", "pump", "profit"];
const NEGATIVE: [&str; 8] = ["crash", "bearish", "dump", "scam", "bad", "fear", "loss", "sell"];
const NEUTRAL: [&str; 24] = [
    "the", "price", "coin", "wallet", "block", "fees", "node", "exchange", "hodl", "today", "market", "mining",
    "transaction", "dev", "update", "network", "is", "to", "a", "and", "of", "i", "this", "it",
];

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda.min(MAX_RATE)).map_or(0, |d| d.sample(rng) as u64)
}

fn timestamp(day: NaiveDate, rng: &mut ChaCha8Rng) -> DateTime<Utc> {
    let midnight = day.and_hms_opt(0, 0, 0).unwrap().and_utc();
    midnight + Duration::seconds(rng.gen_range(0..86_400))
}

/// A seed-deterministic bundle of `days` consecutive days starting
/// 2015-11-01.
pub fn generate_synthetic(seed: u64, days: usize) -> Result<CoinData> {
    if days < 60 {
        return Err(Error::InvalidArgument(format!("synthetic data needs at least 60 days, got {days}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: NaiveDate = SYNTHETIC_START.parse().unwrap();
    let unit = Normal::new(0.0, 1.0).unwrap();

    let mut price = PriceSeries {
        coin: SYNTHETIC_COIN.to_string(),
        dates: Vec::with_capacity(days),
        open: Vec::with_capacity(days),
        high: Vec::with_capacity(days),
        low: Vec::with_capacity(days),
        close: Vec::with_capacity(days),
    };
    let mut comments = Vec::new();
    let mut events = Vec::new();
    let mut regime = 2usize;
    let mut open = START_PRICE;

    for d in 0..days {
        let day = start + Duration::days(d as i64);
        if rng.gen::<f64>() > STAY {
            regime = (regime + rng.gen_range(1..REGIMES.len())) % REGIMES.len();
        }
        let (drift, vol) = REGIMES[regime];
        let ret = drift + vol * unit.sample(&mut rng);
        let close = open * ret.exp();
        let up = 0.002 + 0.01 * unit.sample(&mut rng).abs();
        let down = 0.002 + 0.01 * unit.sample(&mut rng).abs();
        price.dates.push(day);
        price.open.push(open);
        price.close.push(close);
        price.high.push(open.max(close) * up.exp());
        price.low.push(open.min(close) * (-down).exp());

        let level = (close / START_PRICE).ln();
        for (kind, base, elasticity) in EVENT_RATES {
            for _ in 0..poisson(&mut rng, base * (elasticity * level).exp()) {
                events.push(EventRecord {
                    created_at: timestamp(day, &mut rng),
                    repo: SYNTHETIC_REPO.to_string(),
                    event_type: kind,
                });
            }
        }

        let n_comments = poisson(&mut rng, 15.0 + 400.0 * ret.abs() + 5.0 * level.max(0.0));
        let p_positive = 1.0 / (1.0 + (-(40.0 * ret + 200.0 * drift)).exp());
        let popularity = 2.0 + 3.0 * level.max(0.0);
        for _ in 0..n_comments {
            let words = rng.gen_range(5..=12);
            let mut body = String::new();
            for w in 0..words {
                let word = if rng.gen::<f64>() < 0.25 {
                    if rng.gen::<f64>() < p_positive {
                        POSITIVE[rng.gen_range(0..POSITIVE.len())]
                    } else {
                        NEGATIVE[rng.gen_range(0..NEGATIVE.len())]
                    }
                } else {
                    NEUTRAL[rng.gen_range(0..NEUTRAL.len())]
                };
                if w > 0 {
                    body.push(' ');
                }
                body.push_str(word);
            }
            let score = (popularity + 4.0 * unit.sample(&mut rng)).round() as i64;
            comments.push(CommentRecord {
                created_utc: timestamp(day, &mut rng).timestamp(),
                subreddit: SYNTHETIC_SUBREDDIT.to_string(),
                body,
                score,
            });
        }
        open = close;
    }
    comments.sort();
    events.sort();
    Ok(CoinData {
        coin: SYNTHETIC_COIN.to_string(),
        price,
        comments,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bundle() {
        let a = generate_synthetic(3, 60).unwrap();
        let b = generate_synthetic(3, 60).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_synthetic(4, 60).unwrap());
    }

    #[test]
    fn short_bundle_is_valid() {
        let b = generate_synthetic(1, 60).unwrap();
        assert_eq!(b.price.len(), 60);
        b.price.validate(true).unwrap();
        let range = b.price.range().unwrap();
        assert!(b.comments.iter().all(|c| range.contains(c.day())));
        assert!(b.events.iter().all(|e| range.contains(e.day())));
        assert!(!b.comments.is_empty() && !b.events.is_empty());
        assert!(generate_synthetic(1, 59).is_err());
    }
}
