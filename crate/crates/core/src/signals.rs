//! Daily social-signal extraction.
//!
//! Every extractor takes pre-filtered records for one coin plus the target
//! calendar and returns a gap-free [`SignalMatrix`]. Records outside the
//! calendar are ignored; days without activity get zeros.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::DateRange;
use crate::error::{Error, Result};
use crate::ingest::{CommentRecord, EventKind, EventRecord};

/// Default vocabulary size for the language signal.
pub const DEFAULT_VOCAB_SIZE: usize = 10_000;

/// Name of the price-high column that leads every model input matrix.
pub const PRICE_HIGH_COLUMN: &str = "price_high";

/// The demonstration lexicon bundled with the crate.
pub const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.tsv");

/// Dense dates × features table of daily values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalMatrix {
    calendar: DateRange,
    columns: Vec<String>,
    /// Row-major, `calendar.len() * columns.len()` cells.
    values: Vec<f64>,
}

impl SignalMatrix {
    pub fn new(calendar: DateRange, columns: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let rows = calendar.len();
        if values.len() != rows * columns.len() {
            return Err(Error::Shape(format!(
                "{} values for {} rows x {} columns",
                values.len(),
                rows,
                columns.len()
            )));
        }
        let mut seen = HashSet::with_capacity(columns.len());
        for c in &columns {
            if !seen.insert(c.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate column `{c}`")));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "cell ({}, {}) of signal matrix",
                calendar.date_at(pos / columns.len().max(1)),
                columns[pos % columns.len()]
            )));
        }
        Ok(SignalMatrix {
            calendar,
            columns,
            values,
        })
    }

    fn zeros(calendar: DateRange, columns: Vec<String>) -> Self {
        let values = vec![0.0; calendar.len() * columns.len()];
        SignalMatrix {
            calendar,
            columns,
            values,
        }
    }

    /// Single-column matrix, e.g. the price-high series.
    pub fn from_column(calendar: DateRange, name: &str, column: &[f64]) -> Result<Self> {
        SignalMatrix::new(calendar, vec![name.to_string()], column.to_vec())
    }

    pub fn calendar(&self) -> DateRange {
        self.calendar
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> usize {
        self.calendar.len()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width() + col]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.column_index(name).map(|c| self.column(c))
    }

    /// Same columns restricted to a sub-range of the calendar.
    pub fn slice(&self, range: DateRange) -> Result<Self> {
        let (Some(a), Some(_)) = (self.calendar.index_of(range.start), self.calendar.index_of(range.end)) else {
            return Err(Error::Range(format!("{range} not inside {}", self.calendar)));
        };
        let w = self.width();
        let values = self.values[a * w..(a + range.len()) * w].to_vec();
        Ok(SignalMatrix {
            calendar: range,
            columns: self.columns.clone(),
            values,
        })
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::Shape(format!("missing column `{n}`")))
            })
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(self.rows() * idx.len());
        for r in 0..self.rows() {
            let row = self.row(r);
            values.extend(idx.iter().map(|&c| row[c]));
        }
        SignalMatrix::new(self.calendar, names.to_vec(), values)
    }

    /// CSV with a leading `date` column. Values use the shortest decimal form
    /// that parses back to the identical `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("date");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in 0..self.rows() {
            let _ = write!(out, "{}", self.calendar.date_at(r));
            for v in self.row(r) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Empty("signal CSV has no header".into()))?;
        let mut cols = header.trim().split(',');
        if cols.next() != Some("date") {
            return Err(Error::Malformed {
                line: 1,
                reason: "first column must be `date`".into(),
            });
        }
        let columns: Vec<String> = cols.map(str::to_string).collect();
        let mut dates = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let mut fields = line.trim().split(',');
            let date_field = fields.next().unwrap_or_default();
            let date = NaiveDate::parse_from_str(date_field, "%Y-%m-%d").map_err(|e| Error::Malformed {
                line: idx + 1,
                reason: format!("bad date `{date_field}`: {e}"),
            })?;
            let before = values.len();
            for f in fields {
                values.push(f.parse::<f64>().map_err(|_| Error::Malformed {
                    line: idx + 1,
                    reason: format!("bad number `{f}`"),
                })?);
            }
            if values.len() - before != columns.len() {
                return Err(Error::Malformed {
                    line: idx + 1,
                    reason: "wrong field count".into(),
                });
            }
            dates.push(date);
        }
        let calendar = DateRange::new(
            *dates.first().ok_or_else(|| Error::Empty("signal CSV has no rows".into()))?,
            *dates.last().unwrap(),
        )?;
        if calendar.len() != dates.len() || dates.windows(2).any(|w| (w[1] - w[0]).num_days() != 1) {
            return Err(Error::Range("signal CSV dates are not consecutive".into()));
        }
        SignalMatrix::new(calendar, columns, values)
    }
}

/// The signal families that can be combined with price history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SignalFamily {
    Price,
    GhPop,
    GhAll,
    RVol,
    RLang,
    RScore,
    RSent,
}

impl SignalFamily {
    /// The six social families, in canonical order.
    pub const SOCIAL: [SignalFamily; 6] = [
        SignalFamily::GhPop,
        SignalFamily::GhAll,
        SignalFamily::RVol,
        SignalFamily::RLang,
        SignalFamily::RScore,
        SignalFamily::RSent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SignalFamily::Price => "Price",
            SignalFamily::GhPop => "GH_Pop",
            SignalFamily::GhAll => "GH_All",
            SignalFamily::RVol => "R_Vol",
            SignalFamily::RLang => "R_Lang",
            SignalFamily::RScore => "R_Score",
            SignalFamily::RSent => "R_Sent",
        }
    }
}

impl std::fmt::Display for SignalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "price" | "" => SignalFamily::Price,
            "ghpop" => SignalFamily::GhPop,
            "ghall" => SignalFamily::GhAll,
            "rvol" => SignalFamily::RVol,
            "rlang" => SignalFamily::RLang,
            "rscore" => SignalFamily::RScore,
            "rsent" => SignalFamily::RSent,
            _ => return Err(Error::InvalidArgument(format!("unknown signal family `{s}`"))),
        })
    }
}

fn count_events(events: &[EventRecord], calendar: DateRange, kinds: &[EventKind]) -> SignalMatrix {
    let columns = kinds.iter().map(|k| k.column().to_string()).collect();
    let mut m = SignalMatrix::zeros(calendar, columns);
    let w = kinds.len();
    for e in events {
        let (Some(row), Some(col)) = (calendar.index_of(e.day()), kinds.iter().position(|k| *k == e.event_type)) else {
            continue;
        };
        m.values[row * w + col] += 1.0;
    }
    m
}

/// `gh_watch`, `gh_fork`: daily popularity event counts.
pub fn github_popularity_signal(events: &[EventRecord], calendar: DateRange) -> SignalMatrix {
    count_events(events, calendar, &[EventKind::Watch, EventKind::Fork])
}

/// Daily counts for all eight recognized event kinds.
pub fn github_all_signal(events: &[EventRecord], calendar: DateRange) -> SignalMatrix {
    count_events(events, calendar, &EventKind::ALL)
}

/// Groups comment indices by calendar row.
fn comments_by_day(comments: &[CommentRecord], calendar: DateRange) -> Vec<Vec<&CommentRecord>> {
    let mut days = vec![Vec::new(); calendar.len()];
    for c in comments {
        if let Some(row) = calendar.index_of(c.day()) {
            days[row].push(c);
        }
    }
    days
}

/// `r_vol`: daily comment count.
pub fn reddit_volume_signal(comments: &[CommentRecord], calendar: DateRange) -> SignalMatrix {
    let mut m = SignalMatrix::zeros(calendar, vec!["r_vol".into()]);
    for c in comments {
        if let Some(row) = calendar.index_of(c.day()) {
            m.values[row] += 1.0;
        }
    }
    m
}

/// Lowercases and splits on anything outside `[a-z0-9]`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_ascii_lowercase()
        .split(|c: char| !(c.is_ascii_lowercase() || c.is_ascii_digit()))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Most frequent unigrams, ordered by descending count then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        Vocabulary::from_tokens(tokens)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

pub fn build_vocabulary(comments: &[CommentRecord], size: usize) -> Result<Vocabulary> {
    if size == 0 {
        return Err(Error::InvalidArgument("vocabulary size must be at least 1".into()));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for c in comments {
        for t in tokenize(&c.body) {
            *counts.entry(t).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::Empty("comment corpus has no tokens".into()));
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(size);
    Vocabulary::from_tokens(ranked.into_iter().map(|(t, _)| t).collect())
}

/// `r_lang_<token>`: per-day relative frequency of each vocabulary token
/// among that day's in-vocabulary tokens.
pub fn reddit_language_signal(
    comments: &[CommentRecord],
    vocab: &Vocabulary,
    calendar: DateRange,
) -> Result<SignalMatrix> {
    if vocab.is_empty() {
        return Err(Error::InvalidArgument("empty vocabulary".into()));
    }
    let columns = vocab.tokens().iter().map(|t| format!("r_lang_{t}")).collect();
    let mut m = SignalMatrix::zeros(calendar, columns);
    let w = vocab.len();
    let mut counts = vec![0u64; w];
    for (row, day) in comments_by_day(comments, calendar).into_iter().enumerate() {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut total = 0u64;
        for c in day {
            for t in tokenize(&c.body) {
                if let Some(i) = vocab.position(&t) {
                    counts[i] += 1;
                    total += 1;
                }
            }
        }
        if total > 0 {
            let cells = &mut m.values[row * w..(row + 1) * w];
            for (cell, &n) in cells.iter_mut().zip(&counts) {
                *cell = n as f64 / total as f64;
            }
        }
    }
    Ok(m)
}

/// Quantile at fractional rank `p * (n - 1)` of already-sorted data.
pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = p * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Q1, median and Q3 by linear interpolation; `(0, 0, 0)` for empty input.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    (
        sorted_quantile(&v, 0.25),
        sorted_quantile(&v, 0.5),
        sorted_quantile(&v, 0.75),
    )
}

/// `r_score_q1..q3`: quartiles of the day's comment scores.
pub fn reddit_score_signal(comments: &[CommentRecord], calendar: DateRange) -> SignalMatrix {
    let columns = ["r_score_q1", "r_score_q2", "r_score_q3"].map(String::from).to_vec();
    let mut m = SignalMatrix::zeros(calendar, columns);
    for (row, day) in comments_by_day(comments, calendar).into_iter().enumerate() {
        let scores: Vec<f64> = day.iter().map(|c| c.score as f64).collect();
        let (q1, q2, q3) = quartiles(&scores);
        m.values[row * 3..row * 3 + 3].copy_from_slice(&[q1, q2, q3]);
    }
    m
}

/// Token → (polarity, subjectivity) scores.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, (f64, f64)>,
}

impl SentimentLexicon {
    pub fn insert(&mut self, token: &str, polarity: f64, subjectivity: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&polarity) {
            return Err(Error::InvalidArgument(format!(
                "polarity {polarity} for `{token}` outside [-1, 1]"
            )));
        }
        if !(0.0..=1.0).contains(&subjectivity) {
            return Err(Error::InvalidArgument(format!(
                "subjectivity {subjectivity} for `{token}` outside [0, 1]"
            )));
        }
        self.entries.insert(token.to_ascii_lowercase(), (polarity, subjectivity));
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<(f64, f64)> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `token<TAB>polarity<TAB>subjectivity` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = SentimentLexicon::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let malformed = |reason: String| Error::Malformed { line: idx + 1, reason };
            if fields.len() != 3 {
                return Err(malformed(format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let pol: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad polarity `{}`", fields[1])))?;
            let subj: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad subjectivity `{}`", fields[2])))?;
            lex.insert(fields[0].trim(), pol, subj)
                .map_err(|e| malformed(e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is well-formed")
    }
}

/// Mean polarity and subjectivity over the lexicon tokens present in `text`.
pub fn score_sentiment(text: &str, lexicon: &SentimentLexicon) -> (f64, f64) {
    let (mut pol, mut subj, mut n) = (0.0, 0.0, 0usize);
    for t in tokenize(text) {
        if let Some((p, s)) = lexicon.get(&t) {
            pol += p;
            subj += s;
            n += 1;
        }
    }
    if n == 0 {
        (0.0, 0.0)
    } else {
        (pol / n as f64, subj / n as f64)
    }
}

/// `r_pol_q1..q3`, `r_subj_q1..q3`: quartiles of per-comment sentiment.
pub fn reddit_sentiment_signal(
    comments: &[CommentRecord],
    lexicon: &SentimentLexicon,
    calendar: DateRange,
) -> SignalMatrix {
    let columns = ["r_pol_q1", "r_pol_q2", "r_pol_q3", "r_subj_q1", "r_subj_q2", "r_subj_q3"]
        .map(String::from)
        .to_vec();
    let mut m = SignalMatrix::zeros(calendar, columns);
    for (row, day) in comments_by_day(comments, calendar).into_iter().enumerate() {
        let (pol, subj): (Vec<f64>, Vec<f64>) = day
            .iter()
            .map(|c| score_sentiment(&c.body, lexicon))
            .unzip();
        let (p1, p2, p3) = quartiles(&pol);
        let (s1, s2, s3) = quartiles(&subj);
        m.values[row * 6..row * 6 + 6].copy_from_slice(&[p1, p2, p3, s1, s2, s3]);
    }
    m
}

/// Joins matrices column-wise in argument order.
pub fn concat_signals(parts: &[&SignalMatrix]) -> Result<SignalMatrix> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
    let calendar = first.calendar;
    let mut columns = Vec::new();
    for p in parts {
        if p.calendar != calendar {
            return Err(Error::Range(format!(
                "calendar mismatch: {} vs {}",
                p.calendar, calendar
            )));
        }
        columns.extend(p.columns.iter().cloned());
    }
    let width = columns.len();
    let mut values = Vec::with_capacity(calendar.len() * width);
    for r in 0..calendar.len() {
        for p in parts {
            values.extend_from_slice(p.row(r));
        }
    }
    SignalMatrix::new(calendar, columns, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn cal(start: &str, len: usize) -> DateRange {
        DateRange::with_len(d(start), len)
    }

    fn ts(date: &str, hour: u32) -> i64 {
        let day = d(date);
        Utc.from_utc_datetime(&day.and_hms_opt(hour, 0, 0).unwrap()).timestamp()
    }

    fn comment(date: &str, body: &str, score: i64) -> CommentRecord {
        CommentRecord {
            created_utc: ts(date, 12),
            subreddit: "bitcoin".into(),
            body: body.into(),
            score,
        }
    }

    fn event(date: &str, kind: EventKind) -> EventRecord {
        EventRecord {
            created_at: Utc.from_utc_datetime(&d(date).and_hms_opt(8, 0, 0).unwrap()),
            repo: "bitcoin/bitcoin".into(),
            event_type: kind,
        }
    }

    #[test]
    fn popularity_counts() {
        let mut ev = vec![event("2017-05-04", EventKind::Fork)];
        ev.extend((0..3).map(|_| event("2017-05-04", EventKind::Watch)));
        ev.push(event("2017-06-01", EventKind::Watch));
        let m = github_popularity_signal(&ev, cal("2017-05-04", 2));
        assert_eq!(m.columns(), ["gh_watch", "gh_fork"]);
        assert_eq!(m.row(0), [3.0, 1.0]);
        assert_eq!(m.row(1), [0.0, 0.0]);
    }

    #[test]
    fn all_event_counts() {
        let ev: Vec<_> = EventKind::ALL.iter().map(|k| event("2017-05-04", *k)).collect();
        let m = github_all_signal(&ev, cal("2017-05-04", 2));
        assert_eq!(m.row(0), [1.0; 8]);
        assert_eq!(m.row(1), [0.0; 8]);

        let ev = vec![
            event("2017-05-04", EventKind::Push),
            event("2017-05-04", EventKind::Push),
            event("2017-05-04", EventKind::PullRequest),
        ];
        let m = github_all_signal(&ev, cal("2017-05-04", 1));
        assert_eq!(m.row(0), [0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn volume_counts_and_utc_boundary() {
        let mut cs: Vec<_> = (0..5).map(|_| comment("2017-05-04", "", 0)).collect();
        cs.push(CommentRecord {
            created_utc: ts("2017-05-05", 0) - 1,
            subreddit: "bitcoin".into(),
            body: String::new(),
            score: 1,
        });
        let m = reddit_volume_signal(&cs, cal("2017-05-04", 2));
        assert_eq!(m.column(0), vec![6.0, 0.0]);
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("HODL to the Moon!!"), ["hodl", "to", "the", "moon"]);
        assert_eq!(tokenize("BTC-USD 2x"), ["btc", "usd", "2x"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a ü b"), ["a", "b"]);
    }

    #[test]
    fn vocabulary_ordering() {
        let cs = vec![comment("2017-05-04", "a a a c b", 0)];
        let v = build_vocabulary(&cs, 2).unwrap();
        assert_eq!(v.tokens(), ["a", "b"]);
        let cs = vec![comment("2017-05-04", "w x y z", 0)];
        assert_eq!(build_vocabulary(&cs, DEFAULT_VOCAB_SIZE).unwrap().len(), 4);
        assert!(build_vocabulary(&cs, 0).is_err());
        assert!(build_vocabulary(&[], 10).is_err());
    }

    #[test]
    fn language_normalization() {
        let vocab = Vocabulary::from_tokens(vec!["btc".into(), "moon".into()]).unwrap();
        let cs = vec![
            comment("2017-05-04", "btc btc", 0),
            comment("2017-05-04", "moon", 0),
            comment("2017-05-05", "lambo wen", 0),
        ];
        let m = reddit_language_signal(&cs, &vocab, cal("2017-05-04", 3)).unwrap();
        assert_eq!(m.columns(), ["r_lang_btc", "r_lang_moon"]);
        assert_eq!(m.row(0), [2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(m.row(1), [0.0, 0.0]);
        assert_eq!(m.row(2), [0.0, 0.0]);
    }

    #[test]
    fn quartile_convention() {
        assert_eq!(quartiles(&[0.0, 1.0, 2.0, 3.0, 4.0]), (1.0, 2.0, 3.0));
        assert_eq!(quartiles(&[5.0]), (5.0, 5.0, 5.0));
        assert_eq!(quartiles(&[]), (0.0, 0.0, 0.0));
        assert_eq!(quartiles(&[4.0, 1.0, 3.0, 2.0]), (1.75, 2.5, 3.25));
    }

    #[test]
    fn score_quartiles() {
        let cs: Vec<_> = (0..5).map(|s| comment("2017-05-04", "", s)).collect();
        let mut all = cs.clone();
        all.push(comment("2017-05-06", "", -2));
        let m = reddit_score_signal(&all, cal("2017-05-04", 3));
        assert_eq!(m.row(0), [1.0, 2.0, 3.0]);
        assert_eq!(m.row(1), [0.0, 0.0, 0.0]);
        assert_eq!(m.row(2), [-2.0, -2.0, -2.0]);
    }

    #[test]
    fn sentiment_means() {
        let mut lex = SentimentLexicon::default();
        lex.insert("good", 0.7, 0.6).unwrap();
        assert_eq!(score_sentiment("good good", &lex), (0.7, 0.6));
        lex.insert("bad", -0.7, 0.7).unwrap();
        let (p, s) = score_sentiment("good bad", &lex);
        assert_eq!(p, 0.0);
        assert!((s - 0.65).abs() < 1e-15);
        assert_eq!(score_sentiment("nothing here", &lex), (0.0, 0.0));
    }

    #[test]
    fn lexicon_parsing() {
        let lex = SentimentLexicon::parse("# header\ngood\t0.7\t0.6\n\nbad\t-0.7\t0.7\n").unwrap();
        assert_eq!(lex.len(), 2);
        assert!(SentimentLexicon::parse("x\t1.5\t0.5\n").is_err());
        assert!(SentimentLexicon::parse("x\t0.5\t-0.1\n").is_err());
        assert!(SentimentLexicon::parse("x 0.5 0.1\n").is_err());
        assert!(!SentimentLexicon::bundled().is_empty());
    }

    #[test]
    fn sentiment_signal_rows() {
        let mut lex = SentimentLexicon::default();
        for (i, w) in ["p0", "p1", "p2", "p3", "p4"].iter().enumerate() {
            lex.insert(w, i as f64 / 10.0, 0.5).unwrap();
        }
        let cs: Vec<_> = ["p0", "p1", "p2", "p3", "p4"]
            .iter()
            .map(|w| comment("2017-05-04", w, 0))
            .collect();
        let m = reddit_sentiment_signal(&cs, &lex, cal("2017-05-04", 2));
        let row = m.row(0);
        assert!((row[0] - 0.1).abs() < 1e-15 && (row[1] - 0.2).abs() < 1e-15 && (row[2] - 0.3).abs() < 1e-15);
        assert_eq!(&row[3..], [0.5, 0.5, 0.5]);
        assert_eq!(m.row(1), [0.0; 6]);

        let one = vec![comment("2017-05-04", "p4 p1", 0)];
        let m = reddit_sentiment_signal(&one, &lex, cal("2017-05-04", 1));
        assert!(m.row(0)[..3].iter().all(|v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn concat_rules() {
        let c = cal("2017-05-04", 2);
        let price = SignalMatrix::from_column(c, PRICE_HIGH_COLUMN, &[1.0, 2.0]).unwrap();
        let gh = github_popularity_signal(&[], c);
        let m = concat_signals(&[&price, &gh]).unwrap();
        assert_eq!(m.width(), 3);
        assert_eq!(m.row(1), [2.0, 0.0, 0.0]);

        assert_eq!(concat_signals(&[&price]).unwrap(), price);

        let other = github_popularity_signal(&[], cal("2017-05-05", 2));
        assert!(concat_signals(&[&price, &other]).is_err());
        assert!(concat_signals(&[&gh, &gh]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = cal("2017-05-04", 3);
        let m = SignalMatrix::new(
            c,
            vec!["a".into(), "b".into()],
            vec![0.1, 1.0 / 3.0, -2.5, 1e-300, 7.0, 123456.789],
        )
        .unwrap();
        assert_eq!(SignalMatrix::from_csv(&m.to_csv()).unwrap(), m);
    }

    #[test]
    fn matrix_invariants_enforced() {
        let c = cal("2017-05-04", 1);
        assert!(SignalMatrix::new(c, vec!["a".into()], vec![f64::NAN]).is_err());
        assert!(SignalMatrix::new(c, vec!["a".into(), "a".into()], vec![1.0, 2.0]).is_err());
        assert!(SignalMatrix::new(c, vec!["a".into()], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn family_names_parse() {
        for f in SignalFamily::SOCIAL {
            assert_eq!(f.name().parse::<SignalFamily>().unwrap(), f);
        }
        assert_eq!("r_lang".parse::<SignalFamily>().unwrap(), SignalFamily::RLang);
        assert!("twitter".parse::<SignalFamily>().is_err());
    }
}
