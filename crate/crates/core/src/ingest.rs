//! Parsers for the three local archive formats: daily price CSVs,
//! pushshift-style Reddit comment dumps and GitHub Archive event dumps.
//!
//! All timestamps are bucketed into UTC calendar days.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::calendar::DateRange;
use crate::error::{Error, Result};

/// Header every price CSV must start with.
pub const PRICE_HEADER: &str = "date,open,high,low,close";

/// Fraction of unreadable lines tolerated before a record file is rejected.
pub const MAX_SKIP_RATE: f64 = 0.01;

/// Daily OHLC prices in USD for one coin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub coin: String,
    pub dates: Vec<NaiveDate>,
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// The calendar spanned by the series. Only meaningful once it is gap-free.
    pub fn range(&self) -> Option<DateRange> {
        Some(DateRange {
            start: *self.dates.first()?,
            end: *self.dates.last()?,
        })
    }

    /// Checks the OHLC ordering, positivity, array lengths and date ordering.
    /// `require_consecutive` additionally rejects gaps between dates.
    pub fn validate(&self, require_consecutive: bool) -> Result<()> {
        let n = self.dates.len();
        if [&self.open, &self.high, &self.low, &self.close]
            .iter()
            .any(|v| v.len() != n)
        {
            return Err(Error::Shape(format!(
                "price arrays for {} differ in length",
                self.coin
            )));
        }
        for i in 0..n {
            if i > 0 {
                let step = (self.dates[i] - self.dates[i - 1]).num_days();
                if step <= 0 || (require_consecutive && step != 1) {
                    return Err(Error::Range(format!(
                        "dates not consecutive at {}",
                        self.dates[i]
                    )));
                }
            }
            check_ohlc(self.open[i], self.high[i], self.low[i], self.close[i])
                .map_err(|reason| Error::InvalidPrice { line: i + 2, reason })?;
        }
        Ok(())
    }

    /// Renders the series in the same CSV layout [`load_price_series`] reads.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.len() + 1));
        out.push_str(PRICE_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.dates[i], self.open[i], self.high[i], self.low[i], self.close[i]
            );
        }
        out
    }
}

fn check_ohlc(open: f64, high: f64, low: f64, close: f64) -> std::result::Result<(), String> {
    for (name, v) in [("open", open), ("high", high), ("low", low), ("close", close)] {
        if !v.is_finite() {
            return Err(format!("{name} is not a finite number"));
        }
        if v <= 0.0 {
            return Err(format!("non-positive {name} price"));
        }
    }
    if open > high {
        return Err("open exceeds high".into());
    }
    if close > high {
        return Err("close exceeds high".into());
    }
    if open < low {
        return Err("open below low".into());
    }
    if close < low {
        return Err("close below low".into());
    }
    Ok(())
}

/// Reads a `date,open,high,low,close` CSV. Line numbers in errors are
/// 1-based and count the header.
pub fn load_price_series(path: impl AsRef<Path>, coin: &str) -> Result<PriceSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_price_csv(&text, coin)
}

pub fn parse_price_csv(text: &str, coin: &str) -> Result<PriceSeries> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == PRICE_HEADER => {}
        Some((_, header)) if !header.trim().is_empty() => {
            return Err(Error::Malformed {
                line: 1,
                reason: format!("expected header `{PRICE_HEADER}`, found `{}`", header.trim()),
            })
        }
        _ => return Err(Error::Empty(format!("price file for {coin} has no header"))),
    }

    let mut rows: Vec<(NaiveDate, [f64; 4], usize)> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::Malformed {
                line,
                reason: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d").map_err(|e| {
            Error::Malformed {
                line,
                reason: format!("bad date `{}`: {e}", fields[0]),
            }
        })?;
        let mut ohlc = [0.0; 4];
        for (slot, field) in ohlc.iter_mut().zip(&fields[1..]) {
            *slot = field.parse::<f64>().map_err(|_| Error::Malformed {
                line,
                reason: format!("bad number `{field}`"),
            })?;
        }
        check_ohlc(ohlc[0], ohlc[1], ohlc[2], ohlc[3])
            .map_err(|reason| Error::InvalidPrice { line, reason })?;
        rows.push((date, ohlc, line));
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!("price file for {coin} has no rows")));
    }

    rows.sort_by_key(|r| r.0);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::DuplicateDate {
                date: pair[1].0,
                line: pair[0].2.max(pair[1].2),
            });
        }
    }

    let mut series = PriceSeries {
        coin: coin.to_string(),
        dates: Vec::with_capacity(rows.len()),
        open: Vec::with_capacity(rows.len()),
        high: Vec::with_capacity(rows.len()),
        low: Vec::with_capacity(rows.len()),
        close: Vec::with_capacity(rows.len()),
    };
    for (date, [o, h, l, c], _) in rows {
        series.dates.push(date);
        series.open.push(o);
        series.high.push(h);
        series.low.push(l);
        series.close.push(c);
    }
    Ok(series)
}

/// Days that [`align_calendar`] had to synthesize.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillReport {
    pub filled: Vec<NaiveDate>,
}

impl FillReport {
    pub fn count(&self) -> usize {
        self.filled.len()
    }
}

/// Restricts `price` to `[start, end]`, forward-filling any missing day
/// from the previous row.
pub fn align_calendar(
    price: &PriceSeries,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<(PriceSeries, FillReport)> {
    let range = DateRange::new(start, end)?;
    let (first, last) = match (price.dates.first(), price.dates.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::Empty(format!("price series for {}", price.coin))),
    };
    if start < first || end > last {
        return Err(Error::Range(format!(
            "requested {range} extends beyond available {first}..={last} for {}",
            price.coin
        )));
    }
    let Ok(mut cursor) = price.dates.binary_search(&start) else {
        return Err(Error::Range(format!(
            "first requested day {start} missing for {}; nothing to carry forward",
            price.coin
        )));
    };

    let n = range.len();
    let mut out = PriceSeries {
        coin: price.coin.clone(),
        dates: Vec::with_capacity(n),
        open: Vec::with_capacity(n),
        high: Vec::with_capacity(n),
        low: Vec::with_capacity(n),
        close: Vec::with_capacity(n),
    };
    let mut report = FillReport::default();
    let mut src = cursor;
    for day in range.iter() {
        if cursor < price.dates.len() && price.dates[cursor] == day {
            src = cursor;
            cursor += 1;
        } else {
            report.filled.push(day);
        }
        out.dates.push(day);
        out.open.push(price.open[src]);
        out.high.push(price.high[src]);
        out.low.push(price.low[src]);
        out.close.push(price.close[src]);
    }
    Ok((out, report))
}

/// One Reddit comment, reduced to the fields the signals use.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CommentRecord {
    pub created_utc: i64,
    pub subreddit: String,
    pub body: String,
    pub score: i64,
}

impl CommentRecord {
    pub fn day(&self) -> NaiveDate {
        utc_day(self.created_utc)
    }
}

pub(crate) fn utc_day(seconds: i64) -> NaiveDate {
    DateTime::<Utc>::from_timestamp(seconds, 0)
        .map(|t| t.date_naive())
        .unwrap_or(NaiveDate::MIN)
}

/// The eight GitHub event kinds the signals recognize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Watch,
    Fork,
    Issues,
    IssueComment,
    Push,
    CommitComment,
    PullRequest,
    PullRequestReviewComment,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::Watch,
        EventKind::Fork,
        EventKind::Issues,
        EventKind::IssueComment,
        EventKind::Push,
        EventKind::CommitComment,
        EventKind::PullRequest,
        EventKind::PullRequestReviewComment,
    ];

    /// Maps a GitHub Archive `type` string such as `WatchEvent`.
    pub fn from_archive_type(s: &str) -> Option<Self> {
        Some(match s {
            "WatchEvent" => EventKind::Watch,
            "ForkEvent" => EventKind::Fork,
            "IssuesEvent" => EventKind::Issues,
            "IssueCommentEvent" => EventKind::IssueComment,
            "PushEvent" => EventKind::Push,
            "CommitCommentEvent" => EventKind::CommitComment,
            "PullRequestEvent" => EventKind::PullRequest,
            "PullRequestReviewCommentEvent" => EventKind::PullRequestReviewComment,
            _ => return None,
        })
    }

    pub fn archive_type(self) -> &'static str {
        match self {
            EventKind::Watch => "WatchEvent",
            EventKind::Fork => "ForkEvent",
            EventKind::Issues => "IssuesEvent",
            EventKind::IssueComment => "IssueCommentEvent",
            EventKind::Push => "PushEvent",
            EventKind::CommitComment => "CommitCommentEvent",
            EventKind::PullRequest => "PullRequestEvent",
            EventKind::PullRequestReviewComment => "PullRequestReviewCommentEvent",
        }
    }

    /// Column name used in signal matrices, e.g. `gh_issue_comment`.
    pub fn column(self) -> &'static str {
        match self {
            EventKind::Watch => "gh_watch",
            EventKind::Fork => "gh_fork",
            EventKind::Issues => "gh_issues",
            EventKind::IssueComment => "gh_issue_comment",
            EventKind::Push => "gh_push",
            EventKind::CommitComment => "gh_commit_comment",
            EventKind::PullRequest => "gh_pull_request",
            EventKind::PullRequestReviewComment => "gh_pull_request_review_comment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventRecord {
    pub created_at: DateTime<Utc>,
    pub repo: String,
    pub event_type: EventKind,
}

impl EventRecord {
    pub fn day(&self) -> NaiveDate {
        self.created_at.date_naive()
    }
}

/// Records read from a newline-delimited archive along with line accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    /// Non-blank lines read.
    pub lines: usize,
    /// Lines that failed to parse or lacked a required field.
    pub skipped: usize,
    /// Well-formed lines dropped by a filter other than the key match
    /// (unrecognized event types).
    pub dropped: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntOrString {
    Int(i64),
    Float(f64),
    Str(String),
}

impl IntOrString {
    fn as_i64(&self) -> Option<i64> {
        match self {
            IntOrString::Int(v) => Some(*v),
            IntOrString::Float(v) if v.fract() == 0.0 && v.is_finite() => Some(*v as i64),
            IntOrString::Float(_) => None,
            IntOrString::Str(s) => s.trim().parse().ok(),
        }
    }
}

#[derive(Deserialize)]
struct RawComment {
    created_utc: IntOrString,
    subreddit: String,
    body: String,
    score: i64,
}

#[derive(Deserialize)]
struct RawRepo {
    name: String,
}

#[derive(Deserialize)]
struct RawEvent {
    #[serde(rename = "type")]
    kind: String,
    created_at: String,
    repo: RawRepo,
}

enum LineOutcome<T> {
    Keep(T),
    Filtered,
    Dropped,
}

fn read_ndjson<T, F>(path: &Path, what: &str, mut parse: F) -> Result<Loaded<T>>
where
    F: FnMut(&str) -> Option<LineOutcome<T>>,
{
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut loaded = Loaded {
        records: Vec::new(),
        lines: 0,
        skipped: 0,
        dropped: 0,
    };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        loaded.lines += 1;
        match parse(line) {
            Some(LineOutcome::Keep(r)) => loaded.records.push(r),
            Some(LineOutcome::Filtered) => {}
            Some(LineOutcome::Dropped) => loaded.dropped += 1,
            None => loaded.skipped += 1,
        }
    }
    check_skip_rate(loaded.skipped, loaded.lines)?;
    if loaded.lines == 0 {
        log::warn!("{what} archive {} is empty", path.display());
    } else if loaded.skipped > 0 {
        log::warn!(
            "{what} archive {}: skipped {} of {} lines",
            path.display(),
            loaded.skipped,
            loaded.lines
        );
    }
    Ok(loaded)
}

pub(crate) fn check_skip_rate(skipped: usize, total: usize) -> Result<()> {
    if total > 0 && skipped as f64 > MAX_SKIP_RATE * total as f64 {
        let percent = 100.0 * skipped as f64 / total as f64;
        let percent = if percent.fract() == 0.0 {
            format!("{percent:.0}")
        } else {
            format!("{percent:.2}")
        };
        return Err(Error::SkipRate {
            skipped,
            total,
            percent,
        });
    }
    Ok(())
}

/// Reads comments from a pushshift-style NDJSON dump, keeping those posted to
/// `subreddit` (case-insensitive), sorted by creation time.
pub fn load_reddit_comments(path: impl AsRef<Path>, subreddit: &str) -> Result<Loaded<CommentRecord>> {
    let mut loaded = read_ndjson(path.as_ref(), "reddit", |line| {
        let raw: RawComment = serde_json::from_str(line).ok()?;
        let created_utc = raw.created_utc.as_i64().filter(|t| *t > 0)?;
        if !raw.subreddit.eq_ignore_ascii_case(subreddit) {
            return Some(LineOutcome::Filtered);
        }
        Some(LineOutcome::Keep(CommentRecord {
            created_utc,
            subreddit: raw.subreddit,
            body: raw.body,
            score: raw.score,
        }))
    })?;
    loaded.records.sort();
    Ok(loaded)
}

/// Reads GitHub Archive events for `repo` (`owner/name`, case-insensitive),
/// keeping the eight recognized event kinds, sorted by timestamp.
pub fn load_github_events(path: impl AsRef<Path>, repo: &str) -> Result<Loaded<EventRecord>> {
    let mut loaded = read_ndjson(path.as_ref(), "github", |line| {
        let raw: RawEvent = serde_json::from_str(line).ok()?;
        let created_at = DateTime::parse_from_rfc3339(&raw.created_at)
            .ok()?
            .with_timezone(&Utc);
        if !raw.repo.name.eq_ignore_ascii_case(repo) {
            return Some(LineOutcome::Filtered);
        }
        match EventKind::from_archive_type(&raw.kind) {
            Some(event_type) => Some(LineOutcome::Keep(EventRecord {
                created_at,
                repo: raw.repo.name,
                event_type,
            })),
            None => Some(LineOutcome::Dropped),
        }
    })?;
    loaded.records.sort();
    Ok(loaded)
}

/// Serializes comments in the pushshift subset the loader reads.
pub fn comments_to_ndjson(comments: &[CommentRecord]) -> String {
    let mut out = String::new();
    for c in comments {
        let line = serde_json::json!({
            "created_utc": c.created_utc,
            "subreddit": c.subreddit,
            "body": c.body,
            "score": c.score,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

/// Serializes events in the GitHub Archive subset the loader reads.
pub fn events_to_ndjson(events: &[EventRecord]) -> String {
    let mut out = String::new();
    for e in events {
        let line = serde_json::json!({
            "type": e.event_type.archive_type(),
            "created_at": e.created_at.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            "repo": { "name": e.repo },
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn single_row_price() {
        let s = parse_price_csv("date,open,high,low,close\n2017-05-04,1500,1588.11,1490,1580\n", "bitcoin")
            .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.high[0], 1588.11);
    }

    #[test]
    fn open_above_high_reports_line() {
        let csv = "date,open,high,low,close\n2017-05-04,1500,1588.11,1490,1580\n2017-05-05,1580,1560.42,1500,1550\n";
        let err = parse_price_csv(csv, "bitcoin").unwrap_err();
        assert_eq!(err.to_string(), "open exceeds high at line 3");
    }

    #[test]
    fn duplicate_date_rejected() {
        let csv = "date,open,high,low,close\n2017-05-04,1,2,1,1\n2017-05-04,1,2,1,1\n";
        assert!(matches!(
            parse_price_csv(csv, "x"),
            Err(Error::DuplicateDate { .. })
        ));
    }

    #[test]
    fn non_positive_and_empty_rejected() {
        let csv = "date,open,high,low,close\n2017-05-04,1,2,0,1\n";
        assert!(matches!(parse_price_csv(csv, "x"), Err(Error::InvalidPrice { line: 2, .. })));
        assert!(matches!(parse_price_csv("date,open,high,low,close\n", "x"), Err(Error::Empty(_))));
        assert!(matches!(parse_price_csv("", "x"), Err(Error::Empty(_))));
    }

    #[test]
    fn malformed_row_reports_line() {
        let csv = "date,open,high,low,close\n2017-05-04,1,2,1,1\n2017-05-05,1,2,x,1\n";
        let err = parse_price_csv(csv, "x").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 3, .. }), "{err}");
    }

    #[test]
    fn rows_are_sorted() {
        let csv = "date,open,high,low,close\n2017-05-05,2,3,1,2\n2017-05-04,1,2,1,1\n";
        let s = parse_price_csv(csv, "x").unwrap();
        assert_eq!(s.dates, vec![d("2017-05-04"), d("2017-05-05")]);
        assert_eq!(s.open, vec![1.0, 2.0]);
    }

    fn gappy() -> PriceSeries {
        parse_price_csv(
            "date,open,high,low,close\n2017-01-01,1,2,0.5,1.5\n2017-01-03,3,4,2.5,3.5\n",
            "x",
        )
        .unwrap()
    }

    #[test]
    fn align_fills_gap_forward() {
        let (s, report) = align_calendar(&gappy(), d("2017-01-01"), d("2017-01-03")).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(report.count(), 1);
        assert_eq!(report.filled, vec![d("2017-01-02")]);
        assert_eq!(s.high[1], 2.0);
        assert_eq!(s.open[2], 3.0);
        s.validate(true).unwrap();
    }

    #[test]
    fn align_identity_without_gaps() {
        let csv = "date,open,high,low,close\n2017-01-01,1,2,0.5,1.5\n2017-01-02,3,4,2.5,3.5\n";
        let s = parse_price_csv(csv, "x").unwrap();
        let (out, report) = align_calendar(&s, d("2017-01-01"), d("2017-01-02")).unwrap();
        assert_eq!(out, s);
        assert_eq!(report.count(), 0);
    }

    #[test]
    fn align_out_of_range() {
        assert!(align_calendar(&gappy(), d("2016-12-31"), d("2017-01-03")).is_err());
        assert!(align_calendar(&gappy(), d("2017-01-01"), d("2017-01-04")).is_err());
        assert!(matches!(
            align_calendar(&gappy(), d("2017-01-02"), d("2017-01-03")),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn reddit_filters_by_subreddit() {
        let f = tmp(concat!(
            r#"{"created_utc": 1493856000, "subreddit": "Bitcoin", "body": "to the moon", "score": 4}"#, "\n",
            r#"{"created_utc": 1493856100, "subreddit": "ethereum", "body": "gas", "score": 1}"#, "\n",
            r#"{"created_utc": "1493855000", "subreddit": "bitcoin", "body": "", "score": -3}"#, "\n",
        ));
        let loaded = load_reddit_comments(f.path(), "bitcoin").unwrap();
        assert_eq!(loaded.records.len(), 2);
        assert_eq!(loaded.records[0].created_utc, 1493855000);
        assert_eq!(loaded.records[0].body, "");
        assert_eq!(loaded.records[0].score, -3);
    }

    #[test]
    fn reddit_skip_rate_enforced() {
        let mut text = String::new();
        for i in 0..100 {
            if i % 20 == 0 {
                text.push_str("{not json\n");
            } else {
                text.push_str(&format!(
                    "{{\"created_utc\": {}, \"subreddit\": \"bitcoin\", \"body\": \"x\", \"score\": 1}}\n",
                    1493856000 + i
                ));
            }
        }
        let f = tmp(&text);
        let err = load_reddit_comments(f.path(), "bitcoin").unwrap_err();
        assert!(err.to_string().starts_with("skip rate 5% exceeds 1%"), "{err}");
    }

    #[test]
    fn missing_field_counts_as_skip() {
        let mut text = String::new();
        for i in 0..200 {
            text.push_str(&format!(
                "{{\"created_utc\": {}, \"subreddit\": \"bitcoin\", \"body\": \"x\", \"score\": 1}}\n",
                1493856000 + i
            ));
        }
        text.push_str("{\"created_utc\": 5, \"subreddit\": \"bitcoin\", \"body\": \"x\"}\n");
        let f = tmp(&text);
        let loaded = load_reddit_comments(f.path(), "bitcoin").unwrap();
        assert_eq!(loaded.skipped, 1);
        assert_eq!(loaded.records.len(), 200);
    }

    #[test]
    fn github_whitelist_and_repo_filter() {
        let f = tmp(concat!(
            r#"{"type": "WatchEvent", "created_at": "2017-05-04T10:00:00Z", "repo": {"name": "bitcoin/bitcoin"}}"#, "\n",
            r#"{"type": "ForkEvent", "created_at": "2017-05-04T09:00:00Z", "repo": {"name": "bitcoin/bitcoin"}}"#, "\n",
            r#"{"type": "ReleaseEvent", "created_at": "2017-05-04T11:00:00Z", "repo": {"name": "bitcoin/bitcoin"}}"#, "\n",
            r#"{"type": "WatchEvent", "created_at": "2017-05-04T11:00:00Z", "repo": {"name": "monero-project/monero"}}"#, "\n",
        ));
        let loaded = load_github_events(f.path(), "bitcoin/bitcoin").unwrap();
        assert_eq!(loaded.records.len(), 2);
        assert_eq!(loaded.dropped, 1);
        assert_eq!(loaded.records[0].event_type, EventKind::Fork);
        assert_eq!(loaded.records[1].event_type, EventKind::Watch);
    }

    #[test]
    fn github_empty_file() {
        let f = tmp("");
        let loaded = load_github_events(f.path(), "bitcoin/bitcoin").unwrap();
        assert!(loaded.records.is_empty());
    }

    #[test]
    fn late_utc_comment_lands_on_same_day() {
        let c = CommentRecord {
            created_utc: 1493942399, // 2017-05-04T23:59:59Z
            subreddit: "bitcoin".into(),
            body: String::new(),
            score: 0,
        };
        assert_eq!(c.day(), d("2017-05-04"));
    }

    #[test]
    fn event_kind_mapping_round_trips() {
        for k in EventKind::ALL {
            assert_eq!(EventKind::from_archive_type(k.archive_type()), Some(k));
        }
        assert_eq!(EventKind::from_archive_type("ReleaseEvent"), None);
    }
}
