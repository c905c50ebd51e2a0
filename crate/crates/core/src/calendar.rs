//! Inclusive daily date ranges.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An inclusive, gap-free run of calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Range(format!("start {start} is after end {end}")));
        }
        Ok(DateRange { start, end })
    }

    /// Range of `len` days beginning at `start`. `len` must be at least 1.
    pub fn with_len(start: NaiveDate, len: usize) -> Self {
        assert!(len >= 1, "a date range holds at least one day");
        DateRange {
            start,
            end: start + Duration::days(len as i64 - 1),
        }
    }

    pub fn len(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    /// Zero-based row of `date`, if it lies inside the range.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.contains(date)
            .then(|| (date - self.start).num_days() as usize)
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start + Duration::days(index as i64)
    }

    pub fn iter(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.len()).map(move |i| self.date_at(i))
    }

    pub fn intersect(&self, other: &DateRange) -> Option<DateRange> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(DateRange { start, end })
    }
}

impl std::fmt::Display for DateRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..={}", self.start, self.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn length_and_indexing() {
        let r = DateRange::new(d("2017-05-04"), d("2017-05-06")).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.index_of(d("2017-05-05")), Some(1));
        assert_eq!(r.index_of(d("2017-05-07")), None);
        assert_eq!(r.date_at(2), d("2017-05-06"));
        assert_eq!(r.iter().count(), 3);
    }

    #[test]
    fn reversed_range_rejected() {
        assert!(DateRange::new(d("2017-05-06"), d("2017-05-04")).is_err());
    }

    #[test]
    fn intersection() {
        let a = DateRange::new(d("2017-01-01"), d("2017-01-10")).unwrap();
        let b = DateRange::new(d("2017-01-05"), d("2017-01-20")).unwrap();
        let c = DateRange::new(d("2017-02-01"), d("2017-02-02")).unwrap();
        assert_eq!(
            a.intersect(&b),
            Some(DateRange::new(d("2017-01-05"), d("2017-01-10")).unwrap())
        );
        assert_eq!(a.intersect(&c), None);
    }
}
