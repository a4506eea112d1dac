//! Calendar dates and half-open existence intervals.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("invalid date {0:?}: expected YYYY, YYYY-MM or YYYY-MM-DD")]
    Parse(String),
    #[error("time span start {start} is not before end {end}")]
    EmptySpan { start: Date, end: Date },
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

/// Calendar date stored as days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date(i32);

impl Date {
    pub fn from_days(days: i32) -> Self {
        Date(days)
    }

    pub fn days(self) -> i32 {
        self.0
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Self::from_naive)
    }

    /// January 1 of `year`.
    pub fn from_year(year: i32) -> Option<Self> {
        Self::from_ymd(year, 1, 1)
    }

    fn from_naive(d: NaiveDate) -> Self {
        Date((d - epoch()).num_days() as i32)
    }

    fn to_naive(self) -> NaiveDate {
        epoch() + chrono::Duration::days(self.0 as i64)
    }

    pub fn year(self) -> i32 {
        self.to_naive().year()
    }
}

impl FromStr for Date {
    type Err = TimeError;

    /// Accepts `YYYY`, `YYYY-MM` or `YYYY-MM-DD`; partial dates resolve to
    /// the first day of the period.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TimeError::Parse(s.to_string());
        let parts: Vec<&str> = s.trim().split('-').collect();
        let num = |p: &str, len: usize| -> Result<u32, TimeError> {
            if p.len() != len || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            p.parse().map_err(|_| err())
        };
        let (y, m, d) = match parts.as_slice() {
            [y] => (num(y, 4)?, 1, 1),
            [y, m] => (num(y, 4)?, num(m, 2)?, 1),
            [y, m, d] => (num(y, 4)?, num(m, 2)?, num(d, 2)?),
            _ => return Err(err()),
        };
        Date::from_ymd(y as i32, m, d).ok_or_else(err)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.to_naive();
        write!(f, "{:04}-{:02}-{:02}", d.year(), d.month(), d.day())
    }
}

impl Serialize for Date {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Existence interval `[start, end)`; `end == None` means still standing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start: Date,
    pub end: Option<Date>,
}

impl TimeSpan {
    pub fn new(start: Date, end: Option<Date>) -> Result<Self, TimeError> {
        if let Some(end) = end {
            if start >= end {
                return Err(TimeError::EmptySpan { start, end });
            }
        }
        Ok(Self { start, end })
    }

    pub fn open(start: Date) -> Self {
        Self { start, end: None }
    }

    /// Half-open membership: `start <= d < end`.
    pub fn contains(&self, d: Date) -> bool {
        self.start <= d && self.end.is_none_or(|e| d < e)
    }

    /// Overlapping part of two spans, if any.
    pub fn intersection(&self, other: &TimeSpan) -> Option<TimeSpan> {
        let start = self.start.max(other.start);
        let end = match (self.end, other.end) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        match end {
            Some(e) if start >= e => None,
            _ => Some(TimeSpan { start, end }),
        }
    }
}

pub fn timespan_contains(s: &TimeSpan, d: Date) -> bool {
    s.contains(d)
}
