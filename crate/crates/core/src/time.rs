//! UTC instants at millisecond resolution.

use std::fmt;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const MS_PER_SECOND: i64 = 1_000;
pub const MS_PER_DAY: i64 = 86_400_000;

/// Milliseconds since the Unix epoch, UTC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instant(i64);

impl Instant {
    pub const fn from_millis(ms: i64) -> Self {
        Instant(ms)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub fn from_datetime(dt: DateTime<Utc>) -> Self {
        Instant(dt.timestamp_millis())
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_millis_opt(self.0)
            .single()
            .expect("instant within chrono range")
    }

    /// Midnight UTC at the start of the given calendar day.
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self> {
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| Error::arg(format!("invalid date {year}-{month}-{day}")))?;
        Ok(Instant::from_datetime(
            date.and_hms_opt(0, 0, 0).unwrap().and_utc(),
        ))
    }

    /// Parses ISO-8601 UTC: RFC 3339 (`2004-12-26T00:58:53Z`), a bare
    /// `YYYY-MM-DDTHH:MM:SS[.fff]` taken as UTC, or a bare date.
    pub fn parse_iso(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
            return Ok(Instant::from_datetime(dt.with_timezone(&Utc)));
        }
        if let Ok(ndt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f") {
            return Ok(Instant::from_datetime(ndt.and_utc()));
        }
        if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return Ok(Instant::from_datetime(
                d.and_hms_opt(0, 0, 0).unwrap().and_utc(),
            ));
        }
        Err(Error::arg(format!("not an ISO-8601 UTC timestamp: {s:?}")))
    }

    /// Whole seconds are printed without a fraction, otherwise milliseconds are kept.
    pub fn to_iso(self) -> String {
        let format = if self.0.rem_euclid(MS_PER_SECOND) == 0 {
            SecondsFormat::Secs
        } else {
            SecondsFormat::Millis
        };
        self.to_datetime().to_rfc3339_opts(format, true)
    }

    /// Start of the UTC day containing this instant.
    pub fn floor_day(self) -> Self {
        Instant(self.0.div_euclid(MS_PER_DAY) * MS_PER_DAY)
    }

    pub fn plus_millis(self, ms: i64) -> Self {
        Instant(self.0 + ms)
    }
}

impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

impl Serialize for Instant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_iso())
    }
}

/// Converts a duration in (possibly fractional) days to whole milliseconds.
pub fn days_to_millis(days: f64) -> i64 {
    (days * MS_PER_DAY as f64).round() as i64
}

/// Half-open time interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TimeWindow {
    pub start: Instant,
    pub end: Instant,
}

impl TimeWindow {
    pub fn new(start: Instant, end: Instant) -> Result<Self> {
        if start >= end {
            return Err(Error::arg(format!(
                "time window must satisfy start < end, got [{start}, {end})"
            )));
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, t: Instant) -> bool {
        self.start <= t && t < self.end
    }

    pub fn contains_window(&self, other: &TimeWindow) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn duration_millis(&self) -> i64 {
        self.end.millis() - self.start.millis()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.duration_millis() as f64 / MS_PER_SECOND as f64
    }
}
