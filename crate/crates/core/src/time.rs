//! Exact fixed-point time values.
//!
//! Relation tests (meets, starts, finishes, equals) compare endpoints for exact
//! equality, so all times are stored as integer milliseconds rather than floats.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub, SubAssign};
use std::str::FromStr;

use thiserror::Error;

/// Milliseconds per second.
pub const MILLIS_PER_SEC: i64 = 1000;

/// A point in time or a duration, in seconds with millisecond resolution.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(i64);

impl Time {
    pub const ZERO: Time = Time(0);

    pub const fn from_millis(ms: i64) -> Self {
        Time(ms)
    }

    pub const fn from_secs(s: i64) -> Self {
        Time(s * MILLIS_PER_SEC)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MILLIS_PER_SEC as f64
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// `max(self - other, 0)`.
    pub fn saturating_gap(self, other: Time) -> Time {
        Time((self.0 - other.0).max(0))
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl SubAssign for Time {
    fn sub_assign(&mut self, rhs: Time) {
        self.0 -= rhs.0;
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Time> for Time {
    fn sum<I: Iterator<Item = &'a Time>>(iter: I) -> Time {
        iter.copied().sum()
    }
}

/// Prints whole seconds without a fraction and otherwise trims trailing zeros:
/// `10`, `2.5`, `0.125`.
impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / MILLIS_PER_SEC as u64;
        let frac = abs % MILLIS_PER_SEC as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseTimeError {
    #[error("empty time value")]
    Empty,
    #[error("invalid time value `{0}`")]
    Invalid(String),
    #[error("time value `{0}` has more than 3 decimal places")]
    TooPrecise(String),
    #[error("time value `{0}` is out of range")]
    Overflow(String),
}

impl FromStr for Time {
    type Err = ParseTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseTimeError::Empty);
        }
        let invalid = || ParseTimeError::Invalid(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) || (body.contains('.') && frac.is_empty()) {
            return Err(invalid());
        }
        if frac.len() > 3 {
            return Err(ParseTimeError::TooPrecise(s.to_string()));
        }
        let overflow = || ParseTimeError::Overflow(s.to_string());
        let whole: i64 = whole.parse().map_err(|_| overflow())?;
        let mut frac_ms: i64 = 0;
        for (i, b) in frac.bytes().enumerate() {
            frac_ms += i64::from(b - b'0') * 10i64.pow(2 - i as u32);
        }
        let ms = whole
            .checked_mul(MILLIS_PER_SEC)
            .and_then(|v| v.checked_add(frac_ms))
            .ok_or_else(overflow)?;
        Ok(Time(if negative { -ms } else { ms }))
    }
}
