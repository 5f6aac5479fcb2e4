//! The periodic timeline: period length, origin, and the `Ddd HH:MM` time tokens.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const HOURS_PER_WEEK: f64 = 168.0;
pub const DEFAULT_ORIGIN: &str = "Mon 00:00";

const DAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeError {
    #[error("malformed time token {0:?}")]
    Malformed(String),
    #[error("unknown day abbreviation {0:?}")]
    UnknownDay(String),
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
}

/// Length of the repeating horizon and the wall-clock label of `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPeriod", into = "RawPeriod")]
pub struct PeriodConfig {
    period_hours: f64,
    origin_label: String,
    /// Hours from Mon 00:00 to the origin.
    origin_offset: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPeriod {
    period_hours: f64,
    origin: String,
}

impl TryFrom<RawPeriod> for PeriodConfig {
    type Error = TimeError;
    fn try_from(raw: RawPeriod) -> Result<Self, TimeError> {
        PeriodConfig::new(raw.period_hours, &raw.origin)
    }
}

impl From<PeriodConfig> for RawPeriod {
    fn from(p: PeriodConfig) -> Self {
        RawPeriod {
            period_hours: p.period_hours,
            origin: p.origin_label,
        }
    }
}

impl Default for PeriodConfig {
    fn default() -> Self {
        PeriodConfig::weekly()
    }
}

impl PeriodConfig {
    pub fn new(period_hours: f64, origin: &str) -> Result<Self, TimeError> {
        if !(period_hours.is_finite() && period_hours > 0.0) {
            return Err(TimeError::BadPeriod(period_hours));
        }
        let origin_offset = parse_day_clock(origin)?;
        Ok(PeriodConfig {
            period_hours,
            origin_label: origin.trim().to_string(),
            origin_offset,
        })
    }

    /// One week starting Monday midnight.
    pub fn weekly() -> Self {
        PeriodConfig {
            period_hours: HOURS_PER_WEEK,
            origin_label: DEFAULT_ORIGIN.to_string(),
            origin_offset: 0.0,
        }
    }

    pub fn period_hours(&self) -> f64 {
        self.period_hours
    }

    pub fn origin_label(&self) -> &str {
        &self.origin_label
    }

    /// Reduces `t` into `[0, P)`.
    pub fn wrap(&self, t: f64) -> f64 {
        let r = t.rem_euclid(self.period_hours);
        // rem_euclid rounds tiny negatives up to exactly P
        if r >= self.period_hours {
            0.0
        } else {
            r
        }
    }

    /// Signed offset from `b` to `a` folded into `(-P/2, P/2]`.
    pub fn signed_diff(&self, a: f64, b: f64) -> f64 {
        let p = self.period_hours;
        let d = self.wrap(a - b);
        if d > p / 2.0 {
            d - p
        } else {
            d
        }
    }

    pub fn circular_distance(&self, a: f64, b: f64) -> f64 {
        self.signed_diff(a, b).abs()
    }

    /// Parses a time token into hours since the origin, *not* reduced mod P.
    ///
    /// Accepts `Ddd HH:MM` (day case-insensitive) or a bare decimal hour offset.
    pub fn parse_time(&self, token: &str) -> Result<f64, TimeError> {
        let token = token.trim();
        if let Ok(v) = token.parse::<f64>() {
            if v.is_finite() {
                return Ok(v);
            }
            return Err(TimeError::Malformed(token.to_string()));
        }
        let week_hour = parse_day_clock(token)?;
        Ok((week_hour - self.origin_offset).rem_euclid(HOURS_PER_WEEK))
    }

    /// Renders `t` as `Ddd HH:MM` relative to the origin, rounded to the minute.
    pub fn format_time(&self, t: f64) -> String {
        let week_hour = (self.origin_offset + self.wrap(t)).rem_euclid(HOURS_PER_WEEK);
        let mut minutes = (week_hour * 60.0).round() as i64;
        minutes = minutes.rem_euclid((HOURS_PER_WEEK as i64) * 60);
        let day = (minutes / (24 * 60)) as usize;
        let hh = (minutes / 60) % 24;
        let mm = minutes % 60;
        format!("{} {:02}:{:02}", DAYS[day], hh, mm)
    }

    /// Token that parses back to `t` exactly: a day token when `t` lies on a
    /// whole minute, else a decimal offset.
    pub fn format_exact(&self, t: f64) -> String {
        let t = self.wrap(t);
        let minutes = t * 60.0;
        if (minutes - minutes.round()).abs() < 1e-7 && self.period_hours == HOURS_PER_WEEK {
            let token = self.format_time(t);
            if let Ok(back) = self.parse_time(&token) {
                if (self.wrap(back) - t).abs() < 1e-9 {
                    return token;
                }
            }
        }
        format!("{t}")
    }
}

/// Hours since Mon 00:00 for a `Ddd HH:MM` token.
fn parse_day_clock(token: &str) -> Result<f64, TimeError> {
    let malformed = || TimeError::Malformed(token.to_string());
    let mut parts = token.split_whitespace();
    let day = parts.next().ok_or_else(malformed)?;
    let clock = parts.next().ok_or_else(malformed)?;
    if parts.next().is_some() {
        return Err(malformed());
    }
    let day_idx = DAYS
        .iter()
        .position(|d| d.eq_ignore_ascii_case(day))
        .ok_or_else(|| TimeError::UnknownDay(day.to_string()))?;
    let (hh, mm) = clock.split_once(':').ok_or_else(malformed)?;
    if hh.is_empty() || hh.len() > 2 || mm.len() != 2 {
        return Err(malformed());
    }
    let hh: u32 = hh.parse().map_err(|_| malformed())?;
    let mm: u32 = mm.parse().map_err(|_| malformed())?;
    if hh > 23 || mm > 59 {
        return Err(malformed());
    }
    Ok(day_idx as f64 * 24.0 + hh as f64 + mm as f64 / 60.0)
}
