//! Job windows on a periodic timeline, schedule file I/O, the job-count
//! function, and the constraint validators.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::period::{PeriodConfig, TimeError};

const SPACING_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error("job {index} ({client}): duration {duration} h is not positive after wrap resolution")]
    NonPositiveDuration {
        index: usize,
        client: String,
        duration: f64,
    },
    #[error("job {index} ({client}): duration {duration} h exceeds the period {period} h")]
    DurationExceedsPeriod {
        index: usize,
        client: String,
        duration: f64,
        period: f64,
    },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("concurrency limit must be positive")]
    ZeroConcurrency,
    #[error("malformed JSON schedule: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV schedule: {0}")]
    Csv(#[from] csv::Error),
}

/// One periodic backup window, stored as center and full width in hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobWindow {
    pub client: String,
    pub center: f64,
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl JobWindow {
    pub fn new(
        client: impl Into<String>,
        center: f64,
        width: f64,
        period: &PeriodConfig,
    ) -> Result<Self, ScheduleError> {
        let w = JobWindow {
            client: client.into(),
            center,
            width,
            label: None,
        };
        w.check(period)?;
        Ok(w)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn check(&self, period: &PeriodConfig) -> Result<(), ScheduleError> {
        let p = period.period_hours();
        if !(self.center.is_finite() && (0.0..p).contains(&self.center)) {
            return Err(ScheduleError::InvalidWindow(format!(
                "center {} outside [0, {p})",
                self.center
            )));
        }
        if !(self.width.is_finite() && self.width > 0.0 && self.width <= p) {
            return Err(ScheduleError::InvalidWindow(format!(
                "width {} outside (0, {p}]",
                self.width
            )));
        }
        Ok(())
    }

    /// Start of the window, reduced into `[0, P)`.
    pub fn start(&self, period: &PeriodConfig) -> f64 {
        period.wrap(self.center - self.width / 2.0)
    }

    pub fn end(&self, period: &PeriodConfig) -> f64 {
        period.wrap(self.center + self.width / 2.0)
    }

    /// Open-interval membership under mod-P wrap; endpoints are excluded.
    pub fn contains(&self, t: f64, period: &PeriodConfig) -> bool {
        period.circular_distance(t, self.center) < self.width / 2.0
    }

    /// The window as `(start, end)` with `start` in `[0, P)` and `end = start + width`.
    fn unrolled(&self, period: &PeriodConfig) -> (f64, f64) {
        let s = self.start(period);
        (s, s + self.width)
    }
}

/// A set of job windows sharing one period.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub period: PeriodConfig,
    windows: Vec<JobWindow>,
    pub concurrency_limit: Option<u32>,
}

/// Accepted schedule file encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleFormat {
    Json,
    Csv,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TimeValue {
    Hours(f64),
    Token(String),
}

#[derive(Deserialize)]
struct RawJob {
    client: String,
    start: TimeValue,
    end: TimeValue,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
struct RawScheduleDoc {
    #[serde(default = "default_period")]
    period_hours: f64,
    #[serde(default = "default_origin")]
    origin: String,
    #[serde(default)]
    concurrency_limit: Option<u32>,
    #[serde(default)]
    jobs: Vec<RawJob>,
}

fn default_period() -> f64 {
    crate::period::HOURS_PER_WEEK
}

fn default_origin() -> String {
    crate::period::DEFAULT_ORIGIN.to_string()
}

#[derive(Serialize)]
struct OutJob<'a> {
    client: &'a str,
    start: String,
    end: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
}

#[derive(Serialize)]
struct OutScheduleDoc<'a> {
    period_hours: f64,
    origin: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    concurrency_limit: Option<u32>,
    jobs: Vec<OutJob<'a>>,
}

impl Schedule {
    pub fn new(
        period: PeriodConfig,
        windows: Vec<JobWindow>,
        concurrency_limit: Option<u32>,
    ) -> Result<Self, ScheduleError> {
        for w in &windows {
            w.check(&period)?;
        }
        if concurrency_limit == Some(0) {
            return Err(ScheduleError::ZeroConcurrency);
        }
        Ok(Schedule {
            period,
            windows,
            concurrency_limit,
        })
    }

    pub fn empty(period: PeriodConfig) -> Self {
        Schedule {
            period,
            windows: Vec::new(),
            concurrency_limit: None,
        }
    }

    pub fn windows(&self) -> &[JobWindow] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.center).collect()
    }

    pub fn period_hours(&self) -> f64 {
        self.period.period_hours()
    }

    /// Returns a copy with `extra` appended, e.g. existing plus newly placed windows.
    pub fn extended(&self, extra: &[JobWindow]) -> Result<Schedule, ScheduleError> {
        let mut windows = self.windows.clone();
        windows.extend_from_slice(extra);
        Schedule::new(self.period.clone(), windows, self.concurrency_limit)
    }

    /// Parses a JSON document; CSV input uses the weekly default period.
    pub fn parse(document: &str, format: ScheduleFormat) -> Result<Schedule, ScheduleError> {
        match format {
            ScheduleFormat::Json => Schedule::from_json(document),
            ScheduleFormat::Csv => Schedule::from_csv(document, PeriodConfig::weekly()),
        }
    }

    pub fn from_json(document: &str) -> Result<Schedule, ScheduleError> {
        let raw: RawScheduleDoc = serde_json::from_str(document)?;
        let period = PeriodConfig::new(raw.period_hours, &raw.origin)?;
        let windows = raw
            .jobs
            .into_iter()
            .enumerate()
            .map(|(i, job)| {
                let start = time_value(&period, job.start)?;
                let end = time_value(&period, job.end)?;
                window_from_span(&period, i, job.client, start, end, job.label)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Schedule::new(period, windows, raw.concurrency_limit)
    }

    /// CSV with header `client,start,end[,label]`.
    pub fn from_csv(document: &str, period: PeriodConfig) -> Result<Schedule, ScheduleError> {
        #[derive(Deserialize)]
        struct Row {
            client: String,
            start: String,
            end: String,
            #[serde(default)]
            label: Option<String>,
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(document.as_bytes());
        let mut windows = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row?;
            let start = period.parse_time(&row.start)?;
            let end = period.parse_time(&row.end)?;
            let label = row.label.filter(|l| !l.is_empty());
            windows.push(window_from_span(&period, i, row.client, start, end, label)?);
        }
        Schedule::new(period, windows, None)
    }

    /// Serializes to the JSON schedule format. Times that fall on whole
    /// minutes are written as day tokens, anything else as decimal offsets.
    pub fn to_json(&self) -> String {
        let doc = OutScheduleDoc {
            period_hours: self.period.period_hours(),
            origin: self.period.origin_label(),
            concurrency_limit: self.concurrency_limit,
            jobs: self
                .windows
                .iter()
                .map(|w| OutJob {
                    client: &w.client,
                    start: self.period.format_exact(w.start(&self.period)),
                    end: self.period.format_exact(w.end(&self.period)),
                    label: w.label.as_deref(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("schedule serialization is infallible")
    }

    /// `f(n; t)`: number of windows whose open interval contains `t mod P`.
    pub fn count_active(&self, t: f64) -> usize {
        let t = self.period.wrap(t);
        self.windows
            .iter()
            .filter(|w| w.contains(t, &self.period))
            .count()
    }

    /// Maximum simultaneous windows over one period and an instant achieving it.
    pub fn max_concurrency(&self) -> (usize, f64) {
        let p = self.period.period_hours();
        // ends sort before starts at equal coordinates (open intervals)
        let mut events: Vec<(f64, i32)> = Vec::with_capacity(self.windows.len() * 4);
        for w in &self.windows {
            let (s, e) = w.unrolled(&self.period);
            for shift in [-p, 0.0] {
                events.push((s + shift, 1));
                events.push((e + shift, -1));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut best = (0usize, 0.0f64);
        let mut count: i64 = 0;
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0;
            while i < events.len() && events[i].0 == x {
                count += events[i].1 as i64;
                i += 1;
            }
            let next = events.get(i).map_or(f64::INFINITY, |ev| ev.0);
            let lo = x.max(0.0);
            let hi = next.min(p);
            if hi > lo && count as usize > best.0 {
                best = (count as usize, 0.5 * (lo + hi));
            }
        }
        best
    }

    /// Hours of `window` covered by at least one window of this schedule.
    pub fn covered_hours(&self, window: &JobWindow) -> f64 {
        let p = self.period.period_hours();
        let (a, b) = window.unrolled(&self.period);
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for w in &self.windows {
            let (s, e) = w.unrolled(&self.period);
            for shift in [-p, 0.0, p] {
                let lo = (s + shift).max(a);
                let hi = (e + shift).min(b);
                if hi > lo {
                    pieces.push((lo, hi));
                }
            }
        }
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut total = 0.0;
        let mut current: Option<(f64, f64)> = None;
        for (lo, hi) in pieces {
            match current {
                Some((cl, ch)) if lo <= ch => current = Some((cl, ch.max(hi))),
                Some((cl, ch)) => {
                    total += ch - cl;
                    current = Some((lo, hi));
                }
                None => current = Some((lo, hi)),
            }
        }
        if let Some((cl, ch)) = current {
            total += ch - cl;
        }
        total
    }

    /// Fraction of `window`'s span overlapped by existing windows.
    pub fn overlap_fraction(&self, window: &JobWindow) -> f64 {
        self.covered_hours(window) / window.width
    }
}

fn time_value(period: &PeriodConfig, v: TimeValue) -> Result<f64, TimeError> {
    match v {
        TimeValue::Hours(h) if h.is_finite() => Ok(h),
        TimeValue::Hours(h) => Err(TimeError::Malformed(h.to_string())),
        TimeValue::Token(s) => period.parse_time(&s),
    }
}

fn window_from_span(
    period: &PeriodConfig,
    index: usize,
    client: String,
    start: f64,
    end: f64,
    label: Option<String>,
) -> Result<JobWindow, ScheduleError> {
    let p = period.period_hours();
    let mut duration = end - start;
    if duration <= 0.0 {
        duration = (end - start).rem_euclid(p);
    }
    if duration <= 0.0 {
        return Err(ScheduleError::NonPositiveDuration {
            index,
            client,
            duration,
        });
    }
    if duration > p {
        return Err(ScheduleError::DurationExceedsPeriod {
            index,
            client,
            duration,
            period: p,
        });
    }
    Ok(JobWindow {
        client,
        center: period.wrap(start + duration / 2.0),
        width: duration,
        label,
    })
}

/// Two circularly consecutive centers closer than the required spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingViolation {
    pub first: f64,
    pub second: f64,
    pub gap: f64,
}

/// Checks every circular gap between sorted centers, the wrap gap included.
pub fn validate_spacing(
    centers: &[f64],
    spacing: f64,
    period: &PeriodConfig,
) -> Vec<SpacingViolation> {
    let p = period.period_hours();
    let mut sorted: Vec<f64> = centers.iter().map(|&c| period.wrap(c)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let first = sorted[i];
        let (second, gap) = if i + 1 < n {
            (sorted[i + 1], sorted[i + 1] - first)
        } else {
            (sorted[0], sorted[0] + p - first)
        };
        if gap < spacing - SPACING_TOL {
            out.push(SpacingViolation { first, second, gap });
        }
    }
    out
}

/// Per-bucket placement cap, e.g. at most two windows per 24 h day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyCap {
    pub cap: u32,
    #[serde(default = "default_bucket")]
    pub bucket_hours: f64,
}

fn default_bucket() -> f64 {
    24.0
}

impl DailyCap {
    pub fn per_day(cap: u32) -> Self {
        DailyCap {
            cap,
            bucket_hours: 24.0,
        }
    }
}

/// Placement request derived from user intent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntentParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset: Option<String>,
    pub k: u32,
    pub epsilon: f64,
    pub alpha: f64,
    pub omega: f64,
    pub delta: f64,
    /// Period named by the intent; `None` defers to the schedule's period.
    #[serde(default)]
    pub period_hours: Option<f64>,
    #[serde(default)]
    pub daily_cap: Option<DailyCap>,
    #[serde(default)]
    pub concurrency_limit: Option<u32>,
}

impl Default for IntentParams {
    fn default() -> Self {
        IntentParams {
            asset: None,
            k: 1,
            epsilon: 0.0,
            alpha: 0.5,
            omega: 0.0,
            delta: 1.0,
            period_hours: None,
            daily_cap: None,
            concurrency_limit: None,
        }
    }
}

impl IntentParams {
    /// `max(ε, Δ)`: the minimum circular gap between new centers.
    pub fn effective_spacing(&self) -> f64 {
        self.epsilon.max(self.delta)
    }

    /// Parameter domain checks that do not need a schedule.
    pub fn check_ranges(&self) -> Result<(), IllPosed> {
        let range = |name: &'static str, value: f64, ok: bool, expected: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(IllPosed::OutOfRange {
                    name,
                    value,
                    expected,
                })
            }
        };
        range("k", self.k as f64, self.k >= 1, ">= 1")?;
        range(
            "alpha",
            self.alpha,
            (0.0..=1.0).contains(&self.alpha),
            "in [0, 1]",
        )?;
        range(
            "omega",
            self.omega,
            (0.0..=1.0).contains(&self.omega),
            "in [0, 1]",
        )?;
        range(
            "epsilon",
            self.epsilon,
            self.epsilon.is_finite() && self.epsilon >= 0.0,
            ">= 0",
        )?;
        range(
            "delta",
            self.delta,
            self.delta.is_finite() && self.delta > 0.0,
            "> 0",
        )?;
        if let Some(p) = self.period_hours {
            range("period_hours", p, p.is_finite() && p > 0.0, "> 0")?;
        }
        if let Some(cap) = self.daily_cap {
            range("daily_cap", cap.cap as f64, cap.cap >= 1, ">= 1")?;
            range(
                "bucket_hours",
                cap.bucket_hours,
                cap.bucket_hours.is_finite() && cap.bucket_hours > 0.0,
                "> 0",
            )?;
        }
        if self.concurrency_limit == Some(0) {
            return Err(IllPosed::OutOfRange {
                name: "concurrency_limit",
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(())
    }
}

/// Why a placement request cannot be satisfied before any sampling happens.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IllPosed {
    #[error("{name} = {value} must be {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("k × max(ε, Δ) < P violated: {k}×{spacing} = {product} ≥ {period}")]
    TooManyWindows {
        k: u32,
        spacing: f64,
        product: f64,
        period: f64,
    },
    #[error("intent period {intent} h does not match schedule period {schedule} h")]
    PeriodMismatch { intent: f64, schedule: f64 },
    #[error("window width Δ = {delta} exceeds the period {period}")]
    WidthExceedsPeriod { delta: f64, period: f64 },
    #[error("bucket length {bucket} h does not divide the period {period} h")]
    BucketNotDivisor { bucket: f64, period: f64 },
}

/// Witness that `k × max(ε, Δ) < P` holds.
#[derive(Debug, Clone, PartialEq)]
pub struct WellPosed {
    pub k: u32,
    pub spacing: f64,
    pub period: f64,
}

impl fmt::Display for WellPosed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}×{} < {}", self.k, self.spacing, self.period)
    }
}

pub(crate) fn bucket_divides(period: f64, bucket: f64) -> bool {
    let ratio = period / bucket;
    (ratio - ratio.round()).abs() * bucket <= 1e-9 && ratio.round() >= 1.0
}

/// Checks the parameter ranges and the sanity inequality `k × max(ε, Δ) < P`.
pub fn validate_request(schedule: &Schedule, intent: &IntentParams) -> Result<WellPosed, IllPosed> {
    intent.check_ranges()?;
    let period = schedule.period_hours();
    if let Some(p) = intent.period_hours {
        if (p - period).abs() > 1e-9 {
            return Err(IllPosed::PeriodMismatch {
                intent: p,
                schedule: period,
            });
        }
    }
    if intent.delta > period {
        return Err(IllPosed::WidthExceedsPeriod {
            delta: intent.delta,
            period,
        });
    }
    if let Some(cap) = intent.daily_cap {
        if !bucket_divides(period, cap.bucket_hours) {
            return Err(IllPosed::BucketNotDivisor {
                bucket: cap.bucket_hours,
                period,
            });
        }
    }
    let spacing = intent.effective_spacing();
    let product = intent.k as f64 * spacing;
    if product >= period {
        return Err(IllPosed::TooManyWindows {
            k: intent.k,
            spacing,
            product,
            period,
        });
    }
    Ok(WellPosed {
        k: intent.k,
        spacing,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TABLE1: &str = r#"{
        "period_hours": 168, "origin": "Mon 00:00", "concurrency_limit": 10,
        "jobs": [
            {"client": "client 1", "start": "M 13:00", "end": "M 17:00", "label": "w1"},
            {"client": "client 1", "start": "Wed 15:00", "end": "Wed 18:00", "label": "w2"},
            {"client": "client 2", "start": "Sun 23:00", "end": "Mon 00:30", "label": "w3"}
        ]}"#;

    fn table1() -> Schedule {
        Schedule::from_json(&TABLE1.replace("\"M ", "\"Mon ")).unwrap()
    }

    #[test]
    fn table1_centers_and_widths() {
        let s = table1();
        let w = s.windows();
        assert_eq!(w.len(), 3);
        assert_eq!((w[0].center, w[0].width), (15.0, 4.0));
        assert_eq!((w[1].center, w[1].width), (64.5, 3.0));
        // crosses the period boundary
        assert_eq!((w[2].center, w[2].width), (167.75, 1.5));
        assert_eq!(s.period.format_time(w[2].center), "Sun 23:45");
        assert_eq!(s.concurrency_limit, Some(10));
    }

    #[test]
    fn unknown_day_rejected() {
        let err = Schedule::from_json(TABLE1).unwrap_err();
        assert!(matches!(err, ScheduleError::Time(TimeError::UnknownDay(_))));
    }

    #[test]
    fn empty_jobs() {
        let s = Schedule::from_json(r#"{"period_hours": 168, "jobs": []}"#).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.count_active(3.0), 0);
        assert_eq!(s.max_concurrency().0, 0);
    }

    #[test]
    fn duration_errors() {
        let same = r#"{"jobs": [{"client": "a", "start": "Mon 10:00", "end": "Mon 10:00"}]}"#;
        assert!(matches!(
            Schedule::from_json(same),
            Err(ScheduleError::NonPositiveDuration { .. })
        ));
        let long = r#"{"jobs": [{"client": "a", "start": 0, "end": 200}]}"#;
        assert!(matches!(
            Schedule::from_json(long),
            Err(ScheduleError::DurationExceedsPeriod { .. })
        ));
        let bad = r#"{"jobs": [{"client": "a", "start": "Mon 1000", "end": "Mon 11:00"}]}"#;
        assert!(matches!(
            Schedule::from_json(bad),
            Err(ScheduleError::Time(TimeError::Malformed(_)))
        ));
    }

    #[test]
    fn csv_input() {
        let doc = "client,start,end,label\nclient 1,Mon 13:00,Mon 17:00,w1\nclient 2,Sun 23:00,Mon 00:30,\n";
        let s = Schedule::from_csv(doc, PeriodConfig::weekly()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.windows()[0].label.as_deref(), Some("w1"));
        assert_eq!(s.windows()[1].label, None);
        assert_eq!(s.windows()[1].center, 167.75);
        let no_label = "client,start,end\nx,10,12\n";
        let s = Schedule::parse(no_label, ScheduleFormat::Csv).unwrap();
        assert_eq!(s.windows()[0].center, 11.0);
    }

    #[test]
    fn count_active_table1() {
        let s = table1();
        assert_eq!(s.count_active(14.0), 1);
        assert_eq!(s.count_active(0.0), 1);
        assert_eq!(s.count_active(0.0 + 168.0), 1);
        assert_eq!(s.count_active(30.0), 0);
        // open interval: endpoints excluded
        assert_eq!(s.count_active(13.0), 0);
        assert_eq!(s.count_active(17.0), 0);
        assert_eq!(s.count_active(0.5), 0);
    }

    #[test]
    fn max_concurrency_cases() {
        let s = table1();
        let (count, at) = s.max_concurrency();
        assert_eq!(count, 1);
        assert_eq!(s.count_active(at), 1);

        let p = PeriodConfig::weekly();
        let w = JobWindow::new("a", 50.0, 4.0, &p).unwrap();
        let dup = Schedule::new(p.clone(), vec![w.clone(), w], None).unwrap();
        let (count, at) = dup.max_concurrency();
        assert_eq!(count, 2);
        assert!((at - 50.0).abs() < 2.0);

        // abutting windows never overlap under open semantics
        let a = JobWindow::new("a", 1.0, 2.0, &p).unwrap();
        let b = JobWindow::new("b", 3.0, 2.0, &p).unwrap();
        let c = JobWindow::new("c", 167.0, 2.0, &p).unwrap();
        let s = Schedule::new(p, vec![a, b, c], None).unwrap();
        assert_eq!(s.max_concurrency().0, 1);
    }

    #[test]
    fn full_width_window() {
        let p = PeriodConfig::weekly();
        let s = Schedule::new(
            p.clone(),
            vec![JobWindow::new("a", 10.0, 168.0, &p).unwrap()],
            None,
        )
        .unwrap();
        assert_eq!(s.count_active(10.0), 1);
        assert_eq!(s.count_active(93.0), 1);
        assert_eq!(s.count_active(94.0), 0);
        assert_eq!(s.max_concurrency().0, 1);
    }

    #[test]
    fn spacing_examples() {
        let p = PeriodConfig::weekly();
        assert!(validate_spacing(&[0.0, 50.0, 100.0], 40.0, &p).is_empty());
        let v = validate_spacing(&[0.0, 10.0], 12.0, &p);
        assert_eq!(
            v,
            vec![SpacingViolation {
                first: 0.0,
                second: 10.0,
                gap: 10.0
            }]
        );
        assert!(validate_spacing(&[42.0], 168.0, &p).is_empty());
        assert!(validate_spacing(&[], 1.0, &p).is_empty());
        // wrap gap alone
        let v = validate_spacing(&[1.0, 80.0, 165.0], 10.0, &p);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].first, v[0].second), (165.0, 1.0));
    }

    #[test]
    fn request_checks() {
        let s = Schedule::empty(PeriodConfig::weekly());
        let mut intent = IntentParams {
            k: 4,
            epsilon: 12.0,
            ..IntentParams::default()
        };
        let ok = validate_request(&s, &intent).unwrap();
        assert_eq!(ok.to_string(), "4×12 < 168");

        intent.k = 15;
        let err = validate_request(&s, &intent).unwrap_err();
        assert!(matches!(err, IllPosed::TooManyWindows { .. }));
        assert!(err.to_string().contains("15×12 = 180 ≥ 168"), "{err}");

        let bad_alpha = IntentParams {
            alpha: 1.2,
            ..IntentParams::default()
        };
        assert!(matches!(
            validate_request(&s, &bad_alpha),
            Err(IllPosed::OutOfRange { name: "alpha", .. })
        ));

        let daily = IntentParams {
            period_hours: Some(24.0),
            ..IntentParams::default()
        };
        assert!(matches!(
            validate_request(&s, &daily),
            Err(IllPosed::PeriodMismatch { .. })
        ));

        let odd_bucket = IntentParams {
            daily_cap: Some(DailyCap {
                cap: 1,
                bucket_hours: 25.0,
            }),
            ..IntentParams::default()
        };
        assert!(matches!(
            validate_request(&s, &odd_bucket),
            Err(IllPosed::BucketNotDivisor { .. })
        ));

        // effective spacing uses delta when it is larger than epsilon
        let wide = IntentParams {
            k: 4,
            epsilon: 1.0,
            delta: 42.0,
            ..IntentParams::default()
        };
        assert!(validate_request(&s, &wide).is_err());
    }

    #[test]
    fn overlap_fraction_wraps() {
        let s = table1();
        let p = &s.period;
        let inside = JobWindow::new("n", 15.0, 2.0, p).unwrap();
        assert_eq!(s.overlap_fraction(&inside), 1.0);
        let half = JobWindow::new("n", 17.0, 2.0, p).unwrap();
        assert!((s.overlap_fraction(&half) - 0.5).abs() < 1e-12);
        // w3 spans 167..0.5 across the boundary
        let across = JobWindow::new("n", 0.0, 2.0, p).unwrap();
        assert!((s.covered_hours(&across) - 1.5).abs() < 1e-12);
        let none = JobWindow::new("n", 100.0, 2.0, p).unwrap();
        assert_eq!(s.overlap_fraction(&none), 0.0);
    }
}
