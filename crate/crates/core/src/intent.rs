//! Restricted-English intent strings to [`IntentParams`].
//!
//! A fixed clause grammar, matched with regular expressions in priority order.
//! Every match is recorded with its source span; text no clause accounts for
//! is reported back as a warning rather than dropped.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{DailyCap, IllPosed, IntentParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntentError {
    #[error("intent text is empty")]
    Empty,
    #[error("no recognizable scheduling clause in {0:?}")]
    NoRecognizableClause(String),
    #[error("contradictory clauses for {field}: {first} vs {second}")]
    Contradictory {
        field: &'static str,
        first: String,
        second: String,
    },
    #[error("intent yields invalid parameters: {0}")]
    Invalid(#[from] IllPosed),
}

/// Overlap wording to expected-overlap `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub minimal: f64,
    pub none: f64,
    pub no_other_activity: f64,
    pub low: f64,
    pub moderate: f64,
    pub high: f64,
    pub maximal: f64,
    pub lull: f64,
}

impl AlphaTable {
    /// Uniform ladder 0, 0.25, 0.5, 0.75, 1.
    pub fn ladder() -> Self {
        AlphaTable {
            minimal: 0.0,
            none: 0.0,
            no_other_activity: 0.0,
            low: 0.25,
            moderate: 0.5,
            high: 0.75,
            maximal: 1.0,
            lull: 0.0,
        }
    }

    /// Values used by the published worked examples: "moderate" is 0.8 and
    /// "when no other backups are happening" is 0.2.
    pub fn paper_compat() -> Self {
        AlphaTable {
            moderate: 0.8,
            high: 0.9,
            no_other_activity: 0.2,
            ..AlphaTable::ladder()
        }
    }

    fn adjective(&self, word: &str) -> Option<f64> {
        Some(match word {
            "minimal" | "minimum" => self.minimal,
            "no" => self.none,
            "low" => self.low,
            "moderate" | "medium" => self.moderate,
            "high" => self.high,
            "maximal" | "maximum" => self.maximal,
            _ => return None,
        })
    }
}

impl Default for AlphaTable {
    fn default() -> Self {
        AlphaTable::ladder()
    }
}

impl FromStr for AlphaTable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "default" => Ok(AlphaTable::ladder()),
            "paper" => Ok(AlphaTable::paper_compat()),
            other => Err(format!(
                "unknown alpha table {other:?} (expected default or paper)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseKind {
    Count,
    Period,
    Overlap,
    Spacing,
    DailyCap,
    Lull,
    Asset,
    SelfAffinity,
    Width,
    Concurrency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecognizedClause {
    pub kind: ClauseKind,
    pub value: String,
    /// Byte range in the raw text.
    pub span: (usize, usize),
}

/// The raw text and what the grammar made of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntentPhrase {
    pub raw: String,
    pub recognized_clauses: Vec<RecognizedClause>,
    pub unrecognized: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsedIntent {
    pub params: IntentParams,
    pub warnings: Vec<String>,
    pub phrase: IntentPhrase,
}

const NUM: &str = r"\d+(?:\.\d+)?(?:[eE][-+]?\d+)?";
const COUNT_WORDS: &str =
    "one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|once|twice|thrice";

fn word_number(word: &str) -> Option<u32> {
    let w = word.to_ascii_lowercase();
    Some(match w.as_str() {
        "one" | "once" => 1,
        "two" | "twice" => 2,
        "three" | "thrice" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        _ => return w.parse().ok(),
    })
}

struct Grammar {
    daily_cap: Regex,
    spacing: Vec<Regex>,
    count: Regex,
    count_adverb: Regex,
    period_week: Regex,
    period_day: Regex,
    period_hours: Regex,
    overlap_adjective: Regex,
    overlap_value: Regex,
    no_other_activity: Regex,
    lull: Regex,
    self_affinity: Regex,
    width: Regex,
    concurrency: Regex,
    asset_explicit: Regex,
    asset_token: Regex,
    splitter: Regex,
    word: Regex,
}

fn grammar() -> &'static Grammar {
    static GRAMMAR: OnceLock<Grammar> = OnceLock::new();
    GRAMMAR.get_or_init(|| {
        let re = |s: String| Regex::new(&format!("(?i){s}")).expect("static grammar");
        Grammar {
            daily_cap: re(format!(
                r"\bno more than\s+(?P<n>\d+|{COUNT_WORDS})(?:\s+times?)?\s+(?:on|per|in|each|a)\s+(?:(?:any|a|each|one|every|single)\s+)?day\b"
            )),
            spacing: vec![
                re(format!(r"\b(?:spread\s+)?apart\s+by\s+at\s+least\s+(?P<n>{NUM})\s+hours?\b")),
                re(format!(r"\bat\s+least\s+(?P<n>{NUM})\s+hours?\s+apart\b")),
                re(format!(
                    r"\b(?:not\s+more\s+(?:frequently|often)\s+than\s+)?once\s+every\s+(?P<n>{NUM})\s+hours?\b"
                )),
                re(format!(r"\bminimum\s+spacing\s+of\s+(?P<n>{NUM})\s+hours?\b")),
                re(format!(r"\b(?P<n>{NUM})\s+hours?\s+apart\b")),
            ],
            count: re(format!(r"\b(?P<n>\d+|{COUNT_WORDS})\s+times\b")),
            count_adverb: re(r"\b(?P<n>once|twice|thrice)\b".to_string()),
            period_week: re(r"\b(?:(?:per|a|each|every)\s+week|weekly)\b".to_string()),
            period_day: re(r"\b(?:(?:per|a|each|every)\s+day|daily)\b".to_string()),
            period_hours: re(format!(r"\bper\s+(?P<n>{NUM})\s+hours?\b")),
            overlap_adjective: re(
                r"\b(?:with\s+)?(?P<adj>minimal|minimum|no|low|moderate|medium|high|maximal|maximum)\s+overlap(?:\s+with\s+(?:my\s+|the\s+)?(?:other\s+|existing\s+)?(?:backup\s+)?(?:jobs|schedules|backups|windows))?"
                    .to_string(),
            ),
            overlap_value: re(format!(r"\b(?:with\s+)?expected\s+overlap\s+(?:of\s+)?(?P<n>{NUM})")),
            no_other_activity: re(
                r"\bwhen\s+no\s+other\s+(?:backup\s+jobs|backups?|jobs)\s+(?:are\s+|is\s+)?(?:happening|running)\b"
                    .to_string(),
            ),
            lull: re(
                r"\bduring\s+(?:the\s+)?lull(?:\s+periods?)?(?:\s+for\s+(?:normal|other|existing)\s+jobs)?"
                    .to_string(),
            ),
            self_affinity: re(format!(r"\bself-affinity\s+(?:of\s+)?(?P<n>{NUM})")),
            width: re(format!(r"\b(?:windows?\s+of|lasting)\s+(?P<n>{NUM})\s+hours?\b")),
            concurrency: re(r"\bat\s+most\s+(?P<n>\d+)\s+concurrent(?:\s+jobs)?\b".to_string()),
            asset_explicit: re(r"\basset\s+(?P<name>[A-Za-z0-9_][A-Za-z0-9_.\-]*)".to_string()),
            asset_token: re(r"\b[A-Za-z][A-Za-z0-9_.\-]*(?:\d|_)[A-Za-z0-9_.\-]*".to_string()),
            splitter: re(r"[,.;:!?|]|\band\b|\bbut\b".to_string()),
            word: re(r"[A-Za-z0-9][A-Za-z0-9_'\-]*".to_string()),
        }
    })
}

/// Words that carry no scheduling meaning on their own.
const FILLER: &[&str] = &[
    "i",
    "we",
    "need",
    "needs",
    "want",
    "wants",
    "would",
    "like",
    "to",
    "please",
    "backup",
    "backups",
    "back",
    "up",
    "incremental",
    "full",
    "for",
    "the",
    "a",
    "an",
    "my",
    "our",
    "it",
    "them",
    "they",
    "that",
    "this",
    "these",
    "are",
    "be",
    "is",
    "try",
    "schedule",
    "scheduled",
    "ensure",
    "make",
    "sure",
    "with",
    "other",
    "existing",
    "jobs",
    "job",
    "schedules",
    "so",
    "of",
    "new",
    "also",
    "asset",
    "run",
    "can",
    "you",
    "should",
    "must",
    "in",
    "on",
    "then",
];

struct Extraction<'a> {
    text: &'a str,
    consumed: Vec<(usize, usize)>,
    clauses: Vec<RecognizedClause>,
}

impl<'a> Extraction<'a> {
    fn free(&self, start: usize, end: usize) -> bool {
        self.consumed.iter().all(|&(s, e)| end <= s || start >= e)
    }

    /// Unconsumed matches of `re`, consumed as they are returned.
    fn take_all(&mut self, re: &Regex) -> Vec<regex::Captures<'a>> {
        let text = self.text;
        let mut out = Vec::new();
        for caps in re.captures_iter(text) {
            let m = caps.get(0).expect("group 0");
            if self.free(m.start(), m.end()) {
                self.consumed.push((m.start(), m.end()));
                out.push(caps);
            }
        }
        out
    }

    fn record(&mut self, kind: ClauseKind, value: impl fmt::Display, caps: &regex::Captures<'_>) {
        let m = caps.get(0).expect("group 0");
        self.clauses.push(RecognizedClause {
            kind,
            value: value.to_string(),
            span: (m.start(), m.end()),
        });
    }
}

fn settle<T: PartialEq + fmt::Display + Copy>(
    slot: &mut Option<T>,
    value: T,
    field: &'static str,
) -> Result<(), IntentError> {
    match *slot {
        Some(prev) if prev != value => Err(IntentError::Contradictory {
            field,
            first: prev.to_string(),
            second: value.to_string(),
        }),
        _ => {
            *slot = Some(value);
            Ok(())
        }
    }
}

fn number(caps: &regex::Captures<'_>) -> f64 {
    caps["n"].parse().expect("grammar only captures numerals")
}

/// Extracts scheduling parameters from `text`; fields the text does not
/// mention keep their value from `defaults`.
pub fn parse_intent(
    text: &str,
    defaults: &IntentParams,
    table: &AlphaTable,
) -> Result<ParsedIntent, IntentError> {
    if text.trim().is_empty() {
        return Err(IntentError::Empty);
    }
    let g = grammar();
    let mut ex = Extraction {
        text,
        consumed: Vec::new(),
        clauses: Vec::new(),
    };
    let mut warnings = Vec::new();

    let mut cap: Option<u32> = None;
    let mut spacing: Option<f64> = None;
    let mut count: Option<u32> = None;
    let mut period: Option<f64> = None;
    let mut alpha: Option<f64> = None;
    let mut omega: Option<f64> = None;
    let mut delta: Option<f64> = None;
    let mut concurrency: Option<u32> = None;

    for caps in ex.take_all(&g.daily_cap) {
        let m = word_number(&caps["n"]).expect("grammar only captures numbers");
        ex.record(ClauseKind::DailyCap, m, &caps);
        settle(&mut cap, m, "daily cap")?;
    }
    for re in &g.spacing {
        for caps in ex.take_all(re) {
            let v = number(&caps);
            ex.record(ClauseKind::Spacing, v, &caps);
            settle(&mut spacing, v, "spacing")?;
        }
    }
    for re in [&g.count, &g.count_adverb] {
        for caps in ex.take_all(re) {
            let k = word_number(&caps["n"]).expect("grammar only captures numbers");
            ex.record(ClauseKind::Count, k, &caps);
            settle(&mut count, k, "count")?;
        }
    }
    for (re, p) in [
        (&g.period_week, Some(168.0)),
        (&g.period_day, Some(24.0)),
        (&g.period_hours, None),
    ] {
        for caps in ex.take_all(re) {
            let v = p.unwrap_or_else(|| number(&caps));
            ex.record(ClauseKind::Period, v, &caps);
            settle(&mut period, v, "period")?;
        }
    }
    for caps in ex.take_all(&g.overlap_value) {
        let v = number(&caps);
        ex.record(ClauseKind::Overlap, v, &caps);
        settle(&mut alpha, v, "overlap")?;
    }
    for caps in ex.take_all(&g.overlap_adjective) {
        let adj = caps["adj"].to_ascii_lowercase();
        let v = table
            .adjective(&adj)
            .expect("grammar only captures known adjectives");
        ex.record(ClauseKind::Overlap, v, &caps);
        settle(&mut alpha, v, "overlap")?;
    }
    for caps in ex.take_all(&g.no_other_activity) {
        ex.record(ClauseKind::Overlap, table.no_other_activity, &caps);
        settle(&mut alpha, table.no_other_activity, "overlap")?;
    }
    for caps in ex.take_all(&g.lull) {
        ex.record(ClauseKind::Lull, table.lull, &caps);
        settle(&mut alpha, table.lull, "overlap")?;
    }
    for caps in ex.take_all(&g.self_affinity) {
        let v = number(&caps);
        ex.record(ClauseKind::SelfAffinity, v, &caps);
        settle(&mut omega, v, "self-affinity")?;
    }
    for caps in ex.take_all(&g.width) {
        let v = number(&caps);
        ex.record(ClauseKind::Width, v, &caps);
        settle(&mut delta, v, "window width")?;
    }
    for caps in ex.take_all(&g.concurrency) {
        let v: u32 = caps["n"].parse().unwrap_or(0);
        ex.record(ClauseKind::Concurrency, v, &caps);
        settle(&mut concurrency, v, "concurrency limit")?;
    }

    if ex.clauses.is_empty() {
        return Err(IntentError::NoRecognizableClause(text.to_string()));
    }

    let mut asset = None;
    if let Some(caps) = ex.take_all(&g.asset_explicit).into_iter().next() {
        asset = Some(clean_identifier(&caps["name"]));
        ex.record(
            ClauseKind::Asset,
            asset.as_deref().unwrap_or_default(),
            &caps,
        );
    } else if let Some(caps) = ex.take_all(&g.asset_token).into_iter().next() {
        asset = Some(clean_identifier(&caps[0]));
        ex.record(
            ClauseKind::Asset,
            asset.as_deref().unwrap_or_default(),
            &caps,
        );
    }

    let mut params = defaults.clone();
    if asset.is_some() {
        params.asset = asset;
    }
    match count {
        Some(k) => params.k = k,
        None => warnings.push(format!(
            "number of windows not specified; using default k = {}",
            defaults.k
        )),
    }
    if let Some(p) = period {
        params.period_hours = Some(p);
    }
    if let Some(a) = alpha {
        params.alpha = a;
    }
    if let Some(w) = omega {
        params.omega = w;
    }
    if let Some(d) = delta {
        params.delta = d;
    }
    if let Some(j) = concurrency {
        params.concurrency_limit = Some(j);
    }
    if let Some(e) = spacing {
        params.epsilon = e;
    }
    if let Some(m) = cap {
        let daily = DailyCap::per_day(m);
        let hint = daily.bucket_hours / m as f64;
        params.daily_cap = Some(daily);
        if params.epsilon < hint {
            params.epsilon = hint;
        }
        warnings.push(format!(
            "per-day limit read both as a cap of {m} per {} h bucket and as spacing ε ≥ {hint} h",
            daily.bucket_hours
        ));
    }

    let unrecognized = leftover_fragments(text, &ex.consumed);
    for frag in &unrecognized {
        warnings.push(format!("unrecognized clause: {frag:?}"));
    }

    params.check_ranges()?;
    ex.clauses.sort_by_key(|c| c.span);
    Ok(ParsedIntent {
        params,
        warnings,
        phrase: IntentPhrase {
            raw: text.to_string(),
            recognized_clauses: ex.clauses,
            unrecognized,
        },
    })
}

fn clean_identifier(raw: &str) -> String {
    raw.trim_end_matches(['.', '-']).to_string()
}

/// Pieces of `text` outside every consumed span that still contain
/// something other than filler words.
fn leftover_fragments(text: &str, consumed: &[(usize, usize)]) -> Vec<String> {
    let g = grammar();
    let mut spans = consumed.to_vec();
    spans.sort();
    let mut residual = String::with_capacity(text.len());
    let mut cursor = 0;
    for (s, e) in spans {
        if s > cursor {
            residual.push_str(&text[cursor..s]);
        }
        residual.push('|');
        cursor = cursor.max(e);
    }
    if cursor < text.len() {
        residual.push_str(&text[cursor..]);
    }
    g.splitter
        .split(&residual)
        .map(str::trim)
        .filter(|frag| {
            g.word
                .find_iter(frag)
                .any(|w| !FILLER.contains(&w.as_str().to_ascii_lowercase().as_str()))
        })
        .map(str::to_string)
        .collect()
}

/// Canonical sentence for `params` in the recognized grammar.
///
/// Daily caps are rendered with 24 h buckets only, and parsing the result
/// returns `params` whenever `params.epsilon ≥ 24 / cap`.
pub fn render_intent(params: &IntentParams) -> String {
    let mut out = String::from("Backup");
    if let Some(asset) = &params.asset {
        out.push_str(&format!(" asset {asset}"));
    }
    out.push_str(&format!(" {} times", params.k));
    match params.period_hours {
        Some(168.0) => out.push_str(" per week"),
        Some(24.0) => out.push_str(" per day"),
        Some(p) => out.push_str(&format!(" per {p} hours")),
        None => {}
    }
    out.push_str(&format!(
        " with expected overlap {}, self-affinity {}, windows of {} hours, at least {} hours apart",
        params.alpha, params.omega, params.delta, params.epsilon
    ));
    if let Some(cap) = params.daily_cap {
        out.push_str(&format!(", no more than {} times on any day", cap.cap));
    }
    if let Some(j) = params.concurrency_limit {
        out.push_str(&format!(", at most {j} concurrent jobs"));
    }
    out.push('.');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, table: &AlphaTable) -> Result<ParsedIntent, IntentError> {
        parse_intent(text, &IntentParams::default(), table)
    }

    #[test]
    fn minimal_overlap_with_day_cap() {
        let text = "Backup asset VM16as_v1 four times per week with minimal overlap with other backup jobs, and no more than twice on any day.";
        let out = parse(text, &AlphaTable::paper_compat()).unwrap();
        let p = &out.params;
        assert_eq!(p.asset.as_deref(), Some("VM16as_v1"));
        assert_eq!(p.k, 4);
        assert_eq!(p.period_hours, Some(168.0));
        assert_eq!(p.alpha, 0.0);
        assert_eq!(p.daily_cap, Some(DailyCap::per_day(2)));
        assert_eq!(p.epsilon, 12.0);
        assert!(
            out.phrase.unrecognized.is_empty(),
            "{:?}",
            out.phrase.unrecognized
        );
        assert_eq!(out.warnings.len(), 1);
        assert!(out.warnings[0].contains("ε ≥ 12"));
    }

    #[test]
    fn no_other_backups_and_spacing() {
        let text = "I need to backup VM16as_v1 3 times but try to schedule them when no other backups are happening, and not more frequently than once every 40 hours.";
        let out = parse(text, &AlphaTable::paper_compat()).unwrap();
        assert_eq!(out.params.k, 3);
        assert_eq!(out.params.epsilon, 40.0);
        assert_eq!(out.params.alpha, 0.2);
        assert_eq!(out.params.asset.as_deref(), Some("VM16as_v1"));
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);

        let ladder = parse(text, &AlphaTable::ladder()).unwrap();
        assert_eq!(ladder.params.alpha, 0.0);
    }

    #[test]
    fn moderate_overlap_prompt() {
        let text = "Incremental backup for asset  VM16as_v1 4 times with moderate overlap with my existing schedules. Ensure that they are spread apart by at least 10 hours";
        let out = parse(text, &AlphaTable::paper_compat()).unwrap();
        assert_eq!(out.params.k, 4);
        assert_eq!(out.params.alpha, 0.8);
        assert_eq!(out.params.epsilon, 10.0);
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
    }

    #[test]
    fn lull_only() {
        let out = parse(
            "Backup VM16as_v1 during lull periods for normal jobs.",
            &AlphaTable::ladder(),
        )
        .unwrap();
        assert_eq!(out.params.alpha, 0.0);
        assert_eq!(out.params.k, IntentParams::default().k);
        assert_eq!(out.params.asset.as_deref(), Some("VM16as_v1"));
        assert!(out.warnings.iter().any(|w| w.contains("not specified")));
        let kinds: Vec<_> = out
            .phrase
            .recognized_clauses
            .iter()
            .map(|c| c.kind)
            .collect();
        assert_eq!(kinds, vec![ClauseKind::Asset, ClauseKind::Lull]);
    }

    #[test]
    fn errors() {
        assert_eq!(parse("   ", &AlphaTable::ladder()), Err(IntentError::Empty));
        assert!(matches!(
            parse("make it nice", &AlphaTable::ladder()),
            Err(IntentError::NoRecognizableClause(_))
        ));
        assert!(matches!(
            parse("backup 3 times and also 4 times", &AlphaTable::ladder()),
            Err(IntentError::Contradictory { field: "count", .. })
        ));
        assert!(matches!(
            parse("backup 0 times per week", &AlphaTable::ladder()),
            Err(IntentError::Invalid(_))
        ));
        assert!(matches!(
            parse(
                "backup twice with expected overlap 1.5",
                &AlphaTable::ladder()
            ),
            Err(IntentError::Invalid(_))
        ));
    }

    #[test]
    fn unrecognized_clauses_reported() {
        let out = parse(
            "Backup db_7 twice per day, preferably on a full moon",
            &AlphaTable::ladder(),
        )
        .unwrap();
        assert_eq!(out.params.k, 2);
        assert_eq!(out.params.period_hours, Some(24.0));
        assert_eq!(
            out.phrase.unrecognized,
            vec!["preferably on a full moon".to_string()]
        );
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn adjective_ladder() {
        for (adj, a) in [
            ("low", 0.25),
            ("moderate", 0.5),
            ("high", 0.75),
            ("maximal", 1.0),
            ("no", 0.0),
        ] {
            let out = parse(
                &format!("backup 2 times with {adj} overlap"),
                &AlphaTable::ladder(),
            )
            .unwrap();
            assert_eq!(out.params.alpha, a, "{adj}");
        }
    }

    #[test]
    fn render_round_trip_example() {
        let p = IntentParams {
            asset: Some("vm-3".into()),
            k: 5,
            epsilon: 13.5,
            alpha: 0.37,
            omega: 0.2,
            delta: 2.5,
            period_hours: Some(168.0),
            daily_cap: Some(DailyCap::per_day(2)),
            concurrency_limit: Some(8),
        };
        let text = render_intent(&p);
        let back = parse(&text, &AlphaTable::ladder()).unwrap();
        assert_eq!(back.params, p, "{text}");
        assert!(back.phrase.unrecognized.is_empty());
    }
}
