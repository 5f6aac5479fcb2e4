//! `bwsched` command-line front end.
//!
//! Exit codes: 0 success, 1 constraint or support failure, 2 ill-posed
//! request or unparseable intent, 3 I/O or format error.

pub mod svg;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use bwsched_core::{
    parse_intent, periodic_kde, prepare_distribution, raw_kde, sample_from, validate_spacing,
    AlphaTable, BandwidthRule, DailyCap, DensityEstimate, IntentParams, JobWindow, PeriodConfig,
    SampleError, SamplerOptions, SamplingMode, Schedule, ScheduleFormat,
    DEFAULT_EXPANSION_FRACTION, DEFAULT_GRID_SIZE,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::svg::{Chart, Scale, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONSTRAINT: i32 = 1;
pub const EXIT_ILL_POSED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "bwsched",
    version,
    about = "Place new periodic backup windows into an existing schedule"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Place new windows and write the outcome JSON.
    Schedule(ScheduleArgs),
    /// Check concurrency and spacing of a schedule and optional new windows.
    Validate(ValidateArgs),
    /// Turn an intent sentence into parameters (JSON on stdout).
    ParseIntent(ParseIntentArgs),
    /// Plot the density estimate of a schedule as SVG.
    Plot(PlotArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableChoice {
    Default,
    Paper,
}

impl TableChoice {
    fn table(self) -> AlphaTable {
        match self {
            TableChoice::Default => AlphaTable::ladder(),
            TableChoice::Paper => AlphaTable::paper_compat(),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Schedule file (JSON, or CSV with header client,start,end,label).
    #[arg(long, short = 's')]
    pub schedule: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<FileFormat>,
}

#[derive(Args, Debug, Clone)]
pub struct DensityArgs {
    /// silverman, scott or fixed:<hours>.
    #[arg(long, default_value = "silverman")]
    pub bandwidth: BandwidthRule,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid_size: usize,
    /// Minimum wrap-around expansion as a fraction of the period.
    #[arg(long, default_value_t = DEFAULT_EXPANSION_FRACTION)]
    pub expansion_fraction: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub density: DensityArgs,
    /// Intent sentence; explicit flags below override what it yields.
    #[arg(long)]
    pub intent: Option<String>,
    #[arg(long, value_enum, default_value = "default")]
    pub alpha_table: TableChoice,
    /// Number of new windows.
    #[arg(long)]
    pub k: Option<u32>,
    /// Minimum spacing between new window centers, hours.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Expected overlap with existing windows, 0..1.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Self-affinity, 0..1.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Width of each new window, hours.
    #[arg(long)]
    pub delta: Option<f64>,
    /// At most this many new windows per bucket.
    #[arg(long)]
    pub cap: Option<u32>,
    #[arg(long, default_value_t = 24.0)]
    pub cap_bucket: f64,
    /// Server concurrency limit; overrides the schedule file's.
    #[arg(long)]
    pub concurrency_limit: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "argmax")]
    pub mode: ModeChoice,
    /// Outcome JSON path; stdout when omitted (the table then goes to stderr).
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// SVG of the density, G before and after exclusions, and the new windows.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    Argmax,
    Stochastic,
}

impl From<ModeChoice> for SamplingMode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Argmax => SamplingMode::Argmax,
            ModeChoice::Stochastic => SamplingMode::Stochastic,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// New windows: a schedule document or a `schedule` outcome JSON.
    #[arg(long)]
    pub new: Option<PathBuf>,
    /// Concurrency limit; defaults to the schedule file's.
    #[arg(long)]
    pub limit: Option<u32>,
    /// Minimum circular spacing between centers (of the new windows if given).
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Emit the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ParseIntentArgs {
    pub text: String,
    #[arg(long, value_enum, default_value = "default")]
    pub alpha_table: TableChoice,
}

#[derive(Args, Debug, Clone)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub density: DensityArgs,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    /// Also draw the uncorrected estimate.
    #[arg(long)]
    pub show_raw: bool,
}

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure::new(EXIT_IO, message)
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs one invocation, writing to the given streams; returns the exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Schedule(args) => cmd_schedule(&args, stdout, stderr),
        Command::Validate(args) => cmd_validate(&args, stdout),
        Command::ParseIntent(args) => cmd_parse_intent(&args, stdout, stderr),
        Command::Plot(args) => cmd_plot(&args, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

fn infer_format(path: &Path, explicit: Option<FileFormat>) -> ScheduleFormat {
    match explicit {
        Some(FileFormat::Csv) => ScheduleFormat::Csv,
        Some(FileFormat::Json) => ScheduleFormat::Json,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ScheduleFormat::Csv,
            _ => ScheduleFormat::Json,
        },
    }
}

pub fn load_schedule(input: &InputArgs) -> Result<Schedule, Failure> {
    let text = read_text(&input.schedule)?;
    Schedule::parse(&text, infer_format(&input.schedule, input.format))
        .map_err(|e| Failure::io(format!("{}: {e}", input.schedule.display())))
}

fn build_density(schedule: &Schedule, args: &DensityArgs) -> Result<DensityEstimate, Failure> {
    let h = args
        .bandwidth
        .resolve(&schedule.centers(), schedule.period_hours())
        .map_err(|e| Failure::io(e.to_string()))?;
    periodic_kde(schedule, h, args.expansion_fraction, args.grid_size)
        .map_err(|e| Failure::io(e.to_string()))
}

/// Intent-derived parameters with explicit flags layered on top.
pub fn effective_params(args: &ScheduleArgs) -> Result<(IntentParams, Vec<String>), Failure> {
    let defaults = IntentParams::default();
    let (mut params, warnings) = match &args.intent {
        Some(text) => {
            let parsed = parse_intent(text, &defaults, &args.alpha_table.table())
                .map_err(|e| Failure::new(EXIT_ILL_POSED, e.to_string()))?;
            (parsed.params, parsed.warnings)
        }
        None => (defaults, Vec::new()),
    };
    if let Some(k) = args.k {
        params.k = k;
    }
    if let Some(e) = args.epsilon {
        params.epsilon = e;
    }
    if let Some(a) = args.alpha {
        params.alpha = a;
    }
    if let Some(w) = args.omega {
        params.omega = w;
    }
    if let Some(d) = args.delta {
        params.delta = d;
    }
    if let Some(cap) = args.cap {
        params.daily_cap = Some(DailyCap {
            cap,
            bucket_hours: args.cap_bucket,
        });
    }
    if let Some(j) = args.concurrency_limit {
        params.concurrency_limit = Some(j);
    }
    Ok((params, warnings))
}

fn window_table(period: &PeriodConfig, windows: &[JobWindow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3}  {:<16} {:<10} {:<10} {:<10} {:>7}",
        "#", "client", "start", "end", "center", "width"
    );
    for (i, w) in windows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>3}  {:<16} {:<10} {:<10} {:<10} {:>7.2}",
            i + 1,
            w.client,
            period.format_time(w.start(period)),
            period.format_time(w.end(period)),
            period.format_time(w.center),
            w.width
        );
    }
    out
}

pub fn cmd_schedule(
    args: &ScheduleArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let schedule = load_schedule(&args.input)?;
    let (params, warnings) = effective_params(args)?;
    for w in &warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let density = if schedule.is_empty() {
        None
    } else {
        Some(build_density(&schedule, &args.density)?)
    };
    let options = SamplerOptions {
        mode: args.mode.into(),
        grid_size: args.density.grid_size,
    };
    let mut dist = match prepare_distribution(density.as_ref(), &schedule, &params, &options) {
        Ok(d) => d,
        Err(SampleError::IllPosed(e)) => {
            return Err(Failure::new(
                EXIT_ILL_POSED,
                format!("ill-posed request: {e}"),
            ))
        }
        Err(e) => return Err(Failure::new(EXIT_ILL_POSED, e.to_string())),
    };
    let before = dist.clone();
    let outcome = match sample_from(&mut dist, &params, args.seed, options.mode) {
        Ok(o) => o,
        Err(SampleError::SupportExhausted {
            iteration,
            requested,
            partial,
        }) => {
            let placed: Vec<String> = partial
                .centers
                .iter()
                .map(|&c| schedule.period.format_time(c))
                .collect();
            return Err(Failure::new(
                EXIT_CONSTRAINT,
                format!(
                    "Unable to proceed: no admissible time left at iteration {iteration} of {requested} (placed: [{}])",
                    placed.join(", ")
                ),
            ));
        }
        Err(e) => return Err(Failure::new(EXIT_ILL_POSED, e.to_string())),
    };

    let mut doc = outcome.to_json_value(&schedule.period);
    doc["effective_params"] = json!(params);
    doc["bandwidth"] = json!(density.as_ref().map(|d| d.bandwidth()));
    doc["expansion_hours"] = json!(density.as_ref().map(|d| d.expansion()));
    doc["grid_size"] = json!(before.grid_size());
    doc["uniform_start"] = json!(before.is_uniform_fallback());
    let text = serde_json::to_string_pretty(&doc).expect("outcome serializes") + "\n";
    let table = window_table(&schedule.period, &outcome.windows);
    let echo = format!(
        "k={} epsilon={} alpha={} omega={} delta={} seed={}\n",
        params.k, params.epsilon, params.alpha, params.omega, params.delta, args.seed
    );
    match &args.output {
        Some(path) => {
            write_text(path, &text)?;
            let _ = write!(stdout, "{echo}{table}");
        }
        None => {
            let _ = write!(stderr, "{echo}{table}");
            let _ = write!(stdout, "{text}");
        }
    }

    if let Some(path) = &args.plot {
        let mut series = Vec::new();
        if let Some(d) = &density {
            series.push(Series {
                class: "kde-corrected",
                label: "F_h (periodic)",
                stroke: "#1f77b4",
                dashed: false,
                scale: Scale::Density,
                values: d.values().to_vec(),
            });
        }
        series.push(Series {
            class: "g-before",
            label: "G before exclusions",
            stroke: "#ff7f0e",
            dashed: false,
            scale: Scale::Relative,
            values: before.values().to_vec(),
        });
        series.push(Series {
            class: "g-after",
            label: "G after exclusions",
            stroke: "#2ca02c",
            dashed: true,
            scale: Scale::Relative,
            values: dist.values().to_vec(),
        });
        let chart = Chart {
            period: &schedule.period,
            title: format!(
                "k={} ε={} α={} ω={} (hours from {})",
                params.k,
                params.epsilon,
                params.alpha,
                params.omega,
                schedule.period.origin_label()
            ),
            series,
            bands: Some(&schedule),
            markers: outcome.centers.clone(),
        };
        write_text(path, &chart.render())?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WindowRow {
    client: String,
    start: String,
    end: String,
    center: f64,
    width: f64,
    new: bool,
}

#[derive(Serialize)]
struct ValidationReport {
    max_concurrency: usize,
    witness: f64,
    witness_label: String,
    limit: Option<u32>,
    concurrency_violation: bool,
    spacing: Option<f64>,
    spacing_violations: Vec<bwsched_core::SpacingViolation>,
    windows: Vec<WindowRow>,
}

fn load_new_windows(path: &Path, base: &Schedule) -> Result<Vec<JobWindow>, Failure> {
    let text = read_text(path)?;
    let bad = |e: String| Failure::io(format!("{}: {e}", path.display()));
    if path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        let s = Schedule::from_csv(&text, base.period.clone()).map_err(|e| bad(e.to_string()))?;
        return Ok(s.windows().to_vec());
    }
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if let Some(windows) = value.get("windows").cloned() {
        // outcome JSON from `schedule`
        value = json!({
            "period_hours": base.period_hours(),
            "origin": base.period.origin_label(),
            "jobs": windows,
        });
        if let Some(jobs) = value["jobs"].as_array_mut() {
            for job in jobs {
                if job.get("client").is_none() {
                    job["client"] = json!("new");
                }
            }
        }
    }
    let s = Schedule::from_json(&value.to_string()).map_err(|e| bad(e.to_string()))?;
    if (s.period_hours() - base.period_hours()).abs() > 1e-9 {
        return Err(bad("period differs from the base schedule".to_string()));
    }
    // re-express in the base schedule's origin
    let shift = s
        .period
        .parse_time(base.period.origin_label())
        .unwrap_or(0.0);
    Ok(s.windows()
        .iter()
        .map(|w| JobWindow {
            center: base.period.wrap(w.center - shift),
            ..w.clone()
        })
        .collect())
}

pub fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> CmdResult {
    let schedule = load_schedule(&args.input)?;
    let new = match &args.new {
        Some(path) => load_new_windows(path, &schedule)?,
        None => Vec::new(),
    };
    let merged = schedule
        .extended(&new)
        .map_err(|e| Failure::io(e.to_string()))?;
    let (max, witness) = merged.max_concurrency();
    let limit = args.limit.or(schedule.concurrency_limit);
    let concurrency_violation = limit.is_some_and(|l| max > l as usize);
    let spacing_centers: Vec<f64> = if new.is_empty() {
        schedule.centers()
    } else {
        new.iter().map(|w| w.center).collect()
    };
    let spacing_violations = args
        .spacing
        .map(|s| validate_spacing(&spacing_centers, s, &schedule.period))
        .unwrap_or_default();
    let p = &schedule.period;
    let windows = merged
        .windows()
        .iter()
        .enumerate()
        .map(|(i, w)| WindowRow {
            client: w.client.clone(),
            start: p.format_time(w.start(p)),
            end: p.format_time(w.end(p)),
            center: w.center,
            width: w.width,
            new: i >= schedule.len(),
        })
        .collect();
    let report = ValidationReport {
        max_concurrency: max,
        witness,
        witness_label: p.format_time(witness),
        limit,
        concurrency_violation,
        spacing: args.spacing,
        spacing_violations,
        windows,
    };

    if args.json {
        let _ = writeln!(
            stdout,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        let _ = writeln!(
            stdout,
            "max concurrency: {} at {} ({:.3} h)",
            report.max_concurrency, report.witness_label, report.witness
        );
        match limit {
            Some(l) if concurrency_violation => {
                let _ = writeln!(stdout, "VIOLATION: concurrency {max} exceeds limit {l}");
            }
            Some(l) => {
                let _ = writeln!(stdout, "concurrency limit {l}: ok");
            }
            None => {
                let _ = writeln!(stdout, "concurrency limit: none given");
            }
        }
        if let Some(s) = args.spacing {
            if report.spacing_violations.is_empty() {
                let _ = writeln!(stdout, "spacing {s} h: ok");
            }
            for v in &report.spacing_violations {
                let _ = writeln!(
                    stdout,
                    "VIOLATION: spacing {} h < {s} h between {} and {}",
                    v.gap,
                    p.format_time(v.first),
                    p.format_time(v.second)
                );
            }
        }
        let _ = writeln!(stdout, "windows:");
        for row in &report.windows {
            let _ = writeln!(
                stdout,
                "  {:<16} {} -> {}  center {:.3} h  width {:.3} h{}",
                row.client,
                row.start,
                row.end,
                row.center,
                row.width,
                if row.new { "  (new)" } else { "" }
            );
        }
    }
    if concurrency_violation || !report.spacing_violations.is_empty() {
        Ok(EXIT_CONSTRAINT)
    } else {
        Ok(EXIT_OK)
    }
}

pub fn cmd_parse_intent(
    args: &ParseIntentArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let parsed = parse_intent(
        &args.text,
        &IntentParams::default(),
        &args.alpha_table.table(),
    )
    .map_err(|e| Failure::new(EXIT_ILL_POSED, e.to_string()))?;
    for w in &parsed.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let _ = writeln!(
        stdout,
        "{}",
        serde_json::to_string_pretty(&parsed.params).expect("params serialize")
    );
    Ok(EXIT_OK)
}

pub fn cmd_plot(args: &PlotArgs, stdout: &mut dyn Write) -> CmdResult {
    let schedule = load_schedule(&args.input)?;
    if schedule.is_empty() {
        return Err(Failure::io(
            "schedule has no windows; a density estimate needs at least one",
        ));
    }
    let density = build_density(&schedule, &args.density)?;
    let mut series = vec![Series {
        class: "kde-corrected",
        label: "F_h with wrap-around",
        stroke: "#1f77b4",
        dashed: false,
        scale: Scale::Density,
        values: density.values().to_vec(),
    }];
    if args.show_raw {
        let raw = raw_kde(&schedule, density.bandwidth(), args.density.grid_size)
            .map_err(|e| Failure::io(e.to_string()))?;
        series.push(Series {
            class: "kde-raw",
            label: "F_h without correction",
            stroke: "#000000",
            dashed: true,
            scale: Scale::Density,
            values: raw,
        });
    }
    let chart = Chart {
        period: &schedule.period,
        title: format!(
            "Density of existing windows, h = {:.3} h (hours from {})",
            density.bandwidth(),
            schedule.period.origin_label()
        ),
        series,
        bands: Some(&schedule),
        markers: Vec::new(),
    };
    write_text(&args.output, &chart.render())?;
    let _ = writeln!(
        stdout,
        "wrote {} (bandwidth {:.4} h, {} cells)",
        args.output.display(),
        density.bandwidth(),
        density.grid_size()
    );
    Ok(EXIT_OK)
}
