//! Placement of new periodic backup windows into an existing schedule.
//!
//! The pipeline: parse a [`Schedule`], estimate the density of existing
//! window centers with a wrap-around KDE ([`periodic_kde`]), reshape it by
//! the requested overlap into a sampling distribution, then place windows
//! one at a time with [`greedy_sample`], excluding a neighborhood of each
//! pick. [`parse_intent`] turns restricted English into [`IntentParams`].

pub mod density;
pub mod intent;
pub mod period;
pub mod sampler;
pub mod schedule;

pub use density::{
    periodic_kde, raw_kde, scott_bandwidth, silverman_bandwidth, BandwidthRule, DensityError,
    DensityEstimate, DEFAULT_EXPANSION_FRACTION, DEFAULT_GRID_SIZE,
};
pub use intent::{
    parse_intent, render_intent, AlphaTable, ClauseKind, IntentError, IntentPhrase, ParsedIntent,
    RecognizedClause,
};
pub use period::{PeriodConfig, TimeError};
pub use sampler::{
    greedy_sample, prepare_distribution, sample_from, Exclusion, SampleError, SamplerOptions,
    SamplingDistribution, SamplingMode, SamplingOutcome, TraceStep, RNG_NAME,
};
pub use schedule::{
    validate_request, validate_spacing, DailyCap, IllPosed, IntentParams, JobWindow, Schedule,
    ScheduleError, ScheduleFormat, SpacingViolation, WellPosed,
};
