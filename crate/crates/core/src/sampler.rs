//! Overlap-parameterized sampling distribution and the greedy placement loop.
//!
//! `G = (2α − 1)·F` shifted so its minimum is zero. Each placement takes the
//! grid cell maximizing `G`, zeroes `G` within the effective spacing `s` of
//! the pick and halves it over a collar of width `s·(1 − ω)` on either side.
//! The loop fails as soon as `G` vanishes everywhere.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::density::{periodic_trapezoid, DensityEstimate, DEFAULT_GRID_SIZE};
use crate::period::PeriodConfig;
use crate::schedule::{
    bucket_divides, validate_request, IllPosed, IntentParams, JobWindow, Schedule,
};

/// Relative tolerance defining the argmax tie set.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Name of the generator behind tie-breaking and stochastic draws.
pub const RNG_NAME: &str = "ChaCha8Rng";

const EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("ill-posed request: {0}")]
    IllPosed(#[from] IllPosed),
    #[error("alpha must lie in [0, 1], got {0}")]
    BadAlpha(f64),
    #[error("bucket length {bucket} h does not divide the period {period} h")]
    BucketNotDivisor { bucket: f64, period: f64 },
    #[error(
        "Unable to proceed: sampling support exhausted at iteration {iteration} of {requested}"
    )]
    SupportExhausted {
        iteration: u32,
        requested: u32,
        partial: SamplingOutcome,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Take the maximizing cell, breaking ties uniformly at random.
    #[default]
    Argmax,
    /// Draw a cell with probability proportional to `G`.
    Stochastic,
}

impl std::str::FromStr for SamplingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "argmax" => Ok(SamplingMode::Argmax),
            "stochastic" => Ok(SamplingMode::Stochastic),
            other => Err(format!("unknown sampling mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerOptions {
    pub mode: SamplingMode,
    /// Grid used when there is no density, i.e. an empty schedule.
    pub grid_size: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            mode: SamplingMode::Argmax,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// Closed interval `[start, end]` on the circle, `start` in `[0, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exclusion {
    pub start: f64,
    pub end: f64,
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Grid function `G(α, t)` mutated by exclusions during one sampling session.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    period_hours: f64,
    values: Vec<f64>,
    alpha: f64,
    uniform_fallback: bool,
    exclusions: Vec<Exclusion>,
}

impl SamplingDistribution {
    pub fn build(density: &DensityEstimate, alpha: f64) -> Result<Self, SampleError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SampleError::BadAlpha(alpha));
        }
        let coef = 2.0 * alpha - 1.0;
        let scaled: Vec<f64> = density.values().iter().map(|f| coef * f).collect();
        let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_abs_f = density.max_value();
        if max - min < 1e-12 * max_abs_f.max(1.0) {
            let mut dist =
                SamplingDistribution::uniform(density.period_hours(), density.grid_size());
            dist.alpha = alpha;
            return Ok(dist);
        }
        Ok(SamplingDistribution {
            period_hours: density.period_hours(),
            values: scaled.into_iter().map(|g| g - min).collect(),
            alpha,
            uniform_fallback: false,
            exclusions: Vec::new(),
        })
    }

    /// Constant 1 everywhere: no preference.
    pub fn uniform(period_hours: f64, grid_size: usize) -> Self {
        SamplingDistribution {
            period_hours,
            values: vec![1.0; grid_size],
            alpha: 0.5,
            uniform_fallback: true,
            exclusions: Vec::new(),
        }
    }

    /// Wraps precomputed non-negative grid values.
    pub fn from_values(period_hours: f64, values: Vec<f64>, alpha: f64) -> Option<Self> {
        if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return None;
        }
        Some(SamplingDistribution {
            period_hours,
            values,
            alpha,
            uniform_fallback: false,
            exclusions: Vec::new(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_uniform_fallback(&self) -> bool {
        self.uniform_fallback
    }

    pub fn exclusions(&self) -> &[Exclusion] {
        &self.exclusions
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn cell_width(&self) -> f64 {
        self.period_hours / self.values.len() as f64
    }

    pub fn grid_time(&self, j: usize) -> f64 {
        j as f64 * self.cell_width()
    }

    /// True when `G = 0` at every grid point.
    pub fn is_exhausted(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn support_mass(&self) -> f64 {
        periodic_trapezoid(&self.values, self.cell_width())
    }

    /// Zeroes `[τ − s, τ + s]` and halves the collar bands of width `s·(1 − ω)` beyond it.
    pub fn apply_exclusion(&mut self, tau: f64, spacing: f64, omega: f64) {
        let p = self.period_hours;
        let collar = spacing * (1.0 - omega);
        let dx = self.cell_width();
        for (j, v) in self.values.iter_mut().enumerate() {
            let d = circular_distance(j as f64 * dx, tau, p);
            if d <= spacing + EDGE_TOL {
                *v = 0.0;
            } else if collar > 0.0 && d <= spacing + collar + EDGE_TOL {
                *v *= 0.5;
            }
        }
        self.exclusions.push(Exclusion {
            start: (tau - spacing).rem_euclid(p),
            end: (tau + spacing).rem_euclid(p),
        });
    }

    /// Zeroes every cell where a window of width `delta` centered there would
    /// meet `limit` or more existing windows somewhere along its span.
    pub fn mask_concurrency(&mut self, schedule: &Schedule, delta: f64, limit: u32) {
        let p = schedule.period_hours();
        let mut breaks: Vec<f64> = Vec::with_capacity(schedule.len() * 6);
        for w in schedule.windows() {
            let s = w.start(&schedule.period);
            let e = s + w.width;
            for shift in [-p, 0.0, p] {
                breaks.push(s + shift);
                breaks.push(e + shift);
            }
        }
        breaks.sort_by(f64::total_cmp);
        let dx = self.cell_width();
        let half = delta / 2.0;
        for (j, v) in self.values.iter_mut().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let t = j as f64 * dx;
            let (a, b) = (t - half, t + half);
            let lo = breaks.partition_point(|&x| x <= a);
            let hi = breaks.partition_point(|&x| x < b);
            let mut edges = Vec::with_capacity(hi - lo + 2);
            edges.push(a);
            edges.extend_from_slice(&breaks[lo..hi]);
            edges.push(b);
            let peak = edges
                .windows(2)
                .filter(|pair| pair[1] > pair[0])
                .map(|pair| schedule.count_active(0.5 * (pair[0] + pair[1])))
                .max()
                .unwrap_or(0);
            if peak >= limit as usize {
                *v = 0.0;
            }
        }
    }

    /// Zeroes every bucket `[m·D, (m+1)·D)` already holding `cap` chosen centers.
    pub fn mask_day_cap(
        &mut self,
        chosen: &[f64],
        cap: u32,
        bucket_hours: f64,
    ) -> Result<(), SampleError> {
        let p = self.period_hours;
        if !bucket_divides(p, bucket_hours) {
            return Err(SampleError::BucketNotDivisor {
                bucket: bucket_hours,
                period: p,
            });
        }
        let buckets = (p / bucket_hours).round() as usize;
        let bucket_of =
            |t: f64| ((t.rem_euclid(p) / bucket_hours).floor() as usize).min(buckets - 1);
        let mut counts = vec![0u32; buckets];
        for &c in chosen {
            counts[bucket_of(c)] += 1;
        }
        let dx = self.cell_width();
        for (j, v) in self.values.iter_mut().enumerate() {
            if counts[bucket_of(j as f64 * dx)] >= cap {
                *v = 0.0;
            }
        }
        Ok(())
    }

    fn tie_set(&self) -> Vec<usize> {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let floor = max - TIE_TOLERANCE * max;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0 && v >= floor)
            .map(|(j, _)| j)
            .collect()
    }
}

/// One placement step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub iteration: u32,
    pub grid_index: usize,
    pub tau: f64,
    pub tie_count: usize,
    /// Integral of `G` left after this step's exclusion.
    pub support_mass_remaining: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingOutcome {
    pub centers: Vec<f64>,
    pub windows: Vec<JobWindow>,
    pub trace: Vec<TraceStep>,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl SamplingOutcome {
    /// The outcome JSON: centers, windows with day-labeled bounds, and the trace.
    pub fn to_json_value(&self, period: &PeriodConfig) -> serde_json::Value {
        let windows: Vec<_> = self
            .windows
            .iter()
            .map(|w| {
                json!({
                    "client": w.client,
                    "start": period.format_time(w.start(period)),
                    "end": period.format_time(w.end(period)),
                    "center": w.center,
                    "width": w.width,
                })
            })
            .collect();
        json!({
            "centers": self.centers,
            "windows": windows,
            "trace": self.trace,
            "rng": RNG_NAME,
            "seed": self.seed,
            "mode": self.mode,
        })
    }
}

/// Runs the greedy placement loop for `intent.k` new windows.
///
/// `density` is `None` for an empty schedule, in which case `G` starts
/// uniform on `options.grid_size` cells. Identical inputs and seed give
/// bit-identical output.
pub fn greedy_sample(
    density: Option<&DensityEstimate>,
    schedule: &Schedule,
    intent: &IntentParams,
    seed: u64,
    options: &SamplerOptions,
) -> Result<SamplingOutcome, SampleError> {
    let mut dist = prepare_distribution(density, schedule, intent, options)?;
    sample_from(&mut dist, intent, seed, options.mode)
}

/// Validates the request and builds the initial `G`, concurrency mask included.
pub fn prepare_distribution(
    density: Option<&DensityEstimate>,
    schedule: &Schedule,
    intent: &IntentParams,
    options: &SamplerOptions,
) -> Result<SamplingDistribution, SampleError> {
    validate_request(schedule, intent)?;
    let mut dist = match density {
        Some(d) => SamplingDistribution::build(d, intent.alpha)?,
        None => SamplingDistribution::uniform(schedule.period_hours(), options.grid_size),
    };
    if let Some(limit) = intent.concurrency_limit.or(schedule.concurrency_limit) {
        dist.mask_concurrency(schedule, intent.delta, limit);
    }
    Ok(dist)
}

/// The placement loop on a prepared distribution, which is left in its
/// final state (all exclusions applied).
pub fn sample_from(
    dist: &mut SamplingDistribution,
    intent: &IntentParams,
    seed: u64,
    mode: SamplingMode,
) -> Result<SamplingOutcome, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = intent.effective_spacing();
    let client = intent.asset.clone().unwrap_or_else(|| "new".to_string());
    let mut outcome = SamplingOutcome {
        centers: Vec::with_capacity(intent.k as usize),
        windows: Vec::with_capacity(intent.k as usize),
        trace: Vec::with_capacity(intent.k as usize),
        seed,
        mode,
    };

    for iteration in 1..=intent.k {
        if let Some(cap) = intent.daily_cap {
            dist.mask_day_cap(&outcome.centers, cap.cap, cap.bucket_hours)?;
        }
        if dist.is_exhausted() {
            return Err(SampleError::SupportExhausted {
                iteration,
                requested: intent.k,
                partial: outcome,
            });
        }
        let (index, tie_count) = match mode {
            SamplingMode::Argmax => {
                let ties = dist.tie_set();
                (ties[rng.random_range(0..ties.len())], ties.len())
            }
            SamplingMode::Stochastic => {
                let weights = WeightedIndex::new(dist.values())
                    .expect("non-exhausted distribution has positive finite mass");
                (weights.sample(&mut rng), 1)
            }
        };
        let tau = dist.grid_time(index);
        dist.apply_exclusion(tau, spacing, intent.omega);
        outcome.centers.push(tau);
        outcome.windows.push(
            JobWindow {
                client: client.clone(),
                center: tau,
                width: intent.delta,
                label: None,
            }
            .with_label(format!("new-{iteration}")),
        );
        outcome.trace.push(TraceStep {
            iteration,
            grid_index: index,
            tau,
            tie_count,
            support_mass_remaining: dist.support_mass(),
        });
    }
    Ok(outcome)
}
