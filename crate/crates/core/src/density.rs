//! Wrap-around kernel density estimate of existing window centers.
//!
//! A plain Gaussian KDE assumes an unbounded domain and sags at both ends of
//! `[0, P)`. Centers within `u` of either edge are replicated one period
//! over, the mixture is evaluated on `[0, P)` only, and the result is
//! renormalized so it integrates to one over the period.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::Schedule;

pub const DEFAULT_EXPANSION_FRACTION: f64 = 0.25;
/// Lower bound on the expansion half-width, in bandwidths. Kernel mass
/// beyond four bandwidths is below 4e-4 of the peak.
pub const KERNEL_REACH: f64 = 4.0;
/// Five-minute cells over one week.
pub const DEFAULT_GRID_SIZE: usize = 2016;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("bandwidth needs at least one point")]
    EmptySample,
    #[error("density estimate needs at least one existing window")]
    EmptySchedule,
    #[error("bandwidth must be positive and finite, got {0}")]
    BadBandwidth(f64),
    #[error("expansion fraction must lie in (0, 1], got {0}")]
    BadExpansion(f64),
    #[error("grid size must be at least 2, got {0}")]
    BadGrid(usize),
    #[error("unknown bandwidth rule {0:?} (expected silverman, scott or fixed:<hours>)")]
    UnknownRule(String),
}

fn mean_and_std(points: &[f64]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean = points.iter().sum::<f64>() / n;
    if points.len() < 2 {
        return (mean, 0.0);
    }
    let var = points.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn with_fallback(h: f64, period_hours: f64) -> f64 {
    if h.is_finite() && h > 0.0 {
        h
    } else {
        period_hours / 24.0
    }
}

/// `0.9 · min(σ̂, IQR/1.34) · n^(-1/5)`, or `P/24` for degenerate samples.
pub fn silverman_bandwidth(points: &[f64], period_hours: f64) -> Result<f64, DensityError> {
    if points.is_empty() {
        return Err(DensityError::EmptySample);
    }
    let (_, sd) = mean_and_std(points);
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let h = 0.9 * sd.min(iqr / 1.34) * (points.len() as f64).powf(-0.2);
    Ok(with_fallback(h, period_hours))
}

/// `σ̂ · n^(-1/5)`, or `P/24` for degenerate samples.
pub fn scott_bandwidth(points: &[f64], period_hours: f64) -> Result<f64, DensityError> {
    if points.is_empty() {
        return Err(DensityError::EmptySample);
    }
    let (_, sd) = mean_and_std(points);
    Ok(with_fallback(
        sd * (points.len() as f64).powf(-0.2),
        period_hours,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthRule {
    Silverman,
    Scott,
    Fixed(f64),
}

impl BandwidthRule {
    pub fn resolve(&self, points: &[f64], period_hours: f64) -> Result<f64, DensityError> {
        match *self {
            BandwidthRule::Silverman => silverman_bandwidth(points, period_hours),
            BandwidthRule::Scott => scott_bandwidth(points, period_hours),
            BandwidthRule::Fixed(h) if h.is_finite() && h > 0.0 => Ok(h),
            BandwidthRule::Fixed(h) => Err(DensityError::BadBandwidth(h)),
        }
    }
}

impl FromStr for BandwidthRule {
    type Err = DensityError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "silverman" => return Ok(BandwidthRule::Silverman),
            "scott" => return Ok(BandwidthRule::Scott),
            _ => {}
        }
        if let Some(h) = s.strip_prefix("fixed:") {
            let h: f64 = h
                .trim()
                .parse()
                .map_err(|_| DensityError::UnknownRule(s.to_string()))?;
            if !(h.is_finite() && h > 0.0) {
                return Err(DensityError::BadBandwidth(h));
            }
            return Ok(BandwidthRule::Fixed(h));
        }
        Err(DensityError::UnknownRule(s.to_string()))
    }
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthRule::Silverman => f.write_str("silverman"),
            BandwidthRule::Scott => f.write_str("scott"),
            BandwidthRule::Fixed(h) => write!(f, "fixed:{h}"),
        }
    }
}

#[inline]
fn gaussian(x: f64, h: f64) -> f64 {
    let z = x / h;
    (-0.5 * z * z).exp() / (h * (2.0 * PI).sqrt())
}

fn mixture(points: &[f64], n_source: usize, h: f64, t: f64) -> f64 {
    points.iter().map(|&p| gaussian(t - p, h)).sum::<f64>() / n_source as f64
}

/// Grid-discretized periodic density `F_h` over `[0, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    period_hours: f64,
    values: Vec<f64>,
    bandwidth: f64,
    expansion: f64,
    /// Centers plus their periodic images inside `[-u, P + u]`.
    support_points: Vec<f64>,
    source_count: usize,
    norm: f64,
}

impl DensityEstimate {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn period_hours(&self) -> f64 {
        self.period_hours
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Expansion half-width `u` in hours.
    pub fn expansion(&self) -> f64 {
        self.expansion
    }

    pub fn cell_width(&self) -> f64 {
        self.period_hours / self.values.len() as f64
    }

    pub fn grid_time(&self, j: usize) -> f64 {
        j as f64 * self.cell_width()
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.grid_time(j)).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Periodic trapezoidal integral; the wrap cell closes the loop.
    pub fn integral(&self) -> f64 {
        periodic_trapezoid(&self.values, self.cell_width())
    }

    /// Normalized estimate at an arbitrary `t`, evaluated off-grid.
    pub fn evaluate(&self, t: f64) -> f64 {
        mixture(&self.support_points, self.source_count, self.bandwidth, t) / self.norm
    }

    /// `|values[0] − values[N−1]|`, the grid-level edge mismatch.
    pub fn edge_gap(&self) -> f64 {
        (self.values[0] - self.values[self.values.len() - 1]).abs()
    }
}

pub(crate) fn periodic_trapezoid(values: &[f64], dx: f64) -> f64 {
    // with the wrap segment every node carries full weight
    values.iter().sum::<f64>() * dx
}

fn check_inputs(bandwidth: f64, grid_size: usize) -> Result<(), DensityError> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(DensityError::BadBandwidth(bandwidth));
    }
    if grid_size < 2 {
        return Err(DensityError::BadGrid(grid_size));
    }
    Ok(())
}

/// Builds the boundary-corrected estimate from the schedule's window centers.
///
/// The domain is widened to `[-u, P + u]` with `u = max(fraction·P, 4h)` and
/// every periodic image of a center that lands inside it joins the sample.
pub fn periodic_kde(
    schedule: &Schedule,
    bandwidth: f64,
    expansion_fraction: f64,
    grid_size: usize,
) -> Result<DensityEstimate, DensityError> {
    if schedule.is_empty() {
        return Err(DensityError::EmptySchedule);
    }
    check_inputs(bandwidth, grid_size)?;
    if !(expansion_fraction > 0.0 && expansion_fraction <= 1.0) {
        return Err(DensityError::BadExpansion(expansion_fraction));
    }
    let p = schedule.period_hours();
    let u = (expansion_fraction * p).max(KERNEL_REACH * bandwidth);
    let reach = (u / p).ceil() as i64;
    let centers = schedule.centers();
    let mut support_points = Vec::with_capacity(centers.len() * 3);
    for &tau in &centers {
        support_points.push(tau);
        for m in (-reach..=reach).filter(|&m| m != 0) {
            let image = tau + m as f64 * p;
            if (-u..=p + u).contains(&image) {
                support_points.push(image);
            }
        }
    }
    let dx = p / grid_size as f64;
    let raw: Vec<f64> = (0..grid_size)
        .map(|j| mixture(&support_points, centers.len(), bandwidth, j as f64 * dx))
        .collect();
    let norm = periodic_trapezoid(&raw, dx);
    let values = raw.into_iter().map(|v| v / norm).collect();
    Ok(DensityEstimate {
        period_hours: p,
        values,
        bandwidth,
        expansion: u,
        support_points,
        source_count: centers.len(),
        norm,
    })
}

/// The uncorrected Gaussian KDE on the same grid: no replication, no
/// renormalization. Kept for side-by-side plots.
pub fn raw_kde(
    schedule: &Schedule,
    bandwidth: f64,
    grid_size: usize,
) -> Result<Vec<f64>, DensityError> {
    if schedule.is_empty() {
        return Err(DensityError::EmptySchedule);
    }
    check_inputs(bandwidth, grid_size)?;
    let centers = schedule.centers();
    let dx = schedule.period_hours() / grid_size as f64;
    Ok((0..grid_size)
        .map(|j| mixture(&centers, centers.len(), bandwidth, j as f64 * dx))
        .collect())
}
