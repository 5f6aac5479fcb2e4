//! Minimal SVG line charts over one period.
//!
//! Fixed 960×360 canvas. Densities share the left y scale; sampling
//! distributions are rescaled to the density maximum so their shape can be
//! read against it. Solid blue is the corrected estimate, dashed black the
//! uncorrected one, orange/green `G` before/after exclusions.

use std::fmt::Write as _;

use bwsched_core::{PeriodConfig, Schedule};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 360.0;
pub const MARGIN_LEFT: f64 = 60.0;
pub const MARGIN_RIGHT: f64 = 20.0;
pub const MARGIN_TOP: f64 = 20.0;
pub const MARGIN_BOTTOM: f64 = 40.0;

pub const PLOT_WIDTH: f64 = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
pub const PLOT_HEIGHT: f64 = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Plotted against the shared density axis.
    Density,
    /// Rescaled so its maximum meets the density axis maximum.
    Relative,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub class: &'static str,
    pub label: &'static str,
    pub stroke: &'static str,
    pub dashed: bool,
    pub scale: Scale,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Chart<'a> {
    pub period: &'a PeriodConfig,
    pub title: String,
    pub series: Vec<Series>,
    pub bands: Option<&'a Schedule>,
    pub markers: Vec<f64>,
}

fn x_of(t: f64, p: f64) -> f64 {
    MARGIN_LEFT + t / p * PLOT_WIDTH
}

fn y_of(v: f64, ymax: f64) -> f64 {
    MARGIN_TOP + (1.0 - v / ymax) * PLOT_HEIGHT
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Chart<'_> {
    pub fn render(&self) -> String {
        let p = self.period.period_hours();
        let ymax = self
            .series
            .iter()
            .filter(|s| s.scale == Scale::Density)
            .flat_map(|s| s.values.iter().copied())
            .fold(0.0, f64::max);
        let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-ymax="{ymax}">"#
        );
        let _ = writeln!(
            out,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="14" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        if let Some(schedule) = self.bands {
            let _ = writeln!(
                out,
                r##"<g class="existing-windows" fill="#999999" fill-opacity="0.25">"##
            );
            for w in schedule.windows() {
                let s = w.start(self.period);
                let e = s + w.width;
                let mut pieces = vec![(s, e.min(p))];
                if e > p {
                    pieces.push((0.0, e - p));
                }
                for (a, b) in pieces {
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.3}" y="{MARGIN_TOP}" width="{:.3}" height="{PLOT_HEIGHT}"/>"#,
                        x_of(a, p),
                        (b - a) / p * PLOT_WIDTH
                    );
                }
            }
            let _ = writeln!(out, "</g>");
        }

        self.axes(&mut out, p, ymax);

        for s in &self.series {
            if s.values.is_empty() {
                continue;
            }
            let factor = match s.scale {
                Scale::Density => 1.0,
                Scale::Relative => {
                    let m = s.values.iter().copied().fold(0.0, f64::max);
                    if m > 0.0 {
                        ymax / 1.05 / m
                    } else {
                        1.0
                    }
                }
            };
            let n = s.values.len();
            let mut d = String::with_capacity(n * 20);
            for (j, v) in s.values.iter().enumerate() {
                let t = j as f64 * p / n as f64;
                let cmd = if j == 0 { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{:.3},{:.6} ", x_of(t, p), y_of(v * factor, ymax));
            }
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<path class="{}" d="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}><title>{}</title></path>"#,
                s.class,
                d.trim_end(),
                s.stroke,
                escape(s.label)
            );
        }

        if !self.markers.is_empty() {
            let _ = writeln!(
                out,
                r##"<g class="new-windows" stroke="#d62728" stroke-width="2">"##
            );
            for &tau in &self.markers {
                let x = x_of(tau, p);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.3}" y1="{MARGIN_TOP}" x2="{x:.3}" y2="{}"/><circle cx="{x:.3}" cy="{}" r="4" fill="#d62728"/>"##,
                    MARGIN_TOP + PLOT_HEIGHT,
                    MARGIN_TOP + 6.0
                );
            }
            let _ = writeln!(out, "</g>");
        }

        self.legend(&mut out);
        out.push_str("</svg>\n");
        out
    }

    fn axes(&self, out: &mut String, p: f64, ymax: f64) {
        let x0 = MARGIN_LEFT;
        let y0 = MARGIN_TOP + PLOT_HEIGHT;
        let _ = writeln!(out, r#"<g class="axes" stroke="black" stroke-width="1">"#);
        let _ = writeln!(
            out,
            r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}"/>"#,
            x0 + PLOT_WIDTH
        );
        let _ = writeln!(
            out,
            r#"<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}"/>"#
        );
        let step = if p > 48.0 {
            24.0
        } else {
            (p / 8.0).max(1.0).round()
        };
        let mut t = 0.0;
        while t <= p + 1e-9 {
            let x = x_of(t, p);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.3}" y1="{y0}" x2="{x:.3}" y2="{}"/>"#,
                y0 + 5.0
            );
            t += step;
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            r#"<g class="tick-labels" font-family="sans-serif" font-size="10" text-anchor="middle">"#
        );
        let mut t = 0.0;
        while t <= p + 1e-9 {
            let _ = writeln!(
                out,
                r#"<text x="{:.3}" y="{}">{}h</text>"#,
                x_of(t, p),
                y0 + 16.0,
                t
            );
            if t < p {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.3}" y="{}">{}</text>"#,
                    x_of(t, p),
                    y0 + 28.0,
                    escape(&self.period.format_time(t))
                );
            }
            t += step;
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.3}" text-anchor="end">{:.4}</text>"#,
            MARGIN_LEFT - 4.0,
            MARGIN_TOP + 4.0,
            ymax
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y0}" text-anchor="end">0</text>"#,
            MARGIN_LEFT - 4.0
        );
        let _ = writeln!(out, "</g>");
    }

    fn legend(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r#"<g class="legend" font-family="sans-serif" font-size="11">"#
        );
        for (i, s) in self.series.iter().enumerate() {
            let y = MARGIN_TOP + 12.0 + i as f64 * 14.0;
            let x = WIDTH - MARGIN_RIGHT - 200.0;
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="1.5"{dash}/><text x="{}" y="{}">{}</text>"#,
                x + 24.0,
                s.stroke,
                x + 30.0,
                y + 4.0,
                escape(s.label)
            );
        }
        let _ = writeln!(out, "</g>");
    }
}
