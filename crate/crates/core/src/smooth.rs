//! Moving averages over blocks of spread changes.
//!
//! Windows are defined on observation indices, so they adapt to each stock's
//! activity: a busy stock fills a window in seconds, a quiet one in minutes.
//! Two layouts are supported:
//!
//! * [`WindowScheme::GeometricDoubling`]: `[1,64]`, `[65,128]`, then each
//!   window twice as long as its predecessor, contiguous.
//! * [`WindowScheme::Overlap11`]: the first two windows as above, then window
//!   `k >= 3` is `[round(64 * 1.1^(k-2)), round(128 * 1.1^(k-2))]`. Once the
//!   end would pass the last observation it is pinned there and the start
//!   keeps growing for as long as the window covers a quarter of the series.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::series::SpreadSeries;

pub const BASE_WINDOW: usize = 64;
pub const OVERLAP_FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowScheme {
    GeometricDoubling,
    Overlap11,
}

/// Observation index range, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
    /// Shorter than the nominal span because it hit the end of the series.
    pub partial: bool,
}

impl Window {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowLayout {
    pub scheme: WindowScheme,
    pub observations: usize,
    pub windows: Vec<Window>,
}

fn scaled_bound(base: usize, step: i32) -> usize {
    // round() is half-away-from-zero
    (base as f64 * OVERLAP_FACTOR.powi(step)).round() as usize
}

pub fn layout_windows(n: usize, scheme: WindowScheme) -> Result<WindowLayout, AnalysisError> {
    if n < BASE_WINDOW {
        return Err(AnalysisError::InsufficientData {
            needed: BASE_WINDOW,
            have: n,
        });
    }
    let windows = match scheme {
        WindowScheme::GeometricDoubling => doubling_layout(n),
        WindowScheme::Overlap11 => overlap_layout(n),
    };
    Ok(WindowLayout {
        scheme,
        observations: n,
        windows,
    })
}

fn doubling_layout(n: usize) -> Vec<Window> {
    let mut windows = Vec::new();
    let mut start = 1;
    let mut span = BASE_WINDOW;
    while start <= n {
        let nominal_end = start + span - 1;
        let end = nominal_end.min(n);
        let window = Window {
            start,
            end,
            partial: end < nominal_end,
        };
        if window.partial && window.len() < 2 {
            break;
        }
        windows.push(window);
        start = end + 1;
        if windows.len() >= 2 {
            span *= 2;
        }
    }
    windows
}

fn overlap_layout(n: usize) -> Vec<Window> {
    let quarter = n as f64 / 4.0;
    let mut windows = vec![Window {
        start: 1,
        end: BASE_WINDOW,
        partial: false,
    }];
    let mut k = 2;
    loop {
        let (start, nominal_end) = if k == 2 {
            (BASE_WINDOW + 1, 2 * BASE_WINDOW)
        } else {
            (
                scaled_bound(BASE_WINDOW, k - 2),
                scaled_bound(2 * BASE_WINDOW, k - 2),
            )
        };
        if start > n {
            break;
        }
        let window = Window {
            start,
            end: nominal_end.min(n),
            partial: nominal_end > n,
        };
        if window.partial && (window.len() as f64) < quarter {
            break;
        }
        windows.push(window);
        k += 1;
    }
    windows
}

/// Elapsed-time coordinate attached to each window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRep {
    /// Geometric mean of the first and last observation's elapsed time.
    #[default]
    GeometricMean,
    /// Elapsed time of the last observation.
    LastObservation,
}

/// How observations inside a window are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowWeighting {
    /// Each observation weighted by how long it stayed in force.
    #[default]
    TimeWeighted,
    /// Plain arithmetic mean over observations.
    PerObservation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SmoothingOptions {
    pub time_rep: TimeRep,
    pub weighting: WindowWeighting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedPoint {
    pub window: Window,
    /// Milliseconds since the open.
    pub elapsed_ms: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "mean")]
pub enum Normalization {
    #[default]
    Raw,
    /// Divided by the daily average spread.
    ByMean(f64),
}

/// Window means with their time coordinates. `elapsed_ms` is strictly
/// increasing under [`TimeRep::GeometricMean`]; under
/// [`TimeRep::LastObservation`] windows pinned to the last observation share
/// one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSeries {
    pub scheme: WindowScheme,
    pub options: SmoothingOptions,
    pub normalization: Normalization,
    pub points: Vec<SmoothedPoint>,
    /// Windows dropped because they held no positive spread.
    pub skipped: Vec<Window>,
}

/// Elapsed times are floored at one millisecond so they stay usable on a log axis.
fn elapsed(time_ms: i64, t0_ms: i64) -> f64 {
    (time_ms - t0_ms).max(1) as f64
}

pub fn smooth(
    series: &SpreadSeries,
    layout: &WindowLayout,
    options: SmoothingOptions,
) -> Result<SmoothedSeries, AnalysisError> {
    if layout.observations != series.len() {
        return Err(AnalysisError::LayoutMismatch(series.len()));
    }
    let holds: Vec<i64> = series.hold_durations().collect();
    let obs = &series.observations;
    let mut points = Vec::with_capacity(layout.windows.len());
    let mut skipped = Vec::new();

    for window in &layout.windows {
        let range = window.start - 1..window.end;
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut area = 0.0;
        let mut duration = 0i64;
        for i in range.clone() {
            let s = obs[i].spread;
            if s > 0.0 {
                sum += s;
                count += 1;
                area += s * holds[i] as f64;
                duration += holds[i];
            }
        }
        if count == 0 {
            log::warn!(
                "window [{}, {}] has no positive spread; skipped",
                window.start,
                window.end
            );
            skipped.push(*window);
            continue;
        }
        let mean = match options.weighting {
            WindowWeighting::TimeWeighted if duration > 0 => area / duration as f64,
            _ => sum / count as f64,
        };
        let first = elapsed(obs[range.start].time_ms, series.t0_ms);
        let last = elapsed(obs[range.end - 1].time_ms, series.t0_ms);
        let elapsed_ms = match options.time_rep {
            TimeRep::GeometricMean => (first * last).sqrt(),
            TimeRep::LastObservation => last,
        };
        points.push(SmoothedPoint {
            window: *window,
            elapsed_ms,
            mean,
        });
    }

    Ok(SmoothedSeries {
        scheme: layout.scheme,
        options,
        normalization: Normalization::Raw,
        points,
        skipped,
    })
}

/// Lays out windows for the series and smooths it in one step.
pub fn smooth_series(
    series: &SpreadSeries,
    scheme: WindowScheme,
    options: SmoothingOptions,
) -> Result<SmoothedSeries, AnalysisError> {
    let layout = layout_windows(series.len(), scheme)?;
    smooth(series, &layout, options)
}

impl SmoothedSeries {
    /// Divides every mean by the daily average spread.
    pub fn normalized(&self, daily_mean: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.mean /= daily_mean;
        }
        out.normalization = Normalization::ByMean(daily_mean);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn complete_points(&self) -> impl Iterator<Item = &SmoothedPoint> {
        self.points.iter().filter(|p| !p.window.partial)
    }

    /// CSV with columns `elapsed_ms,mean_units[,normalized],partial`.
    /// The normalized column is written when `daily_mean` is given.
    pub fn write_csv<W: Write>(&self, out: W, daily_mean: Option<f64>) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        match daily_mean {
            Some(_) => writer.write_record(["elapsed_ms", "mean_units", "normalized", "partial"])?,
            None => writer.write_record(["elapsed_ms", "mean_units", "partial"])?,
        }
        for p in &self.points {
            let mut row = vec![p.elapsed_ms.to_string(), p.mean.to_string()];
            if let Some(m) = daily_mean {
                row.push((p.mean / m).to_string());
            }
            row.push(u8::from(p.window.partial).to_string());
            writer.write_record(&row)?;
        }
        writer.flush()
    }
}
