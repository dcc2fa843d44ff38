//! Opening-versus-rest-of-day statistics: one-minute midpoint volatility and
//! the share of submissions placed strictly inside the quotes.

use serde::{Deserialize, Serialize};

use crate::book::{MidpointPath, SubmissionRecord};
use crate::error::AnalysisError;
use crate::ingest::TradingDayBounds;

pub const NOON_MS: i64 = 43_200_000;
pub const TWO_PM_MS: i64 = 50_400_000;
pub const RETURN_STEP_MS: i64 = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalTag {
    Opening,
    Noon,
    TwoPm,
}

impl IntervalTag {
    pub const ALL: [IntervalTag; 3] = [IntervalTag::Opening, IntervalTag::Noon, IntervalTag::TwoPm];

    pub fn label(self) -> &'static str {
        match self {
            IntervalTag::Opening => "opening",
            IntervalTag::Noon => "noon",
            IntervalTag::TwoPm => "two_pm",
        }
    }
}

/// Closed interval `[start_ms, end_ms]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub tag: IntervalTag,
    pub start_ms: i64,
    pub end_ms: i64,
    /// Cut short at the close.
    pub clamped: bool,
}

impl Interval {
    pub fn contains(&self, time_ms: i64) -> bool {
        self.start_ms <= time_ms && time_ms <= self.end_ms
    }

    pub fn length_ms(&self) -> i64 {
        self.end_ms - self.start_ms
    }
}

/// Opening period, and equally long intervals starting at noon and 2 pm.
pub fn comparison_intervals(
    duration_ms: f64,
    bounds: TradingDayBounds,
) -> Result<[Interval; 3], AnalysisError> {
    let length = duration_ms.round() as i64;
    if length <= 0 {
        return Err(AnalysisError::Unavailable("comparison intervals"));
    }
    let make = |tag, start: i64| {
        let end = start + length;
        Interval {
            tag,
            start_ms: start,
            end_ms: end.min(bounds.te_ms),
            clamped: end > bounds.te_ms,
        }
    };
    Ok([
        make(IntervalTag::Opening, bounds.t0_ms),
        make(IntervalTag::Noon, NOON_MS),
        make(IntervalTag::TwoPm, TWO_PM_MS),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityReport {
    pub tag: IntervalTag,
    /// Population standard deviation of one-minute relative midpoint returns.
    pub sigma: f64,
    pub returns: usize,
    /// Grid steps dropped because the midpoint was undefined.
    pub skipped: usize,
}

/// Samples the midpoint on a one-minute grid anchored at the interval start
/// and returns the standard deviation of non-overlapping relative returns.
pub fn volatility(path: &MidpointPath, interval: &Interval) -> Result<VolatilityReport, AnalysisError> {
    if interval.length_ms() < 2 * RETURN_STEP_MS {
        return Err(AnalysisError::Unavailable("volatility"));
    }
    let steps = interval.length_ms() / RETURN_STEP_MS;
    let grid: Vec<Option<f64>> = (0..=steps)
        .map(|i| path.at(interval.start_ms + i * RETURN_STEP_MS))
        .collect();
    let mut returns = Vec::with_capacity(steps as usize);
    let mut skipped = 0;
    for pair in grid.windows(2) {
        match (pair[0], pair[1]) {
            (Some(m0), Some(m1)) if m0 > 0.0 => returns.push((m1 - m0) / m0),
            _ => skipped += 1,
        }
    }
    if returns.len() < 2 {
        return Err(AnalysisError::Unavailable("volatility"));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let variance = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Ok(VolatilityReport {
        tag: interval.tag,
        sigma: variance.sqrt(),
        returns: returns.len(),
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InSpreadShare {
    pub tag: IntervalTag,
    pub share: f64,
    pub submissions: usize,
}

/// Fraction of submissions inside the interval that were priced strictly
/// between the quotes in force just before them.
pub fn in_spread_share(
    submissions: &[SubmissionRecord],
    interval: &Interval,
) -> Result<InSpreadShare, AnalysisError> {
    let start = submissions.partition_point(|s| s.time_ms < interval.start_ms);
    let end = submissions.partition_point(|s| s.time_ms <= interval.end_ms);
    let window = &submissions[start..end.max(start)];
    if window.is_empty() {
        return Err(AnalysisError::Unavailable("in-spread share"));
    }
    let inside = window.iter().filter(|s| s.in_spread).count();
    Ok(InSpreadShare {
        tag: interval.tag,
        share: inside as f64 / window.len() as f64,
        submissions: window.len(),
    })
}
