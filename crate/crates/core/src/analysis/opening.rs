use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::series::DailyAverageSpread;
use crate::smooth::{Normalization, SmoothedSeries};

pub const DEFAULT_OPENING_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpeningStatus {
    Ok,
    /// No window ever exceeds the threshold; the duration is zero.
    NeverAbove,
    /// Every window exceeds the threshold.
    AlwaysAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpeningResult {
    /// End of the opening period, milliseconds since midnight.
    pub t1_ms: f64,
    pub duration_ms: f64,
    pub status: OpeningStatus,
    /// Spread level the moving average was compared against.
    pub threshold: f64,
}

impl OpeningResult {
    pub fn duration_minutes(&self) -> f64 {
        self.duration_ms / 60_000.0
    }
}

/// Finds the last window whose mean exceeds `factor` times the daily
/// average spread. `smoothed` must hold raw (not normalized) means ordered by
/// elapsed time.
pub fn detect_opening(
    smoothed: &SmoothedSeries,
    daily: &DailyAverageSpread,
    t0_ms: i64,
    factor: f64,
) -> Result<OpeningResult, AnalysisError> {
    if smoothed.normalization != Normalization::Raw {
        return Err(AnalysisError::InvalidParameter(
            "opening detection needs raw window means".into(),
        ));
    }
    if smoothed.points.is_empty() {
        return Err(AnalysisError::DegenerateDay("empty smoothed series".into()));
    }
    let threshold = factor * daily.mean_spread;
    let last_above = smoothed.points.iter().rposition(|p| p.mean > threshold);
    let all_above = smoothed.points.iter().all(|p| p.mean > threshold);

    let (duration_ms, status) = match last_above {
        None => (0.0, OpeningStatus::NeverAbove),
        Some(i) => {
            let status = if all_above {
                OpeningStatus::AlwaysAbove
            } else {
                OpeningStatus::Ok
            };
            (smoothed.points[i].elapsed_ms, status)
        }
    };
    Ok(OpeningResult {
        t1_ms: t0_ms as f64 + duration_ms,
        duration_ms,
        status,
        threshold,
    })
}
