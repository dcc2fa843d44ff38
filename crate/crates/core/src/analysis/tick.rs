use serde::{Deserialize, Serialize};

use crate::series::DailyAverageSpread;
use crate::smooth::{Normalization, SmoothedPoint, SmoothedSeries};

pub const DEFAULT_SATURATION_TICKS: f64 = 1.05;
pub const DEFAULT_DEGENERATE_TICKS: f64 = 1.1;
/// 0.0115 $ at a one-cent tick.
pub const DEFAULT_MEAN_THRESHOLD_TICKS: f64 = 1.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TickRegime {
    LargeTick,
    SmallTick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TickCriterion {
    /// The last two complete doubling windows sit at the tick floor.
    #[default]
    TerminalSaturation,
    /// The daily average spread is below a fixed number of ticks.
    MeanSpreadThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickClass {
    pub class: TickRegime,
    pub criterion: TickCriterion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickTolerances {
    pub saturation_ticks: f64,
    pub mean_threshold_ticks: f64,
    pub degenerate_ticks: f64,
}

impl Default for TickTolerances {
    fn default() -> Self {
        Self {
            saturation_ticks: DEFAULT_SATURATION_TICKS,
            mean_threshold_ticks: DEFAULT_MEAN_THRESHOLD_TICKS,
            degenerate_ticks: DEFAULT_DEGENERATE_TICKS,
        }
    }
}

fn raw_mean(smoothed: &SmoothedSeries, point: &SmoothedPoint) -> f64 {
    match smoothed.normalization {
        Normalization::Raw => point.mean,
        Normalization::ByMean(m) => point.mean * m,
    }
}

/// `smoothed` is expected to come from the doubling scheme.
pub fn classify_tick(
    smoothed: &SmoothedSeries,
    tick_size: i64,
    daily: &DailyAverageSpread,
    criterion: TickCriterion,
    tolerances: &TickTolerances,
) -> TickClass {
    let tick = tick_size as f64;
    let large = match criterion {
        TickCriterion::TerminalSaturation => {
            let complete: Vec<_> = smoothed.complete_points().collect();
            let tail: Vec<_> = if complete.is_empty() {
                smoothed.points.iter().rev().take(2).collect()
            } else {
                complete.into_iter().rev().take(2).collect()
            };
            !tail.is_empty()
                && tail
                    .iter()
                    .all(|p| raw_mean(smoothed, p) <= tolerances.saturation_ticks * tick)
        }
        TickCriterion::MeanSpreadThreshold => {
            daily.mean_spread < tolerances.mean_threshold_ticks * tick
        }
    };
    TickClass {
        class: if large {
            TickRegime::LargeTick
        } else {
            TickRegime::SmallTick
        },
        criterion,
    }
}

/// True when the very first window already sits at the tick floor. Such
/// stock-days carry no opening period and are left out of duration statistics.
pub fn detect_degenerate_start(smoothed: &SmoothedSeries, tick_size: i64, tolerance_ticks: f64) -> bool {
    smoothed
        .points
        .first()
        .is_some_and(|p| raw_mean(smoothed, p) <= tolerance_ticks * tick_size as f64)
}
