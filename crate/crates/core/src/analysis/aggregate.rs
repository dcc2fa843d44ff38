use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::opening::OpeningStatus;
use super::tick::TickRegime;
use super::StockDayReport;

/// Per-ticker summary over all analysed days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockSummary {
    pub ticker: String,
    pub days: usize,
    /// Days with a regular opening period that enter the duration mean.
    pub valid_days: usize,
    /// Non-degenerate days on which the moving average never crossed the
    /// threshold.
    pub zero_duration_days: usize,
    pub mean_duration_ms: Option<f64>,
    /// Largest over smallest daily duration; absent when any day has a zero
    /// duration.
    pub quotient: Option<f64>,
    /// Majority of the daily saturation classes; ties go to small-tick.
    pub class: TickRegime,
    /// Average of the daily mean spreads in ticks.
    pub mean_spread_ticks: f64,
    /// Mean spread below the large-tick threshold.
    pub small_spread: bool,
}

impl StockSummary {
    pub fn mean_duration_minutes(&self) -> Option<f64> {
        self.mean_duration_ms.map(|t| t / 60_000.0)
    }
}

/// Groups reports by ticker. Days with a degenerate start are dropped, and a
/// ticker with no other day is left out entirely. Output is sorted by ticker.
pub fn aggregate(reports: &[StockDayReport], mean_threshold_ticks: f64) -> Vec<StockSummary> {
    let mut by_ticker: BTreeMap<&str, Vec<&StockDayReport>> = BTreeMap::new();
    for report in reports.iter().filter(|r| !r.degenerate_start) {
        by_ticker.entry(&report.ticker).or_default().push(report);
    }
    by_ticker
        .into_iter()
        .map(|(ticker, days)| summarize(ticker, &days, mean_threshold_ticks))
        .collect()
}

fn summarize(ticker: &str, days: &[&StockDayReport], mean_threshold_ticks: f64) -> StockSummary {
    let durations: Vec<f64> = days
        .iter()
        .filter(|r| r.opening.status == OpeningStatus::Ok)
        .map(|r| r.opening.duration_ms)
        .collect();
    let zero_duration_days = days
        .iter()
        .filter(|r| r.opening.status == OpeningStatus::NeverAbove)
        .count();
    let mean_duration_ms =
        (!durations.is_empty()).then(|| durations.iter().sum::<f64>() / durations.len() as f64);
    let quotient = if zero_duration_days > 0 || durations.is_empty() {
        None
    } else {
        let max = durations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = durations.iter().copied().fold(f64::INFINITY, f64::min);
        (min > 0.0).then(|| max / min)
    };
    let large = days
        .iter()
        .filter(|r| r.tick.class == TickRegime::LargeTick)
        .count();
    let mean_spread_ticks = days
        .iter()
        .map(|r| r.mean_spread.mean_spread / r.tick_size as f64)
        .sum::<f64>()
        / days.len() as f64;
    StockSummary {
        ticker: ticker.to_string(),
        days: days.len(),
        valid_days: durations.len(),
        zero_duration_days,
        mean_duration_ms,
        quotient,
        class: if 2 * large > days.len() {
            TickRegime::LargeTick
        } else {
            TickRegime::SmallTick
        },
        mean_spread_ticks,
        small_spread: mean_spread_ticks < mean_threshold_ticks,
    }
}
