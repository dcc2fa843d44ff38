//! Per stock-day analysis: opening duration, tick regime, power-law decay of
//! the normalized spread, and opening-versus-rest-of-day statistics.

pub mod aggregate;
pub mod opening;
pub mod pdf;
pub mod powerlaw;
pub mod stats;
pub mod tick;

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::book::{replay_day, MidpointPath, ReplayMode};
use crate::error::AnalysisError;
use crate::ingest::{MarketEvent, TradingDayBounds, DEFAULT_TICK_SIZE};
use crate::series::{extract_spread_changes, mean_spread, DailyAverageSpread, MeanMethod, SpreadSeries};
use crate::smooth::{smooth_series, SmoothedSeries, SmoothingOptions, WindowScheme};

pub use aggregate::{aggregate, StockSummary};
pub use opening::{detect_opening, OpeningResult, OpeningStatus, DEFAULT_OPENING_FACTOR};
pub use pdf::{duration_pdf, linear_pdf, Histogram, HistogramGroup, DEFAULT_LOG_BINS};
pub use powerlaw::{fit_log_log, fit_power_law, terminal_ratio, PowerLawFit, DEFAULT_FIT_MIN_ELAPSED_MS};
pub use stats::{
    comparison_intervals, in_spread_share, volatility, InSpreadShare, Interval, IntervalTag,
    VolatilityReport,
};
pub use tick::{classify_tick, detect_degenerate_start, TickClass, TickCriterion, TickRegime, TickTolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub bounds: TradingDayBounds,
    pub tick_size: i64,
    pub mean_method: MeanMethod,
    pub smoothing: SmoothingOptions,
    pub opening_factor: f64,
    pub tolerances: TickTolerances,
    pub tick_criterion: TickCriterion,
    pub fit_min_elapsed_ms: f64,
    pub replay_mode: ReplayMode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bounds: TradingDayBounds::default(),
            tick_size: DEFAULT_TICK_SIZE,
            mean_method: MeanMethod::default(),
            smoothing: SmoothingOptions::default(),
            opening_factor: DEFAULT_OPENING_FACTOR,
            tolerances: TickTolerances::default(),
            tick_criterion: TickCriterion::default(),
            fit_min_elapsed_ms: DEFAULT_FIT_MIN_ELAPSED_MS,
            replay_mode: ReplayMode::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let positive = [
            ("tick size", self.tick_size as f64),
            ("opening factor", self.opening_factor),
            ("saturation tolerance", self.tolerances.saturation_ticks),
            ("degenerate tolerance", self.tolerances.degenerate_ticks),
            ("mean-spread threshold", self.tolerances.mean_threshold_ticks),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(AnalysisError::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.fit_min_elapsed_ms.is_nan() || self.fit_min_elapsed_ms < 0.0 {
            return Err(AnalysisError::InvalidParameter("fit start must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QualityFlags {
    pub integrity_issues: usize,
    pub crossed_events: u64,
    pub one_sided_at_open: bool,
    pub one_sided_states: u64,
    pub non_positive_states: u64,
    pub skipped_windows: usize,
}

impl QualityFlags {
    pub fn is_clean(&self) -> bool {
        *self == QualityFlags::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockDayReport {
    pub ticker: String,
    pub day: String,
    pub tick_size: i64,
    pub observations: usize,
    pub mean_spread: DailyAverageSpread,
    pub opening: OpeningResult,
    pub tick: TickClass,
    pub degenerate_start: bool,
    pub fit: Option<PowerLawFit>,
    pub terminal_ratio: Option<f64>,
    pub intervals: Vec<Interval>,
    pub volatility: Vec<VolatilityReport>,
    pub in_spread: Vec<InSpreadShare>,
    pub quality: QualityFlags,
    pub config: AnalysisConfig,
}

const REPORT_COLUMNS: [&str; 20] = [
    "ticker",
    "day",
    "mean_spread_units",
    "mean_method",
    "observations",
    "t1_ms",
    "duration_ms",
    "status",
    "class",
    "degenerate_start",
    "alpha",
    "prefactor",
    "fit_rms",
    "terminal_ratio",
    "sigma_opening",
    "sigma_noon",
    "sigma_two_pm",
    "in_spread_opening",
    "in_spread_noon",
    "in_spread_two_pm",
];

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn label<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

impl StockDayReport {
    pub fn sigma(&self, tag: IntervalTag) -> Option<f64> {
        self.volatility.iter().find(|v| v.tag == tag).map(|v| v.sigma)
    }

    pub fn share(&self, tag: IntervalTag) -> Option<f64> {
        self.in_spread.iter().find(|v| v.tag == tag).map(|v| v.share)
    }

    /// Flat CSV with one row per report.
    pub fn write_csv<W: Write>(reports: &[StockDayReport], out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(REPORT_COLUMNS)?;
        for r in reports {
            let mut row = vec![
                r.ticker.clone(),
                r.day.clone(),
                r.mean_spread.mean_spread.to_string(),
                label(&r.mean_spread.method),
                r.observations.to_string(),
                r.opening.t1_ms.to_string(),
                r.opening.duration_ms.to_string(),
                label(&r.opening.status),
                label(&r.tick.class),
                r.degenerate_start.to_string(),
                opt(r.fit.map(|f| f.alpha)),
                opt(r.fit.map(|f| f.prefactor)),
                opt(r.fit.map(|f| f.rms_residual)),
                opt(r.terminal_ratio),
            ];
            row.extend(IntervalTag::ALL.iter().map(|t| opt(r.sigma(*t))));
            row.extend(IntervalTag::ALL.iter().map(|t| opt(r.share(*t))));
            writer.write_record(&row)?;
        }
        writer.flush()
    }
}

/// A report together with the series behind it, for plot exports.
#[derive(Debug, Clone)]
pub struct DayAnalysis {
    pub report: StockDayReport,
    pub series: SpreadSeries,
    pub doubling: SmoothedSeries,
    pub overlap: SmoothedSeries,
}

/// Runs the whole pipeline on one stock-day event stream.
pub fn analyze_day(
    ticker: &str,
    day: &str,
    events: &[MarketEvent],
    config: &AnalysisConfig,
) -> Result<DayAnalysis, AnalysisError> {
    config.validate()?;
    let bounds = config.bounds;
    let replay = replay_day(events, bounds, config.replay_mode)
        .map_err(|issue| AnalysisError::InvalidSeries(format!("event {}: {}", issue.seq, issue.error)))?;
    let series = extract_spread_changes(&replay.quotes, bounds)?;
    let daily = mean_spread(&series, config.mean_method)?;

    let overlap = smooth_series(&series, WindowScheme::Overlap11, config.smoothing)?;
    let opening = detect_opening(&overlap, &daily, bounds.t0_ms, config.opening_factor)?;

    let doubling = smooth_series(&series, WindowScheme::GeometricDoubling, config.smoothing)?;
    let tick = classify_tick(
        &doubling,
        config.tick_size,
        &daily,
        config.tick_criterion,
        &config.tolerances,
    );
    let degenerate_start =
        detect_degenerate_start(&doubling, config.tick_size, config.tolerances.degenerate_ticks);

    let normalized = doubling.normalized(daily.mean_spread);
    let fit = fit_power_law(&normalized, opening.duration_ms, config.fit_min_elapsed_ms).ok();
    let terminal = terminal_ratio(&normalized, bounds.day_length_ms() as f64).ok();

    let intervals: Vec<Interval> = comparison_intervals(opening.duration_ms, bounds)
        .map(Vec::from)
        .unwrap_or_default();
    let midpoints = MidpointPath::from_quotes(&replay.quotes);
    let volatility = intervals
        .iter()
        .filter_map(|iv| volatility(&midpoints, iv).ok())
        .collect();
    let in_spread = intervals
        .iter()
        .filter_map(|iv| in_spread_share(&replay.submissions, iv).ok())
        .collect();

    let quality = QualityFlags {
        integrity_issues: replay.issues.len(),
        crossed_events: replay.crossed_events,
        one_sided_at_open: series.quality.one_sided_at_open,
        one_sided_states: series.quality.one_sided_states,
        non_positive_states: series.quality.non_positive_states,
        skipped_windows: overlap.skipped.len() + doubling.skipped.len(),
    };
    let report = StockDayReport {
        ticker: ticker.to_string(),
        day: day.to_string(),
        tick_size: config.tick_size,
        observations: series.len(),
        mean_spread: daily,
        opening,
        tick,
        degenerate_start,
        fit,
        terminal_ratio: terminal,
        intervals,
        volatility,
        in_spread,
        quality,
        config: *config,
    };
    Ok(DayAnalysis {
        report,
        series,
        doubling,
        overlap,
    })
}

/// Splits a file stem of the form `TICKER_DAY[_anything]` into ticker and day.
/// A stem without an underscore is all ticker with an empty day.
pub fn stock_day_from_path(path: &Path) -> (String, String) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut parts = stem.splitn(3, '_');
    let ticker = parts.next().unwrap_or_default().to_string();
    let day = parts.next().unwrap_or_default().to_string();
    (ticker, day)
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::series::MeanMethod;

    /// Minimal report with a given opening duration and mean spread.
    pub fn report(ticker: &str, day: &str, duration_ms: f64, mean_units: f64) -> StockDayReport {
        let tick_class = if mean_units < 115.0 {
            TickRegime::LargeTick
        } else {
            TickRegime::SmallTick
        };
        StockDayReport {
            ticker: ticker.into(),
            day: day.into(),
            tick_size: 100,
            observations: 1000,
            mean_spread: DailyAverageSpread {
                mean_spread: mean_units,
                method: MeanMethod::TimeWeighted,
            },
            opening: OpeningResult {
                t1_ms: 34_200_000.0 + duration_ms,
                duration_ms,
                status: OpeningStatus::Ok,
                threshold: 1.5 * mean_units,
            },
            tick: TickClass {
                class: tick_class,
                criterion: TickCriterion::TerminalSaturation,
            },
            degenerate_start: false,
            fit: None,
            terminal_ratio: None,
            intervals: vec![],
            volatility: vec![],
            in_spread: vec![],
            quality: QualityFlags::default(),
            config: AnalysisConfig::default(),
        }
    }
}
