use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::smooth::SmoothedSeries;

/// Ten minutes: windows earlier than this are never used for the fit.
pub const DEFAULT_FIT_MIN_ELAPSED_MS: f64 = 600_000.0;
pub const MIN_FIT_WINDOWS: usize = 3;

/// `mean ~ prefactor * elapsed^(-alpha)` fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub prefactor: f64,
    /// Elapsed-time span of the fitted windows, ms.
    pub range_ms: (f64, f64),
    /// Root mean square of the log residuals.
    pub rms_residual: f64,
    pub windows: usize,
}

/// Ordinary least squares of `ln y` on `ln x`. Needs two distinct abscissae.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<PowerLawFit, AnalysisError> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(AnalysisError::InvalidParameter(
            "log-log fit needs positive coordinates".into(),
        ));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if points.len() < 2 || sxx <= 0.0 {
        return Err(AnalysisError::Unavailable("power-law fit"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    Ok(PowerLawFit {
        alpha: -slope,
        prefactor: intercept.exp(),
        range_ms: (lo, hi),
        rms_residual: (ssr / n).sqrt(),
        windows: points.len(),
    })
}

/// Fits complete windows lying after both the opening period and
/// `min_elapsed_ms`.
pub fn fit_power_law(
    normalized: &SmoothedSeries,
    opening_ms: f64,
    min_elapsed_ms: f64,
) -> Result<PowerLawFit, AnalysisError> {
    let cutoff = opening_ms.max(min_elapsed_ms);
    let points: Vec<(f64, f64)> = normalized
        .complete_points()
        .filter(|p| p.elapsed_ms > cutoff && p.mean > 0.0)
        .map(|p| (p.elapsed_ms, p.mean))
        .collect();
    if points.len() < MIN_FIT_WINDOWS {
        return Err(AnalysisError::Unavailable("power-law fit"));
    }
    fit_log_log(&points)
}

/// Extrapolates the normalized moving average to the end of the day along the
/// log-log line through the last two complete windows.
pub fn terminal_ratio(normalized: &SmoothedSeries, day_length_ms: f64) -> Result<f64, AnalysisError> {
    let complete: Vec<_> = normalized.complete_points().collect();
    let [.., a, b] = complete.as_slice() else {
        return Err(AnalysisError::Unavailable("terminal ratio"));
    };
    let span = (b.elapsed_ms / a.elapsed_ms).ln();
    if span.is_nan() || span <= 0.0 || a.mean <= 0.0 || b.mean <= 0.0 {
        return Err(AnalysisError::Unavailable("terminal ratio"));
    }
    let slope = (b.mean / a.mean).ln() / span;
    Ok(b.mean * (day_length_ms / b.elapsed_ms).powf(slope))
}
