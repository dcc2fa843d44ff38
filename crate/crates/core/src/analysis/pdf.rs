//! Histogram density estimates.
//!
//! Durations use log-spaced bins; sub-population curves are scaled by their
//! population fraction so that they stack to the combined density. Volatility
//! and share PDFs use Freedman-Diaconis linear bins with every group
//! normalized on its own.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

pub const DEFAULT_LOG_BINS: usize = 20;
const MAX_LINEAR_BINS: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramGroup {
    pub label: String,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub groups: Vec<HistogramGroup>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn group(&self, label: &str) -> Option<&HistogramGroup> {
        self.groups.iter().find(|g| g.label == label)
    }

    /// Integral of a group's density over the value axis.
    pub fn area(&self, label: &str) -> Option<f64> {
        let g = self.group(label)?;
        Some(
            g.density
                .iter()
                .zip(self.edges.windows(2))
                .map(|(d, e)| d * (e[1] - e[0]))
                .sum(),
        )
    }

    fn bin_of(&self, value: f64, log: bool) -> usize {
        let lo = self.edges[0];
        let hi = self.edges[self.bins()];
        let pos = if log {
            (value / lo).ln() / (hi / lo).ln()
        } else {
            (value - lo) / (hi - lo)
        };
        ((pos * self.bins() as f64).floor().max(0.0) as usize).min(self.bins() - 1)
    }

    /// CSV rows `bin_left,bin_right,density,group`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["bin_left", "bin_right", "density", "group"])?;
        for group in &self.groups {
            for (edge, density) in self.edges.windows(2).zip(&group.density) {
                writer.write_record([
                    edge[0].to_string(),
                    edge[1].to_string(),
                    density.to_string(),
                    group.label.clone(),
                ])?;
            }
        }
        writer.flush()
    }
}

fn check_values(groups: &[(&str, &[f64])]) -> Result<Vec<f64>, AnalysisError> {
    let pooled: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    if pooled.is_empty() {
        return Err(AnalysisError::InvalidParameter("histogram needs at least one value".into()));
    }
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidParameter("histogram values must be finite".into()));
    }
    Ok(pooled)
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

/// Log-binned density of positive durations. Emits every input group plus an
/// `all` group; group densities are relative to the pooled count.
pub fn duration_pdf(groups: &[(&str, &[f64])], bins: usize) -> Result<Histogram, AnalysisError> {
    let pooled = check_values(groups)?;
    if pooled.iter().any(|v| *v <= 0.0) {
        return Err(AnalysisError::InvalidParameter("durations must be positive".into()));
    }
    let (lo, hi) = min_max(&pooled);
    let edges = if lo == hi {
        vec![lo * 10f64.powf(-0.05), lo * 10f64.powf(0.05)]
    } else {
        let bins = bins.max(1);
        let ratio = hi / lo;
        let mut e: Vec<f64> = (0..=bins).map(|i| lo * ratio.powf(i as f64 / bins as f64)).collect();
        e[bins] = hi;
        e
    };
    let mut hist = Histogram {
        edges,
        groups: Vec::new(),
    };
    let total = pooled.len() as f64;
    let mut all = vec![0usize; hist.bins()];
    for (label, values) in groups {
        let mut counts = vec![0usize; hist.bins()];
        for v in values.iter() {
            let b = hist.bin_of(*v, true);
            counts[b] += 1;
            all[b] += 1;
        }
        let density = densities(&counts, &hist.edges, total);
        hist.groups.push(HistogramGroup {
            label: label.to_string(),
            counts,
            density,
        });
    }
    let density = densities(&all, &hist.edges, total);
    hist.groups.push(HistogramGroup {
        label: "all".into(),
        counts: all,
        density,
    });
    Ok(hist)
}

fn densities(counts: &[usize], edges: &[f64], total: f64) -> Vec<f64> {
    counts
        .iter()
        .zip(edges.windows(2))
        .map(|(c, e)| *c as f64 / (total * (e[1] - e[0])))
        .collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

/// Shared Freedman-Diaconis bins over the pooled values; each group's density
/// integrates to one.
pub fn linear_pdf(groups: &[(&str, &[f64])]) -> Result<Histogram, AnalysisError> {
    let mut pooled = check_values(groups)?;
    pooled.sort_by(f64::total_cmp);
    let (lo, hi) = (pooled[0], pooled[pooled.len() - 1]);
    let edges = if lo == hi {
        let half = (lo.abs() * 0.05).max(1e-12);
        vec![lo - half, hi + half]
    } else {
        let iqr = quantile(&pooled, 0.75) - quantile(&pooled, 0.25);
        let width = 2.0 * iqr / (pooled.len() as f64).cbrt();
        let bins = if width > 0.0 {
            (((hi - lo) / width).ceil() as usize).clamp(1, MAX_LINEAR_BINS)
        } else {
            1
        };
        let mut e: Vec<f64> = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        e[bins] = hi;
        e
    };
    let mut hist = Histogram {
        edges,
        groups: Vec::new(),
    };
    for (label, values) in groups {
        let mut counts = vec![0usize; hist.bins()];
        for v in values.iter() {
            counts[hist.bin_of(*v, false)] += 1;
        }
        let density = if values.is_empty() {
            vec![0.0; hist.bins()]
        } else {
            densities(&counts, &hist.edges, values.len() as f64)
        };
        hist.groups.push(HistogramGroup {
            label: label.to_string(),
            counts,
            density,
        });
    }
    Ok(hist)
}
